//! Shared inference types: prior specifications, posterior sample
//! containers and their summaries.

use rand::Rng;
use rand_distr::{Distribution, Gamma as GammaDist};

use crate::error::{Error, Result};

/// Prior distribution for one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorDist {
    /// Shape/rate parameterization (mean `shape/rate`).
    Gamma {
        shape: f64,
        rate: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
}

impl PriorDist {
    pub fn validate(&self) -> Result<()> {
        match self {
            PriorDist::Gamma { shape, rate } => {
                if !(*shape > 0.0 && *rate > 0.0) {
                    return Err(Error::invalid("gamma prior needs shape, rate > 0"));
                }
            }
            PriorDist::Uniform { lo, hi } => {
                if !(hi > lo) {
                    return Err(Error::invalid("uniform prior needs hi > lo"));
                }
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            PriorDist::Gamma { shape, rate } => GammaDist::new(*shape, 1.0 / rate)
                .expect("valid gamma")
                .sample(rng),
            PriorDist::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        match self {
            PriorDist::Gamma { shape, rate } => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    shape * rate.ln() - statrs::function::gamma::ln_gamma(*shape)
                        + (shape - 1.0) * x.ln()
                        - rate * x
                }
            }
            PriorDist::Uniform { lo, hi } => {
                if x < *lo || x > *hi {
                    f64::NEG_INFINITY
                } else {
                    -(hi - lo).ln()
                }
            }
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            PriorDist::Gamma { .. } => (0.0, f64::INFINITY),
            PriorDist::Uniform { lo, hi } => (*lo, *hi),
        }
    }
}

/// Draws of parameter vectors (and optional latent vectors) with sampler
/// metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSample {
    pub param_names: Vec<String>,
    pub draws: Vec<Vec<f64>>,
    /// Latent infection-time vectors aligned with `draws` (DA-MCMC only).
    pub latent: Option<Vec<Vec<f64>>>,
    /// ABC: acceptance fraction; MCMC: latent-move acceptance fraction
    /// (NaN when no such moves ran).
    pub acceptance_rate: f64,
    /// Proposals rejected outright for producing an inconsistent trajectory.
    pub auto_rejections: u64,
    pub seed: u64,
}

/// Per-coordinate posterior summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub name: String,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
    /// Autocorrelation-based effective sample size, capped at the draw
    /// count; NaN when the chain is degenerate.
    pub ess: f64,
    pub degenerate: bool,
}

/// Equal-tailed interval quantile (linear interpolation between order
/// statistics).
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

/// ESS from the autocorrelation sum truncated at the first negative lag.
fn effective_sample_size(x: &[f64]) -> Option<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    if var <= 0.0 || !var.is_finite() {
        return None;
    }
    let mut rho_sum = 0.0;
    for lag in 1..n / 2 {
        let mut acc = 0.0;
        for t in 0..n - lag {
            acc += (x[t] - mean) * (x[t + lag] - mean);
        }
        let rho = acc / (n as f64 * var);
        if rho < 0.0 {
            break;
        }
        rho_sum += rho;
    }
    Some((n as f64 / (1.0 + 2.0 * rho_sum)).min(n as f64))
}

/// Per-coordinate mean, equal-tailed credible interval and ESS.
pub fn posterior_summary(sample: &PosteriorSample, level: f64) -> Result<Vec<SummaryRow>> {
    if sample.draws.is_empty() {
        return Err(Error::domain("empty posterior sample"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("credible level must be in (0,1)"));
    }
    let p = sample.draws[0].len();
    let alpha = (1.0 - level) / 2.0;
    let mut rows = Vec::with_capacity(p);
    for c in 0..p {
        let xs: Vec<f64> = sample.draws.iter().map(|d| d[c]).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        let ess = effective_sample_size(&xs);
        rows.push(SummaryRow {
            name: sample
                .param_names
                .get(c)
                .cloned()
                .unwrap_or_else(|| format!("param{c}")),
            mean,
            lower: quantile(&sorted, alpha),
            upper: quantile(&sorted, 1.0 - alpha),
            ess: ess.unwrap_or(f64::NAN),
            degenerate: ess.is_none(),
        });
    }
    Ok(rows)
}
