//! Emerging-outbreak analysis: exponential growth rate from incidence,
//! the Euler-Lotka link between the growth rate `r` and R0 through the
//! generation-time distribution, and extraction of forward generation,
//! serial and backward intervals from transmission trees.

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma as GammaDist};
use std::ops::Range;

use crate::epidemic::{EventKind, EventLog};
use crate::error::{Error, Result};
use crate::numeric::{bisect, poisson_loglinear};
use crate::rng::stream_rng;

/// Counts of new cases per reporting period.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceSeries {
    pub counts: Vec<u64>,
    /// Length of one reporting period in model time units.
    pub period: f64,
}

impl IncidenceSeries {
    pub fn new(counts: Vec<u64>, period: f64) -> Result<Self> {
        if !(period > 0.0) {
            return Err(Error::invalid("period length must be > 0"));
        }
        Ok(IncidenceSeries { counts, period })
    }

    /// Bins the infection events of a log into periods `[k p, (k+1) p)`.
    pub fn from_event_log(log: &EventLog, period: f64) -> Result<Self> {
        if !(period > 0.0) {
            return Err(Error::invalid("period length must be > 0"));
        }
        let n_bins = (log.end_time / period).floor() as usize + 1;
        let mut counts = vec![0u64; n_bins];
        for ev in &log.events {
            if ev.kind == EventKind::Infection {
                counts[(ev.time / period).floor() as usize] += 1;
            }
        }
        Ok(IncidenceSeries { counts, period })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthEstimate {
    /// Exponential growth rate per model time unit.
    pub r: f64,
    pub se: f64,
}

/// Regression model for the growth rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GrowthMethod {
    /// Log-linear count regression under a mean-equals-variance model
    /// (default: zero counts are no problem).
    #[default]
    CountRegression,
    /// Ordinary least squares on log counts; zero-count periods are dropped.
    LogLeastSquares,
}

/// Slope of `log(expected cases)` over the window, per model time unit.
pub fn estimate_growth_rate(
    series: &IncidenceSeries,
    window: Range<usize>,
    method: GrowthMethod,
) -> Result<GrowthEstimate> {
    if window.end > series.counts.len() || window.len() < 3 {
        return Err(Error::invalid(
            "window must lie inside the series and span >= 3 periods",
        ));
    }
    let y: Vec<f64> = series.counts[window.clone()]
        .iter()
        .map(|&c| c as f64)
        .collect();
    if y.iter().sum::<f64>() <= 0.0 {
        return Err(Error::domain("window contains no cases"));
    }
    let t: Vec<f64> = (0..y.len()).map(|k| k as f64 * series.period).collect();
    match method {
        GrowthMethod::CountRegression => {
            let fit = poisson_loglinear(&t, &y)?;
            Ok(GrowthEstimate {
                r: fit.coef[1],
                se: fit.cov[1][1].sqrt(),
            })
        }
        GrowthMethod::LogLeastSquares => {
            let pairs: Vec<(f64, f64)> = t
                .iter()
                .zip(&y)
                .filter(|(_, &c)| c > 0.0)
                .map(|(&ti, &c)| (ti, c.ln()))
                .collect();
            if pairs.len() < 3 {
                return Err(Error::domain("fewer than 3 positive counts in window"));
            }
            let n = pairs.len() as f64;
            let xm = pairs.iter().map(|p| p.0).sum::<f64>() / n;
            let ym = pairs.iter().map(|p| p.1).sum::<f64>() / n;
            let sxx: f64 = pairs.iter().map(|p| (p.0 - xm).powi(2)).sum();
            let sxy: f64 = pairs.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
            let slope = sxy / sxx;
            let resid: f64 = pairs
                .iter()
                .map(|p| (p.1 - ym - slope * (p.0 - xm)).powi(2))
                .sum();
            let sigma2 = resid / (n - 2.0);
            Ok(GrowthEstimate {
                r: slope,
                se: (sigma2 / sxx).sqrt(),
            })
        }
    }
}

/// Generation-time (or any nonnegative delay) distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum GenerationTimeDist {
    Exponential { rate: f64 },
    Fixed { value: f64 },
    Gamma { shape: f64, rate: f64 },
    Empirical { samples: Vec<f64> },
}

impl GenerationTimeDist {
    pub fn validate(&self) -> Result<()> {
        match self {
            GenerationTimeDist::Exponential { rate } => {
                if !(*rate > 0.0) {
                    return Err(Error::invalid("exponential rate must be > 0"));
                }
            }
            GenerationTimeDist::Fixed { value } => {
                if !(*value >= 0.0) {
                    return Err(Error::invalid("fixed delay must be >= 0"));
                }
            }
            GenerationTimeDist::Gamma { shape, rate } => {
                if !(*shape > 0.0 && *rate > 0.0) {
                    return Err(Error::invalid("gamma shape and rate must be > 0"));
                }
            }
            GenerationTimeDist::Empirical { samples } => {
                if samples.is_empty() {
                    return Err(Error::invalid("empirical sample must be nonempty"));
                }
                if samples.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
                    return Err(Error::invalid("empirical delays must be >= 0 and finite"));
                }
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match self {
            GenerationTimeDist::Exponential { rate } => 1.0 / rate,
            GenerationTimeDist::Fixed { value } => *value,
            GenerationTimeDist::Gamma { shape, rate } => shape / rate,
            GenerationTimeDist::Empirical { samples } => {
                samples.iter().sum::<f64>() / samples.len() as f64
            }
        }
    }

    /// Laplace transform `int exp(-r t) g(t) dt`, in closed form per kind
    /// (for the empirical kind the measure is the normalized sample).
    /// Errors when the transform diverges (`r` at or below minus the decay
    /// rate of an exponential/gamma kind).
    pub fn laplace(&self, r: f64) -> Result<f64> {
        self.validate()?;
        match self {
            GenerationTimeDist::Exponential { rate } => {
                if r <= -rate {
                    Err(Error::domain(format!(
                        "Laplace transform diverges for r <= -{rate}"
                    )))
                } else {
                    Ok(rate / (rate + r))
                }
            }
            GenerationTimeDist::Fixed { value } => Ok((-r * value).exp()),
            GenerationTimeDist::Gamma { shape, rate } => {
                if r <= -rate {
                    Err(Error::domain(format!(
                        "Laplace transform diverges for r <= -{rate}"
                    )))
                } else {
                    Ok((rate / (rate + r)).powf(*shape))
                }
            }
            GenerationTimeDist::Empirical { samples } => {
                let s: f64 = samples.iter().map(|&t| (-r * t).exp()).sum();
                let v = s / samples.len() as f64;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::domain("empirical transform overflowed"))
                }
            }
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            GenerationTimeDist::Exponential { rate } => {
                Exp::new(*rate).expect("valid exp").sample(rng)
            }
            GenerationTimeDist::Fixed { value } => *value,
            GenerationTimeDist::Gamma { shape, rate } => GammaDist::new(*shape, 1.0 / rate)
                .expect("valid gamma")
                .sample(rng),
            GenerationTimeDist::Empirical { samples } => {
                samples[rng.random_range(0..samples.len())]
            }
        }
    }
}

/// The Malthusian parameter: the `r` solving
/// `int_0^inf exp(-r t) R0 g(t) dt = 1`.
///
/// The left side is strictly decreasing in `r`, so the root is bracketed
/// and bisected to `|residual| < 1e-10`; negative `r` is the answer when
/// `R0 < 1`.
pub fn euler_lotka_r(r0: f64, g: &GenerationTimeDist) -> Result<f64> {
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(Error::invalid("R0 must be > 0 and finite"));
    }
    g.validate()?;
    if (r0 - 1.0).abs() == 0.0 {
        return Ok(0.0);
    }
    let target = |r: f64| -> Option<f64> { g.laplace(r).ok().map(|l| r0 * l - 1.0) };
    let (mut lo, mut hi);
    if r0 > 1.0 {
        lo = 0.0;
        hi = 1.0;
        let mut expand = 0;
        while target(hi).is_some_and(|v| v > 0.0) {
            hi *= 2.0;
            expand += 1;
            if expand > 200 {
                return Err(Error::NonConvergence(
                    "could not bracket the growth rate from above".into(),
                ));
            }
        }
        if target(hi).is_none() {
            return Err(Error::NonConvergence(
                "transform overflow at bracket".into(),
            ));
        }
    } else {
        hi = 0.0;
        // walk down toward the divergence boundary of the transform
        let boundary = match g {
            GenerationTimeDist::Exponential { rate } => Some(-rate),
            GenerationTimeDist::Gamma { rate, .. } => Some(-rate),
            _ => None,
        };
        let mut step = 1.0f64;
        lo = hi;
        let mut found = false;
        for _ in 0..200 {
            let cand = match boundary {
                Some(b) => {
                    step *= 0.5;
                    b + step.min(0.5) * (-b)
                }
                None => {
                    step *= 2.0;
                    -step
                }
            };
            match target(cand) {
                Some(v) if v > 0.0 => {
                    lo = cand;
                    found = true;
                    break;
                }
                Some(_) => lo = cand,
                None => break,
            }
        }
        if !found {
            return Err(Error::NonConvergence(
                "could not bracket the growth rate from below".into(),
            ));
        }
    }
    let f = |r: f64| target(r).unwrap_or(f64::INFINITY);
    let root = bisect(f, lo, hi, 1e-14 * (1.0 + hi.abs() + lo.abs()));
    let resid = f(root).abs();
    if resid < 1e-10 {
        Ok(root)
    } else {
        Err(Error::NonConvergence(format!(
            "Euler-Lotka residual {resid:.3e} above 1e-10"
        )))
    }
}

/// `R0 = 1 / int exp(-r t) g(t) dt`; exact inverse of [`euler_lotka_r`].
pub fn r0_from_growth(r: f64, g: &GenerationTimeDist) -> Result<f64> {
    let l = g.laplace(r)?;
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::domain("transform vanished or overflowed"));
    }
    Ok(1.0 / l)
}

/// Interval collections extracted from one transmission tree.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Intervals {
    /// Infectee minus infector infection time, indexed by infector
    /// (infector infected inside the window, when one is given).
    pub forward: Vec<f64>,
    /// Onset-to-onset analogue of `forward`; empty unless onset offsets
    /// were supplied.
    pub serial: Vec<f64>,
    /// Own generation interval of each individual infected inside the
    /// window (indexed by infectee).
    pub backward: Vec<f64>,
}

/// Extracts forward generation, serial and backward intervals.
///
/// `onset_offsets` samples an infection-to-symptom delay per individual
/// (deterministically from the given seed); `window` restricts each interval
/// kind to its indexing cohort: forward/serial to infectors infected in the
/// window, backward to infectees infected in the window.
pub fn extract_intervals(
    log: &EventLog,
    onset_offsets: Option<(&GenerationTimeDist, u64)>,
    window: Option<(f64, f64)>,
) -> Result<Intervals> {
    if let Some((lo, hi)) = window {
        if !(hi > lo) {
            return Err(Error::invalid("window must have positive length"));
        }
    }
    let mut infected_at = vec![f64::NAN; log.n as usize];
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    let mut subjects: Vec<u32> = Vec::new();
    for (idx, ev) in log.events.iter().enumerate() {
        if ev.kind != EventKind::Infection {
            continue;
        }
        infected_at[ev.subject as usize] = ev.time;
        subjects.push(ev.subject);
        match ev.infector {
            Some(src) => pairs.push((src, ev.subject)),
            None => {
                if idx != 0 {
                    return Err(Error::invalid(
                        "non-index infection without infector attribution",
                    ));
                }
            }
        }
    }
    let offsets: Option<Vec<f64>> = onset_offsets.map(|(dist, seed)| {
        let mut rng = stream_rng(seed, 0);
        let mut off = vec![0.0f64; log.n as usize];
        // sampled in subject order so the assignment is reproducible
        let mut sorted = subjects.clone();
        sorted.sort_unstable();
        for id in sorted {
            off[id as usize] = dist.sample(&mut rng);
        }
        off
    });
    if let Some((dist, _)) = onset_offsets {
        dist.validate()?;
    }
    let in_window = |t: f64| window.is_none_or(|(lo, hi)| t >= lo && t < hi);
    let mut out = Intervals::default();
    for &(src, dst) in &pairs {
        let t_src = infected_at[src as usize];
        let t_dst = infected_at[dst as usize];
        let gap = t_dst - t_src;
        if in_window(t_src) {
            out.forward.push(gap);
            if let Some(off) = &offsets {
                out.serial
                    .push(t_dst + off[dst as usize] - (t_src + off[src as usize]));
            }
        }
        if in_window(t_dst) {
            out.backward.push(gap);
        }
    }
    Ok(out)
}

/// Calendar window in which cumulative incidence lies between `lo_frac n`
/// and `hi_frac n` -- the default growth-phase window for backward-interval
/// analysis. `None` if the outbreak never reaches `lo_frac n` cases.
pub fn growth_phase_window(log: &EventLog, lo_frac: f64, hi_frac: f64) -> Option<(f64, f64)> {
    let lo_count = (lo_frac * log.n as f64).ceil() as u64;
    let hi_count = (hi_frac * log.n as f64).ceil() as u64;
    let mut cum = 0u64;
    let mut t_lo = None;
    for ev in &log.events {
        if ev.kind != EventKind::Infection {
            continue;
        }
        cum += 1;
        if cum == lo_count && t_lo.is_none() {
            t_lo = Some(ev.time);
        }
        if cum == hi_count {
            return t_lo.map(|lo| (lo, ev.time));
        }
    }
    None
}
