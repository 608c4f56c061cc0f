//! ABC rejection sampling: accept prior draws whose simulated summaries fall
//! within `epsilon` of the observed summaries.
//!
//! Distances are Euclidean on summaries standardized by the prior-predictive
//! spread of a pilot run; `epsilon = 0` therefore accepts exact summary
//! matches only. Draws run on independent RNG streams, so the sampler is
//! deterministic given the seed no matter how it is parallelized.

use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::epidemic::{outbreak_summary, EventLog};
use crate::error::{Error, Result};
use crate::inference::{PosteriorSample, PriorDist};
use crate::rng::stream_rng;

/// Summary statistics computable from an outbreak log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummaryKind {
    FinalSize,
    Duration,
    PeakPrevalence,
    PeakTime,
}

impl SummaryKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SummaryKind::FinalSize => "final-size",
            SummaryKind::Duration => "duration",
            SummaryKind::PeakPrevalence => "peak-prevalence",
            SummaryKind::PeakTime => "peak-time",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "final-size" => Ok(SummaryKind::FinalSize),
            "duration" => Ok(SummaryKind::Duration),
            "peak-prevalence" => Ok(SummaryKind::PeakPrevalence),
            "peak-time" => Ok(SummaryKind::PeakTime),
            other => Err(Error::invalid(format!("unknown summary `{other}`"))),
        }
    }
}

/// Evaluates the selected summaries on one log.
pub fn summarize_log(log: &EventLog, kinds: &[SummaryKind]) -> Vec<f64> {
    let s = outbreak_summary(log);
    kinds
        .iter()
        .map(|k| match k {
            SummaryKind::FinalSize => s.final_size as f64,
            SummaryKind::Duration => s.duration,
            SummaryKind::PeakPrevalence => s.peak_prevalence as f64,
            SummaryKind::PeakTime => s.peak_time,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbcConfig {
    /// Acceptance radius; `f64::INFINITY` keeps every draw.
    pub epsilon: f64,
    /// Number of prior draws.
    pub draws: usize,
    /// Pilot simulations used to standardize summaries (default 200).
    pub pilot: usize,
}

impl Default for AbcConfig {
    fn default() -> Self {
        AbcConfig {
            epsilon: 0.0,
            draws: 10_000,
            pilot: 200,
        }
    }
}

/// Rejection sampler. `simulate` maps a parameter vector and an RNG to the
/// summary vector of one synthetic data set; it must produce summaries of
/// the same arity as `observed`.
pub fn abc_rejection<F>(
    simulate: F,
    observed: &[f64],
    priors: &[PriorDist],
    cfg: &AbcConfig,
    seed: u64,
) -> Result<PosteriorSample>
where
    F: Fn(&[f64], &mut ChaCha12Rng) -> Vec<f64> + Sync,
{
    if priors.is_empty() || observed.is_empty() {
        return Err(Error::invalid("need at least one prior and one summary"));
    }
    for p in priors {
        p.validate()?;
    }
    if cfg.draws < 1 {
        return Err(Error::invalid("need at least one draw"));
    }
    if !(cfg.epsilon >= 0.0) {
        return Err(Error::invalid("epsilon must be >= 0"));
    }
    let dim = observed.len();
    let draw_one = |stream: u64| -> (Vec<f64>, Vec<f64>) {
        let mut rng = stream_rng(seed, stream);
        let theta: Vec<f64> = priors.iter().map(|p| p.sample(&mut rng)).collect();
        let summaries = simulate(&theta, &mut rng);
        (theta, summaries)
    };
    // pilot pass fixes the standardization scales
    let pilot_n = cfg.pilot.max(1);
    let pilot: Vec<(Vec<f64>, Vec<f64>)> =
        (0..pilot_n as u64).into_par_iter().map(draw_one).collect();
    for (_, s) in &pilot {
        if s.len() != dim {
            return Err(Error::invalid(format!(
                "simulator produced {} summaries, observed has {dim}",
                s.len()
            )));
        }
    }
    let mut scales = vec![0.0f64; dim];
    for c in 0..dim {
        let xs: Vec<f64> = pilot.iter().map(|(_, s)| s[c]).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
        scales[c] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }
    // main pass on streams after the pilot block
    let results: Vec<(Vec<f64>, f64)> = (0..cfg.draws as u64)
        .into_par_iter()
        .map(|i| {
            let (theta, s) = draw_one(pilot_n as u64 + i);
            let dist = s
                .iter()
                .zip(observed)
                .zip(&scales)
                .map(|((a, b), sc)| ((a - b) / sc).powi(2))
                .sum::<f64>()
                .sqrt();
            (theta, dist)
        })
        .collect();
    let accepted: Vec<Vec<f64>> = results
        .iter()
        .filter(|(_, d)| *d <= cfg.epsilon)
        .map(|(t, _)| t.clone())
        .collect();
    let acceptance_rate = accepted.len() as f64 / cfg.draws as f64;
    if accepted.is_empty() {
        return Err(Error::domain(format!(
            "ABC accepted 0 of {} draws: epsilon = {} is too small for these summaries",
            cfg.draws, cfg.epsilon
        )));
    }
    Ok(PosteriorSample {
        param_names: (0..priors.len()).map(|i| format!("param{i}")).collect(),
        draws: accepted,
        latent: None,
        acceptance_rate,
        auto_rejections: 0,
        seed,
    })
}
