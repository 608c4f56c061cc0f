//! Data-augmented MCMC for the general stochastic epidemic observed through
//! removal times.
//!
//! Observation model: the removal (recovery) times of all `m` ever-infected
//! individuals are known, individuals are labeled by removal order, the
//! first-removed individual is the index case with infection time
//! conditioned at 0, and the remaining `m - 1` infection times are latent.
//! The sampler is Metropolis-within-Gibbs: `lambda` and `gamma` have
//! gamma-conjugate complete-data conditionals
//! (`Gamma(a + #events, b + matching integral)`); each sweep also proposes a
//! new infection time for one randomly chosen individual, uniform on
//! `(0, its removal time)`, accepted by the complete-data likelihood ratio.
//! Proposals that break the trajectory (an infection with no infective
//! present) are rejected outright and counted.

use rand::Rng;
use rand_distr::{Distribution, Gamma as GammaDist, Normal};

use crate::error::{Error, Result};
use crate::inference::{PosteriorSample, PriorDist};
use crate::rng::stream_rng;

/// Sufficient statistics of the complete-data GSE likelihood for a labeled
/// configuration of infection and removal times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GseSuffStats {
    /// Ever-infected count `m`.
    pub m: usize,
    /// `int S(u) I(u) / n du`.
    pub int_si_over_n: f64,
    /// `int I(u) du`.
    pub int_i: f64,
    /// `sum log I(t-)` over non-initial infections.
    pub sum_ln_i: f64,
}

/// Replays a labeled configuration; `None` when the trajectory is
/// inconsistent (some event happens with no infective present).
pub fn complete_data_suff_stats(
    infection_times: &[f64],
    removal_times: &[f64],
    n: u32,
) -> Option<GseSuffStats> {
    let m = infection_times.len();
    debug_assert_eq!(m, removal_times.len());
    let mut events: Vec<(f64, bool)> = infection_times
        .iter()
        .map(|&t| (t, true))
        .chain(removal_times.iter().map(|&t| (t, false)))
        .collect();
    // infections sort before removals at ties so I(t-) sees the left limit
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    let nf = n as f64;
    let mut s = nf;
    let mut i = 0.0f64;
    let mut last = events[0].0;
    let mut stats = GseSuffStats {
        m,
        int_si_over_n: 0.0,
        int_i: 0.0,
        sum_ln_i: 0.0,
    };
    let mut first = true;
    for (t, is_infection) in events {
        let dt = t - last;
        stats.int_si_over_n += s * i / nf * dt;
        stats.int_i += i * dt;
        last = t;
        if is_infection {
            if !first {
                if i < 1.0 {
                    return None;
                }
                stats.sum_ln_i += i.ln();
            }
            first = false;
            s -= 1.0;
            i += 1.0;
        } else {
            if i < 1.0 {
                return None;
            }
            i -= 1.0;
        }
    }
    Some(stats)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DaMcmcConfig {
    pub iterations: usize,
    /// Fraction of iterations discarded as burn-in (default 0.2).
    pub burn_in_fraction: f64,
    /// Keep every `thin`-th draw after burn-in (default 1 = keep all).
    pub thin: usize,
    /// Disable the latent update to sample the fixed-latent conditionals
    /// (used by conjugacy checks).
    pub update_latent: bool,
}

impl Default for DaMcmcConfig {
    fn default() -> Self {
        DaMcmcConfig {
            iterations: 10_000,
            burn_in_fraction: 0.2,
            thin: 1,
            update_latent: true,
        }
    }
}

/// Runs the sampler on the removal times of a completed outbreak in a
/// population of size `n`. Draw columns are `(lambda, gamma)`.
pub fn da_mcmc_gse(
    removal_times: &[f64],
    n: u32,
    prior_lambda: &PriorDist,
    prior_gamma: &PriorDist,
    cfg: &DaMcmcConfig,
    seed: u64,
) -> Result<PosteriorSample> {
    prior_lambda.validate()?;
    prior_gamma.validate()?;
    let m = removal_times.len();
    if m == 0 {
        return Err(Error::invalid("need at least one removal time"));
    }
    if (m as u64) > n as u64 {
        return Err(Error::invalid("more removals than individuals"));
    }
    if removal_times.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(Error::invalid("removal times must be positive and finite"));
    }
    if cfg.iterations < 10 {
        return Err(Error::invalid("need at least 10 iterations"));
    }
    if !(0.0..1.0).contains(&cfg.burn_in_fraction) {
        return Err(Error::invalid("burn-in fraction must be in [0,1)"));
    }
    if cfg.thin == 0 {
        return Err(Error::invalid("thinning interval must be >= 1"));
    }
    let mut removals = removal_times.to_vec();
    removals.sort_by(f64::total_cmp);

    let mut rng = stream_rng(seed, 0);
    // infection times labeled by removal order; index (j = 0) fixed at 0
    let mut t_inf = vec![0.0f64; m];
    for j in 1..m {
        t_inf[j] = 0.5 * removals[0].min(removals[j]);
    }
    let mut stats = complete_data_suff_stats(&t_inf, &removals, n)
        .ok_or_else(|| Error::invalid("could not build a feasible starting trajectory"))?;

    let mut lambda = prior_sample_positive(prior_lambda, &mut rng);
    let mut gamma = prior_sample_positive(prior_gamma, &mut rng);

    let burn = (cfg.iterations as f64 * cfg.burn_in_fraction) as usize;
    let mut draws = Vec::with_capacity((cfg.iterations - burn) / cfg.thin + 1);
    let mut latent = Vec::with_capacity(draws.capacity());
    let mut attempts = 0u64;
    let mut accepts = 0u64;
    let mut auto_rejections = 0u64;

    for it in 0..cfg.iterations {
        lambda = sample_rate(
            prior_lambda,
            (stats.m - 1) as f64,
            stats.int_si_over_n,
            lambda,
            &mut rng,
        );
        gamma = sample_rate(prior_gamma, stats.m as f64, stats.int_i, gamma, &mut rng);

        if cfg.update_latent && m >= 2 {
            attempts += 1;
            let j = 1 + rng.random_range(0..m - 1);
            let proposal = rng.random::<f64>() * removals[j];
            let old = t_inf[j];
            t_inf[j] = proposal;
            match complete_data_suff_stats(&t_inf, &removals, n) {
                None => {
                    t_inf[j] = old;
                    auto_rejections += 1;
                }
                Some(new_stats) => {
                    let delta = (new_stats.sum_ln_i - stats.sum_ln_i)
                        - lambda * (new_stats.int_si_over_n - stats.int_si_over_n)
                        - gamma * (new_stats.int_i - stats.int_i);
                    if delta >= 0.0 || rng.random::<f64>().ln() < delta {
                        stats = new_stats;
                        accepts += 1;
                    } else {
                        t_inf[j] = old;
                    }
                }
            }
        }

        if it >= burn && (it - burn).is_multiple_of(cfg.thin) {
            draws.push(vec![lambda, gamma]);
            latent.push(t_inf[1..].to_vec());
        }
    }
    Ok(PosteriorSample {
        param_names: vec!["lambda".into(), "gamma".into()],
        draws,
        latent: Some(latent),
        acceptance_rate: if attempts > 0 {
            accepts as f64 / attempts as f64
        } else {
            f64::NAN
        },
        auto_rejections,
        seed,
    })
}

fn prior_sample_positive<R: Rng>(prior: &PriorDist, rng: &mut R) -> f64 {
    let x = prior.sample(rng);
    x.max(1e-12)
}

/// Draws a rate from its complete-data conditional: exactly for a gamma
/// prior (`Gamma(a + events, b + integral)`), by a random-walk Metropolis
/// step for a uniform prior.
fn sample_rate<R: Rng>(
    prior: &PriorDist,
    events: f64,
    integral: f64,
    current: f64,
    rng: &mut R,
) -> f64 {
    match prior {
        PriorDist::Gamma { shape, rate } => {
            let a = shape + events;
            let b = rate + integral;
            GammaDist::new(a, 1.0 / b).expect("valid gamma").sample(rng)
        }
        PriorDist::Uniform { lo, hi } => {
            let ln_target = |x: f64| {
                if x < *lo || x > *hi || x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    events * x.ln() - x * integral
                }
            };
            let sd = (hi - lo) / 20.0;
            let prop = current + Normal::new(0.0, sd).expect("valid normal").sample(rng);
            let delta = ln_target(prop) - ln_target(current);
            if delta >= 0.0 || rng.random::<f64>().ln() < delta {
                prop
            } else {
                current
            }
        }
    }
}
