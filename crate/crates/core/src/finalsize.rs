//! Closed-form estimators of R0 and the critical vaccination coverage from
//! final-size data, for whole-population and sampled observation, with the
//! initially-immune correction.
//!
//! Point estimates invert the final size equation `1 - tau = exp(-R0 tau)`;
//! standard errors come from the delta method and carry the coefficient of
//! variation `c_v` of the infectious period (`c_v = 1` for the exponential
//! period, 0 for a fixed period; 1 is the conservative default).

use crate::error::{Error, Result};
use crate::numeric::bisect;

/// Point estimate with standard error and the formula that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub point: f64,
    pub se: f64,
    pub formula_id: &'static str,
}

/// Whole-population final-size data: `Z` infected out of `n` initially
/// susceptible, with `n_immune` initially immune.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FinalSizeObservation {
    pub n: u32,
    pub z: u32,
    pub n_immune: u32,
}

impl FinalSizeObservation {
    pub fn new(n: u32, z: u32) -> Result<Self> {
        Self::with_immune(n, z, 0)
    }

    pub fn with_immune(n: u32, z: u32, n_immune: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("population size n must be >= 2"));
        }
        if z > n {
            return Err(Error::invalid("final size Z cannot exceed n"));
        }
        Ok(FinalSizeObservation { n, z, n_immune })
    }

    /// Initially susceptible fraction `s = n / (n + n_immune)`.
    pub fn susceptible_fraction(&self) -> f64 {
        self.n as f64 / (self.n + self.n_immune) as f64
    }
}

/// Final-size data observed only in a sample: `Z_m` infected among `m`
/// sampled individuals from a population of size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleObservation {
    pub n: u32,
    pub m: u32,
    pub z_m: u32,
}

impl SampleObservation {
    pub fn new(n: u32, m: u32, z_m: u32) -> Result<Self> {
        if m < 1 || m > n {
            return Err(Error::invalid("need 1 <= m <= n"));
        }
        if z_m > m {
            return Err(Error::invalid("Z_m cannot exceed the sample size"));
        }
        Ok(SampleObservation { n, m, z_m })
    }
}

/// `k` isolated pairs, one partner initially infected; `infected` of the
/// susceptible partners got infected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairExperiment {
    pub pairs: u32,
    pub infected: u32,
}

/// Binomial estimate of the per-pair transmission probability.
pub fn estimate_pair_prob(exp: &PairExperiment) -> Result<Estimate> {
    if exp.pairs < 1 {
        return Err(Error::invalid("need at least one pair"));
    }
    if exp.infected > exp.pairs {
        return Err(Error::invalid("infected count cannot exceed pair count"));
    }
    let p = exp.infected as f64 / exp.pairs as f64;
    Ok(Estimate {
        point: p,
        se: (p * (1.0 - p) / exp.pairs as f64).sqrt(),
        formula_id: "pair_binomial",
    })
}

/// `R0 = m p` when each individual has `m_local` contacts in its habitat.
pub fn r0_from_local_contacts(p: f64, m_local: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p must be in [0,1]"));
    }
    Ok(m_local as f64 * p)
}

/// Reproduction number after vaccinating (or otherwise immunizing) a
/// fraction `v`: `R_v = (1 - v) R0`. Major outbreaks are impossible once
/// `v` reaches the critical coverage `1 - 1/R0`.
pub fn vaccinated_reproduction_number(r0: f64, v: f64) -> Result<f64> {
    if !(r0 >= 0.0) || !r0.is_finite() {
        return Err(Error::invalid("R0 must be >= 0 and finite"));
    }
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::invalid("vaccinated fraction must be in [0,1]"));
    }
    Ok((1.0 - v) * r0)
}

/// The limiting infected fraction `tau` solving `1 - tau = exp(-R0 tau)`.
///
/// Returns 0 for `R0 <= 1`; otherwise the unique root in (0,1), with
/// `|1 - tau - exp(-R0 tau)| < 1e-12`.
pub fn solve_final_size(r0: f64) -> Result<f64> {
    if !(r0 >= 0.0) || !r0.is_finite() {
        return Err(Error::invalid("R0 must be >= 0 and finite"));
    }
    if r0 <= 1.0 {
        return Ok(0.0);
    }
    let f = |tau: f64| 1.0 - tau - (-r0 * tau).exp();
    // f > 0 just above 0 and f(1) < 0; shrink the lower edge until the
    // bracket is valid even for R0 barely above 1.
    let mut lo = 1e-3;
    while f(lo) <= 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Ok(0.0);
        }
    }
    let tau = bisect(f, lo, 1.0, 1e-15);
    debug_assert!(f(tau).abs() < 1e-12);
    Ok(tau)
}

fn r0_point(frac: f64) -> f64 {
    -(1.0 - frac).ln() / frac
}

fn check_interior(frac_num: u32, frac_den: u32) -> Result<f64> {
    if frac_num == 0 {
        return Err(Error::domain(
            "Z = 0: estimator undefined (0/0 in -log(1-Z/n)/(Z/n))",
        ));
    }
    if frac_num == frac_den {
        return Err(Error::domain(
            "Z = n: estimator undefined (log(0) in -log(1-Z/n))",
        ));
    }
    Ok(frac_num as f64 / frac_den as f64)
}

/// R0 from whole-population final size. With initially immune individuals
/// the raw estimate targets `R_E = s R0`, so point and se are divided by
/// `s = n/(n + n_immune)`.
pub fn estimate_r0_final_size(obs: &FinalSizeObservation, c_v: f64) -> Result<Estimate> {
    validate_cv(c_v)?;
    let z = check_interior(obs.z, obs.n)?;
    let point = r0_point(z);
    let se = ((1.0 + c_v * c_v * (1.0 - z) * point * point) / (z * (1.0 - z))).sqrt()
        / (obs.n as f64).sqrt();
    let s = obs.susceptible_fraction();
    Ok(Estimate {
        point: point / s,
        se: se / s,
        formula_id: if obs.n_immune == 0 {
            "r0_final_size"
        } else {
            "r0_final_size_immune"
        },
    })
}

/// R0 from a sample of size `m`; the second variance term is the sampling
/// contribution and vanishes exactly at `m = n`.
pub fn estimate_r0_sample(obs: &SampleObservation, c_v: f64) -> Result<Estimate> {
    validate_cv(c_v)?;
    let z = check_interior(obs.z_m, obs.m)?;
    let point = r0_point(z);
    let (t1, t2) = sample_var_terms(obs, z, point, c_v);
    Ok(Estimate {
        point,
        se: (t1 + t2).sqrt(),
        formula_id: "r0_sample",
    })
}

fn sample_var_terms(obs: &SampleObservation, z: f64, r0: f64, c_v: f64) -> (f64, f64) {
    let n = obs.n as f64;
    let m = obs.m as f64;
    let denom = z * (1.0 - z);
    let t1 = (1.0 + c_v * c_v * (1.0 - z) * r0 * r0) / (n * denom);
    let t2 = (1.0 - m / n) * (1.0 - (1.0 - z) * r0).powi(2) / (m * denom);
    (t1, t2)
}

/// Critical vaccination coverage `v_c = 1 - 1/R0` from whole-population data.
/// The delta method divides the R0 standard error by `R0^2`; with initial
/// immunity the point uses `R0/s` and the se is multiplied by `s`.
pub fn estimate_vc_final_size(obs: &FinalSizeObservation, c_v: f64) -> Result<Estimate> {
    validate_cv(c_v)?;
    let z = check_interior(obs.z, obs.n)?;
    let r0_raw = r0_point(z);
    let se_r0_raw = ((1.0 + c_v * c_v * (1.0 - z) * r0_raw * r0_raw) / (z * (1.0 - z))).sqrt()
        / (obs.n as f64).sqrt();
    let s = obs.susceptible_fraction();
    Ok(Estimate {
        point: 1.0 - s / r0_raw,
        se: s * se_r0_raw / (r0_raw * r0_raw),
        formula_id: if obs.n_immune == 0 {
            "vc_final_size"
        } else {
            "vc_final_size_immune"
        },
    })
}

/// `v_c` from a sample; both variance terms are divided by `R0^4`.
pub fn estimate_vc_sample(obs: &SampleObservation, c_v: f64) -> Result<Estimate> {
    validate_cv(c_v)?;
    let z = check_interior(obs.z_m, obs.m)?;
    let r0 = r0_point(z);
    let (t1, t2) = sample_var_terms(obs, z, r0, c_v);
    let r4 = r0.powi(4);
    Ok(Estimate {
        point: 1.0 - 1.0 / r0,
        se: ((t1 + t2) / r4).sqrt(),
        formula_id: "vc_sample",
    })
}

fn validate_cv(c_v: f64) -> Result<()> {
    if !(c_v >= 0.0) || !c_v.is_finite() {
        return Err(Error::invalid("c_v must be >= 0 and finite"));
    }
    Ok(())
}
