//! Multitype final-size machinery: the coupled final-size equations, the
//! next-generation matrix R0, and calibration of k free parameters from an
//! observed attack-rate vector.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Multitype epidemic configuration: `k` types with community fractions
/// `pi`, contact-rate matrix `lambda[i][j]` (rate at which an infectious
/// i-individual infects a given susceptible j-individual, times n) and
/// per-type recovery rates `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultitypeConfig {
    pub pi: Vec<f64>,
    pub lambda: Vec<Vec<f64>>,
    pub gamma: Vec<f64>,
}

impl MultitypeConfig {
    pub fn new(pi: Vec<f64>, lambda: Vec<Vec<f64>>, gamma: Vec<f64>) -> Result<Self> {
        let cfg = MultitypeConfig { pi, lambda, gamma };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn k(&self) -> usize {
        self.pi.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.pi.len();
        if k == 0 {
            return Err(Error::invalid("need at least one type"));
        }
        if self.gamma.len() != k || self.lambda.len() != k {
            return Err(Error::invalid("pi, lambda, gamma dimensions disagree"));
        }
        for row in &self.lambda {
            if row.len() != k {
                return Err(Error::invalid("lambda must be k x k"));
            }
            if row.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                return Err(Error::invalid("lambda entries must be >= 0"));
            }
        }
        if self.pi.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::invalid("type fractions must be > 0"));
        }
        let total: f64 = self.pi.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "type fractions sum to {total}, not 1"
            )));
        }
        if self.gamma.iter().any(|&g| !(g > 0.0)) {
            return Err(Error::invalid("recovery rates must be > 0"));
        }
        Ok(())
    }

    /// Next-generation matrix `m_ij = lambda_ij pi_j / gamma_i`.
    pub fn next_generation_matrix(&self) -> Vec<Vec<f64>> {
        let k = self.k();
        let mut m = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in 0..k {
                m[i][j] = self.lambda[i][j] * self.pi[j] / self.gamma[i];
            }
        }
        m
    }
}

/// Proportionate-mixing configuration `lambda_ij = alpha_i beta_j`.
///
/// The factorization itself is not identifiable from final-size data; this
/// constructor exists so calibration templates can hold one factor fixed.
pub fn proportionate_mixing_config(
    alpha: &[f64],
    beta: &[f64],
    pi: Vec<f64>,
    gamma: Vec<f64>,
) -> Result<MultitypeConfig> {
    if alpha.len() != beta.len() {
        return Err(Error::invalid("alpha and beta lengths disagree"));
    }
    let lambda = alpha
        .iter()
        .map(|&a| beta.iter().map(|&b| a * b).collect())
        .collect();
    MultitypeConfig::new(pi, lambda, gamma)
}

/// Perron root of the next-generation matrix by shifted power iteration
/// with a Rayleigh-quotient stopping rule; relative error < 1e-10.
pub fn ngm_r0(config: &MultitypeConfig) -> Result<f64> {
    config.validate()?;
    let k = config.k();
    let m = config.next_generation_matrix();
    if k == 1 {
        return Ok(m[0][0]);
    }
    // positive shift separates the Perron root from complex eigenvalues of
    // the same modulus, so the iteration always converges
    let shift = 1.0
        + m.iter()
            .map(|row| row.iter().sum::<f64>())
            .fold(0.0f64, f64::max);
    let mut v = vec![1.0 / (k as f64).sqrt(); k];
    let mut prev = f64::INFINITY;
    for _ in 0..100_000 {
        let mut w = vec![0.0; k];
        for i in 0..k {
            let mut acc = shift * v[i];
            for j in 0..k {
                acc += m[i][j] * v[j];
            }
            w[i] = acc;
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        for x in &mut w {
            *x /= norm;
        }
        // Rayleigh quotient of the shifted matrix
        let mut rq = 0.0;
        for i in 0..k {
            let mut acc = shift * w[i];
            for j in 0..k {
                acc += m[i][j] * w[j];
            }
            rq += w[i] * acc;
        }
        let r0 = rq - shift;
        if (r0 - prev).abs() <= 1e-12 * (1.0 + r0.abs()) {
            return Ok(r0.max(0.0));
        }
        prev = r0;
        v = w;
    }
    Err(Error::NonConvergence(
        "power iteration did not stabilize".into(),
    ))
}

fn residuals(config: &MultitypeConfig, tau: &[f64]) -> Vec<f64> {
    let k = config.k();
    (0..k)
        .map(|j| {
            let mut expo = 0.0;
            for i in 0..k {
                expo += config.lambda[i][j] * config.pi[i] * tau[i] / config.gamma[i];
            }
            1.0 - tau[j] - (-expo).exp()
        })
        .collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
}

/// Largest solution of `1 - tau_j = exp(-sum_i lambda_ij pi_i tau_i / gamma_i)`.
///
/// Returns the zero vector iff the next-generation R0 is <= 1; otherwise the
/// strictly positive fixed point, with residual inf-norm < 1e-10. Monotone
/// iteration from the all-ones vector converges downward to the largest
/// fixed point; Newton polishing finishes the job near threshold.
pub fn multitype_final_size_solve(config: &MultitypeConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let k = config.k();
    if ngm_r0(config)? <= 1.0 {
        return Ok(vec![0.0; k]);
    }
    let mut tau = vec![1.0 - 1e-12; k];
    for _ in 0..10_000 {
        let res = residuals(config, &tau);
        if inf_norm(&res) < 1e-10 {
            return Ok(tau);
        }
        for j in 0..k {
            tau[j] += res[j]; // fixed-point step: tau <- 1 - exp(-...)
        }
    }
    // Newton fallback for slow (near-threshold) cases
    for _ in 0..100 {
        let res = residuals(config, &tau);
        if inf_norm(&res) < 1e-10 {
            return Ok(tau);
        }
        let mut jac = DMatrix::zeros(k, k);
        for j in 0..k {
            let mut expo = 0.0;
            for i in 0..k {
                expo += config.lambda[i][j] * config.pi[i] * tau[i] / config.gamma[i];
            }
            let e = (-expo).exp();
            for i in 0..k {
                // d res_j / d tau_i
                let mut d = e * config.lambda[i][j] * config.pi[i] / config.gamma[i];
                if i == j {
                    d -= 1.0;
                }
                jac[(j, i)] = d;
            }
        }
        let rhs = DVector::from_iterator(k, res.iter().map(|&x| -x));
        let step = jac
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::NonConvergence("singular Jacobian in final-size solve".into()))?;
        for j in 0..k {
            tau[j] = (tau[j] + step[j]).clamp(0.0, 1.0 - 1e-15);
        }
    }
    let res = inf_norm(&residuals(config, &tau));
    Err(Error::NonConvergence(format!(
        "multitype final-size solve stalled, residual inf-norm {res:.3e}"
    )))
}

/// Calibration output: fitted free parameters, the completed configuration,
/// and the implied next-generation R0.
#[derive(Debug, Clone)]
pub struct Calibrated {
    pub params: Vec<f64>,
    pub config: MultitypeConfig,
    pub r0: f64,
    pub residual_inf_norm: f64,
}

/// Solves the k final-size equations for k free positive parameters.
///
/// `template` maps a free-parameter vector to a full configuration; `init`
/// supplies the starting point (its length fixes the number of free
/// parameters, which must equal the number of types). Damped Newton with a
/// finite-difference Jacobian runs in log-parameter space so iterates stay
/// positive; residual inf-norm must reach 1e-8.
pub fn multitype_calibrate<F>(observed_tau: &[f64], template: F, init: &[f64]) -> Result<Calibrated>
where
    F: Fn(&[f64]) -> MultitypeConfig,
{
    let k = observed_tau.len();
    if init.len() != k {
        return Err(Error::invalid(format!(
            "need exactly k = {k} free parameters, got {}",
            init.len()
        )));
    }
    if observed_tau.iter().all(|&t| t == 0.0) {
        return Err(Error::domain(
            "observed final sizes are all zero: subcritical outbreak, parameters unidentifiable",
        ));
    }
    if observed_tau.iter().any(|&t| !(0.0..1.0).contains(&t)) {
        return Err(Error::invalid("observed fractions must lie in [0,1)"));
    }
    if init.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::invalid("initial free parameters must be > 0"));
    }
    let cfg_of = |x: &[f64]| -> MultitypeConfig {
        let theta: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        template(&theta)
    };
    let res_of = |x: &[f64]| -> Result<Vec<f64>> {
        let cfg = cfg_of(x);
        cfg.validate()?;
        if cfg.k() != k {
            return Err(Error::invalid(format!(
                "template builds {} types but {k} attack rates were observed",
                cfg.k()
            )));
        }
        Ok(residuals(&cfg, observed_tau))
    };
    let mut x: Vec<f64> = init.iter().map(|v| v.ln()).collect();
    let mut res = res_of(&x)?;
    for _ in 0..200 {
        if inf_norm(&res) < 1e-8 {
            break;
        }
        // finite-difference Jacobian in log space
        let mut jac = DMatrix::zeros(k, k);
        for c in 0..k {
            let h = 1e-7 * (1.0 + x[c].abs());
            let mut xp = x.clone();
            xp[c] += h;
            let rp = res_of(&xp)?;
            for r in 0..k {
                jac[(r, c)] = (rp[r] - res[r]) / h;
            }
        }
        let rhs = DVector::from_iterator(k, res.iter().map(|&v| -v));
        let step = jac.lu().solve(&rhs).ok_or_else(|| {
            Error::NonConvergence("singular Jacobian in multitype calibration".into())
        })?;
        let base = inf_norm(&res);
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let xn: Vec<f64> = (0..k).map(|i| x[i] + scale * step[i]).collect();
            if let Ok(rn) = res_of(&xn) {
                if inf_norm(&rn) < base {
                    x = xn;
                    res = rn;
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if !accepted {
            return Err(Error::NonConvergence(format!(
                "calibration stalled at residual inf-norm {base:.3e}"
            )));
        }
    }
    let norm = inf_norm(&res);
    if norm >= 1e-8 {
        return Err(Error::NonConvergence(format!(
            "calibration residual inf-norm {norm:.3e} above 1e-8"
        )));
    }
    let params: Vec<f64> = x.iter().map(|v| v.exp()).collect();
    let config = cfg_of(&x);
    let r0 = ngm_r0(&config)?;
    Ok(Calibrated {
        params,
        config,
        r0,
        residual_inf_norm: norm,
    })
}
