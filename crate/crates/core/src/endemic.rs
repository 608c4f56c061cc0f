//! Endemic-epidemic negative-binomial panel model.
//!
//! Counts follow `y_it | past ~ NegBin(mu_it, phi)` with conditional mean
//!
//! `mu_it = ar * y_{i,t-1} + nu_i * sum_{j != i} w_ji y_{j,t-l} + exp(eta_it)`
//!
//! and seasonal endemic predictor
//! `eta_it = alpha_i + sum_s beta_s sin(omega_s t) + delta_s cos(omega_s t)`,
//! `omega_s = 2 pi s / period`. The spatial coefficient is called `nu`
//! here; its conventional name gamma would collide with the recovery rate
//! used elsewhere. Fitting is quasi-Newton on log-transformed positive parameters
//! with deterministic starts; the covariance comes from the observed
//! information at the maximum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::negbin::NegBin;
use crate::numeric::{fd_hessian, minimize_bfgs};
use crate::rng::stream_rng;
use crate::surveillance::CountPanel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EEModelSpec {
    /// Number of Fourier harmonics S.
    pub harmonics: usize,
    /// Include the autoregressive `ar * y_{i,t-1}` term.
    pub include_ar: bool,
    /// Include the neighbor term `nu_i sum_j w_ji y_{j,t-l}`.
    pub include_neighbor: bool,
    /// One `nu_i` per unit instead of a shared `nu` (guarded: needs
    /// `m T >= 50 * #params`).
    pub per_unit_neighbor: bool,
    /// One intercept shared across units instead of per-unit `alpha_i`.
    pub shared_intercept: bool,
    /// Periods per season cycle (52 for weekly data).
    pub period: f64,
}

impl Default for EEModelSpec {
    fn default() -> Self {
        EEModelSpec {
            harmonics: 0,
            include_ar: true,
            include_neighbor: false,
            per_unit_neighbor: false,
            shared_intercept: false,
            period: 52.0,
        }
    }
}

/// Natural-scale parameters; shapes depend on the spec (empty `neighbor`
/// when excluded, length 1 when shared). NaN entries (undefined standard
/// errors) serialize as JSON null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EEParams {
    /// Autoregressive coefficient (the model's lambda'); 0 when excluded.
    #[serde(with = "nan_as_null")]
    pub ar: f64,
    #[serde(with = "nan_vec")]
    pub neighbor: Vec<f64>,
    #[serde(with = "nan_vec")]
    pub alpha: Vec<f64>,
    #[serde(with = "nan_vec")]
    pub sin_coef: Vec<f64>,
    #[serde(with = "nan_vec")]
    pub cos_coef: Vec<f64>,
    #[serde(with = "nan_as_null")]
    pub phi: f64,
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

mod nan_vec {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(
            v.iter()
                .map(|x| if x.is_finite() { Some(*x) } else { None }),
        )
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Option<f64>>::deserialize(d)?
            .into_iter()
            .map(|x| x.unwrap_or(f64::NAN))
            .collect())
    }
}

impl EEParams {
    fn validate(&self, spec: &EEModelSpec, m: usize) -> Result<()> {
        if !(self.ar >= 0.0) {
            return Err(Error::invalid("ar coefficient must be >= 0"));
        }
        if self.neighbor.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::invalid("neighbor coefficients must be >= 0"));
        }
        if !(self.phi >= 0.0) {
            return Err(Error::invalid("phi must be >= 0"));
        }
        let expect_nu = if !spec.include_neighbor {
            0
        } else if spec.per_unit_neighbor {
            m
        } else {
            1
        };
        if self.neighbor.len() != expect_nu {
            return Err(Error::invalid("neighbor coefficient count mismatch"));
        }
        let expect_alpha = if spec.shared_intercept { 1 } else { m };
        if self.alpha.len() != expect_alpha {
            return Err(Error::invalid("intercept count mismatch"));
        }
        if self.sin_coef.len() != spec.harmonics || self.cos_coef.len() != spec.harmonics {
            return Err(Error::invalid("harmonic coefficient count mismatch"));
        }
        Ok(())
    }

    fn eta(&self, spec: &EEModelSpec, unit: usize, t: usize) -> f64 {
        let mut eta = if spec.shared_intercept {
            self.alpha[0]
        } else {
            self.alpha[unit]
        };
        for s in 0..spec.harmonics {
            let omega = 2.0 * std::f64::consts::PI * (s as f64 + 1.0) / spec.period;
            let x = omega * t as f64;
            eta += self.sin_coef[s] * x.sin() + self.cos_coef[s] * x.cos();
        }
        eta
    }

    /// Conditional mean `mu_it` given the panel history.
    pub fn mean(&self, spec: &EEModelSpec, panel: &CountPanel, unit: usize, t: usize) -> f64 {
        let mut mu = self.eta(spec, unit, t).exp();
        if spec.include_ar {
            mu += self.ar * panel.y[unit][t - 1] as f64;
        }
        if spec.include_neighbor {
            let nu = if spec.per_unit_neighbor {
                self.neighbor[unit]
            } else {
                self.neighbor[0]
            };
            if let Some(w) = &panel.weights {
                let mut acc = 0.0;
                for j in 0..panel.m() {
                    if j != unit {
                        acc += w[j][unit] * panel.y[j][t - panel.lag] as f64;
                    }
                }
                mu += nu * acc;
            }
        }
        mu
    }
}

fn first_modeled_period(spec: &EEModelSpec, panel: &CountPanel) -> usize {
    if spec.include_neighbor {
        panel.lag.max(1)
    } else {
        1
    }
}

/// Panel log-likelihood over `t = max(1, l) .. T-1` (0-based).
pub fn ee_loglik(panel: &CountPanel, spec: &EEModelSpec, params: &EEParams) -> Result<f64> {
    panel.validate()?;
    params.validate(spec, panel.m())?;
    if spec.include_neighbor && panel.weights.is_none() {
        return Err(Error::invalid(
            "neighbor term requested but panel has no weights",
        ));
    }
    let t0 = first_modeled_period(spec, panel);
    if panel.horizon() <= t0 {
        return Err(Error::invalid("panel too short for the requested lags"));
    }
    let mut ll = 0.0;
    for i in 0..panel.m() {
        for t in t0..panel.horizon() {
            let mu = params.mean(spec, panel, i, t);
            let nb = NegBin::new(mu, params.phi)?;
            ll += nb.ln_pmf(panel.y[i][t]);
        }
    }
    Ok(ll)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EEFit {
    pub spec: EEModelSpec,
    pub params: EEParams,
    /// Standard errors, same shapes as `params` (NaN where the observed
    /// information was not invertible).
    pub se: EEParams,
    pub loglik: f64,
    pub converged: bool,
    pub gradient_norm: f64,
    pub iterations: usize,
    /// The AR estimate collapsed to the boundary at 0.
    pub boundary_ar: bool,
}

struct Packing {
    spec: EEModelSpec,
    m: usize,
}

impl Packing {
    fn n_params(&self) -> usize {
        let mut p = 0;
        if self.spec.include_ar {
            p += 1;
        }
        if self.spec.include_neighbor {
            p += if self.spec.per_unit_neighbor {
                self.m
            } else {
                1
            };
        }
        p += if self.spec.shared_intercept {
            1
        } else {
            self.m
        };
        p += 2 * self.spec.harmonics;
        p + 1 // phi
    }

    /// Unconstrained vector -> natural parameters (positive params via exp).
    fn unpack(&self, z: &[f64]) -> EEParams {
        let mut k = 0;
        let ar = if self.spec.include_ar {
            k += 1;
            z[k - 1].exp()
        } else {
            0.0
        };
        let n_nu = if !self.spec.include_neighbor {
            0
        } else if self.spec.per_unit_neighbor {
            self.m
        } else {
            1
        };
        let neighbor: Vec<f64> = (0..n_nu).map(|j| z[k + j].exp()).collect();
        k += n_nu;
        let n_alpha = if self.spec.shared_intercept {
            1
        } else {
            self.m
        };
        let alpha = z[k..k + n_alpha].to_vec();
        k += n_alpha;
        let sin_coef = z[k..k + self.spec.harmonics].to_vec();
        k += self.spec.harmonics;
        let cos_coef = z[k..k + self.spec.harmonics].to_vec();
        k += self.spec.harmonics;
        EEParams {
            ar,
            neighbor,
            alpha,
            sin_coef,
            cos_coef,
            phi: z[k].exp(),
        }
    }

    /// Natural parameters -> flat natural vector (for the Hessian).
    fn flatten(&self, p: &EEParams) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n_params());
        if self.spec.include_ar {
            v.push(p.ar);
        }
        v.extend_from_slice(&p.neighbor);
        v.extend_from_slice(&p.alpha);
        v.extend_from_slice(&p.sin_coef);
        v.extend_from_slice(&p.cos_coef);
        v.push(p.phi);
        v
    }

    fn unflatten(&self, v: &[f64]) -> EEParams {
        let mut k = 0;
        let ar = if self.spec.include_ar {
            k += 1;
            v[k - 1]
        } else {
            0.0
        };
        let n_nu = if !self.spec.include_neighbor {
            0
        } else if self.spec.per_unit_neighbor {
            self.m
        } else {
            1
        };
        let neighbor = v[k..k + n_nu].to_vec();
        k += n_nu;
        let n_alpha = if self.spec.shared_intercept {
            1
        } else {
            self.m
        };
        let alpha = v[k..k + n_alpha].to_vec();
        k += n_alpha;
        let sin_coef = v[k..k + self.spec.harmonics].to_vec();
        k += self.spec.harmonics;
        let cos_coef = v[k..k + self.spec.harmonics].to_vec();
        k += self.spec.harmonics;
        EEParams {
            ar,
            neighbor,
            alpha,
            sin_coef,
            cos_coef,
            phi: v[k],
        }
    }
}

/// Maximum-likelihood fit with deterministic multi-start; refitting the same
/// panel gives identical output.
pub fn ee_fit(panel: &CountPanel, spec: &EEModelSpec) -> Result<EEFit> {
    panel.validate()?;
    if spec.include_neighbor && panel.weights.is_none() {
        return Err(Error::invalid(
            "neighbor term requested but panel has no weights",
        ));
    }
    let pack = Packing {
        spec: spec.clone(),
        m: panel.m(),
    };
    let t0 = first_modeled_period(spec, panel);
    if panel.horizon() < t0 + 3 {
        return Err(Error::invalid("need T >= 3 + lag periods"));
    }
    if spec.per_unit_neighbor && panel.m() * panel.horizon() < 50 * pack.n_params() {
        return Err(Error::invalid(
            "per-unit neighbor coefficients need m*T >= 50 * #params",
        ));
    }
    let neg = |z: &[f64]| -> f64 {
        let params = pack.unpack(z);
        match ee_loglik(panel, spec, &params) {
            Ok(v) => -v,
            Err(_) => f64::INFINITY,
        }
    };
    // deterministic starts around per-unit mean levels
    let mean_of = |i: usize| -> f64 {
        let row = &panel.y[i];
        (row.iter().sum::<u64>() as f64 / row.len() as f64).max(0.1)
    };
    let grand_mean = (0..panel.m()).map(mean_of).sum::<f64>() / panel.m() as f64;
    let mut starts = Vec::new();
    for &ar0 in &[0.1f64, 0.4] {
        let mut z = Vec::with_capacity(pack.n_params());
        if spec.include_ar {
            z.push(ar0.ln());
        }
        if spec.include_neighbor {
            let n_nu = if spec.per_unit_neighbor { panel.m() } else { 1 };
            z.extend(std::iter::repeat_n(0.05f64.ln(), n_nu));
        }
        let endemic_frac = (1.0 - if spec.include_ar { ar0 } else { 0.0 }).max(0.1);
        if spec.shared_intercept {
            z.push((grand_mean * endemic_frac).ln());
        } else {
            for i in 0..panel.m() {
                z.push((mean_of(i) * endemic_frac).ln());
            }
        }
        z.extend(std::iter::repeat_n(0.0, 2 * spec.harmonics));
        z.push(0.1f64.ln());
        starts.push(z);
    }
    let mut best: Option<crate::numeric::OptimResult> = None;
    for s in &starts {
        let r = minimize_bfgs(neg, s, 600);
        if best.as_ref().is_none_or(|b| r.f < b.f) {
            best = Some(r);
        }
    }
    let opt = best.expect("at least one start");
    if !opt.f.is_finite() {
        return Err(Error::NonConvergence(
            "endemic-epidemic likelihood stayed non-finite".into(),
        ));
    }
    let params = pack.unpack(&opt.x);
    let boundary_ar = spec.include_ar && params.ar < 1e-6;

    // observed information in natural scale
    let flat = pack.flatten(&params);
    let negnat = |v: &[f64]| -> f64 {
        let p = pack.unflatten(v);
        if p.ar < 0.0 || p.phi < 0.0 || p.neighbor.iter().any(|&x| x < 0.0) {
            return f64::INFINITY;
        }
        match ee_loglik(panel, spec, &p) {
            Ok(val) => -val,
            Err(_) => f64::INFINITY,
        }
    };
    let hess = fd_hessian(negnat, &flat);
    let dim = flat.len();
    let hmat = nalgebra::DMatrix::from_fn(dim, dim, |r, c| hess[r][c]);
    let se_flat: Vec<f64> = match hmat.try_inverse() {
        Some(cov) => (0..dim)
            .map(|i| {
                let v = cov[(i, i)];
                if v > 0.0 {
                    v.sqrt()
                } else {
                    f64::NAN
                }
            })
            .collect(),
        None => vec![f64::NAN; dim],
    };
    let se = pack.unflatten(&se_flat);
    if !opt.converged && opt.grad_norm > 1e-3 * (1.0 + opt.f.abs()) {
        return Err(Error::NonConvergence(format!(
            "gradient norm {:.3e} after {} iterations",
            opt.grad_norm, opt.iterations
        )));
    }
    Ok(EEFit {
        spec: spec.clone(),
        params,
        se,
        loglik: -opt.f,
        converged: opt.converged,
        gradient_norm: opt.grad_norm,
        iterations: opt.iterations,
        boundary_ar,
    })
}

/// Plug-in one-step-ahead predictive for every unit at period `t`.
pub fn ee_predict_one_step(fit: &EEFit, panel: &CountPanel, t: usize) -> Result<Vec<NegBin>> {
    panel.validate()?;
    let t0 = first_modeled_period(&fit.spec, panel);
    if t < t0 || t >= panel.horizon() {
        return Err(Error::invalid(format!(
            "prediction period must lie in {t0}..{}",
            panel.horizon()
        )));
    }
    (0..panel.m())
        .map(|i| NegBin::new(fit.params.mean(&fit.spec, panel, i, t), fit.params.phi))
        .collect()
}

/// Logarithmic score `-log P(Y = y)`; lower is better. Zero predicted mass
/// scores +inf.
pub fn log_score(predictive: &NegBin, observed: u64) -> f64 {
    -predictive.ln_pmf(observed)
}

/// Mean one-step-ahead log score across units over `t_from..T`.
pub fn mean_log_score(fit: &EEFit, panel: &CountPanel, t_from: usize) -> Result<f64> {
    let t0 = first_modeled_period(&fit.spec, panel).max(t_from);
    let mut acc = 0.0;
    let mut count = 0usize;
    for t in t0..panel.horizon() {
        let preds = ee_predict_one_step(fit, panel, t)?;
        for (i, p) in preds.iter().enumerate() {
            acc += log_score(p, panel.y[i][t]);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::invalid("no periods to score"));
    }
    Ok(acc / count as f64)
}

/// Simulates a panel from the model (initial periods drawn from the endemic
/// mean alone), for tests and synthetic-data generation.
pub fn simulate_ee(
    spec: &EEModelSpec,
    params: &EEParams,
    units: usize,
    horizon: usize,
    weights: Option<Vec<Vec<f64>>>,
    seed: u64,
) -> Result<CountPanel> {
    params.validate(spec, units)?;
    if horizon < 2 {
        return Err(Error::invalid("need a horizon of at least 2"));
    }
    let mut rng = stream_rng(seed, 0);
    let mut panel = CountPanel {
        units: (0..units).map(|i| format!("unit{i}")).collect(),
        y: vec![vec![0u64; horizon]; units],
        week: (0..horizon).map(|t| (t % 52) as u32 + 1).collect(),
        year: (0..horizon).map(|t| 2000 + (t / 52) as i32).collect(),
        weights,
        lag: 1,
    };
    let t0 = first_modeled_period(spec, &panel);
    for t in 0..horizon {
        for i in 0..units {
            let mu = if t < t0 {
                params.eta(spec, i, t).exp()
            } else {
                params.mean(spec, &panel, i, t)
            };
            panel.y[i][t] = NegBin::new(mu, params.phi)?.sample(&mut rng);
        }
    }
    Ok(panel)
}
