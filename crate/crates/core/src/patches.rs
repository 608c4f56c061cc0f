//! Two-patch metapopulation SIR dynamics and the gravity force of infection.
//!
//! The two-patch system moves susceptibles and infectives between patches at
//! rate `m`; recovered individuals accumulate locally, so per-patch totals
//! are not conserved -- only the global total is. Integration is classical
//! fixed-step RK4.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchParams {
    pub lambda: f64,
    pub gamma: f64,
    /// Inter-patch movement rate.
    pub m_move: f64,
    /// Total population entering the `lambda S I / n` terms.
    pub n: f64,
    /// Initial state `(S1, I1, S2, I2)`; R starts at 0 in both patches.
    pub init: [f64; 4],
}

impl PatchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.gamma >= 0.0 && self.m_move >= 0.0) {
            return Err(Error::invalid("rates must be >= 0"));
        }
        if !(self.n > 0.0) {
            return Err(Error::invalid("population size must be > 0"));
        }
        if self.init.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::invalid("initial state must be nonnegative"));
        }
        Ok(())
    }
}

/// Deterministic trajectory sampled every `dt`; state columns are
/// `S1, I1, R1, S2, I2, R2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<[f64; 6]>,
}

fn derivs(p: &PatchParams, y: &[f64; 6]) -> [f64; 6] {
    let [s1, i1, _r1, s2, i2, _r2] = *y;
    let foi1 = p.lambda * s1 * i1 / p.n;
    let foi2 = p.lambda * s2 * i2 / p.n;
    [
        -foi1 + p.m_move * (s2 - s1),
        foi1 - p.gamma * i1 + p.m_move * (i2 - i1),
        p.gamma * i1,
        -foi2 + p.m_move * (s1 - s2),
        foi2 - p.gamma * i2 + p.m_move * (i1 - i2),
        p.gamma * i2,
    ]
}

/// Fixed-step 4th-order Runge-Kutta over `[0, t_end]` with step `dt`,
/// recording every step (including the initial state).
pub fn simulate_two_patch(params: &PatchParams, t_end: f64, dt: f64) -> Result<PatchTrajectory> {
    params.validate()?;
    if !(dt > 0.0) || !(t_end >= dt) {
        return Err(Error::invalid("need dt > 0 and t_end >= dt"));
    }
    let steps = (t_end / dt + 1e-9).floor() as usize;
    let mut y = [
        params.init[0],
        params.init[1],
        0.0,
        params.init[2],
        params.init[3],
        0.0,
    ];
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(y);
    for k in 1..=steps {
        let k1 = derivs(params, &y);
        let mut y2 = y;
        for j in 0..6 {
            y2[j] = y[j] + 0.5 * dt * k1[j];
        }
        let k2 = derivs(params, &y2);
        let mut y3 = y;
        for j in 0..6 {
            y3[j] = y[j] + 0.5 * dt * k2[j];
        }
        let k3 = derivs(params, &y3);
        let mut y4 = y;
        for j in 0..6 {
            y4[j] = y[j] + dt * k3[j];
        }
        let k4 = derivs(params, &y4);
        for j in 0..6 {
            y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        times.push(k as f64 * dt);
        states.push(y);
    }
    Ok(PatchTrajectory { times, states })
}

/// Gravity coupling between communities: exponents, pairwise distances and
/// community sizes, plus the explicit proportionality constant.
#[derive(Debug, Clone, PartialEq)]
pub struct GravityConfig {
    pub theta: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub rho: f64,
    pub sizes: Vec<f64>,
    /// `distances[j][k]`, used for the force from `j` on `k`.
    pub distances: Vec<Vec<f64>>,
}

impl GravityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.tau1 > 0.0 && self.tau2 > 0.0 && self.rho > 0.0) {
            return Err(Error::invalid(
                "theta and the exponents tau1, tau2, rho must be > 0",
            ));
        }
        let k = self.sizes.len();
        if self.distances.len() != k || self.distances.iter().any(|row| row.len() != k) {
            return Err(Error::invalid("distance matrix must be k x k"));
        }
        if self.sizes.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::invalid("community sizes must be > 0"));
        }
        Ok(())
    }
}

/// Transient force of infection from infecteds in location `j` on
/// susceptibles in location `k`: `theta n_k^tau1 I_j^tau2 / d_jk^rho`.
pub fn gravity_force(cfg: &GravityConfig, infected_j: f64, j: usize, k: usize) -> Result<f64> {
    cfg.validate()?;
    if j >= cfg.sizes.len() || k >= cfg.sizes.len() {
        return Err(Error::invalid("location index out of range"));
    }
    if !(infected_j >= 0.0) {
        return Err(Error::invalid("infected count must be >= 0"));
    }
    let d = cfg.distances[j][k];
    if !(d > 0.0) {
        return Err(Error::domain(format!("distance d[{j}][{k}] must be > 0")));
    }
    Ok(cfg.theta * cfg.sizes[k].powf(cfg.tau1) * infected_j.powf(cfg.tau2) / d.powf(cfg.rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn base() -> PatchParams {
        PatchParams {
            lambda: 1.5,
            gamma: 1.0,
            m_move: 0.1,
            n: 1000.0,
            init: [499.0, 1.0, 499.0, 1.0],
        }
    }

    #[test]
    fn decoupled_patch_matches_single_population_sir() {
        let p = PatchParams {
            m_move: 0.0,
            init: [999.0, 1.0, 1000.0, 0.0],
            ..base()
        };
        let traj = simulate_two_patch(&p, 20.0, 0.01).unwrap();
        // reference: single-population SIR integrated the same way
        let single = PatchParams {
            m_move: 0.0,
            init: [999.0, 1.0, 0.0, 0.0],
            ..base()
        };
        let ref_traj = simulate_two_patch(&single, 20.0, 0.01).unwrap();
        for (a, b) in traj.states.iter().zip(ref_traj.states.iter()) {
            assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-8);
            assert_abs_diff_eq!(a[1], b[1], epsilon = 1e-8);
        }
        // patch 2 never sees infection
        for s in &traj.states {
            assert_eq!(s[4], 0.0);
            assert_abs_diff_eq!(s[3], 1000.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn symmetric_initial_state_stays_symmetric() {
        let traj = simulate_two_patch(&base(), 30.0, 0.01).unwrap();
        for s in &traj.states {
            assert_abs_diff_eq!(s[0], s[3], epsilon = 1e-10);
            assert_abs_diff_eq!(s[1], s[4], epsilon = 1e-10);
            assert_abs_diff_eq!(s[2], s[5], epsilon = 1e-10);
        }
    }

    #[test]
    fn global_total_is_conserved() {
        let p = PatchParams {
            init: [700.0, 5.0, 290.0, 5.0],
            ..base()
        };
        let traj = simulate_two_patch(&p, 50.0, 0.01).unwrap();
        let total0: f64 = traj.states[0].iter().sum();
        for s in &traj.states {
            let total: f64 = s.iter().sum();
            assert_abs_diff_eq!(total, total0, epsilon = 1e-9);
        }
    }

    #[test]
    fn rk4_convergence_order_is_at_least_three_and_a_half() {
        let p = PatchParams {
            init: [700.0, 5.0, 290.0, 5.0],
            ..base()
        };
        let endpoint = |dt: f64| {
            let traj = simulate_two_patch(&p, 8.0, dt).unwrap();
            *traj.states.last().unwrap()
        };
        let dts = [0.2, 0.1, 0.05, 0.025];
        let mut errs = Vec::new();
        let reference = endpoint(0.0005);
        for &dt in &dts {
            let e = endpoint(dt);
            let err: f64 = e
                .iter()
                .zip(reference.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            errs.push(err);
        }
        // slope of log(err) vs log(dt) on a least-squares fit
        let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
        let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
        let xm = xs.iter().sum::<f64>() / 4.0;
        let ym = ys.iter().sum::<f64>() / 4.0;
        let slope: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - xm) * (y - ym))
            .sum::<f64>()
            / xs.iter().map(|x| (x - xm) * (x - xm)).sum::<f64>();
        assert!(slope >= 3.5, "observed order {slope}");
    }

    #[test]
    fn gravity_force_hand_example_and_scaling() {
        let cfg = GravityConfig {
            theta: 1.0,
            tau1: 1.0,
            tau2: 1.0,
            rho: 1.0,
            sizes: vec![50.0, 100.0],
            distances: vec![vec![0.0, 2.0], vec![2.0, 0.0]],
        };
        assert_abs_diff_eq!(gravity_force(&cfg, 10.0, 0, 1).unwrap(), 500.0);
        assert_eq!(gravity_force(&cfg, 0.0, 0, 1).unwrap(), 0.0);
        // doubling distance with rho = 2 divides the force by 4
        let mut quad = cfg.clone();
        quad.rho = 2.0;
        let f1 = gravity_force(&quad, 10.0, 0, 1).unwrap();
        quad.distances[0][1] = 4.0;
        let f2 = gravity_force(&quad, 10.0, 0, 1).unwrap();
        assert_abs_diff_eq!(f1 / f2, 4.0, epsilon = 1e-12);
        // zero distance (diagonal) is rejected
        assert!(gravity_force(&cfg, 10.0, 0, 0).is_err());
    }

    #[test]
    fn gravity_force_is_multiplicatively_separable() {
        let cfg = GravityConfig {
            theta: 2.3,
            tau1: 1.4,
            tau2: 0.9,
            rho: 1.7,
            sizes: vec![80.0, 120.0],
            distances: vec![vec![0.0, 3.0], vec![3.0, 0.0]],
        };
        let f = |i: f64| gravity_force(&cfg, i, 0, 1).unwrap();
        // f(a i) / f(i) depends only on a
        let r1 = f(20.0) / f(10.0);
        let r2 = f(8.0) / f(4.0);
        assert_abs_diff_eq!(r1, r2, epsilon = 1e-12);
        assert_abs_diff_eq!(r1, 2f64.powf(0.9), epsilon = 1e-12);
    }
}
