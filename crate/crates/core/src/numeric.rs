//! Small numerical kit: bracketed root finding, finite differences, a
//! quasi-Newton minimizer and a Poisson log-linear regression.
//!
//! Everything here is deterministic; optimizers take fixed starting points
//! and run to fixed tolerances so repeated fits give identical output.

use crate::error::{Error, Result};

/// Bisection on `[lo, hi]`, assuming `f(lo)` and `f(hi)` have opposite signs.
///
/// Runs until the bracket width falls below `width_tol` (or 200 iterations),
/// which is enough to locate a simple root to near machine precision.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, width_tol: f64) -> f64 {
    let mut flo = f(lo);
    debug_assert!(flo * f(hi) <= 0.0, "bisect: no sign change on bracket");
    for _ in 0..200 {
        if hi - lo <= width_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if flo * fmid <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    0.5 * (lo + hi)
}

/// Central-difference gradient.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = 1e-6 * (1.0 + x[i].abs());
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Central-difference Hessian (symmetrized).
pub fn fd_hessian<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> Vec<Vec<f64>> {
    let p = x.len();
    let h: Vec<f64> = x.iter().map(|xi| 1e-4 * (1.0 + xi.abs())).collect();
    let mut hess = vec![vec![0.0; p]; p];
    let f0 = f(x);
    let mut xp = x.to_vec();
    for i in 0..p {
        // diagonal: (f(x+h) - 2 f(x) + f(x-h)) / h^2
        xp[i] = x[i] + h[i];
        let fp = f(&xp);
        xp[i] = x[i] - h[i];
        let fm = f(&xp);
        xp[i] = x[i];
        hess[i][i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in (i + 1)..p {
            xp[i] = x[i] + h[i];
            xp[j] = x[j] + h[j];
            let fpp = f(&xp);
            xp[j] = x[j] - h[j];
            let fpm = f(&xp);
            xp[i] = x[i] - h[i];
            let fmm = f(&xp);
            xp[j] = x[j] + h[j];
            let fmp = f(&xp);
            xp[i] = x[i];
            xp[j] = x[j];
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    hess
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// BFGS minimizer with numerical gradients and backtracking line search.
///
/// Non-finite objective values are treated as +inf by the line search, so the
/// iterates stay inside the region where `f` is defined.
pub fn minimize_bfgs<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], max_iter: usize) -> OptimResult {
    let p = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut x = x0.to_vec();
    let mut fx = eval(&x);
    if !fx.is_finite() {
        return OptimResult {
            x,
            f: fx,
            grad_norm: f64::INFINITY,
            iterations: 0,
            converged: false,
        };
    }
    let mut g = fd_gradient(eval, &x);
    // inverse Hessian approximation, started at identity
    let mut hinv = vec![vec![0.0; p]; p];
    for i in 0..p {
        hinv[i][i] = 1.0;
    }
    let mut iterations = 0;
    let mut converged = false;
    for it in 0..max_iter {
        iterations = it + 1;
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm < 1e-8 * (1.0 + fx.abs()) {
            converged = true;
            break;
        }
        // direction d = -Hinv g
        let mut d = vec![0.0; p];
        for i in 0..p {
            for j in 0..p {
                d[i] -= hinv[i][j] * g[j];
            }
        }
        let mut slope: f64 = d.iter().zip(&g).map(|(di, gi)| di * gi).sum();
        if slope >= 0.0 {
            // reset to steepest descent if the approximation degenerated
            for i in 0..p {
                for j in 0..p {
                    hinv[i][j] = if i == j { 1.0 } else { 0.0 };
                }
                d[i] = -g[i];
            }
            slope = -g.iter().map(|v| v * v).sum::<f64>();
        }
        // backtracking Armijo search
        let mut step = 1.0;
        let mut xn = x.clone();
        let mut fn_ = f64::INFINITY;
        let mut ok = false;
        for _ in 0..60 {
            for i in 0..p {
                xn[i] = x[i] + step * d[i];
            }
            fn_ = eval(&xn);
            if fn_ <= fx + 1e-4 * step * slope {
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if !ok {
            converged = g.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-5 * (1.0 + fx.abs());
            break;
        }
        let gn = fd_gradient(eval, &xn);
        // BFGS update with curvature guard
        let s: Vec<f64> = (0..p).map(|i| xn[i] - x[i]).collect();
        let yv: Vec<f64> = (0..p).map(|i| gn[i] - g[i]).collect();
        let sy: f64 = s.iter().zip(&yv).map(|(a, b)| a * b).sum();
        if sy > 1e-12 {
            let rho = 1.0 / sy;
            // Hinv = (I - rho s y') Hinv (I - rho y s') + rho s s'
            let mut hy = vec![0.0; p];
            for i in 0..p {
                for j in 0..p {
                    hy[i] += hinv[i][j] * yv[j];
                }
            }
            let yhy: f64 = yv.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..p {
                for j in 0..p {
                    hinv[i][j] += rho * rho * yhy * s[i] * s[j] + rho * s[i] * s[j]
                        - rho * (s[i] * hy[j] + hy[i] * s[j]);
                }
            }
        }
        x = xn;
        fx = fn_;
        g = gn;
    }
    let grad_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    OptimResult {
        x,
        f: fx,
        grad_norm,
        iterations,
        converged: converged || grad_norm < 1e-5 * (1.0 + fx.abs()),
    }
}

#[derive(Debug, Clone)]
pub struct PoissonFit {
    /// Intercept and slope of `log mu = b0 + b1 t`.
    pub coef: [f64; 2],
    /// Covariance of the coefficients from the information matrix.
    pub cov: [[f64; 2]; 2],
    /// Pearson X^2 / (N - 2), floored at 1 when N <= 2.
    pub dispersion: f64,
    pub fitted: Vec<f64>,
    pub converged: bool,
}

/// Poisson log-linear regression of counts on a single covariate via IRLS.
pub fn poisson_loglinear(t: &[f64], y: &[f64]) -> Result<PoissonFit> {
    let n = t.len();
    if n != y.len() || n < 2 {
        return Err(Error::invalid("regression needs >= 2 points"));
    }
    let total: f64 = y.iter().sum();
    if total <= 0.0 {
        return Err(Error::domain("all counts are zero in regression window"));
    }
    let mut b0 = (total / n as f64).max(1e-8).ln();
    let mut b1 = 0.0;
    let mut converged = false;
    let mut cov = [[0.0; 2]; 2];
    for _ in 0..100 {
        // weighted normal equations for the working response
        let (mut sw, mut swt, mut swtt, mut sz, mut szt) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            let eta = b0 + b1 * t[i];
            let mu = eta.exp().max(1e-12);
            let w = mu;
            let z = eta + (y[i] - mu) / mu;
            sw += w;
            swt += w * t[i];
            swtt += w * t[i] * t[i];
            sz += w * z;
            szt += w * z * t[i];
        }
        let det = sw * swtt - swt * swt;
        if det.abs() < 1e-12 * sw.max(1.0) {
            return Err(Error::NonConvergence(
                "singular information in count regression".into(),
            ));
        }
        let nb0 = (swtt * sz - swt * szt) / det;
        let nb1 = (sw * szt - swt * sz) / det;
        let delta = (nb0 - b0).abs() + (nb1 - b1).abs();
        b0 = nb0;
        b1 = nb1;
        cov = [[swtt / det, -swt / det], [-swt / det, sw / det]];
        if delta < 1e-12 {
            converged = true;
            break;
        }
    }
    let fitted: Vec<f64> = t.iter().map(|ti| (b0 + b1 * ti).exp()).collect();
    let mut x2 = 0.0;
    for i in 0..n {
        x2 += (y[i] - fitted[i]).powi(2) / fitted[i].max(1e-12);
    }
    let dispersion = if n > 2 {
        (x2 / (n as f64 - 2.0)).max(1.0)
    } else {
        1.0
    };
    Ok(PoissonFit {
        coef: [b0, b1],
        cov,
        dispersion,
        fitted,
        converged,
    })
}
