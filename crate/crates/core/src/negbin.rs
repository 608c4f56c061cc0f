//! Negative binomial distribution in mean/overdispersion form.
//!
//! Parameterized so that `Var(Y) = mu (1 + phi mu)`; in size/probability
//! terms this is `size r = 1/phi`, `p = 1/(1 + phi mu)`. `phi = 0` is the
//! Poisson limit, and the log pmf below is continuous in `phi` down to 0
//! (no separate Poisson branch is needed for small `phi`).

use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegBin {
    pub mean: f64,
    /// Overdispersion `phi >= 0`; variance is `mean (1 + phi mean)`.
    pub dispersion: f64,
}

impl NegBin {
    pub fn new(mean: f64, dispersion: f64) -> Result<Self> {
        if !(mean > 0.0) || !mean.is_finite() {
            return Err(Error::invalid(format!(
                "NegBin mean must be > 0, got {mean}"
            )));
        }
        if !(dispersion >= 0.0) || !dispersion.is_finite() {
            return Err(Error::invalid(format!(
                "NegBin dispersion must be >= 0, got {dispersion}"
            )));
        }
        Ok(NegBin { mean, dispersion })
    }

    /// Log pmf, evaluated in a form stable for any `phi >= 0`:
    ///
    /// `sum_{k<y} ln(1 + k phi) - ln y! - ln(1 + phi mu)/phi + y ln mu - y ln(1 + phi mu)`
    pub fn ln_pmf(&self, y: u64) -> f64 {
        let mu = self.mean;
        let phi = self.dispersion;
        let yf = y as f64;
        let mut s = 0.0;
        if phi > 0.0 {
            for k in 0..y {
                s += (k as f64 * phi).ln_1p();
            }
        }
        let exp_term = if phi > 0.0 {
            (phi * mu).ln_1p() / phi
        } else {
            mu
        };
        s - statrs::function::factorial::ln_factorial(y) - exp_term + yf * mu.ln()
            - yf * (phi * mu).ln_1p()
    }

    pub fn pmf(&self, y: u64) -> f64 {
        self.ln_pmf(y).exp()
    }

    /// P(Y <= y), by the multiplicative pmf recurrence from 0.
    pub fn cdf(&self, y: u64) -> f64 {
        let mut p = self.pmf(0);
        let mut acc = p;
        for k in 0..y {
            p *= self.pmf_ratio(k);
            acc += p;
        }
        acc.min(1.0)
    }

    /// pmf(k+1) / pmf(k).
    fn pmf_ratio(&self, k: u64) -> f64 {
        let kf = k as f64;
        if self.dispersion > 0.0 {
            let r = 1.0 / self.dispersion;
            (kf + r) / (kf + 1.0) * (self.dispersion * self.mean)
                / (1.0 + self.dispersion * self.mean)
        } else {
            self.mean / (kf + 1.0)
        }
    }

    /// Smallest `y` with `P(Y <= y) >= q`.
    pub fn quantile(&self, q: f64) -> u64 {
        assert!((0.0..1.0).contains(&q), "quantile level must be in [0,1)");
        let sd = (self.mean * (1.0 + self.dispersion * self.mean)).sqrt();
        let cap = (self.mean + 30.0 * sd + 1000.0) as u64;
        let mut p = self.pmf(0);
        let mut acc = p;
        let mut y = 0;
        while acc < q && y < cap {
            p *= self.pmf_ratio(y);
            y += 1;
            acc += p;
        }
        y
    }

    /// Gamma-Poisson mixture draw (mean-preserving).
    pub fn sample<R: Rng>(&self, rng: &mut R) -> u64 {
        let lambda = if self.dispersion > 0.0 {
            let shape = 1.0 / self.dispersion;
            let scale = self.dispersion * self.mean;
            Gamma::new(shape, scale).expect("valid gamma").sample(rng)
        } else {
            self.mean
        };
        if lambda <= 0.0 {
            return 0;
        }
        Poisson::new(lambda).expect("valid poisson").sample(rng) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hand_evaluated_pmf() {
        // mu = 3.5, phi = 0.1 (r = 10): ln pmf(4) from a direct high-precision
        // evaluation of Gamma(y+r)/(Gamma(r) y!) p^r (1-p)^y.
        let nb = NegBin::new(3.5, 0.1).unwrap();
        assert_abs_diff_eq!(nb.ln_pmf(4), -1.82847024960544, epsilon = 1e-12);
    }

    #[test]
    fn poisson_limit() {
        let nb = NegBin::new(2.0, 1e-12).unwrap();
        for y in 0..20u64 {
            let pois = y as f64 * 2f64.ln() - 2.0 - statrs::function::factorial::ln_factorial(y);
            assert_abs_diff_eq!(nb.ln_pmf(y), pois, epsilon = 1e-6);
        }
    }

    #[test]
    fn normalizes_to_one() {
        for (mu, phi) in [(0.5, 0.0), (3.5, 0.1), (12.0, 0.7), (40.0, 2.0)] {
            let nb = NegBin::new(mu, phi).unwrap();
            let tail_cut = nb.quantile(1.0 - 1e-10);
            let total = nb.cdf(tail_cut + 50);
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn sample_moments_match() {
        // empirical variance of 10^6 draws within 1% of mu(1 + phi mu)
        let (mu, phi) = (6.0, 0.4);
        let nb = NegBin::new(mu, phi).unwrap();
        let mut rng = stream_rng(42, 0);
        let n = 1_000_000usize;
        let (mut s1, mut s2) = (0.0f64, 0.0f64);
        for _ in 0..n {
            let y = nb.sample(&mut rng) as f64;
            s1 += y;
            s2 += y * y;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        let target = mu * (1.0 + phi * mu);
        assert!((mean - mu).abs() < 0.01 * mu, "mean {mean} vs {mu}");
        assert!(
            (var - target).abs() < 0.01 * target,
            "var {var} vs {target}"
        );
    }

    #[test]
    fn quantile_is_cdf_inverse() {
        let nb = NegBin::new(10.0, 0.2).unwrap();
        for q in [0.5, 0.9, 0.995] {
            let g = nb.quantile(q);
            assert!(nb.cdf(g) >= q);
            if g > 0 {
                assert!(nb.cdf(g - 1) < q);
            }
        }
    }
}
