//! Shared statistical helpers for the integration suites. Oracles here are
//! deliberately independent of the library implementation paths they check.

#![allow(dead_code)]

/// Bisection solver for `1 - tau = exp(-r0 tau)`, independent of the
/// library's root finder.
pub fn final_size_oracle(r0: f64) -> f64 {
    assert!(r0 > 1.0);
    let f = |t: f64| 1.0 - t - (-r0 * t).exp();
    let (mut lo, mut hi) = (1e-9, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// One-sided Welch z statistic for mean(a) > mean(b).
pub fn welch_z(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (variance(a), variance(b));
    (ma - mb) / (va / a.len() as f64 + vb / b.len() as f64).sqrt()
}

/// One-sample Kolmogorov-Smirnov statistic against a CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let c = cdf(x);
        d = d.max(((i + 1) as f64 / n - c).abs());
        d = d.max((c - i as f64 / n).abs());
    }
    d
}

/// Asymptotic two-sided KS critical value at the 5% level.
pub fn ks_critical_5(n: usize) -> f64 {
    1.3581 / (n as f64).sqrt()
}

/// Pearson chi-square statistic for observed counts against expected.
pub fn chi2_statistic(observed: &[f64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .filter(|(_, &e)| e > 0.0)
        .map(|(&o, &e)| (o - e) * (o - e) / e)
        .sum()
}

/// Upper 5% quantile of chi-square with `df` degrees of freedom.
pub fn chi2_critical_5(df: usize) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    ChiSquared::new(df as f64).unwrap().inverse_cdf(0.95)
}

/// Simpson's rule on a uniform grid over `[a, b]` (n must be even).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2) && n >= 2);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}
