//! Prospective outbreak detection on count time series: a Farrington-style
//! threshold detector (log-linear trend fitted to reference values from
//! previous years, negative-binomial predictive quantile) and the count
//! panel container shared with the endemic-epidemic model.

use crate::error::{Error, Result};
use crate::negbin::NegBin;
use crate::numeric::poisson_loglinear;

/// `m` units by `T` periods of counts with period metadata, an optional
/// spatial weight matrix `w[j][i]` (influence of unit j on unit i, zero
/// diagonal) and the neighbor lag `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountPanel {
    pub units: Vec<String>,
    /// `y[i][t]`: unit i, period t.
    pub y: Vec<Vec<u64>>,
    pub week: Vec<u32>,
    pub year: Vec<i32>,
    pub weights: Option<Vec<Vec<f64>>>,
    pub lag: usize,
}

impl CountPanel {
    pub fn new(
        units: Vec<String>,
        y: Vec<Vec<u64>>,
        week: Vec<u32>,
        year: Vec<i32>,
    ) -> Result<Self> {
        let panel = CountPanel {
            units,
            y,
            week,
            year,
            weights: None,
            lag: 1,
        };
        panel.validate()?;
        Ok(panel)
    }

    pub fn m(&self) -> usize {
        self.y.len()
    }

    pub fn horizon(&self) -> usize {
        self.y.first().map_or(0, |row| row.len())
    }

    pub fn with_weights(mut self, weights: Vec<Vec<f64>>, lag: usize) -> Result<Self> {
        self.weights = Some(weights);
        self.lag = lag;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.y.len();
        if m == 0 {
            return Err(Error::invalid("panel needs at least one unit"));
        }
        if self.units.len() != m {
            return Err(Error::invalid("unit labels and rows disagree"));
        }
        let t = self.y[0].len();
        if self.y.iter().any(|row| row.len() != t) {
            return Err(Error::invalid("panel rows have unequal length"));
        }
        if self.week.len() != t || self.year.len() != t {
            return Err(Error::invalid("period metadata length must equal T"));
        }
        if self.lag < 1 {
            return Err(Error::invalid("neighbor lag must be >= 1"));
        }
        if let Some(w) = &self.weights {
            if w.len() != m || w.iter().any(|row| row.len() != m) {
                return Err(Error::invalid("weight matrix must be m x m"));
            }
            for (j, row) in w.iter().enumerate() {
                if row.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                    return Err(Error::invalid("weights must be >= 0 and finite"));
                }
                if row[j] != 0.0 {
                    return Err(Error::invalid("weight matrix diagonal must be zero"));
                }
            }
        }
        Ok(())
    }
}

/// Normalizes incoming weights: each column `i` of `w[j][i]` is divided by
/// its sum, so the neighbor term becomes a weighted average of the lagged
/// neighbor counts. Weights are used as supplied unless this is requested.
pub fn normalize_incoming_weights(weights: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = weights.len();
    let mut out = weights.to_vec();
    for i in 0..m {
        let total: f64 = (0..m).map(|j| weights[j][i]).sum();
        if total > 0.0 {
            for row in out.iter_mut() {
                row[i] /= total;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarringtonConfig {
    /// Years of history to draw reference values from.
    pub years_back: usize,
    /// Half-window of weeks around the current week in each history year.
    pub half_window: usize,
    /// Predictive quantile level for the threshold (default 0.995).
    pub quantile: f64,
    /// Below this total over the reference set the week is not assessable.
    pub min_reference_total: u64,
    /// Periods per year (52 for weekly data).
    pub period: usize,
}

impl Default for FarringtonConfig {
    fn default() -> Self {
        FarringtonConfig {
            years_back: 5,
            half_window: 3,
            quantile: 0.995,
            min_reference_total: 5,
            period: 52,
        }
    }
}

impl FarringtonConfig {
    pub fn validate(&self) -> Result<()> {
        if self.years_back < 1 {
            return Err(Error::invalid("need at least one year of history"));
        }
        if !(self.quantile > 0.5 && self.quantile < 1.0) {
            return Err(Error::invalid("quantile level must be in (0.5, 1)"));
        }
        if self.period < 2 * self.half_window + 1 {
            return Err(Error::invalid("half window too wide for the period"));
        }
        Ok(())
    }
}

/// Outcome of assessing a single week.
#[derive(Debug, Clone, PartialEq)]
pub enum FarringtonStatus {
    Assessed {
        /// Model-predicted expectation for the current week.
        mu: f64,
        /// Predictive quantile threshold `g_s`.
        threshold: f64,
        alarm: bool,
    },
    NotAssessable {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarringtonAssessment {
    pub index: usize,
    pub observed: u64,
    pub status: FarringtonStatus,
}

/// Assesses index `s` of a single-unit series: fit an overdispersed
/// log-linear trend to the reference values (same week +/- half_window in
/// each of the previous `years_back` years), predict `mu_s`, and alarm when
/// the observation exceeds the `quantile`-level negative-binomial predictive
/// threshold.
pub fn farrington_threshold(
    series: &[u64],
    s: usize,
    cfg: &FarringtonConfig,
) -> Result<FarringtonAssessment> {
    cfg.validate()?;
    if s >= series.len() {
        return Err(Error::invalid("index outside the series"));
    }
    let mut ref_t = Vec::new();
    let mut ref_y = Vec::new();
    for back in 1..=cfg.years_back {
        let center = s as i64 - (back * cfg.period) as i64;
        for off in -(cfg.half_window as i64)..=(cfg.half_window as i64) {
            let idx = center + off;
            if idx < 0 || idx >= s as i64 {
                return Ok(FarringtonAssessment {
                    index: s,
                    observed: series[s],
                    status: FarringtonStatus::NotAssessable {
                        reason: format!("needs {} years of history", cfg.years_back),
                    },
                });
            }
            ref_t.push(idx as f64);
            ref_y.push(series[idx as usize] as f64);
        }
    }
    let total: f64 = ref_y.iter().sum();
    if (total as u64) < cfg.min_reference_total {
        return Ok(FarringtonAssessment {
            index: s,
            observed: series[s],
            status: FarringtonStatus::NotAssessable {
                reason: format!(
                    "reference total {total} below minimum {}",
                    cfg.min_reference_total
                ),
            },
        });
    }
    let fit = poisson_loglinear(&ref_t, &ref_y)?;
    let sf = s as f64;
    let mu = (fit.coef[0] + fit.coef[1] * sf).exp();
    if !mu.is_finite() || mu <= 0.0 {
        return Err(Error::NonConvergence(
            "reference model produced a degenerate prediction".into(),
        ));
    }
    // predictive variance = observation variance (quasi-Poisson, dispersion
    // * mu) plus the variance of the predicted mean itself; both scale with
    // the estimated dispersion
    let var_eta =
        fit.dispersion * (fit.cov[0][0] + 2.0 * sf * fit.cov[0][1] + sf * sf * fit.cov[1][1]);
    let pred_var = fit.dispersion * mu + mu * mu * var_eta;
    // match a NegBin to the predictive mean and variance
    let phi = ((pred_var / mu - 1.0) / mu).max(0.0);
    let predictive = NegBin::new(mu, phi)?;
    let threshold = predictive.quantile(cfg.quantile) as f64;
    let alarm = (series[s] as f64) > threshold;
    Ok(FarringtonAssessment {
        index: s,
        observed: series[s],
        status: FarringtonStatus::Assessed {
            mu,
            threshold,
            alarm,
        },
    })
}

/// Full prospective run over a series.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorRun {
    pub assessments: Vec<FarringtonAssessment>,
    /// Smallest assessable index with an alarm; `None` when no alarm fires.
    pub alarm_time: Option<usize>,
}

/// Assesses every index in order and reports the alarm time
/// `T_a = min{ s : y_s > g_s }` (never silently passing unassessable weeks).
pub fn run_detector(series: &[u64], cfg: &FarringtonConfig) -> Result<DetectorRun> {
    cfg.validate()?;
    let mut assessments = Vec::with_capacity(series.len());
    let mut alarm_time = None;
    for s in 0..series.len() {
        let a = farrington_threshold(series, s, cfg)?;
        if alarm_time.is_none() {
            if let FarringtonStatus::Assessed { alarm: true, .. } = a.status {
                alarm_time = Some(s);
            }
        }
        assessments.push(a);
    }
    Ok(DetectorRun {
        assessments,
        alarm_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn flat_history(years: usize, period: usize, level: u64) -> Vec<u64> {
        // pad past b*period so the earliest reference window fits
        vec![level; years * period + 8]
    }

    #[test]
    fn observation_at_expectation_never_alarms() {
        let cfg = FarringtonConfig {
            years_back: 3,
            period: 52,
            ..Default::default()
        };
        let series = flat_history(3, 52, 10);
        let s = series.len() - 1;
        let a = farrington_threshold(&series, s, &cfg).unwrap();
        match a.status {
            FarringtonStatus::Assessed { mu, alarm, .. } => {
                assert!((mu - 10.0).abs() < 0.5, "mu = {mu}");
                assert!(!alarm);
            }
            _ => panic!("should be assessable"),
        }
    }

    #[test]
    fn large_spike_alarms() {
        let cfg = FarringtonConfig {
            years_back: 3,
            period: 52,
            ..Default::default()
        };
        // fixed synthetic Poisson-like reference values around 10
        let mut rng = stream_rng(17, 0);
        let mut series: Vec<u64> = (0..3 * 52 + 8)
            .map(|_| NegBin::new(10.0, 1e-9).unwrap().sample(&mut rng))
            .collect();
        series.push(100);
        let s = series.len() - 1;
        let a = farrington_threshold(&series, s, &cfg).unwrap();
        match a.status {
            FarringtonStatus::Assessed {
                threshold, alarm, ..
            } => {
                assert!(threshold < 100.0);
                assert!(alarm);
            }
            _ => panic!("should be assessable"),
        }
    }

    #[test]
    fn raising_the_observation_never_cancels_an_alarm() {
        let cfg = FarringtonConfig {
            years_back: 2,
            period: 52,
            ..Default::default()
        };
        let mut series = flat_history(2, 52, 7);
        let s = series.len() - 1;
        let mut alarmed = false;
        let mut prev_threshold = None;
        for y in [7u64, 15, 20, 40, 80, 200] {
            series[s] = y;
            let a = farrington_threshold(&series, s, &cfg).unwrap();
            if let FarringtonStatus::Assessed {
                alarm, threshold, ..
            } = a.status
            {
                if let Some(p) = prev_threshold {
                    assert_eq!(threshold, p, "threshold must not depend on y_s");
                }
                prev_threshold = Some(threshold);
                if alarmed {
                    assert!(alarm, "alarm turned off as y_s grew");
                }
                alarmed = alarm;
            }
        }
        assert!(alarmed);
    }

    #[test]
    fn insufficient_history_is_not_assessable() {
        let cfg = FarringtonConfig {
            years_back: 5,
            period: 52,
            ..Default::default()
        };
        let series = flat_history(2, 52, 10);
        let a = farrington_threshold(&series, series.len() - 1, &cfg).unwrap();
        assert!(matches!(a.status, FarringtonStatus::NotAssessable { .. }));
    }

    #[test]
    fn all_zero_history_never_alarms_or_assesses() {
        let cfg = FarringtonConfig {
            years_back: 2,
            period: 52,
            ..Default::default()
        };
        let series = vec![0u64; 2 * 52 + 30];
        let run = run_detector(&series, &cfg).unwrap();
        assert_eq!(run.alarm_time, None);
        for a in &run.assessments {
            assert!(matches!(a.status, FarringtonStatus::NotAssessable { .. }));
        }
    }

    #[test]
    fn incoming_weight_normalization_sums_columns_to_one() {
        let w = vec![
            vec![0.0, 2.0, 1.0],
            vec![4.0, 0.0, 3.0],
            vec![4.0, 2.0, 0.0],
        ];
        let norm = normalize_incoming_weights(&w);
        for i in 0..3 {
            let col: f64 = (0..3).map(|j| norm[j][i]).sum();
            assert!((col - 1.0).abs() < 1e-12);
        }
        assert_eq!(norm[1][0], 0.5);
        // zero columns are left alone
        let w0 = vec![vec![0.0, 1.0], vec![0.0, 0.0]];
        let n0 = normalize_incoming_weights(&w0);
        assert_eq!(n0[0][0], 0.0);
        assert_eq!(n0[1][0], 0.0);
    }

    #[test]
    fn panel_validation_catches_shape_and_weight_errors() {
        let ok = CountPanel::new(
            vec!["a".into(), "b".into()],
            vec![vec![1, 2, 3], vec![4, 5, 6]],
            vec![1, 2, 3],
            vec![2020, 2020, 2020],
        )
        .unwrap();
        assert_eq!(ok.m(), 2);
        assert_eq!(ok.horizon(), 3);
        assert!(CountPanel::new(
            vec!["a".into()],
            vec![vec![1, 2], vec![3, 4]],
            vec![1, 2],
            vec![2020, 2020],
        )
        .is_err());
        let bad_diag = ok
            .clone()
            .with_weights(vec![vec![1.0, 1.0], vec![1.0, 0.0]], 1);
        assert!(bad_diag.is_err());
        let good = ok.with_weights(vec![vec![0.0, 1.0], vec![1.0, 0.0]], 1);
        assert!(good.is_ok());
    }
}
