//! Complete-data log-likelihood of the general stochastic epidemic: all
//! infection and recovery times observed.

use crate::epidemic::{EventKind, EventLog};
use crate::error::{Error, Result};

/// Evaluates `sum_{non-index infections} log(lambda S(t-) I(t-) / n)`
/// minus `int lambda S I / n du`, plus `#recoveries log(gamma)` minus
/// `int gamma I du`, with the integrals exact over the piecewise-constant
/// counts.
///
/// Returns `-inf` when an observed event has zero intensity (impossible
/// data). Logs with latency events are out of scope here.
pub fn complete_data_loglik(log: &EventLog, lambda: f64, gamma: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !(gamma > 0.0) {
        return Err(Error::invalid("need lambda >= 0 and gamma > 0"));
    }
    if log.events.iter().any(|e| e.kind == EventKind::EndLatency) {
        return Err(Error::invalid(
            "complete-data likelihood covers SIR logs only (no latency events)",
        ));
    }
    if !log.is_complete() {
        return Err(Error::IncompleteLog(
            "complete-data likelihood needs recovery times for all infected".into(),
        ));
    }
    let n = log.n as f64;
    let mut s = log.n as f64;
    let mut i = 0.0f64;
    let mut last_t = 0.0f64;
    let mut event_sum = 0.0f64;
    let mut recoveries = 0u64;
    let mut int_si_over_n = 0.0f64;
    let mut int_i = 0.0f64;
    for (idx, ev) in log.events.iter().enumerate() {
        let dt = ev.time - last_t;
        if dt < 0.0 {
            return Err(Error::invalid("events out of time order"));
        }
        int_si_over_n += lambda * s * i / n * dt;
        int_i += i * dt;
        last_t = ev.time;
        match ev.kind {
            EventKind::Infection => {
                if idx != 0 {
                    let rate = lambda * s * i / n;
                    if rate <= 0.0 {
                        return Ok(f64::NEG_INFINITY);
                    }
                    event_sum += rate.ln();
                }
                s -= 1.0;
                i += 1.0;
            }
            EventKind::Recovery => {
                if i <= 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                recoveries += 1;
                i -= 1.0;
            }
            EventKind::EndLatency => unreachable!(),
        }
    }
    Ok(event_sum - int_si_over_n + recoveries as f64 * gamma.ln() - gamma * int_i)
}
