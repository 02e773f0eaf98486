//! Binomial failure-rate estimation.

use crate::error::{Error, Result};

/// Failure-rate estimate with binomial standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub p_fail: f64,
    pub se: f64,
    /// Rule-of-three 95% upper bound, present only when failures = 0.
    pub zero_failure_upper: Option<f64>,
}

/// Estimate p_fail = failures/shots with se = sqrt(p(1-p)/shots).
pub fn estimate_rate(failures: u64, shots: u64) -> Result<RateEstimate> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be >= 1".into()));
    }
    if failures > shots {
        return Err(Error::InvalidParameter(format!(
            "failures {failures} exceed shots {shots}"
        )));
    }
    let n = shots as f64;
    let p_fail = failures as f64 / n;
    let se = (p_fail * (1.0 - p_fail) / n).sqrt();
    let zero_failure_upper = (failures == 0).then_some(3.0 / n);
    Ok(RateEstimate { p_fail, se, zero_failure_upper })
}
