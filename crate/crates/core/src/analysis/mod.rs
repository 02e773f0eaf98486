//! Statistical analysis of memory-experiment failure counts.
//!
//! - [`rate`]: binomial failure-rate estimates with zero-failure handling;
//! - [`scaling`]: threshold bracketing and the quadratic finite-size
//!   scaling fit over (A, B, C, p_th, nu0);
//! - [`teraquop`]: log-linear suppression fits extrapolated to the distance
//!   reaching a 1e-12 logical failure rate, with cost-profile error bounds.

pub mod rate;
pub mod scaling;
pub mod teraquop;

pub use rate::{estimate_rate, RateEstimate};
pub use scaling::{bracket_threshold, fit_threshold, FitResult, ScanAxis};
pub use teraquop::{teraquop, TeraquopEstimate};

/// One measured sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct DataPoint {
    pub d: u32,
    pub cer: f64,
    pub ber: f64,
    pub shots: u64,
    pub failures: u64,
    pub p_fail: f64,
    pub se: f64,
}

impl DataPoint {
    /// Build a point from raw counts; p_fail and se follow the binomial
    /// estimate.
    pub fn from_counts(
        d: u32,
        cer: f64,
        ber: f64,
        shots: u64,
        failures: u64,
    ) -> crate::Result<DataPoint> {
        let est = estimate_rate(failures, shots)?;
        Ok(DataPoint { d, cer, ber, shots, failures, p_fail: est.p_fail, se: est.se })
    }

    /// Standard error used as a fit weight; zero-failure points substitute
    /// the rule-of-three upper bound so their weight stays finite.
    pub fn fit_se(&self) -> f64 {
        if self.failures == 0 {
            3.0 / self.shots as f64
        } else {
            self.se
        }
    }
}
