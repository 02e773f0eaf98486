//! Hardware-parameter mapping from shuttling-bus characteristics to error
//! probabilities.
//!
//! Conveyor-mode transport over a lane of length L_s at velocity v exposes a
//! spin to dephasing from valley/field fluctuations with correlation length
//! l_c, and to relaxation over the transit time L_s/v:
//!
//!   p_deph = 2 l_c L_s / (v T2)^2        p_rel = L_s / (v T1)
//!
//! Idle qubits accumulate p_rel_idle = t/T1 and p_deph_idle = (t/T2)^2.
//! Estimates above one are clamped and flagged as outside the perturbative
//! regime. Suggested bus error rates: dephasing plus relaxation for the
//! unbiased channel, dephasing alone for the biased (Z-only) channel.

use crate::circuit::ShuttleChannel;
use crate::error::{Error, Result};

/// Physical parameters of one shuttling-based register, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardwareParams {
    /// Relaxation time (s).
    pub t1: f64,
    /// Dephasing time (s).
    pub t2: f64,
    /// Noise correlation length along the lane (m).
    pub l_c: f64,
    /// Shuttle lane length (m).
    pub l_s: f64,
    /// Shuttle velocity (m/s).
    pub v: f64,
    /// Idle window per circuit step (s).
    pub t_idle: f64,
}

impl HardwareParams {
    /// Typical published scales: T1 = 1 s, T2 = 20 us, l_c = 0.1 um,
    /// L_s = 10 um, v = 2 m/s, idle 1 us.
    pub fn typical() -> HardwareParams {
        HardwareParams { t1: 1.0, t2: 20e-6, l_c: 0.1e-6, l_s: 10e-6, v: 2.0, t_idle: 1e-6 }
    }

    fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("t1", self.t1),
            ("t2", self.t2),
            ("l_c", self.l_c),
            ("l_s", self.l_s),
            ("v", self.v),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "hardware parameter {name} must be positive, got {value}"
                )));
            }
        }
        if !(self.t_idle >= 0.0 && self.t_idle.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "hardware parameter t_idle must be non-negative, got {}",
                self.t_idle
            )));
        }
        Ok(())
    }
}

/// A probability estimate, clamped to 1 when the formula leaves the
/// perturbative regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbEstimate {
    pub p: f64,
    /// True when the raw value reached or exceeded 1 and was clamped.
    pub clamped: bool,
}

fn clamp(raw: f64) -> ProbEstimate {
    ProbEstimate { p: raw.min(1.0), clamped: raw >= 1.0 }
}

/// Dephasing probability per shuttle: 2 l_c L_s / (v T2)^2.
pub fn dephasing_probability(hp: &HardwareParams) -> Result<ProbEstimate> {
    hp.validate()?;
    let vt2 = hp.v * hp.t2;
    Ok(clamp(2.0 * hp.l_c * hp.l_s / (vt2 * vt2)))
}

/// Relaxation probability per shuttle: L_s / (v T1).
pub fn relaxation_probability(hp: &HardwareParams) -> Result<ProbEstimate> {
    hp.validate()?;
    Ok(clamp(hp.l_s / (hp.v * hp.t1)))
}

/// Idle-window probabilities: (t/T1, (t/T2)^2).
pub fn idle_probabilities(hp: &HardwareParams) -> Result<(ProbEstimate, ProbEstimate)> {
    hp.validate()?;
    let rel = hp.t_idle / hp.t1;
    let deph = hp.t_idle / hp.t2;
    Ok((clamp(rel), clamp(deph * deph)))
}

/// Suggested bus error rate for a shuttle channel: the biased (Z-only)
/// channel carries dephasing alone, the unbiased one adds relaxation.
pub fn suggested_ber(hp: &HardwareParams, channel: ShuttleChannel) -> Result<f64> {
    let deph = dephasing_probability(hp)?;
    let rel = relaxation_probability(hp)?;
    Ok(match channel {
        ShuttleChannel::Biased => deph.p,
        ShuttleChannel::Unbiased => (deph.p + rel.p).min(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn test_typical_dephasing_probability() {
        // 2 * 0.1e-6 * 10e-6 / (2 * 20e-6)^2 = 1.25e-3.
        let est = dephasing_probability(&HardwareParams::typical()).unwrap();
        assert_relative_eq!(est.p, 1.25e-3);
        assert!(!est.clamped);
    }

    #[test]
    fn test_fast_coherent_shuttle_dephasing() {
        let hp = HardwareParams { v: 10.0, t2: 100e-6, ..HardwareParams::typical() };
        assert_relative_eq!(dephasing_probability(&hp).unwrap().p, 2e-6);
    }

    #[test]
    fn test_typical_relaxation_probability() {
        // 10e-6 / (2 * 1) = 5e-6.
        let est = relaxation_probability(&HardwareParams::typical()).unwrap();
        assert_relative_eq!(est.p, 5e-6);
        let faster = HardwareParams { v: 4.0, ..HardwareParams::typical() };
        assert_relative_eq!(relaxation_probability(&faster).unwrap().p, est.p / 2.0);
    }

    #[test]
    fn test_dephasing_dominates_relaxation_at_typical_scales() {
        let hp = HardwareParams::typical();
        let deph = dephasing_probability(&hp).unwrap().p;
        let rel = relaxation_probability(&hp).unwrap().p;
        assert!(deph / rel >= 100.0, "ratio {}", deph / rel);
    }

    #[test]
    fn test_idle_probabilities_and_clamping() {
        let hp = HardwareParams { t_idle: 1e-6, t2: 100e-6, ..HardwareParams::typical() };
        let (_, deph) = idle_probabilities(&hp).unwrap();
        assert_relative_eq!(deph.p, 1e-4);
        let zero = HardwareParams { t_idle: 0.0, ..HardwareParams::typical() };
        assert_eq!(idle_probabilities(&zero).unwrap(), (clamp(0.0), clamp(0.0)));
        // An idle window of T1 exhausts the relaxation budget entirely.
        let long = HardwareParams { t_idle: 1.0, ..HardwareParams::typical() };
        let (rel, _) = idle_probabilities(&long).unwrap();
        assert_eq!(rel.p, 1.0);
        assert!(rel.clamped);
    }

    #[test]
    fn test_biased_suggestion_is_dephasing_only() {
        let hp = HardwareParams::typical();
        let biased = suggested_ber(&hp, ShuttleChannel::Biased).unwrap();
        let unbiased = suggested_ber(&hp, ShuttleChannel::Unbiased).unwrap();
        assert_relative_eq!(biased, 1.25e-3);
        assert_relative_eq!(unbiased, 1.25e-3 + 5e-6);
    }

    #[test]
    fn test_nonpositive_parameters_rejected() {
        for field in 0..5 {
            let mut hp = HardwareParams::typical();
            match field {
                0 => hp.t1 = 0.0,
                1 => hp.t2 = -1.0,
                2 => hp.l_c = 0.0,
                3 => hp.l_s = f64::NAN,
                _ => hp.v = 0.0,
            }
            assert!(dephasing_probability(&hp).is_err(), "field {field}");
        }
    }

    proptest! {
        /// Rescaling lengths by k_len and times by k_t (velocity by their
        /// ratio) leaves every probability unchanged: the formulas are
        /// dimensionless combinations.
        #[test]
        fn prop_estimates_invariant_under_unit_rescaling(
            k_len in 1e-3f64..1e3,
            k_t in 1e-3f64..1e3,
        ) {
            let base = HardwareParams::typical();
            let scaled = HardwareParams {
                t1: base.t1 * k_t,
                t2: base.t2 * k_t,
                l_c: base.l_c * k_len,
                l_s: base.l_s * k_len,
                v: base.v * k_len / k_t,
                t_idle: base.t_idle * k_t,
            };
            let a = dephasing_probability(&base).unwrap().p;
            let b = dephasing_probability(&scaled).unwrap().p;
            prop_assert!((a - b).abs() <= 1e-12 * a.max(b));
            let a = relaxation_probability(&base).unwrap().p;
            let b = relaxation_probability(&scaled).unwrap().p;
            prop_assert!((a - b).abs() <= 1e-12 * a.max(b));
            let (ar, ad) = idle_probabilities(&base).unwrap();
            let (br, bd) = idle_probabilities(&scaled).unwrap();
            prop_assert!((ar.p - br.p).abs() <= 1e-12 * ar.p.max(br.p));
            prop_assert!((ad.p - bd.p).abs() <= 1e-12 * ad.p.max(bd.p));
        }

        /// Faster or more coherent shuttling strictly reduces both error
        /// mechanisms.
        #[test]
        fn prop_estimates_decrease_with_speed_and_coherence(factor in 1.01f64..100.0) {
            let base = HardwareParams::typical();
            let deph = dephasing_probability(&base).unwrap().p;
            let rel = relaxation_probability(&base).unwrap().p;
            let faster = HardwareParams { v: base.v * factor, ..base };
            prop_assert!(dephasing_probability(&faster).unwrap().p < deph);
            prop_assert!(relaxation_probability(&faster).unwrap().p < rel);
            let coherent = HardwareParams { t2: base.t2 * factor, ..base };
            prop_assert!(dephasing_probability(&coherent).unwrap().p < deph);
            let lasting = HardwareParams { t1: base.t1 * factor, ..base };
            prop_assert!(relaxation_probability(&lasting).unwrap().p < rel);
        }
    }
}
