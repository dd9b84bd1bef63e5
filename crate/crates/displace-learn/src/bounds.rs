//! Closed-form sample-complexity algebra.
//!
//! Everything here is computed in log space and exponentiated on output —
//! the interesting regimes reach 10¹⁸ and beyond — and results carry both
//! linear and log10 fields.
//!
//! Conventions: ε is the additive estimation error, δ the failure
//! probability, ε₀ the three-peak side-peak half-height, κ the resolution
//! constant (the learning radius is |β|² ≤ κ·modes), and mn the total mode
//! count of an (m,n)-mode multi-time process.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A possibly huge positive quantity, carried in linear and log10 form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub log10: f64,
}

impl BoundValue {
    fn from_ln(ln_value: f64) -> BoundValue {
        BoundValue {
            value: ln_value.exp(),
            log10: ln_value / std::f64::consts::LN_10,
        }
    }

    fn zero() -> BoundValue {
        BoundValue {
            value: 0.0,
            log10: f64::NEG_INFINITY,
        }
    }
}

/// Entanglement-free lower bound together with its hypothesis status.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub bound: BoundValue,
    /// False when the width condition on 2σ² fails; the value is still the
    /// formula's output, but the theorem does not back it.
    pub hypothesis_ok: bool,
}

/// Hoeffding sampling complexity of the estimator for ε additive error with
/// confidence 1 − δ: N ≤ 8·exp(2·e^(−2·r_eff)·|β|²)·ε⁻²·ln(4/δ).
pub fn hoeffding_upper(r_eff: f64, beta_sq: f64, epsilon: f64, delta: f64) -> Result<BoundValue> {
    if !(epsilon > 0.0 && epsilon < 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("epsilon and delta must lie in (0, 1)"));
    }
    if !(beta_sq >= 0.0) {
        return Err(Error::invalid("beta_sq must be nonnegative"));
    }
    let ln_n = (8.0f64).ln() + 2.0 * (-2.0 * r_eff).exp() * beta_sq - 2.0 * epsilon.ln()
        + (4.0 / delta).ln().ln();
    Ok(BoundValue::from_ln(ln_n))
}

/// Width condition of the finite-σ lower bound:
/// 2σ² ≤ max{1 − 1.98κ, 0.99κ(√(1 + (0.99κ)⁻²) − 1)}.
pub fn sigma_condition_holds(kappa: f64, sigma: f64) -> bool {
    if kappa <= 0.0 {
        // degenerate radius: only the first branch is meaningful
        return 2.0 * sigma * sigma <= 1.0;
    }
    let a = 1.0 - 1.98 * kappa;
    let g = 0.99 * kappa;
    let b = g * ((1.0 + 1.0 / (g * g)).sqrt() - 1.0);
    2.0 * sigma * sigma <= a.max(b)
}

/// Entanglement-free sample-complexity lower bound,
/// N ≥ 0.01·ε⁻²·(1 + 1.98κ/(1 + 2σ²))^(mn); σ = 0 gives the narrow-peak
/// variant. Requires mn ≥ 8 and ε ≤ 0.24; outside the width condition the
/// value is still returned but flagged inapplicable.
pub fn classical_lower(m: u64, n: u64, kappa: f64, epsilon: f64, sigma: f64) -> Result<LowerBound> {
    let mn = m.checked_mul(n).ok_or_else(|| Error::invalid("mn overflow"))?;
    if mn < 8 {
        return Err(Error::Inapplicable(format!(
            "lower bound requires mn ≥ 8, got {mn}"
        )));
    }
    if !(epsilon > 0.0 && epsilon <= 0.24) {
        return Err(Error::Inapplicable(format!(
            "lower bound requires 0 < ε ≤ 0.24, got {epsilon}"
        )));
    }
    if !(kappa >= 0.0 && sigma >= 0.0) {
        return Err(Error::invalid("kappa and sigma must be nonnegative"));
    }
    let growth = 1.98 * kappa / (1.0 + 2.0 * sigma * sigma);
    let ln_n = (0.01f64).ln() - 2.0 * epsilon.ln() + mn as f64 * growth.ln_1p();
    let hypothesis_ok = sigma == 0.0 || sigma_condition_holds(kappa, sigma);
    Ok(LowerBound {
        bound: BoundValue::from_ln(ln_n),
        hypothesis_ok,
    })
}

/// Classical samples needed to match a measured success probability:
/// N_c = (2·P_suc − 1)/(16ε₀²)·(1 + 1.98κ/(1 + 2σ²))ⁿ. Zero at P_suc = ½.
pub fn equivalent_classical_n(
    p_suc: f64,
    epsilon0: f64,
    kappa: f64,
    sigma: f64,
    n: u64,
) -> Result<BoundValue> {
    if !(0.5..=1.0).contains(&p_suc) {
        return Err(Error::invalid("P_suc must lie in [0.5, 1]"));
    }
    if !(epsilon0 > 0.0) {
        return Err(Error::invalid("epsilon0 must be positive"));
    }
    if p_suc == 0.5 {
        return Ok(BoundValue::zero());
    }
    let growth = 1.98 * kappa / (1.0 + 2.0 * sigma * sigma);
    let ln_n =
        (2.0 * p_suc - 1.0).ln() - (16.0 * epsilon0 * epsilon0).ln() + n as f64 * growth.ln_1p();
    Ok(BoundValue::from_ln(ln_n))
}

/// Success ceiling of any entanglement-free strategy with N samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessBound {
    /// min(P_c, 1)
    pub p: f64,
    /// The advantage term P_c − ½ before clamping.
    pub excess: f64,
    pub excess_log10: f64,
}

/// P_c = ½·(1 + 16·N·ε₀²·((1 + 2σ²)/(1 + 2σ² + 1.98κ))ⁿ), clamped to 1.
pub fn classical_success_bound(
    n_samples: f64,
    epsilon0: f64,
    kappa: f64,
    sigma: f64,
    n: u64,
) -> Result<SuccessBound> {
    if !(n_samples >= 0.0) {
        return Err(Error::invalid("sample count must be nonnegative"));
    }
    if !(epsilon0 > 0.0 && kappa >= 0.0 && sigma >= 0.0) {
        return Err(Error::invalid("epsilon0 must be positive, kappa/sigma nonnegative"));
    }
    if n_samples == 0.0 {
        return Ok(SuccessBound {
            p: 0.5,
            excess: 0.0,
            excess_log10: f64::NEG_INFINITY,
        });
    }
    let one_plus = 1.0 + 2.0 * sigma * sigma;
    let ln_excess = (8.0 * epsilon0 * epsilon0).ln() + n_samples.ln()
        + n as f64 * (one_plus / (one_plus + 1.98 * kappa)).ln();
    let excess = ln_excess.exp();
    Ok(SuccessBound {
        p: (0.5 + excess).min(1.0),
        excess,
        excess_log10: ln_excess / std::f64::consts::LN_10,
    })
}

/// Seconds in a Julian year.
pub const SECONDS_PER_YEAR: f64 = 365.25 * 86_400.0;

/// Wall-clock data-acquisition time in seconds when modes are generated at
/// `mode_rate_hz` (1 MHz per mode by default): N·n/rate.
pub fn acquisition_time(n_samples: f64, n_modes: u64, mode_rate_hz: f64) -> Result<f64> {
    if !(n_samples >= 0.0 && mode_rate_hz > 0.0 && n_modes >= 1) {
        return Err(Error::invalid("acquisition_time needs positive inputs"));
    }
    Ok(n_samples * n_modes as f64 / mode_rate_hz)
}

/// Renders a duration in the most readable unit from seconds to years.
pub fn format_duration(seconds: f64) -> String {
    const UNITS: [(f64, &str); 5] = [
        (SECONDS_PER_YEAR, "years"),
        (86_400.0, "days"),
        (3_600.0, "h"),
        (60.0, "min"),
        (1.0, "s"),
    ];
    for (scale, unit) in UNITS {
        if seconds >= scale {
            return format!("{:.3} {}", seconds / scale, unit);
        }
    }
    format!("{seconds:.3e} s")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hoeffding_noiseless_limit() {
        // r_eff → ∞ kills the exponential: 8 ε⁻² ln(4/δ)
        let b = hoeffding_upper(f64::INFINITY, 5.0, 0.24, 1.0 / 3.0).unwrap();
        assert_relative_eq!(b.value, 345.125923582, max_relative = 1e-9);
    }

    #[test]
    fn hoeffding_sixteen_mode_slice() {
        let b = hoeffding_upper(0.0, 0.18 * 16.0, 0.24, 1.0 / 3.0).unwrap();
        assert_relative_eq!(b.value, 109525.135115, max_relative = 1e-9);
    }

    #[test]
    fn hoeffding_hundred_mode_squeezed() {
        let r_eff = -0.5 * 0.3327f64.ln();
        let b = hoeffding_upper(r_eff, 18.0, 0.24, 1.0 / 3.0).unwrap();
        assert_relative_eq!(b.value, 5.49046908479e7, max_relative = 1e-9);
        assert_relative_eq!(b.log10, 7.739617, max_relative = 1e-5);
    }

    #[test]
    fn classical_lower_narrow_peak_hundred_modes() {
        let lb = classical_lower(100, 1, 0.18, 0.24, 0.0).unwrap();
        assert!(lb.hypothesis_ok);
        assert_relative_eq!(lb.bound.value, 3.00853887194e12, max_relative = 1e-9);
    }

    #[test]
    fn classical_lower_finite_sigma_hundred_modes() {
        let lb = classical_lower(100, 1, 0.18, 0.24, 0.3).unwrap();
        assert!(lb.hypothesis_ok);
        assert_relative_eq!(lb.bound.value, 5.03276480717e10, max_relative = 1e-9);
    }

    #[test]
    fn classical_lower_zero_kappa_base_case() {
        let lb = classical_lower(4, 2, 0.0, 0.24, 0.0).unwrap();
        assert_relative_eq!(lb.bound.value, 0.01 / (0.24 * 0.24), max_relative = 1e-12);
    }

    #[test]
    fn classical_lower_rejects_small_mn_and_big_epsilon() {
        assert!(matches!(
            classical_lower(7, 1, 0.2, 0.24, 0.0),
            Err(Error::Inapplicable(_))
        ));
        assert!(matches!(
            classical_lower(10, 1, 0.2, 0.25, 0.0),
            Err(Error::Inapplicable(_))
        ));
    }

    #[test]
    fn sigma_condition_flags_wide_peaks() {
        // 2σ² = 1.62 exceeds max(0.604, 0.8214) at κ = 0.2
        let lb = classical_lower(10, 1, 0.2, 0.24, 0.9).unwrap();
        assert!(!lb.hypothesis_ok);
        assert!(sigma_condition_holds(0.2, 0.3));
        assert!(sigma_condition_holds(0.18, 0.3));
    }

    #[test]
    fn equivalent_classical_n_flagship() {
        let b = equivalent_classical_n(0.563, 0.25, 0.2, 0.3, 120).unwrap();
        assert_relative_eq!(b.value, 1.51801214716e14, max_relative = 1e-9);
        // paper quotes 1.6e14 for this point
        assert!(b.value > 1.3e14 && b.value < 1.8e14);
    }

    #[test]
    fn equivalent_classical_n_twenty_modes() {
        let b = equivalent_classical_n(2.0 / 3.0, 0.25, 0.2, 0.3, 20).unwrap();
        assert_relative_eq!(b.value, 108.733373453, max_relative = 1e-9);
        // within 15% of the paper's 1.20e2
        assert!((b.value / 120.0 - 1.0).abs() < 0.15);
    }

    #[test]
    fn equivalent_classical_n_coin_toss_is_zero() {
        let b = equivalent_classical_n(0.5, 0.25, 0.2, 0.3, 20).unwrap();
        assert_eq!(b.value, 0.0);
        assert!(equivalent_classical_n(0.49, 0.25, 0.2, 0.3, 20).is_err());
    }

    #[test]
    fn success_bound_values() {
        let no_data = classical_success_bound(0.0, 0.25, 0.2, 0.3, 120).unwrap();
        assert_eq!(no_data.p, 0.5);
        let flagship = classical_success_bound(1e5, 0.25, 0.2, 0.3, 120).unwrap();
        assert_relative_eq!(flagship.excess, 4.15016441849e-11, max_relative = 1e-9);
        let sixty = classical_success_bound(1e5, 0.25, 0.2, 0.3, 60).unwrap();
        assert_relative_eq!(sixty.p, 0.501440514564, max_relative = 1e-9);
        // monotone increasing in N until the clamp
        let big = classical_success_bound(1e40, 0.25, 0.2, 0.3, 60).unwrap();
        assert_eq!(big.p, 1.0);
    }

    #[test]
    fn bound_ordering_and_monotonicity() {
        for mn in [8u64, 20, 100, 400] {
            for kappa in [0.05, 0.18, 0.2] {
                let narrow = classical_lower(mn, 1, kappa, 0.24, 0.0).unwrap();
                let wide = classical_lower(mn, 1, kappa, 0.24, 0.3).unwrap();
                assert!(wide.bound.value <= narrow.bound.value);
            }
        }
        let a = hoeffding_upper(0.0, 1.0, 0.24, 0.3).unwrap();
        let b = hoeffding_upper(0.0, 2.0, 0.24, 0.3).unwrap();
        let c = hoeffding_upper(0.5, 2.0, 0.24, 0.3).unwrap();
        assert!(b.value > a.value && c.value < b.value);
        let low = classical_lower(16, 1, 0.18, 0.24, 0.0).unwrap();
        let hi = classical_lower(32, 1, 0.18, 0.24, 0.0).unwrap();
        assert!(hi.bound.value > low.bound.value);
    }

    #[test]
    fn success_and_equivalent_n_are_inverses() {
        // P ↦ N_c ↦ P round trip to 1e-12 relative error
        for p in [0.5001, 0.54, 0.563, 0.8, 0.9999] {
            for n in [20u64, 60, 120] {
                let nc = equivalent_classical_n(p, 0.25, 0.2, 0.3, n).unwrap();
                let back = classical_success_bound(nc.value, 0.25, 0.2, 0.3, n).unwrap();
                assert_relative_eq!(back.p, p, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn acquisition_times() {
        let s = acquisition_time(1.6e14, 120, 1e6).unwrap();
        assert_relative_eq!(s, 1.92e10, max_relative = 1e-12);
        assert!(s / SECONDS_PER_YEAR > 600.0);
        let s2 = acquisition_time(7.3e18, 100, 1e6).unwrap();
        assert_relative_eq!(s2 / SECONDS_PER_YEAR, 23_132_304.1, max_relative = 1e-6);
        assert_relative_eq!(acquisition_time(1e6, 1, 1e6).unwrap(), 1.0, max_relative = 1e-12);
        assert!(format_duration(1.92e10).contains("years"));
    }
}
