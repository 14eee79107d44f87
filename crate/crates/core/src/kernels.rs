//! Closed-form model equations.
//!
//! Every function here is pure. Satisfaction and reference points live in
//! log-capability space: a user's satisfaction depends only on the ratio
//! between the capability they perceive and the capability they have come
//! to expect.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical prospect-theory loss-aversion estimate.
pub const DEFAULT_LOSS_AVERSION: f64 = 2.25;

fn default_lambda() -> f64 {
    DEFAULT_LOSS_AVERSION
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SatisfactionParams {
    /// Satisfaction per log-unit of gap.
    pub k: f64,
    /// Satisfaction at zero gap.
    pub b: f64,
    /// Slope multiplier applied below the reference point.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

impl SatisfactionParams {
    pub fn new(k: f64, b: f64, lambda: f64) -> Result<Self> {
        let p = Self { k, b, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(Error::config("k", "must be finite and > 0"));
        }
        if !self.b.is_finite() {
            return Err(Error::config("b", "must be finite"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 1.0) {
            return Err(Error::config("lambda", "must be finite and >= 1"));
        }
        Ok(())
    }
}

impl Default for SatisfactionParams {
    fn default() -> Self {
        Self {
            k: 1.0,
            b: 0.0,
            lambda: DEFAULT_LOSS_AVERSION,
        }
    }
}

/// Bass diffusion coefficients for one segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BassParams {
    /// Innovation coefficient (per-step probability).
    pub p: f64,
    /// Imitation coefficient.
    pub q: f64,
}

impl BassParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        let params = Self { p, q };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && (0.0..=1.0).contains(&self.p)) {
            return Err(Error::config("p", "must lie in [0, 1]"));
        }
        if !(self.q.is_finite() && self.q >= 0.0) {
            return Err(Error::config("q", "must be finite and >= 0"));
        }
        if self.p + self.q > 1.0 {
            return Err(Error::config("q", "p + q must not exceed 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChurnParams {
    /// Satisfaction below which churn pressure begins.
    pub s_churn: f64,
    /// Churn hazard per unit of shortfall.
    pub eta: f64,
    /// Maximum per-step churn probability.
    pub cap: f64,
}

impl ChurnParams {
    /// Churn switched off.
    pub fn disabled() -> Self {
        Self {
            s_churn: 0.0,
            eta: 0.0,
            cap: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s_churn.is_finite() {
            return Err(Error::config("s_churn", "must be finite"));
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(Error::config("eta", "must be finite and >= 0"));
        }
        if !(self.cap.is_finite() && (0.0..=1.0).contains(&self.cap)) {
            return Err(Error::config("cap", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

impl Default for ChurnParams {
    fn default() -> Self {
        Self::disabled()
    }
}

fn finite(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::domain(format!("{name} must be finite, got {x}")))
    }
}

/// Satisfaction from the log-gap between perceived capability and reference.
///
/// Gains are scaled by `k`; losses by `lambda * k`.
pub fn log_satisfaction(log_c_perceived: f64, log_r: f64, params: &SatisfactionParams) -> Result<f64> {
    let gap = finite("log_c_perceived", log_c_perceived)? - finite("log_r", log_r)?;
    let slope = if gap >= 0.0 {
        params.k
    } else {
        params.lambda * params.k
    };
    Ok(params.b + slope * gap)
}

/// One exponential-moving-average step of the log reference point toward `log_target`.
pub fn update_reference(log_r: f64, log_target: f64, gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::domain(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    let log_r = finite("log_r", log_r)?;
    let log_target = finite("log_target", log_target)?;
    Ok(log_r + gamma * (log_target - log_r))
}

/// `scale * resources^alpha`.
pub fn power_law_capability(resources: f64, alpha: f64, scale: f64) -> Result<f64> {
    if !(resources.is_finite() && resources > 0.0) {
        return Err(Error::domain(format!("resources must be > 0, got {resources}")));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::domain(format!("scale must be > 0, got {scale}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    Ok(scale * resources.powf(alpha))
}

/// Per-step adoption probability for a potential adopter.
pub fn bass_hazard(params: &BassParams, adopted_fraction: f64) -> f64 {
    let f = adopted_fraction.clamp(0.0, 1.0);
    (params.p + params.q * f).clamp(0.0, 1.0)
}

/// Capped linear churn hazard in the satisfaction shortfall.
pub fn churn_probability(satisfaction: f64, params: &ChurnParams) -> f64 {
    let shortfall = (params.s_churn - satisfaction).max(0.0);
    (params.eta * shortfall).min(params.cap).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn sp(k: f64, b: f64, lambda: f64) -> SatisfactionParams {
        SatisfactionParams::new(k, b, lambda).unwrap()
    }

    #[test]
    fn zero_gap_is_baseline() {
        assert_eq!(log_satisfaction(3.2, 3.2, &sp(1.7, -0.4, 2.25)).unwrap(), -0.4);
    }

    #[test]
    fn gain_and_loss_branches() {
        let p = sp(1.0, 0.0, 2.0);
        assert!((log_satisfaction(LN_2, 0.0, &p).unwrap() - 0.5 * 4f64.ln()).abs() < 1e-15);
        let loss = log_satisfaction(-LN_2, 0.0, &p).unwrap();
        assert!((loss + 1.386294).abs() < 1e-6);
        assert_eq!(loss, -2.0 * LN_2);
    }

    #[test]
    fn non_finite_inputs_rejected() {
        let p = SatisfactionParams::default();
        assert!(matches!(log_satisfaction(f64::NAN, 0.0, &p), Err(Error::Domain(_))));
        assert!(matches!(log_satisfaction(0.0, f64::INFINITY, &p), Err(Error::Domain(_))));
        assert!(update_reference(f64::NAN, 0.0, 0.5).is_err());
    }

    #[test]
    fn reference_update_examples() {
        assert_eq!(update_reference(1.3, 7.0, 0.0).unwrap(), 1.3);
        assert_eq!(update_reference(1.3, 7.0, 1.0).unwrap(), 7.0);
        assert_eq!(update_reference(0.0, 1.0, 0.5).unwrap(), 0.5);
        assert!(update_reference(0.0, 1.0, 1.5).is_err());
        assert!(update_reference(0.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn power_law_examples() {
        assert_eq!(power_law_capability(1.0, 0.07, 1.0).unwrap(), 1.0);
        for alpha in [0.05, 0.075, 0.10] {
            assert!(power_law_capability(2.0, alpha, 1.0).is_ok());
        }
        // Golden value, from exp(10 * ln(1.1) * 0.08).
        let c = power_law_capability(1.1f64.powi(10), 0.08, 1.0).unwrap();
        assert!((c - 1.0792303452988907).abs() < 1e-12, "{c}");
        assert!(power_law_capability(0.0, 0.08, 1.0).is_err());
        assert!(power_law_capability(1.0, 0.08, -1.0).is_err());
    }

    #[test]
    fn bass_examples() {
        let b = BassParams::new(0.03, 0.38).unwrap();
        assert_eq!(bass_hazard(&b, 0.0), 0.03);
        assert_eq!(bass_hazard(&b, 1.0), 0.03 + 0.38);
        assert!((bass_hazard(&b, 0.5) - 0.22).abs() < 1e-15);
        assert!(BassParams::new(0.7, 0.5).is_err());
        assert!(BassParams::new(-0.1, 0.5).is_err());
    }

    #[test]
    fn churn_examples() {
        let c = ChurnParams { s_churn: 0.0, eta: 0.1, cap: 0.5 };
        assert_eq!(churn_probability(0.0, &c), 0.0);
        assert_eq!(churn_probability(3.0, &c), 0.0);
        assert_eq!(churn_probability(-10.0, &c), 0.5);
        assert!((churn_probability(-2.0, &c) - 0.2).abs() < 1e-15);
        let off = ChurnParams { eta: 0.0, ..c };
        assert_eq!(churn_probability(-1e6, &off), 0.0);
    }

    #[test]
    fn param_validation() {
        assert!(SatisfactionParams::new(0.0, 0.0, 2.0).is_err());
        assert!(SatisfactionParams::new(1.0, 0.0, 0.9).is_err());
        assert!(SatisfactionParams::new(1.0, f64::NAN, 2.0).is_err());
        assert!(ChurnParams { s_churn: 0.0, eta: -1.0, cap: 0.5 }.validate().is_err());
        assert!(ChurnParams { s_churn: 0.0, eta: 1.0, cap: 1.5 }.validate().is_err());
    }

    proptest! {
        #[test]
        fn loss_is_lambda_times_gain(g in 1e-6f64..10.0, k in 0.01f64..5.0, b in -3.0f64..3.0, lambda in 1.0f64..4.0) {
            let p = sp(k, b, lambda);
            let gain = log_satisfaction(g, 0.0, &p).unwrap() - b;
            let loss = log_satisfaction(-g, 0.0, &p).unwrap() - b;
            prop_assert!((loss.abs() - lambda * gain).abs() <= 1e-12 * (1.0 + lambda * gain));
        }

        #[test]
        fn reference_update_contracts(r in -10.0f64..10.0, target in -10.0f64..10.0, gamma in 0.0f64..=1.0, n in 0usize..40) {
            let mut x = r;
            for _ in 0..n {
                x = update_reference(x, target, gamma).unwrap();
            }
            let expected = (1.0 - gamma).powi(n as i32) * (r - target).abs();
            prop_assert!(((x - target).abs() - expected).abs() <= 1e-12 * (1.0 + (r - target).abs()));
        }

        #[test]
        fn power_law_is_scale_invariant(r in 1e-3f64..1e3, m in 1e-3f64..1e3, alpha in 0.01f64..=1.0, scale in 0.1f64..10.0) {
            let ratio = power_law_capability(m * r, alpha, scale).unwrap() / power_law_capability(r, alpha, scale).unwrap();
            prop_assert!((ratio / m.powf(alpha) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn hazards_are_probabilities(p in 0.0f64..0.5, q in 0.0f64..0.5, f1 in 0.0f64..=1.0, f2 in 0.0f64..=1.0,
                                     s1 in -50.0f64..50.0, s2 in -50.0f64..50.0, eta in 0.0f64..5.0, cap in 0.0f64..=1.0) {
            let bass = BassParams::new(p, q).unwrap();
            let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
            let (h_lo, h_hi) = (bass_hazard(&bass, lo), bass_hazard(&bass, hi));
            prop_assert!((0.0..=1.0).contains(&h_lo) && h_lo <= h_hi);
            let churn = ChurnParams { s_churn: 0.0, eta, cap };
            let (s_lo, s_hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
            let (c_lo, c_hi) = (churn_probability(s_lo, &churn), churn_probability(s_hi, &churn));
            prop_assert!((0.0..=1.0).contains(&c_hi) && c_hi <= c_lo && c_lo <= 1.0);
        }

        #[test]
        fn doubling_adds_k_ln2(log_c in 0.0f64..20.0, k in 0.01f64..5.0, b in -3.0f64..3.0) {
            let p = sp(k, b, 2.25);
            let lo = log_satisfaction(log_c, 0.0, &p).unwrap();
            let hi = log_satisfaction(log_c + LN_2, 0.0, &p).unwrap();
            prop_assert!((hi - lo - k * LN_2).abs() < 1e-12 * (1.0 + lo.abs()));
        }
    }
}
