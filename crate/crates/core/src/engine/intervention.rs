use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Behavioral and product interventions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InterventionKind {
    /// Lowers every active reference point; the j-th firing (from 0) moves the
    /// log reference by `decay_delta^j * ln(1 - rho)`.
    NoveltyReset { rho: f64, decay_delta: f64 },
    /// Perceived-capability uplift drawn per agent, plus damped adaptation.
    Personalization { max_log_mult: f64, gamma_damp_omega: f64 },
    /// Announced capability `a * C` pulls the reference target down with weight `w`.
    ExpectationManagement { weight_w: f64, announce_discount_a: f64 },
    /// Amplifies each user's deviation from the population mean, decaying with time.
    SocialBenchmark { beta0: f64, tau: f64 },
    /// Temporary capability cut by `depth` for `duration` steps after firing.
    StrategicDip { depth: f64, duration: usize },
}

impl InterventionKind {
    pub fn name(&self) -> &'static str {
        match self {
            InterventionKind::NoveltyReset { .. } => "novelty_reset",
            InterventionKind::Personalization { .. } => "personalization",
            InterventionKind::ExpectationManagement { .. } => "expectation_management",
            InterventionKind::SocialBenchmark { .. } => "social_benchmark",
            InterventionKind::StrategicDip { .. } => "strategic_dip",
        }
    }

    fn validate(&self) -> Result<()> {
        let open01 = |x: f64| x > 0.0 && x < 1.0;
        let check = |ok: bool, field: &str, reason: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::config(format!("{}.{field}", self.name()), reason))
            }
        };
        match *self {
            InterventionKind::NoveltyReset { rho, decay_delta } => {
                check(open01(rho), "rho", "must lie in (0, 1)")?;
                check(decay_delta > 0.0 && decay_delta <= 1.0, "decay_delta", "must lie in (0, 1]")
            }
            InterventionKind::Personalization { max_log_mult, gamma_damp_omega } => {
                check(max_log_mult.is_finite() && max_log_mult >= 0.0, "max_log_mult", "must be finite and >= 0")?;
                check((0.0..1.0).contains(&gamma_damp_omega), "gamma_damp_omega", "must lie in [0, 1)")
            }
            InterventionKind::ExpectationManagement { weight_w, announce_discount_a } => {
                check((0.0..=1.0).contains(&weight_w), "weight_w", "must lie in [0, 1]")?;
                check(
                    announce_discount_a > 0.0 && announce_discount_a <= 1.0,
                    "announce_discount_a",
                    "must lie in (0, 1]",
                )
            }
            InterventionKind::SocialBenchmark { beta0, tau } => {
                check(beta0.is_finite(), "beta0", "must be finite")?;
                check(tau.is_finite() && tau > 0.0, "tau", "must be finite and > 0")
            }
            InterventionKind::StrategicDip { depth, duration } => {
                check(open01(depth), "depth", "must lie in (0, 1)")?;
                check(duration >= 1, "duration", "must be >= 1")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Firing {
    At(usize),
    Periodic { start: usize, period: usize },
}

impl Firing {
    pub fn fires_at(&self, t: usize) -> bool {
        match *self {
            Firing::At(at) => at == t,
            Firing::Periodic { start, period } => t >= start && (t - start).is_multiple_of(period),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterventionEvent {
    pub kind: InterventionKind,
    pub schedule: Firing,
}

impl InterventionEvent {
    pub fn validate(&self, horizon: usize) -> Result<()> {
        self.kind.validate().map_err(|e| e.under("kind"))?;
        match self.schedule {
            Firing::At(t) if t >= horizon => Err(Error::config("schedule.at", format!("{t} is outside horizon {horizon}"))),
            Firing::Periodic { period: 0, .. } => Err(Error::config("schedule.periodic.period", "must be >= 1")),
            Firing::Periodic { start, .. } if start >= horizon => Err(Error::config(
                "schedule.periodic.start",
                format!("{start} is outside horizon {horizon}"),
            )),
            _ => Ok(()),
        }
    }
}
