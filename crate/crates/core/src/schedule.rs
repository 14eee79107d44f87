//! Objective capability trajectories.
//!
//! All schedules are evaluated in log space; `capability_at` exponentiates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A discrete capability release.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Release {
    pub time: usize,
    /// Log-capability gained at `time`.
    pub log_jump: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CapabilitySchedule {
    /// Power-law capability of exponentially growing resources:
    /// `c0 * (1 + resource_growth)^(t * alpha)`.
    Continuous {
        c0: f64,
        resource_growth: f64,
        alpha: f64,
    },
    Punctuated {
        c0: f64,
        releases: Vec<Release>,
    },
    /// Continuous growth multiplied by discrete releases.
    Hybrid {
        c0: f64,
        resource_growth: f64,
        alpha: f64,
        releases: Vec<Release>,
    },
    /// Explicit per-step capability values.
    Table { values: Vec<f64> },
}

impl CapabilitySchedule {
    /// Continuous schedule whose capability at `horizon - 1` is `c0 * exp(total_log_growth)`.
    ///
    /// Used to build endpoint-matched comparisons against punctuated delivery.
    pub fn continuous_matching(c0: f64, total_log_growth: f64, alpha: f64, horizon: usize) -> Result<Self> {
        if horizon < 2 {
            return Err(Error::config("horizon", "need at least 2 steps to match an endpoint"));
        }
        let per_step = total_log_growth / (alpha * (horizon - 1) as f64);
        Ok(CapabilitySchedule::Continuous {
            c0,
            resource_growth: per_step.exp_m1(),
            alpha,
        })
    }

    pub fn c0(&self) -> f64 {
        match self {
            CapabilitySchedule::Continuous { c0, .. }
            | CapabilitySchedule::Punctuated { c0, .. }
            | CapabilitySchedule::Hybrid { c0, .. } => *c0,
            CapabilitySchedule::Table { values } => values.first().copied().unwrap_or(f64::NAN),
        }
    }

    pub fn validate(&self, horizon: usize) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::config(name, format!("must be finite and > 0, got {x}")))
            }
        };
        let growth = |rho: f64, alpha: f64| {
            if !(rho.is_finite() && rho >= 0.0) {
                return Err(Error::config("resource_growth", "must be finite and >= 0"));
            }
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::config("alpha", "must lie in (0, 1]"));
            }
            Ok(())
        };
        match self {
            CapabilitySchedule::Continuous { c0, resource_growth, alpha } => {
                positive("c0", *c0)?;
                growth(*resource_growth, *alpha)
            }
            CapabilitySchedule::Punctuated { c0, releases } => {
                positive("c0", *c0)?;
                validate_releases(releases, horizon)
            }
            CapabilitySchedule::Hybrid { c0, resource_growth, alpha, releases } => {
                positive("c0", *c0)?;
                growth(*resource_growth, *alpha)?;
                validate_releases(releases, horizon)
            }
            CapabilitySchedule::Table { values } => {
                if values.len() != horizon {
                    return Err(Error::config(
                        "values",
                        format!("length {} does not equal horizon {horizon}", values.len()),
                    ));
                }
                for (i, v) in values.iter().enumerate() {
                    positive(&format!("values[{i}]"), *v)?;
                }
                Ok(())
            }
        }
    }

    /// `ln C(t)`.
    pub fn log_capability_at(&self, t: usize, horizon: usize) -> Result<f64> {
        if t >= horizon {
            return Err(Error::Index { index: t, len: horizon });
        }
        let jumps = |releases: &[Release]| -> f64 {
            releases.iter().take_while(|r| r.time <= t).map(|r| r.log_jump).sum()
        };
        Ok(match self {
            CapabilitySchedule::Continuous { c0, resource_growth, alpha } => {
                c0.ln() + t as f64 * alpha * resource_growth.ln_1p()
            }
            CapabilitySchedule::Punctuated { c0, releases } => c0.ln() + jumps(releases),
            CapabilitySchedule::Hybrid { c0, resource_growth, alpha, releases } => {
                c0.ln() + t as f64 * alpha * resource_growth.ln_1p() + jumps(releases)
            }
            CapabilitySchedule::Table { values } => match values.get(t) {
                Some(v) => v.ln(),
                None => return Err(Error::Index { index: t, len: values.len() }),
            },
        })
    }

    pub fn capability_at(&self, t: usize, horizon: usize) -> Result<f64> {
        self.log_capability_at(t, horizon).map(f64::exp)
    }

    /// `ln C(t)` for every step of the horizon.
    pub fn log_trajectory(&self, horizon: usize) -> Result<Vec<f64>> {
        (0..horizon).map(|t| self.log_capability_at(t, horizon)).collect()
    }
}

fn validate_releases(releases: &[Release], horizon: usize) -> Result<()> {
    let mut prev: Option<usize> = None;
    for (i, r) in releases.iter().enumerate() {
        let at = |field: &str, reason: String| Error::config(format!("releases[{i}].{field}"), reason);
        if r.time >= horizon {
            return Err(at("time", format!("{} is outside horizon {horizon}", r.time)));
        }
        if prev.is_some_and(|p| r.time <= p) {
            return Err(at("time", "release times must be strictly increasing".into()));
        }
        if !(r.log_jump.is_finite() && r.log_jump > 0.0) {
            return Err(at("log_jump", "must be finite and > 0".into()));
        }
        prev = Some(r.time);
    }
    Ok(())
}

/// A fixed log-capability budget delivered in equal releases every `interval` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetedCadence {
    pub total_log_budget: f64,
    pub interval: usize,
}

impl BudgetedCadence {
    /// `floor((horizon - 1) / interval)`.
    pub fn release_count(&self, horizon: usize) -> usize {
        if self.interval == 0 || horizon == 0 {
            0
        } else {
            (horizon - 1) / self.interval
        }
    }
}

/// Punctuated schedule with releases at `interval, 2*interval, ...` sharing the budget equally.
pub fn cadence_to_schedule(cadence: &BudgetedCadence, horizon: usize, c0: f64) -> Result<CapabilitySchedule> {
    if !(cadence.total_log_budget.is_finite() && cadence.total_log_budget > 0.0) {
        return Err(Error::config("total_log_budget", "must be finite and > 0"));
    }
    if cadence.interval == 0 || cadence.interval > horizon {
        return Err(Error::config(
            "interval",
            format!("{} must lie in [1, horizon = {horizon}]", cadence.interval),
        ));
    }
    let n = cadence.release_count(horizon);
    if n == 0 {
        return Err(Error::config(
            "interval",
            format!("interval {} yields no release within horizon {horizon}", cadence.interval),
        ));
    }
    let log_jump = cadence.total_log_budget / n as f64;
    let releases = (1..=n)
        .map(|j| Release { time: j * cadence.interval, log_jump })
        .collect();
    let schedule = CapabilitySchedule::Punctuated { c0, releases };
    schedule.validate(horizon)?;
    Ok(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    #[test]
    fn initial_condition() {
        let kinds = [
            CapabilitySchedule::Continuous { c0: 2.5, resource_growth: 0.1, alpha: 0.08 },
            CapabilitySchedule::Punctuated { c0: 2.5, releases: vec![Release { time: 3, log_jump: 1.0 }] },
            CapabilitySchedule::Hybrid {
                c0: 2.5,
                resource_growth: 0.2,
                alpha: 0.5,
                releases: vec![Release { time: 1, log_jump: 1.0 }],
            },
            CapabilitySchedule::Table { values: vec![2.5, 3.0, 1.0, 4.0, 5.0] },
        ];
        for s in &kinds {
            s.validate(5).unwrap();
            assert!((s.capability_at(0, 5).unwrap() - 2.5).abs() < 1e-15);
        }
    }

    #[test]
    fn two_doublings() {
        let s = CapabilitySchedule::Punctuated {
            c0: 1.0,
            releases: vec![Release { time: 10, log_jump: LN_2 }, Release { time: 20, log_jump: LN_2 }],
        };
        assert!((s.capability_at(25, 30).unwrap() - 4.0).abs() < 1e-14);
        assert!((s.capability_at(9, 30).unwrap() - 1.0).abs() < 1e-15);
        assert!((s.capability_at(10, 30).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn continuous_golden_value() {
        let s = CapabilitySchedule::Continuous { c0: 1.0, resource_growth: 0.1, alpha: 0.08 };
        let c = s.capability_at(10, 11).unwrap();
        assert!((c - 1.0792303452988907).abs() < 1e-12, "{c}");
    }

    #[test]
    fn out_of_range_step() {
        let s = CapabilitySchedule::Table { values: vec![1.0; 4] };
        assert_eq!(s.capability_at(4, 4), Err(Error::Index { index: 4, len: 4 }));
    }

    #[test]
    fn invalid_schedules() {
        let unsorted = CapabilitySchedule::Punctuated {
            c0: 1.0,
            releases: vec![Release { time: 5, log_jump: 0.1 }, Release { time: 5, log_jump: 0.1 }],
        };
        assert!(unsorted.validate(10).is_err());
        let late = CapabilitySchedule::Punctuated { c0: 1.0, releases: vec![Release { time: 10, log_jump: 0.1 }] };
        assert!(late.validate(10).is_err());
        let short = CapabilitySchedule::Table { values: vec![1.0; 3] };
        assert!(short.validate(4).is_err());
        let neg = CapabilitySchedule::Table { values: vec![1.0, -1.0] };
        assert!(neg.validate(2).is_err());
        let bad_c0 = CapabilitySchedule::Continuous { c0: 0.0, resource_growth: 0.1, alpha: 0.1 };
        assert!(bad_c0.validate(2).is_err());
    }

    #[test]
    fn cadence_examples() {
        let s = cadence_to_schedule(&BudgetedCadence { total_log_budget: 8f64.ln(), interval: 25 }, 100, 1.5).unwrap();
        match &s {
            CapabilitySchedule::Punctuated { releases, .. } => {
                assert_eq!(releases.iter().map(|r| r.time).collect::<Vec<_>>(), vec![25, 50, 75]);
                for r in releases {
                    assert!((r.log_jump - LN_2).abs() < 1e-15);
                }
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!((s.capability_at(99, 100).unwrap() - 12.0).abs() < 1e-12);

        let single = cadence_to_schedule(&BudgetedCadence { total_log_budget: 2.0, interval: 99 }, 100, 1.0).unwrap();
        match single {
            CapabilitySchedule::Punctuated { releases, .. } => {
                assert_eq!(releases, vec![Release { time: 99, log_jump: 2.0 }]);
            }
            other => panic!("unexpected {other:?}"),
        }

        assert!(cadence_to_schedule(&BudgetedCadence { total_log_budget: 1.0, interval: 100 }, 100, 1.0).is_err());
        assert!(cadence_to_schedule(&BudgetedCadence { total_log_budget: 1.0, interval: 0 }, 100, 1.0).is_err());
    }

    #[test]
    fn cadence_matches_cumulative_product() {
        let horizon = 101;
        let s = cadence_to_schedule(&BudgetedCadence { total_log_budget: 1.0, interval: 10 }, horizon, 1.0).unwrap();
        // Brute force: multiply by e^0.1 at each multiple of 10.
        let mut c = 1.0f64;
        for t in 0..horizon {
            if t > 0 && t % 10 == 0 {
                c *= 0.1f64.exp();
            }
            let got = s.capability_at(t, horizon).unwrap();
            assert!((got / c - 1.0).abs() < 1e-12, "t={t} got={got} want={c}");
        }
    }

    #[test]
    fn continuous_matches_punctuated_endpoint() {
        let horizon = 200;
        let budget = 2.4;
        let cont = CapabilitySchedule::continuous_matching(1.0, budget, 0.08, horizon).unwrap();
        let punct = cadence_to_schedule(&BudgetedCadence { total_log_budget: budget, interval: 40 }, horizon, 1.0).unwrap();
        let a = cont.capability_at(horizon - 1, horizon).unwrap();
        let b = punct.capability_at(horizon - 1, horizon).unwrap();
        assert!((a / b - 1.0).abs() < 1e-9);
    }

    #[test]
    fn serde_shape() {
        let json = r#"{"kind":"punctuated","c0":1.0,"releases":[{"time":3,"log_jump":0.5}]}"#;
        let s: CapabilitySchedule = serde_json::from_str(json).unwrap();
        assert_eq!(s, CapabilitySchedule::Punctuated { c0: 1.0, releases: vec![Release { time: 3, log_jump: 0.5 }] });
        let typo = r#"{"kind":"table","valuez":[1.0]}"#;
        assert!(serde_json::from_str::<CapabilitySchedule>(typo).is_err());
    }

    proptest! {
        #[test]
        fn budget_is_conserved(budget in 0.01f64..10.0, interval in 1usize..99) {
            let horizon = 100;
            let s = cadence_to_schedule(&BudgetedCadence { total_log_budget: budget, interval }, horizon, 1.0).unwrap();
            let end = s.capability_at(horizon - 1, horizon).unwrap();
            prop_assert!((end / budget.exp() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn schedules_positive_and_nondecreasing(rho in 0.0f64..0.5, alpha in 0.01f64..=1.0, c0 in 0.1f64..10.0,
                                                  times in proptest::collection::btree_set(0usize..50, 0..6)) {
            let releases: Vec<Release> = times.into_iter().map(|time| Release { time, log_jump: 0.3 }).collect();
            let s = CapabilitySchedule::Hybrid { c0, resource_growth: rho, alpha, releases };
            s.validate(50).unwrap();
            let traj = s.log_trajectory(50).unwrap();
            for w in traj.windows(2) {
                prop_assert!(w[1] >= w[0]);
            }
            prop_assert!(traj.iter().all(|l| l.exp() > 0.0));
        }
    }
}
