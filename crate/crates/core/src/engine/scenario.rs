use serde::{Deserialize, Serialize};

use super::intervention::InterventionEvent;
use crate::error::{Error, Result};
use crate::kernels::{ChurnParams, SatisfactionParams};
use crate::population::{validate_segments, Segment};
use crate::schedule::CapabilitySchedule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSpec {
    pub size: usize,
    pub segments: Vec<Segment>,
}

/// A complete experiment: everything `run` needs, and nothing else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub horizon: usize,
    pub population: PopulationSpec,
    pub schedule: CapabilitySchedule,
    pub satisfaction: SatisfactionParams,
    #[serde(default)]
    pub churn: ChurnParams,
    #[serde(default)]
    pub interventions: Vec<InterventionEvent>,
    pub seed: u64,
    #[serde(default)]
    pub trace_agents: bool,
}

impl Scenario {
    /// Check every nested invariant. Errors carry the full key path.
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::config("horizon", "must be >= 1"));
        }
        if self.population.size == 0 {
            return Err(Error::config("population.size", "must be >= 1"));
        }
        validate_segments(&self.population.segments).map_err(|e| e.under("population"))?;
        self.schedule
            .validate(self.horizon)
            .map_err(|e| e.under("schedule"))?;
        self.satisfaction
            .validate()
            .map_err(|e| e.under("satisfaction"))?;
        self.churn.validate().map_err(|e| e.under("churn"))?;
        for (i, ev) in self.interventions.iter().enumerate() {
            ev.validate(self.horizon)
                .map_err(|e| e.under(&format!("interventions[{i}]")))?;
        }
        Ok(())
    }

    /// Canonical JSON form of the scenario, used for digests.
    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("scenario serializes to JSON")
    }
}

impl Scenario {
    /// Scenario with no churn, no interventions and no traces.
    pub fn new(
        horizon: usize,
        size: usize,
        segments: Vec<Segment>,
        schedule: CapabilitySchedule,
        satisfaction: SatisfactionParams,
        seed: u64,
    ) -> Self {
        Self {
            horizon,
            population: PopulationSpec { size, segments },
            schedule,
            satisfaction,
            churn: ChurnParams::disabled(),
            interventions: Vec::new(),
            seed,
            trace_agents: false,
        }
    }
}
