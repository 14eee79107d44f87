use serde::{Deserialize, Serialize};

/// Population aggregates for one step. Satisfaction statistics cover every
/// agent that was active during the step, including the step's churners;
/// the population fractions describe the state at the end of the step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub capability: f64,
    pub capability_effective: f64,
    pub frac_potential: f64,
    pub frac_active: f64,
    pub frac_churned: f64,
    /// Agents that experienced this step.
    pub n_participating: usize,
    pub mean_log_reference: Option<f64>,
    pub mean_satisfaction: Option<f64>,
    /// 25th, 50th and 75th percentiles.
    pub satisfaction_quartiles: Option<[f64; 3]>,
    /// Declaration order; `None` when the segment has no active agent.
    pub segment_mean_satisfaction: Vec<Option<f64>>,
    pub interventions_applied: Vec<String>,
}

impl StepRecord {
    pub fn adopted_fraction(&self) -> f64 {
        self.frac_active + self.frac_churned
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentTrace {
    pub id: usize,
    pub segment: String,
    pub gamma: f64,
    /// `None` on steps the agent was not active.
    pub satisfaction: Vec<Option<f64>>,
    /// Log reference at the end of each step.
    pub log_reference: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub tool_version: String,
    pub seed: u64,
    /// SHA-256 of the canonical scenario document.
    pub config_digest: String,
    pub seed_expansion: String,
    pub stream_algorithm: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub segment_names: Vec<String>,
    pub steps: Vec<StepRecord>,
    pub traces: Option<Vec<AgentTrace>>,
    pub info: RunInfo,
}

impl RunOutput {
    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn mean_satisfaction_series(&self) -> Vec<Option<f64>> {
        self.steps.iter().map(|s| s.mean_satisfaction).collect()
    }

    pub fn log_capability_series(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.capability.ln()).collect()
    }

    pub fn segment_series(&self, segment: usize) -> Vec<Option<f64>> {
        self.steps.iter().map(|s| s.segment_mean_satisfaction[segment]).collect()
    }

    /// Mean satisfaction over all active agent-steps.
    pub fn time_averaged_satisfaction(&self) -> Option<f64> {
        let mut total = 0.0;
        let mut weight = 0usize;
        for s in &self.steps {
            if let Some(m) = s.mean_satisfaction {
                total += m * s.n_participating as f64;
                weight += s.n_participating;
            }
        }
        (weight > 0).then(|| total / weight as f64)
    }
}
