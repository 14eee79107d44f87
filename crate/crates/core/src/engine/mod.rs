//! The per-step simulation loop.
//!
//! One step, in order: effective capability, Bass adoption, perception,
//! satisfaction against the pre-update reference, social adjustment, churn,
//! reference update, interventions, then aggregation. Agents are always
//! visited in id order and every random draw comes from the agent's own
//! substream, so a run is a pure function of its scenario.

mod intervention;
mod output;
mod scenario;

pub use intervention::{Firing, InterventionEvent, InterventionKind};
pub use output::{AgentTrace, RunInfo, RunOutput, StepRecord};
pub use scenario::{PopulationSpec, Scenario};

use rand::RngExt;
use rayon::prelude::*;

use crate::error::Result;
use crate::io::canonical;
use crate::kernels::{self, bass_hazard, BassParams, churn_probability, log_satisfaction, update_reference};
use crate::population::{AgentState, Population};
use crate::rng::{self, Purpose, Stream};
use crate::stats::quantile_sorted;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

struct AgentStreams {
    adoption: Stream,
    churn: Stream,
    personalization: Stream,
}

#[derive(Default)]
struct InterventionState {
    novelty_firings: u32,
    personalized: bool,
    /// `(w, ln a)`.
    expectation: Option<(f64, f64)>,
    /// `(beta0, tau, first step in effect)`.
    social: Option<(f64, f64, usize)>,
    /// `(ln(1 - depth), last step in effect)`.
    dip: Option<(f64, usize)>,
}

impl InterventionState {
    fn dip_log_factor(&self, t: usize) -> f64 {
        match self.dip {
            Some((log_factor, until)) if t <= until => log_factor,
            _ => 0.0,
        }
    }

    fn social_weight(&self, t: usize) -> Option<f64> {
        self.social
            .and_then(|(beta0, tau, since)| (t >= since).then(|| beta0 * (-((t - since) as f64) / tau).exp()))
    }
}

/// Run one scenario to completion.
pub fn run(scenario: &Scenario) -> Result<RunOutput> {
    scenario.validate()?;
    Simulation::new(scenario)?.execute()
}

/// Run independent scenarios concurrently. Results are positionally aligned
/// with the input and identical to running each scenario alone.
pub fn run_many(scenarios: &[Scenario]) -> Vec<Result<RunOutput>> {
    scenarios.par_iter().map(run).collect()
}

struct Simulation<'a> {
    scenario: &'a Scenario,
    population: Population,
    log_capability: Vec<f64>,
    segment_bass: Vec<BassParams>,
    streams: Vec<AgentStreams>,
    interventions: InterventionState,
}

impl<'a> Simulation<'a> {
    fn new(scenario: &'a Scenario) -> Result<Self> {
        let log_capability = scenario.schedule.log_trajectory(scenario.horizon)?;
        let population = Population::build(
            &scenario.population.segments,
            scenario.population.size,
            scenario.seed,
            log_capability[0],
        )?;
        let streams = (0..population.len())
            .map(|id| AgentStreams {
                adoption: rng::agent_stream(scenario.seed, id, Purpose::Adoption),
                churn: rng::agent_stream(scenario.seed, id, Purpose::Churn),
                personalization: rng::agent_stream(scenario.seed, id, Purpose::Personalization),
            })
            .collect();
        let segment_bass = scenario.population.segments.iter().map(|s| s.bass).collect();
        Ok(Self {
            scenario,
            population,
            log_capability,
            segment_bass,
            streams,
            interventions: InterventionState::default(),
        })
    }

    fn execute(mut self) -> Result<RunOutput> {
        let n = self.population.len();
        let horizon = self.scenario.horizon;
        let mut satisfaction = vec![f64::NAN; n];
        let mut churning = vec![false; n];
        let mut participants: Vec<usize> = Vec::with_capacity(n);
        let mut sorted: Vec<f64> = Vec::with_capacity(n);
        let mut steps = Vec::with_capacity(horizon);
        let mut traces = self.scenario.trace_agents.then(|| {
            let segments = self.population.segments();
            self.population
                .agents()
                .iter()
                .map(|a| AgentTrace {
                    id: a.id,
                    segment: segments[a.segment].name.clone(),
                    gamma: a.gamma,
                    satisfaction: Vec::with_capacity(horizon),
                    log_reference: Vec::with_capacity(horizon),
                })
                .collect::<Vec<_>>()
        });

        for t in 0..horizon {
            let log_c_raw = self.log_capability[t];
            let log_c_eff = log_c_raw + self.interventions.dip_log_factor(t);

            self.adopt(t);

            participants.clear();
            participants.extend(self.population.agents().iter().filter(|a| a.is_active()).map(|a| a.id));

            self.perceive(log_c_eff, &participants, &mut satisfaction)?;
            self.social_adjust(t, &participants, &mut satisfaction);
            self.decide_churn(&participants, &satisfaction, &mut churning);
            self.update_references(log_c_eff, &participants, &churning)?;
            let applied = self.fire_interventions(t, &churning);

            steps.push(self.record(t, log_c_raw, log_c_eff, &participants, &satisfaction, &mut sorted, applied));

            if let Some(traces) = traces.as_mut() {
                for (trace, agent) in traces.iter_mut().zip(self.population.agents()) {
                    let s = agent.is_active().then(|| satisfaction[agent.id]);
                    trace.satisfaction.push(s);
                    trace.log_reference.push(agent.log_r);
                }
            }

            for &id in &participants {
                if churning[id] {
                    self.population.churn(id, t);
                    churning[id] = false;
                }
                satisfaction[id] = f64::NAN;
            }
            let total = n as f64;
            let counts = self.population.counts();
            let last = steps.last_mut().expect("record pushed above");
            last.frac_active = counts.active as f64 / total;
            last.frac_churned = counts.churned as f64 / total;
            last.frac_potential = (n - counts.adopted_ever) as f64 / total;
        }

        let config_digest = canonical::digest(&self.scenario.to_value());
        Ok(RunOutput {
            segment_names: self.population.segments().iter().map(|s| s.name.clone()).collect(),
            steps,
            traces,
            info: RunInfo {
                tool_version: TOOL_VERSION.to_string(),
                seed: self.scenario.seed,
                config_digest,
                seed_expansion: rng::SEED_EXPANSION.to_string(),
                stream_algorithm: rng::STREAM_ALGORITHM.to_string(),
            },
        })
    }

    /// Bass adoption driven by the adopted-ever fraction at the end of the previous step.
    fn adopt(&mut self, t: usize) {
        let f_prev = self.population.adopted_fraction();
        for id in 0..self.population.len() {
            let agent = &self.population.agents()[id];
            if agent.state != AgentState::Potential {
                continue;
            }
            let hazard = bass_hazard(&self.segment_bass[agent.segment], f_prev);
            let u: f64 = self.streams[id].adoption.random();
            if u < hazard {
                self.population.activate(id, t);
            }
        }
    }

    fn perceive(&self, log_c_eff: f64, participants: &[usize], satisfaction: &mut [f64]) -> Result<()> {
        let params = &self.scenario.satisfaction;
        let agents = self.population.agents();
        for &id in participants {
            let agent = &agents[id];
            let log_c = log_c_eff + agent.personalization_log_mult;
            satisfaction[id] = log_satisfaction(log_c, agent.log_r, params)?;
        }
        Ok(())
    }

    fn social_adjust(&self, t: usize, participants: &[usize], satisfaction: &mut [f64]) {
        let Some(weight) = self.interventions.social_weight(t) else {
            return;
        };
        if participants.is_empty() {
            return;
        }
        let mean = participants.iter().map(|&id| satisfaction[id]).sum::<f64>() / participants.len() as f64;
        for &id in participants {
            satisfaction[id] += weight * (satisfaction[id] - mean);
        }
    }

    fn decide_churn(&mut self, participants: &[usize], satisfaction: &[f64], churning: &mut [bool]) {
        let params = self.scenario.churn;
        for &id in participants {
            let u: f64 = self.streams[id].churn.random();
            churning[id] = u < churn_probability(satisfaction[id], &params);
        }
    }

    fn update_references(&mut self, log_c_eff: f64, participants: &[usize], churning: &[bool]) -> Result<()> {
        let expectation = self.interventions.expectation;
        let agents = self.population.agents_mut();
        for &id in participants {
            if churning[id] {
                continue;
            }
            let agent = &mut agents[id];
            let log_c = log_c_eff + agent.personalization_log_mult;
            let target = match expectation {
                Some((w, log_a)) => (1.0 - w) * log_c + w * (log_c_eff + log_a),
                None => log_c,
            };
            agent.log_r = update_reference(agent.log_r, target, agent.effective_gamma())?;
        }
        Ok(())
    }

    fn fire_interventions(&mut self, t: usize, churning: &[bool]) -> Vec<String> {
        let mut applied = Vec::new();
        for event in &self.scenario.interventions {
            if !event.schedule.fires_at(t) {
                continue;
            }
            applied.push(event.kind.name().to_string());
            match event.kind {
                InterventionKind::NoveltyReset { rho, decay_delta } => {
                    let shift = decay_delta.powi(self.interventions.novelty_firings as i32) * (-rho).ln_1p();
                    self.interventions.novelty_firings += 1;
                    for agent in self.population.agents_mut() {
                        if agent.is_active() && !churning[agent.id] {
                            agent.log_r += shift;
                        }
                    }
                }
                InterventionKind::Personalization { max_log_mult, gamma_damp_omega } => {
                    if self.interventions.personalized {
                        continue;
                    }
                    self.interventions.personalized = true;
                    for agent in self.population.agents_mut() {
                        if matches!(agent.state, AgentState::Churned { .. }) || churning[agent.id] {
                            continue;
                        }
                        let stream = &mut self.streams[agent.id].personalization;
                        agent.personalization_log_mult = rng::uniform(stream, 0.0, max_log_mult);
                        agent.gamma_mult = 1.0 - gamma_damp_omega;
                    }
                }
                InterventionKind::ExpectationManagement { weight_w, announce_discount_a } => {
                    self.interventions.expectation = Some((weight_w, announce_discount_a.ln()));
                }
                InterventionKind::SocialBenchmark { beta0, tau } => {
                    self.interventions.social = Some((beta0, tau, t + 1));
                }
                InterventionKind::StrategicDip { depth, duration } => {
                    self.interventions.dip = Some(((-depth).ln_1p(), t + duration));
                }
            }
        }
        applied
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        &self,
        t: usize,
        log_c_raw: f64,
        log_c_eff: f64,
        participants: &[usize],
        satisfaction: &[f64],
        sorted: &mut Vec<f64>,
        interventions_applied: Vec<String>,
    ) -> StepRecord {
        let agents = self.population.agents();
        let count = participants.len();
        sorted.clear();
        sorted.extend(participants.iter().map(|&id| satisfaction[id]));
        let (mean_satisfaction, mean_log_reference) = if count == 0 {
            (None, None)
        } else {
            let s = sorted.iter().sum::<f64>() / count as f64;
            let r = participants.iter().map(|&id| agents[id].log_r).sum::<f64>() / count as f64;
            (Some(s), Some(r))
        };
        sorted.sort_unstable_by(f64::total_cmp);
        let satisfaction_quartiles = (count > 0).then(|| {
            [0.25, 0.5, 0.75].map(|q| quantile_sorted(sorted, q).expect("nonempty"))
        });
        StepRecord {
            t,
            capability: log_c_raw.exp(),
            capability_effective: log_c_eff.exp(),
            frac_potential: 0.0,
            frac_active: 0.0,
            frac_churned: 0.0,
            n_participating: count,
            mean_log_reference,
            mean_satisfaction,
            satisfaction_quartiles,
            segment_mean_satisfaction: self.population.segment_aggregates(satisfaction),
            interventions_applied,
        }
    }
}

/// Steady-state satisfaction under expectation management with constant capability.
pub fn expectation_fixed_point(params: &kernels::SatisfactionParams, weight_w: f64, announce_discount_a: f64) -> f64 {
    params.b + params.k * weight_w * (1.0 / announce_discount_a).ln()
}
