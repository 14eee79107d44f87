//! Heterogeneous user population.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::BassParams;
use crate::rng::{self, Purpose};

const FRACTION_TOLERANCE: f64 = 1e-9;

/// An adopter segment: a share of the population with its own adoption
/// propensity and adaptation-rate range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub name: String,
    pub fraction: f64,
    /// Adaptation rates are drawn uniformly from `[lo, hi]`.
    pub gamma_range: [f64; 2],
    pub bass: BassParams,
    /// Mean initial log-gap `ln C(0) - ln R0`.
    pub initial_headroom: f64,
    /// Half-width of the uniform jitter on the initial headroom.
    #[serde(default)]
    pub headroom_jitter: f64,
}

impl Segment {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::config("name", "must not be empty"));
        }
        if !(self.fraction.is_finite() && (0.0..=1.0).contains(&self.fraction)) {
            return Err(Error::config("fraction", "must lie in [0, 1]"));
        }
        let [lo, hi] = self.gamma_range;
        if !((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi) && lo <= hi) {
            return Err(Error::config("gamma_range", "must satisfy 0 <= lo <= hi <= 1"));
        }
        self.bass.validate().map_err(|e| e.under("bass"))?;
        if !(self.initial_headroom.is_finite() && self.initial_headroom >= 0.0) {
            return Err(Error::config("initial_headroom", "must be finite and >= 0"));
        }
        if !(self.headroom_jitter.is_finite() && self.headroom_jitter >= 0.0) {
            return Err(Error::config("headroom_jitter", "must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Early adopters / mainstream / late adopters with a 16/68/16 split.
///
/// Faster adaptation and stronger innovation pull for earlier segments. These
/// are presets, not calibrated values.
pub fn default_segments() -> Vec<Segment> {
    let mainstream_p = 0.01;
    vec![
        Segment {
            name: "early".into(),
            fraction: 0.16,
            gamma_range: [0.25, 0.45],
            bass: BassParams { p: mainstream_p * 10.0, q: 0.3 },
            initial_headroom: 0.5,
            headroom_jitter: 0.1,
        },
        Segment {
            name: "mainstream".into(),
            fraction: 0.68,
            gamma_range: [0.10, 0.25],
            bass: BassParams { p: mainstream_p, q: 0.3 },
            initial_headroom: 0.5,
            headroom_jitter: 0.1,
        },
        Segment {
            name: "late".into(),
            fraction: 0.16,
            gamma_range: [0.02, 0.10],
            bass: BassParams { p: mainstream_p / 10.0, q: 0.3 },
            initial_headroom: 0.5,
            headroom_jitter: 0.1,
        },
    ]
}

pub fn validate_segments(segments: &[Segment]) -> Result<()> {
    if segments.is_empty() {
        return Err(Error::config("segments", "at least one segment is required"));
    }
    for (i, s) in segments.iter().enumerate() {
        s.validate().map_err(|e| e.under(&format!("segments[{i}]")))?;
        if segments[..i].iter().any(|o| o.name == s.name) {
            return Err(Error::config(format!("segments[{i}].name"), format!("duplicate segment name {:?}", s.name)));
        }
    }
    let total: f64 = segments.iter().map(|s| s.fraction).sum();
    if (total - 1.0).abs() > FRACTION_TOLERANCE {
        return Err(Error::config("segments[*].fraction", format!("fractions sum to {total}, expected 1")));
    }
    Ok(())
}

/// Largest-remainder apportionment of `n` agents; ties go to the earlier segment.
pub fn segment_sizes(fractions: &[f64], n: usize) -> Vec<usize> {
    let quotas: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut sizes: Vec<usize> = quotas
        .iter()
        .map(|q| (q + FRACTION_TOLERANCE).floor().max(0.0) as usize)
        .collect();
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    let remainder = |i: usize| quotas[i] - sizes[i] as f64;
    // Largest remainder first, index order on ties.
    order.sort_by(|&a, &b| remainder(b).total_cmp(&remainder(a)).then(a.cmp(&b)));
    let assigned: usize = sizes.iter().sum();
    if assigned < n {
        for &i in order.iter().cycle().take(n - assigned) {
            sizes[i] += 1;
        }
    } else {
        let mut excess = assigned - n;
        for &i in order.iter().rev() {
            if excess == 0 {
                break;
            }
            if sizes[i] > 0 {
                sizes[i] -= 1;
                excess -= 1;
            }
        }
    }
    sizes
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgentState {
    Potential,
    Active { since: usize },
    Churned { at: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: usize,
    /// Index into the population's segment list.
    pub segment: usize,
    pub gamma: f64,
    pub log_r: f64,
    pub state: AgentState,
    /// Log of the personalization uplift on perceived capability.
    pub personalization_log_mult: f64,
    /// Multiplier on `gamma` from active interventions.
    pub gamma_mult: f64,
}

impl Agent {
    pub fn is_active(&self) -> bool {
        matches!(self.state, AgentState::Active { .. })
    }

    pub fn effective_gamma(&self) -> f64 {
        self.gamma * self.gamma_mult
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub adopted_ever: usize,
    pub active: usize,
    pub churned: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    segments: Vec<Segment>,
    agents: Vec<Agent>,
    counts: Counts,
}

impl Population {
    /// Build `n` agents; segment `i` takes a contiguous block of ids.
    ///
    /// Each agent draws its adaptation rate and then its headroom jitter from
    /// its own init substream of `seed`.
    pub fn build(segments: &[Segment], n: usize, seed: u64, log_c0: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("size", "population size must be >= 1"));
        }
        validate_segments(segments)?;
        if !log_c0.is_finite() {
            return Err(Error::domain("ln C(0) must be finite"));
        }
        let fractions: Vec<f64> = segments.iter().map(|s| s.fraction).collect();
        let sizes = segment_sizes(&fractions, n);
        let mut agents = Vec::with_capacity(n);
        for (seg_idx, (segment, &size)) in segments.iter().zip(&sizes).enumerate() {
            for _ in 0..size {
                let id = agents.len();
                let mut rng = rng::agent_stream(seed, id, Purpose::Init);
                let [lo, hi] = segment.gamma_range;
                let gamma = rng::uniform(&mut rng, lo, hi).clamp(lo, hi);
                let jitter = segment.headroom_jitter;
                let headroom = segment.initial_headroom + rng::uniform(&mut rng, -jitter, jitter);
                agents.push(Agent {
                    id,
                    segment: seg_idx,
                    gamma,
                    log_r: log_c0 - headroom,
                    state: AgentState::Potential,
                    personalization_log_mult: 0.0,
                    gamma_mult: 1.0,
                });
            }
        }
        Ok(Self {
            segments: segments.to_vec(),
            agents,
            counts: Counts::default(),
        })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agents_mut(&mut self) -> &mut [Agent] {
        &mut self.agents
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn counts(&self) -> Counts {
        self.counts
    }

    pub fn segment_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.segments.len()];
        for a in &self.agents {
            sizes[a.segment] += 1;
        }
        sizes
    }

    pub fn adopted_fraction(&self) -> f64 {
        self.counts.adopted_ever as f64 / self.agents.len() as f64
    }

    /// Potential → Active.
    pub fn activate(&mut self, id: usize, t: usize) {
        let agent = &mut self.agents[id];
        debug_assert_eq!(agent.state, AgentState::Potential);
        agent.state = AgentState::Active { since: t };
        self.counts.adopted_ever += 1;
        self.counts.active += 1;
    }

    /// Active → Churned.
    pub fn churn(&mut self, id: usize, t: usize) {
        let agent = &mut self.agents[id];
        debug_assert!(agent.is_active());
        agent.state = AgentState::Churned { at: t };
        self.counts.active -= 1;
        self.counts.churned += 1;
    }

    /// Mean satisfaction per segment over Active agents; `None` for segments
    /// with no active agent. `satisfactions` is indexed by agent id.
    pub fn segment_aggregates(&self, satisfactions: &[f64]) -> Vec<Option<f64>> {
        let mut sums = vec![0.0; self.segments.len()];
        let mut counts = vec![0usize; self.segments.len()];
        for agent in self.agents.iter().filter(|a| a.is_active()) {
            sums[agent.segment] += satisfactions[agent.id];
            counts[agent.segment] += 1;
        }
        sums.into_iter()
            .zip(counts)
            .map(|(s, c)| (c > 0).then(|| s / c as f64))
            .collect()
    }
}
