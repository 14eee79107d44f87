//! Latin-hypercube parameter sweeps over scenario documents.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::metrics::argmax;
use super::phases::plateau_onset;
use crate::engine::{self, RunOutput, Scenario};
use crate::error::{Error, Result};
use crate::io::canonical::format_float;
use crate::io::output::filled_series;
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Mean satisfaction over all active agent-steps.
    TimeAvgSatisfaction,
    FinalAdoptedFraction,
    ChurnTotal,
    PeakSatisfaction,
    /// First step of the first sustained plateau in mean satisfaction.
    TimeToStabilization,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::TimeAvgSatisfaction => "time_avg_satisfaction",
            Metric::FinalAdoptedFraction => "final_adopted_fraction",
            Metric::ChurnTotal => "churn_total",
            Metric::PeakSatisfaction => "peak_satisfaction",
            Metric::TimeToStabilization => "time_to_stabilization",
        }
    }

    pub fn evaluate(&self, run: &RunOutput) -> Option<f64> {
        let last = run.steps.last()?;
        match self {
            Metric::TimeAvgSatisfaction => run.time_averaged_satisfaction(),
            Metric::FinalAdoptedFraction => Some(last.adopted_fraction()),
            Metric::ChurnTotal => Some(last.frac_churned),
            Metric::PeakSatisfaction => {
                let series = run.mean_satisfaction_series();
                argmax(&series).and_then(|t| series[t])
            }
            Metric::TimeToStabilization => {
                let (offset, values) = filled_series(&run.mean_satisfaction_series())?;
                plateau_onset(&values).map(|t| (t + offset) as f64)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDimension {
    /// Dotted key path into the scenario document, e.g.
    /// `population.segments[*].gamma_range[*]`; `[*]` patches every element.
    pub path: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub dimensions: Vec<SweepDimension>,
    pub samples: usize,
    pub seed: u64,
    pub metrics: Vec<Metric>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dimensions.is_empty() {
            return Err(Error::config("dimensions", "at least one dimension is required"));
        }
        for (i, d) in self.dimensions.iter().enumerate() {
            parse_path(&d.path).map_err(|e| e.under(&format!("dimensions[{i}]")))?;
            if !(d.lo.is_finite() && d.hi.is_finite() && d.lo < d.hi) {
                return Err(Error::config(format!("dimensions[{i}]"), "need finite lo < hi"));
            }
        }
        if self.samples < 2 {
            return Err(Error::config("samples", "must be >= 2"));
        }
        if self.metrics.is_empty() {
            return Err(Error::config("metrics", "at least one metric is required"));
        }
        Ok(())
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.dimensions.iter().map(|d| (d.lo, d.hi)).collect()
    }
}

/// Stratified sample: each dimension's `n` values fall one per equal-width
/// stratum, with the stratum order shuffled independently per dimension.
/// Rows are samples, columns dimensions.
pub fn latin_hypercube(bounds: &[(f64, f64)], n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng::stream(seed);
    let mut points = vec![vec![0.0; bounds.len()]; n];
    for (j, &(lo, hi)) in bounds.iter().enumerate() {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(&mut rng);
        for (point, stratum) in points.iter_mut().zip(strata) {
            let u = rng::uniform(&mut rng, 0.0, 1.0);
            let x = lo + (stratum as f64 + u) / n as f64 * (hi - lo);
            // keep rounding from spilling into the next stratum
            let upper = lo + (stratum + 1) as f64 / n as f64 * (hi - lo);
            point[j] = if x >= upper && stratum + 1 < n { upper.next_down() } else { x.min(hi) };
        }
    }
    points
}

pub fn lhs_sample(spec: &SweepSpec) -> Vec<Vec<f64>> {
    latin_hypercube(&spec.bounds(), spec.samples, spec.seed)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum PathToken {
    Key(String),
    Index(usize),
    All,
}

fn parse_path(path: &str) -> Result<Vec<PathToken>> {
    let bad = |why: &str| Error::config("path", format!("{path:?}: {why}"));
    let mut tokens = Vec::new();
    for part in path.split('.') {
        let (key, mut rest) = match part.find('[') {
            Some(i) => (&part[..i], &part[i..]),
            None => (part, ""),
        };
        if key.is_empty() {
            return Err(bad("empty key"));
        }
        tokens.push(PathToken::Key(key.to_string()));
        while !rest.is_empty() {
            let close = rest.find(']').ok_or_else(|| bad("unclosed '['"))?;
            let inner = &rest[1..close];
            tokens.push(if inner == "*" {
                PathToken::All
            } else {
                PathToken::Index(inner.parse().map_err(|_| bad("bad index"))?)
            });
            rest = &rest[close + 1..];
            if !rest.is_empty() && !rest.starts_with('[') {
                return Err(bad("unexpected text after ']'"));
            }
        }
    }
    Ok(tokens)
}

fn set_numbers(value: &mut Value, tokens: &[PathToken], x: f64, path: &str) -> Result<usize> {
    let missing = || Error::config(path.to_string(), "does not resolve in the scenario document");
    let Some((head, tail)) = tokens.split_first() else {
        let new = match value {
            Value::Number(n) if n.is_u64() || n.is_i64() => {
                let rounded = x.round();
                if rounded < 0.0 {
                    return Err(Error::config(path.to_string(), "integer field cannot be negative"));
                }
                Value::from(rounded as u64)
            }
            Value::Number(_) => serde_json::Number::from_f64(x)
                .map(Value::Number)
                .ok_or_else(|| Error::config(path.to_string(), "non-finite value"))?,
            _ => return Err(Error::config(path.to_string(), "is not a numeric field")),
        };
        *value = new;
        return Ok(1);
    };
    match (head, value) {
        (PathToken::Key(k), Value::Object(map)) => {
            set_numbers(map.get_mut(k).ok_or_else(missing)?, tail, x, path)
        }
        (PathToken::Index(i), Value::Array(items)) => {
            set_numbers(items.get_mut(*i).ok_or_else(missing)?, tail, x, path)
        }
        (PathToken::All, Value::Array(items)) => {
            let mut count = 0;
            for item in items {
                count += set_numbers(item, tail, x, path)?;
            }
            Ok(count)
        }
        _ => Err(missing()),
    }
}

/// Set every numeric field matched by `path` to `x` and re-validate.
pub fn patch_scenario(base: &Scenario, patches: &[(&str, f64)]) -> Result<Scenario> {
    let mut doc = base.to_value();
    for &(path, x) in patches {
        let tokens = parse_path(path)?;
        if set_numbers(&mut doc, &tokens, x, path)? == 0 {
            return Err(Error::config(path.to_string(), "matched no fields"));
        }
    }
    let scenario: Scenario =
        serde_json::from_value(doc).map_err(|e| Error::config("<patched document>", e.to_string()))?;
    scenario.validate()?;
    Ok(scenario)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sample: usize,
    pub seed: u64,
    pub params: Vec<f64>,
    pub metrics: Vec<Option<f64>>,
    pub error: Option<String>,
}

pub fn sample_seed(sweep_seed: u64, sample: usize) -> u64 {
    rng::derive_seed(sweep_seed, sample as u64, Purpose::Sampling as u64)
}

fn run_sample(spec: &SweepSpec, base: &Scenario, sample: usize, params: &[f64]) -> SweepRow {
    let seed = sample_seed(spec.seed, sample);
    let patches: Vec<(&str, f64)> = spec.dimensions.iter().map(|d| d.path.as_str()).zip(params.iter().copied()).collect();
    let outcome = patch_scenario(base, &patches).and_then(|mut scenario| {
        scenario.seed = seed;
        engine::run(&scenario)
    });
    match outcome {
        Ok(run) => SweepRow {
            sample,
            seed,
            params: params.to_vec(),
            metrics: spec.metrics.iter().map(|m| m.evaluate(&run)).collect(),
            error: None,
        },
        Err(e) => SweepRow {
            sample,
            seed,
            params: params.to_vec(),
            metrics: vec![None; spec.metrics.len()],
            error: Some(e.to_string()),
        },
    }
}

/// Run every LHS sample of the sweep. Rows come back in sample order whatever
/// the worker count; `workers = None` runs sequentially on the caller's thread.
pub fn run_sweep(spec: &SweepSpec, base: &Scenario, workers: Option<usize>) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    base.validate()?;
    let points = lhs_sample(spec);
    let mut rows: Vec<SweepRow> = match workers {
        None | Some(0) | Some(1) => points.iter().enumerate().map(|(i, p)| run_sample(spec, base, i, p)).collect(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?;
            pool.install(|| {
                points
                    .par_iter()
                    .enumerate()
                    .map(|(i, p)| run_sample(spec, base, i, p))
                    .collect()
            })
        }
    };
    rows.sort_by_key(|r| r.sample);
    Ok(rows)
}

pub fn sweep_csv(spec: &SweepSpec, rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::io("sweep.csv", e);
    let mut header = vec!["sample".to_string(), "seed".to_string()];
    header.extend(spec.dimensions.iter().map(|d| d.path.clone()));
    header.extend(spec.metrics.iter().map(|m| m.name().to_string()));
    header.push("error".into());
    w.write_record(&header).map_err(to_err)?;
    for r in rows {
        let mut rec = vec![r.sample.to_string(), r.seed.to_string()];
        rec.extend(r.params.iter().map(|x| format_float(*x)));
        rec.extend(r.metrics.iter().map(|m| m.map(format_float).unwrap_or_default()));
        rec.push(r.error.clone().unwrap_or_default());
        w.write_record(&rec).map_err(to_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io("sweep.csv", e))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
