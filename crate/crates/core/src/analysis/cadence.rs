//! Release-cadence search under a fixed capability budget.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{self, Scenario};
use crate::error::{Error, Result};
use crate::schedule::{cadence_to_schedule, BudgetedCadence};

/// Objectives within this (scaled) distance of the best count as ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CadenceSearch {
    pub base: Scenario,
    pub total_log_budget: f64,
    pub intervals: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CadenceRow {
    pub interval: usize,
    /// Time-averaged satisfaction over active agent-steps.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CadenceResult {
    pub best_interval: usize,
    pub best_objective: f64,
    /// One row per candidate, ascending by interval.
    pub table: Vec<CadenceRow>,
}

/// Scenario with the base schedule replaced by the budgeted cadence.
pub fn cadence_scenario(base: &Scenario, total_log_budget: f64, interval: usize) -> Result<Scenario> {
    let cadence = BudgetedCadence { total_log_budget, interval };
    let schedule = cadence_to_schedule(&cadence, base.horizon, base.schedule.c0())
        .map_err(|e| Error::config("intervals", format!("candidate {interval}: {e}")))?;
    Ok(Scenario { schedule, ..base.clone() })
}

pub fn evaluate_interval(base: &Scenario, total_log_budget: f64, interval: usize) -> Result<f64> {
    let scenario = cadence_scenario(base, total_log_budget, interval)?;
    engine::run(&scenario)?
        .time_averaged_satisfaction()
        .ok_or_else(|| Error::domain(format!("interval {interval}: no active agent-steps")))
}

/// Smallest interval whose objective is within tolerance of the maximum.
pub fn select_best(table: &[CadenceRow]) -> Option<CadenceRow> {
    let max = table.iter().map(|r| r.objective).fold(f64::NEG_INFINITY, f64::max);
    let tol = TIE_TOLERANCE * max.abs().max(1.0);
    table
        .iter()
        .filter(|r| r.objective >= max - tol)
        .min_by_key(|r| r.interval)
        .copied()
}

/// Exhaustive search: every candidate is run with the base scenario's seed so
/// comparisons share random numbers.
pub fn optimize_cadence(search: &CadenceSearch) -> Result<CadenceResult> {
    let mut intervals = search.intervals.clone();
    intervals.sort_unstable();
    intervals.dedup();
    if intervals.len() < 2 {
        return Err(Error::config("intervals", "need at least two distinct candidates"));
    }
    search.base.validate()?;
    for &interval in &intervals {
        cadence_scenario(&search.base, search.total_log_budget, interval)?;
    }
    let objectives: Vec<Result<f64>> = intervals
        .par_iter()
        .map(|&i| evaluate_interval(&search.base, search.total_log_budget, i))
        .collect();
    let table = intervals
        .iter()
        .zip(objectives)
        .map(|(&interval, objective)| Ok(CadenceRow { interval, objective: objective? }))
        .collect::<Result<Vec<_>>>()?;
    let best = select_best(&table).expect("table is nonempty");
    Ok(CadenceResult {
        best_interval: best.interval,
        best_objective: best.objective,
        table,
    })
}

/// Parse `lo..hi` (inclusive) or a comma-separated list.
pub fn parse_intervals(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::config("intervals", format!("expected `lo..hi` or a comma-separated list, got {text:?}"));
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
        .collect()
}
