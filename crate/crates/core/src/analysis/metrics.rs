//! Trajectory metrics over finished runs.

use crate::engine::RunOutput;
use crate::error::{Error, Result};

fn min_max(xs: &[f64]) -> Option<Vec<f64>> {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if !(range > 1e-12 * (1.0 + hi.abs().max(lo.abs()))) {
        return None;
    }
    Some(xs.iter().map(|x| (x - lo) / range).collect())
}

/// Normalized divergence between objective capability and felt satisfaction.
///
/// `gap(t) = norm(ln C)(t) - norm(S)(t)` with min–max normalization taken
/// over the steps that had active agents; other steps are `None`. A constant
/// input series normalizes to the all-zero gap.
pub fn satisfaction_gap(run: &RunOutput) -> Result<Vec<Option<f64>>> {
    let observed: Vec<(usize, f64, f64)> = run
        .steps
        .iter()
        .filter_map(|s| s.mean_satisfaction.map(|m| (s.t, s.capability.ln(), m)))
        .collect();
    if observed.is_empty() {
        return Err(Error::domain("no active agents at any step"));
    }
    let log_c: Vec<f64> = observed.iter().map(|o| o.1).collect();
    let sat: Vec<f64> = observed.iter().map(|o| o.2).collect();
    let gaps: Vec<f64> = match (min_max(&log_c), min_max(&sat)) {
        (Some(c), Some(s)) => c.iter().zip(&s).map(|(c, s)| c - s).collect(),
        _ => vec![0.0; observed.len()],
    };
    let mut out = vec![None; run.horizon()];
    for ((t, _, _), g) in observed.iter().zip(gaps) {
        out[*t] = Some(g);
    }
    Ok(out)
}

/// First step after the peak where the excess over `baseline` has fallen to
/// half the peak excess.
pub fn time_to_half_peak(series: &[f64], baseline: f64) -> Option<usize> {
    let (peak_t, peak) = series
        .iter()
        .copied()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (t, x)| match best {
            Some((_, b)) if b >= x => best,
            _ => Some((t, x)),
        })?;
    let half = 0.5 * (peak - baseline);
    series[peak_t + 1..]
        .iter()
        .position(|x| x - baseline <= half)
        .map(|i| peak_t + 1 + i)
}

/// Index of the first maximum, ignoring gaps.
pub fn argmax(series: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (t, v) in series.iter().enumerate() {
        if let Some(v) = *v {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((t, v));
            }
        }
    }
    best.map(|(t, _)| t)
}
