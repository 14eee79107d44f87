//! Slope-based phase segmentation of a trajectory.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_WINDOW: usize = 9;
pub const DEFAULT_HI_FRACTION: f64 = 0.25;
pub const DEFAULT_LO_FRACTION: f64 = 0.025;
pub const DEFAULT_MIN_PLATEAU: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseKind {
    RapidGain,
    DiminishingReturns,
    Stabilization,
    Resurgence,
}

impl fmt::Display for PhaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PhaseKind::RapidGain => "RapidGain",
            PhaseKind::DiminishingReturns => "DiminishingReturns",
            PhaseKind::Stabilization => "Stabilization",
            PhaseKind::Resurgence => "Resurgence",
        };
        f.write_str(s)
    }
}

/// A labeled, inclusive step interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseLabel {
    pub kind: PhaseKind,
    pub start: usize,
    pub end: usize,
}

/// Centered moving average; near the edges the window shrinks symmetrically.
pub fn smooth(series: &[f64], window: usize) -> Vec<f64> {
    let n = series.len();
    let half = window / 2;
    (0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            let slice = &series[i - h..=i + h];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect()
}

/// Central finite differences, one-sided at the ends.
pub fn slopes(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|i| {
                if i == 0 {
                    series[1] - series[0]
                } else if i == n - 1 {
                    series[n - 1] - series[n - 2]
                } else {
                    (series[i + 1] - series[i - 1]) / 2.0
                }
            })
            .collect(),
    }
}

/// Marks the steps belonging to flat runs of at least `min_plateau` steps.
fn plateau_mask(flat: &[bool], min_plateau: usize) -> Vec<bool> {
    let n = flat.len();
    let mut plateau = vec![false; n];
    let mut i = 0;
    while i < n {
        if !flat[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && flat[i] {
            i += 1;
        }
        if i - start >= min_plateau {
            plateau[start..i].fill(true);
        }
    }
    plateau
}

/// First step of the first sustained flat run under the default thresholds.
///
/// Unlike the first Stabilization label, this ignores the unlabeled steps
/// that get merged in front of a leading plateau.
pub fn plateau_onset(series: &[f64]) -> Option<usize> {
    if series.len() <= DEFAULT_WINDOW {
        return None;
    }
    let (_, lo) = default_thresholds(series, DEFAULT_WINDOW);
    let flat: Vec<bool> = slopes(&smooth(series, DEFAULT_WINDOW))
        .iter()
        .map(|s| s.abs() <= lo)
        .collect();
    plateau_mask(&flat, DEFAULT_MIN_PLATEAU).iter().position(|&p| p)
}

/// Segment `series` into chronological phases.
///
/// Steps whose smoothed slope reaches `theta_hi` are rapid gains, or
/// resurgences once a stabilization interval has closed. Runs of at least
/// `min_plateau` steps with `|slope| <= theta_lo` are stabilization. Other
/// positive-slope steps after a gain are diminishing returns; everything else
/// joins the preceding label.
pub fn classify_phases(
    series: &[f64],
    window: usize,
    theta_hi: f64,
    theta_lo: f64,
    min_plateau: usize,
) -> Result<Vec<PhaseLabel>> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::domain(format!("window must be odd and positive, got {window}")));
    }
    if series.len() <= window {
        return Err(Error::domain(format!(
            "series of length {} is too short for window {window}",
            series.len()
        )));
    }
    if !(theta_lo >= 0.0 && theta_lo < theta_hi) {
        return Err(Error::domain(format!("need 0 <= theta_lo < theta_hi, got {theta_lo}, {theta_hi}")));
    }
    if min_plateau == 0 {
        return Err(Error::domain("min_plateau must be positive"));
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("series contains non-finite values"));
    }

    let slope = slopes(&smooth(series, window));
    let n = slope.len();
    let flat: Vec<bool> = slope.iter().map(|s| s.abs() <= theta_lo).collect();
    let plateau = plateau_mask(&flat, min_plateau);

    let mut labels: Vec<Option<PhaseKind>> = Vec::with_capacity(n);
    let mut seen_gain = false;
    let mut in_plateau = false;
    let mut plateau_closed = false;
    for t in 0..n {
        if plateau[t] {
            in_plateau = true;
            labels.push(Some(PhaseKind::Stabilization));
            continue;
        }
        if in_plateau {
            in_plateau = false;
            plateau_closed = true;
        }
        let label = if slope[t] >= theta_hi {
            seen_gain = true;
            Some(if plateau_closed { PhaseKind::Resurgence } else { PhaseKind::RapidGain })
        } else if slope[t] > 0.0 && seen_gain {
            Some(PhaseKind::DiminishingReturns)
        } else {
            None
        };
        labels.push(label);
    }

    let fallback = if flat.iter().all(|&f| f) {
        PhaseKind::Stabilization
    } else {
        PhaseKind::DiminishingReturns
    };
    let mut current = labels.iter().flatten().next().copied().unwrap_or(fallback);
    let mut out: Vec<PhaseLabel> = Vec::new();
    for (t, label) in labels.into_iter().enumerate() {
        if let Some(kind) = label {
            current = kind;
        }
        match out.last_mut() {
            Some(last) if last.kind == current => last.end = t,
            _ => out.push(PhaseLabel { kind: current, start: t, end: t }),
        }
    }
    Ok(out)
}

/// Thresholds relative to the series' peak absolute smoothed slope.
pub fn default_thresholds(series: &[f64], window: usize) -> (f64, f64) {
    let peak = slopes(&smooth(series, window))
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max);
    let peak = if peak > 0.0 { peak } else { 1.0 };
    (DEFAULT_HI_FRACTION * peak, DEFAULT_LO_FRACTION * peak)
}

pub fn classify_phases_with_window(series: &[f64], window: usize) -> Result<Vec<PhaseLabel>> {
    let (hi, lo) = default_thresholds(series, window);
    classify_phases(series, window, hi, lo, DEFAULT_MIN_PLATEAU)
}

pub fn classify_phases_default(series: &[f64]) -> Result<Vec<PhaseLabel>> {
    classify_phases_with_window(series, DEFAULT_WINDOW)
}
