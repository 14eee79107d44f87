//! Post-run analytics: phase segmentation, gap metrics, cadence search and sweeps.

pub mod cadence;
pub mod metrics;
pub mod phases;
pub mod sweep;

pub use cadence::{optimize_cadence, CadenceResult, CadenceRow, CadenceSearch};
pub use metrics::{satisfaction_gap, time_to_half_peak};
pub use phases::{classify_phases, classify_phases_default, PhaseKind, PhaseLabel};
pub use sweep::{lhs_sample, run_sweep, Metric, SweepDimension, SweepRow, SweepSpec};
