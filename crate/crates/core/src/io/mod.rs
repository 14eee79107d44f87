//! Configuration intake and file output.

pub mod canonical;
pub mod config;
pub mod output;
pub mod svg;

pub use config::{load_scenario, load_sweep, parse_scenario};
pub use output::{emit_run, EmitOptions, RunManifest};
