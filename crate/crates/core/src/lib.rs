//! Agent-based simulation of hedonic adaptation to improving technology.
//!
//! Users adopt a product through Bass diffusion, judge its capability against
//! a reference point that drifts toward what they have experienced, and may
//! churn when satisfaction falls short. Capability arrives continuously or in
//! releases, and a handful of interventions perturb the adaptation process.

pub mod analysis;
pub mod cli;
pub mod engine;
pub mod error;
pub mod io;
pub mod kernels;
pub mod population;
pub mod rng;
pub mod schedule;
pub mod stats;

pub use engine::{run, run_many, RunOutput, Scenario};
pub use error::{Error, Result};
