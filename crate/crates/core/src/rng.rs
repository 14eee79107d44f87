//! Seeded random streams.
//!
//! A master seed is expanded with SplitMix64 into independent substreams, each
//! driven by xoshiro256++. Every agent owns one substream per purpose, so a
//! change to one mechanism never shifts another agent's (or another
//! mechanism's) draws.

use rand::{RngExt, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};

pub const SEED_EXPANSION: &str = "splitmix64";
pub const STREAM_ALGORITHM: &str = "xoshiro256++";

pub type Stream = Xoshiro256PlusPlus;

/// What a substream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    Adoption = 2,
    Churn = 3,
    Personalization = 4,
    Sampling = 5,
}

/// Derive a child seed from `(seed, a, b)` by chaining SplitMix64.
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut sm = SplitMix64::seed_from_u64(seed);
    let s1: u64 = sm.random();
    let mut sm = SplitMix64::seed_from_u64(s1 ^ a);
    let s2: u64 = sm.random();
    let mut sm = SplitMix64::seed_from_u64(s2 ^ b);
    sm.random()
}

pub fn stream(seed: u64) -> Stream {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

pub fn agent_stream(master: u64, agent_id: usize, purpose: Purpose) -> Stream {
    stream(derive_seed(master, agent_id as u64, purpose as u64))
}

/// Uniform draw in `[lo, hi)`; returns `lo` when the interval is empty.
pub fn uniform(rng: &mut Stream, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.random();
    lo + u * (hi - lo)
}
