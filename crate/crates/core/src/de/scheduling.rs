//! Scheduling strategies for density evolution, registered by name.

use super::engine::{run_parallel, run_sliding_window};
use super::{DeConfig, DeTrajectory};
use crate::{Error, Result};

/// One density-evolution scheduling variant.
pub trait DeScheduling: Sync {
    fn name(&self) -> &'static str;
    fn run(&self, cfg: &DeConfig) -> Result<DeTrajectory>;
}

struct Parallel;

impl DeScheduling for Parallel {
    fn name(&self) -> &'static str {
        "parallel"
    }

    fn run(&self, cfg: &DeConfig) -> Result<DeTrajectory> {
        run_parallel(cfg)
    }
}

struct SlidingWindow;

impl DeScheduling for SlidingWindow {
    fn name(&self) -> &'static str {
        "sliding-window"
    }

    fn run(&self, cfg: &DeConfig) -> Result<DeTrajectory> {
        run_sliding_window(cfg)
    }
}

/// Registry of available strategies.
pub static REGISTRY: &[&dyn DeScheduling] = &[&Parallel, &SlidingWindow];

/// Look a strategy up by its registered name ("sw" is accepted as an alias
/// for "sliding-window").
pub fn by_name(name: &str) -> Result<&'static dyn DeScheduling> {
    let canonical = match name {
        "sw" => "sliding-window",
        other => other,
    };
    REGISTRY
        .iter()
        .copied()
        .find(|s| s.name() == canonical)
        .ok_or_else(|| {
            let known: Vec<&str> = REGISTRY.iter().map(|s| s.name()).collect();
            Error::config(format!("unknown DE scheduling {name:?}; known: {known:?}"))
        })
}
