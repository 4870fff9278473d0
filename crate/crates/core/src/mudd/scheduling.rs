//! MUDD scheduling strategies, registered by name and selected at runtime.

use super::{FrameContext, MuddOutcome, Schedule};
use crate::{Error, Result};

/// One receiver scheduling variant.
pub trait MuddScheduling: Sync {
    fn name(&self) -> &'static str;
    fn run(&self, ctx: &FrameContext, schedule: &Schedule) -> Result<MuddOutcome>;
}

struct Parallel;

impl MuddScheduling for Parallel {
    fn name(&self) -> &'static str {
        "parallel"
    }

    fn run(&self, ctx: &FrameContext, schedule: &Schedule) -> Result<MuddOutcome> {
        super::parallel::run(ctx, schedule)
    }
}

struct SlidingWindow;

impl MuddScheduling for SlidingWindow {
    fn name(&self) -> &'static str {
        "sliding-window"
    }

    fn run(&self, ctx: &FrameContext, schedule: &Schedule) -> Result<MuddOutcome> {
        super::sliding::run(ctx, schedule)
    }
}

pub static REGISTRY: &[&dyn MuddScheduling] = &[&Parallel, &SlidingWindow];

pub fn by_name(name: &str) -> Result<&'static dyn MuddScheduling> {
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
            Error::config(format!("unknown MUDD scheduling {name:?}; known: {known:?}"))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lookup() {
        assert_eq!(by_name("parallel").unwrap().name(), "parallel");
        assert_eq!(by_name("sw").unwrap().name(), "sliding-window");
        assert!(by_name("zigzag").is_err());
    }
}
