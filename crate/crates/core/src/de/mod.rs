//! Density evolution in the large-system limit: the entropy functional
//! psi, the effective-noise fixed point, the decoder entropy recursion,
//! multiuser-efficiency trajectories, and threshold search.

mod decoder;
mod engine;
mod mse;
mod psi;
mod quad;

pub mod scheduling;

pub use decoder::decoder_de;
pub use engine::{
    find_threshold, sw_stage_order, BracketProbe, DeConfig, DensityState, DeTrajectory,
    ThresholdReport, ME_TARGET, STAGNATION_TOL,
};
pub use mse::{mse_section, solve_sigma2, VarianceTable, DEFAULT_QUAD_ORDER};
pub use psi::{llr_entropy, psi, psi_inv, psi_prime, PsiTable, PSI_INV_H_MIN, PSI_INV_M_MAX};
pub use quad::{composite_gl16, GaussHermite};

use crate::Result;

/// Run density evolution with the scheduling named in the config.
pub fn run_de(cfg: &DeConfig) -> Result<DeTrajectory> {
    scheduling::by_name(&cfg.scheduling)?.run(cfg)
}
