//! Link-level simulator and density-evolution toolkit for iterative
//! multiuser detection and decoding (MUDD) in LDPC-coded quasi-static
//! MIMO systems with spatially coupled bit interleaving.
//!
//! The crate has two halves:
//!
//! * a Monte Carlo transceiver chain ([`ldpc`], [`interleaver`], [`phy`],
//!   [`demod`], [`mudd`], driven by [`harness`]), and
//! * a density-evolution engine ([`de`]) that predicts decoding thresholds
//!   and multiuser-efficiency trajectories in the large-system limit.
//!
//! Scheduling variants (parallel vs. sliding-window) are registered behind
//! trait objects and selected by name at runtime; see [`mudd::scheduling`]
//! and [`de::scheduling`].

pub mod de;
pub mod demod;
pub mod error;
pub mod harness;
pub mod interleaver;
pub mod ldpc;
pub mod mudd;
pub mod phy;
pub mod rng;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// LLR magnitude clip applied throughout the receiver chain.
///
/// Positive LLR favors bit 0. At double precision tanh(25) already rounds
/// to 1, so +/-50 is numerically inert while preventing overflow in the
/// tanh-domain check-node updates.
pub const LLR_CLIP: f64 = 50.0;

/// Clip an LLR to [`LLR_CLIP`] magnitude, mapping NaN to 0.
#[inline]
pub fn clip_llr(l: f64) -> f64 {
    if l.is_nan() {
        0.0
    } else {
        l.clamp(-LLR_CLIP, LLR_CLIP)
    }
}
