//! Joint UE selection, transmit-power and CPU-frequency allocation that
//! minimizes the wall-clock execution time of a federated-learning process
//! served by a cell-free massive MIMO network.
//!
//! The crate is organized bottom-up:
//!
//! * [`network`] draws placements, large-scale fading, pilots and MMSE
//!   channel-estimate statistics.
//! * [`rates`] evaluates achievable rates and the round-time model.
//! * [`conic`] is the convex-program layer shared by both timescales.
//! * [`short_term`] runs successive convex approximation for the per-round
//!   power/frequency problem.
//! * [`long_term`] runs the online two-timescale method that picks the UE set.
//! * [`evaluate`] turns a selection into an execution-time estimate.
//! * [`baselines`] holds the random-selection reference schemes.
//! * [`experiment`] is the Monte Carlo harness and its CSV outputs.

// `!(x > 0.0)` guards are meant to reject NaN too, and the rate formulas
// read most clearly as index loops over several matrices.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod baselines;
pub mod conic;
pub mod error;
pub mod evaluate;
pub mod experiment;
pub mod long_term;
pub mod network;
pub mod par;
pub mod params;
pub mod rates;
pub mod seed;
pub mod short_term;
pub mod stream;

pub use error::{Error, Result};
pub use params::SystemParams;
