//! Flow-time scheduling on unrelated machines via prefix discrepancy.
//!
//! The crate implements the assignment LP for maximum flow time and the
//! time-indexed LP for total flow time, their reduction to half-integral
//! solutions, and the discrepancy-based rounding of those solutions. Around
//! the two pipelines sit the translation between maximum flow time and
//! one-sided interval discrepancy, a one-dimensional maker-breaker
//! discrepancy game, and verification tools for the block construction that
//! turns prefix colorings into SDP vectors.
//!
//! All scheduling and discrepancy arithmetic is exact ([`rational::Rat`]).

#![allow(clippy::needless_range_loop)]

pub mod equivalence;
pub mod error;
pub mod game;
pub mod lp;
pub mod maxflow;
pub mod model;
pub mod prefix;
pub mod rational;
pub mod rng;
pub mod sdp;
pub mod summary;
pub mod totalflow;

pub use error::{Error, Result};
pub use rational::Rat;
