//! Scheduling a mobile beamforming charger for wireless-powered IoT sensors.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: grid discretization of the field and the in-grid power ratio bound.
//! * [`channel`]: uniform linear array codebooks, mean CSI, Rayleigh fading, received power.
//! * [`energy`]: battery dynamics inside a charging round and concave utility functions.
//! * [`oracle`]: full-information schedulers (greedy utility, energy-greedy, continuous upper bound).
//! * [`bandit`]: combinatorial UCB policies (plain and sliding window), epsilon-greedy, regret.
//! * [`harness`]: seeded scenarios, the round loop, sweeps, CSV traces and self-validation.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandit;
pub mod channel;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod oracle;
pub mod policy;

pub use error::{Error, Result};
