//! Finitely parameterized multi-armed bandits.
//!
//! The learner knows a finite set of candidate models for the arms' reward
//! distributions, one of which is true. This crate provides:
//!
//! - [`model`]: parameter sets, instance files, and a seeded reward environment.
//! - [`analysis`]: optimal arms, confusion sets, gaps, separations and the
//!   regret-bound constants of an instance.
//! - [`policies`]: FP-UCB and the UCB1 / Thompson sampling baselines.
//! - [`sim`]: reproducible Monte-Carlo regret curves, batch aggregation, CSV.
//! - [`lowerbound`]: the KL-based asymptotic lower-bound constant.

pub mod analysis;
pub mod error;
pub mod game;
pub mod lowerbound;
pub mod model;
pub mod policies;
pub mod sim;

pub use error::{Error, Result};
