//! Deterministic stair-climbing reinforcement-learning pipeline.
//!
//! The crate combines procedural stair heightfields, a reduced-order legged
//! surrogate environment, an actor-critic network with a shared convolutional
//! terrain encoder and hand-rolled reverse-mode gradients, a PPO trainer with
//! a ten-level terrain curriculum, and an evaluation harness for success
//! rates, cross-terrain transfer matrices, and critic-value heatmaps.
//!
//! Everything is seeded: for a fixed config and seed, training and evaluation
//! artifacts are byte-identical regardless of worker count.

pub mod config;
pub mod curriculum;
pub mod env;
pub mod error;
pub mod eval;
pub mod net;
pub mod ppo;
pub mod rewards;
pub mod rng;
pub mod terrain;

pub use config::RunConfig;
pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
