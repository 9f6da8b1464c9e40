//! Crate error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid stair spec, difficulty level, or terrain query.
    #[error("terrain: {0}")]
    Terrain(String),

    /// Bad environment input (batch size, unknown terrain id, ...).
    #[error("env: {0}")]
    Env(String),

    /// Reward configuration or term composition problem.
    #[error("rewards: {0}")]
    Rewards(String),

    /// Curriculum rule misuse (e.g. update on a non-terminal outcome).
    #[error("curriculum: {0}")]
    Curriculum(String),

    /// Network input/shape problem.
    #[error("net: {0}")]
    Net(String),

    /// Checkpoint manifest/data mismatch or version problem.
    #[error("checkpoint: {0}")]
    Checkpoint(String),

    /// Training-loop failure (non-finite loss, bad batch, ...).
    #[error("train: {0}")]
    Train(String),

    /// Configuration file problem (parse error, invalid values).
    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
