//! Environments, episodes, Monte-Carlo aggregation and regret analyses.

mod analysis;
mod env;
mod episode;
mod montecarlo;

use thiserror::Error;

use crate::config::ConfigError;
use crate::policy::PolicyError;

pub use analysis::{lai_robbins_reference, slope_fit, tail_statistics, TailStats};
pub use env::{step_env, BanditEnv};
pub use episode::{log_checkpoints, run_episode, run_with_policy, Checkpoint, RunRecord};
pub use montecarlo::{
    aggregate, draw_means, monte_carlo, AggregateCurve, AggregatePoint, MonteCarloResult, RegretMeasure, RunOptions,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid arm means: {0}")]
    BadMeans(String),
    #[error("horizon {horizon} shorter than the number of arms {k}")]
    HorizonTooShort { horizon: u64, k: usize },
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("top fraction {fraction} of {records} records selects nothing")]
    EmptySelection { fraction: f64, records: usize },
    #[error("{0}")]
    Degenerate(String),
    #[error("worker pool: {0}")]
    Workers(String),
}
