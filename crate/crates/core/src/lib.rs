//! Approximate information maximization for two-armed and multi-armed bandits,
//! together with the baseline policies and the Monte-Carlo harness used to
//! compare them.

pub mod config;
pub mod entropy;
pub mod policy;
pub mod posterior;
pub mod rng;
pub mod selfcheck;
pub mod sim;
pub mod special;

pub use config::{parse_config, ConfigError, ExperimentSpec, MeansSpec};
pub use entropy::{EntropyBreakdown, PairView, ThetaEq, ThetaEqForm};
pub use policy::{GameState, GameView, Policy, PolicyConfig, Rule};
pub use posterior::{ArmCounts, MomentSummary, RankedArm, RewardKind};
pub use rng::StreamRng;
pub use sim::{AggregateCurve, AggregatePoint, BanditEnv, MonteCarloResult, RunOptions, RunRecord, SimError};
