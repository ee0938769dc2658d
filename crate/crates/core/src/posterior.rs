//! Per-arm sufficient statistics and their moment-matched Gaussian summaries.

use rand::Rng;
use thiserror::Error;

use crate::rng::StreamRng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PosteriorError {
    #[error("gaussian summary needs at least one pull")]
    NoPulls,
    #[error("sigma must be positive and finite, got {0}")]
    BadSigma(f64),
}

/// Reward family of a game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardKind {
    Bernoulli,
    Gaussian { sigma: f64 },
}

impl RewardKind {
    pub fn gaussian(sigma: f64) -> Result<Self, PosteriorError> {
        if sigma > 0.0 && sigma.is_finite() {
            Ok(RewardKind::Gaussian { sigma })
        } else {
            Err(PosteriorError::BadSigma(sigma))
        }
    }

    pub fn is_bernoulli(self) -> bool {
        matches!(self, RewardKind::Bernoulli)
    }
}

/// Pull count and cumulative reward of one arm. Bernoulli rewards keep an
/// integer-valued `reward`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArmCounts {
    pub pulls: u64,
    pub reward: f64,
}

impl ArmCounts {
    pub fn new(reward: f64, pulls: u64) -> Self {
        Self { pulls, reward }
    }

    pub fn record(&mut self, reward: f64) {
        self.pulls += 1;
        self.reward += reward;
    }

    /// Counts after one more pull returning `reward`.
    pub fn after(self, reward: f64) -> Self {
        Self { pulls: self.pulls + 1, reward: self.reward + reward }
    }

    /// Empirical mean `S/n`; zero before the first pull.
    pub fn empirical_mean(&self) -> f64 {
        if self.pulls == 0 {
            0.0
        } else {
            self.reward / self.pulls as f64
        }
    }
}

/// Moment-matched posterior summary: mean `theta`, effective draw count `n_eff`
/// and variance `var`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary {
    pub theta: f64,
    pub n_eff: f64,
    pub var: f64,
}

/// Gaussian with the first two moments of Beta(S+1, n-S+1).
pub fn summarize_bernoulli(counts: &ArmCounts) -> MomentSummary {
    let n = counts.pulls as f64;
    let theta = (counts.reward + 1.0) / (n + 2.0);
    let n_eff = n + 3.0;
    MomentSummary { theta, n_eff, var: theta * (1.0 - theta) / n_eff }
}

pub fn summarize_gaussian(counts: &ArmCounts, sigma: f64) -> Result<MomentSummary, PosteriorError> {
    if counts.pulls == 0 {
        return Err(PosteriorError::NoPulls);
    }
    let n = counts.pulls as f64;
    Ok(MomentSummary { theta: counts.reward / n, n_eff: n, var: sigma * sigma / n })
}

pub fn summarize(counts: &ArmCounts, kind: RewardKind) -> Result<MomentSummary, PosteriorError> {
    match kind {
        RewardKind::Bernoulli => Ok(summarize_bernoulli(counts)),
        RewardKind::Gaussian { sigma } => summarize_gaussian(counts, sigma),
    }
}

/// Counts together with their summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedArm {
    pub counts: ArmCounts,
    pub summary: MomentSummary,
}

impl RankedArm {
    pub fn new(counts: ArmCounts, kind: RewardKind) -> Result<Self, PosteriorError> {
        Ok(Self { counts, summary: summarize(&counts, kind)? })
    }
}

/// Which tie rule decided a pair ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieRule {
    None,
    /// Equal means, larger effective count taken as max.
    Theta,
    /// Equal means and counts, labels drawn from the stream.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairRanking {
    /// 0 when the first argument is the max arm, 1 otherwise.
    pub max: usize,
    pub min: usize,
    pub tie: TieRule,
}

/// `true` when `a` outranks `b` without consulting randomness: larger mean, or
/// equal mean and at least as many effective draws.
#[inline]
pub fn outranks(a: &MomentSummary, b: &MomentSummary) -> bool {
    a.theta > b.theta || (a.theta == b.theta && a.n_eff >= b.n_eff)
}

pub fn rank_pair(a: &MomentSummary, b: &MomentSummary, rng: &mut StreamRng) -> PairRanking {
    let first = |tie| PairRanking { max: 0, min: 1, tie };
    let second = |tie| PairRanking { max: 1, min: 0, tie };
    if a.theta > b.theta {
        first(TieRule::None)
    } else if b.theta > a.theta {
        second(TieRule::None)
    } else if a.n_eff > b.n_eff {
        first(TieRule::Theta)
    } else if b.n_eff > a.n_eff {
        second(TieRule::Theta)
    } else if rng.random_range(0..2u32) == 0 {
        first(TieRule::Full)
    } else {
        second(TieRule::Full)
    }
}
