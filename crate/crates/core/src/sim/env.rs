use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::posterior::RewardKind;
use crate::rng::StreamRng;

use super::SimError;

/// Ground-truth game.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditEnv {
    pub kind: RewardKind,
    pub means: Vec<f64>,
    best: f64,
}

impl BanditEnv {
    pub fn new(kind: RewardKind, means: Vec<f64>) -> Result<Self, SimError> {
        if means.is_empty() {
            return Err(SimError::BadMeans("no arms".into()));
        }
        for &m in &means {
            let ok = match kind {
                RewardKind::Bernoulli => (0.0..=1.0).contains(&m),
                RewardKind::Gaussian { .. } => m.is_finite(),
            };
            if !ok {
                return Err(SimError::BadMeans(format!("{m} is not a valid mean")));
            }
        }
        let best = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { kind, means, best })
    }

    pub fn k(&self) -> usize {
        self.means.len()
    }

    pub fn best_mean(&self) -> f64 {
        self.best
    }

    /// First arm with the largest mean.
    pub fn best_arm(&self) -> usize {
        self.means.iter().position(|&m| m == self.best).unwrap()
    }

    /// Difference between the best and the second-best mean.
    pub fn gap(&self) -> f64 {
        let best = self.best_arm();
        let second = self
            .means
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != best)
            .map(|(_, &m)| m)
            .fold(f64::NEG_INFINITY, f64::max);
        if second.is_finite() {
            self.best - second
        } else {
            0.0
        }
    }
}

pub fn step_env(env: &BanditEnv, arm: usize, rng: &mut StreamRng) -> f64 {
    let mean = env.means[arm];
    match env.kind {
        RewardKind::Bernoulli => {
            if rng.random::<f64>() < mean {
                1.0
            } else {
                0.0
            }
        }
        RewardKind::Gaussian { sigma } => {
            let z: f64 = StandardNormal.sample(rng);
            mean + sigma * z
        }
    }
}
