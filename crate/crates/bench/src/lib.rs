//! Shared fixtures for the criterion benches.

use aim_core::{ArmCounts, RewardKind};

/// Mid-game counts: arm `i` has `pulls[i]` pulls at empirical mean `means[i]`.
pub fn mid_game(means: &[f64], pulls: &[u64], kind: RewardKind) -> Vec<ArmCounts> {
    means
        .iter()
        .zip(pulls)
        .map(|(&m, &n)| {
            let reward = m * n as f64;
            ArmCounts::new(if kind.is_bernoulli() { reward.round() } else { reward }, n)
        })
        .collect()
}

pub fn two_armed(kind: RewardKind) -> Vec<ArmCounts> {
    mid_game(&[0.31, 0.18], &[4000, 120], kind)
}

pub fn eight_armed(kind: RewardKind) -> Vec<ArmCounts> {
    mid_game(&[0.9, 0.85, 0.7, 0.6, 0.5, 0.4, 0.2, 0.1], &[20_000, 900, 80, 40, 25, 18, 9, 6], kind)
}
