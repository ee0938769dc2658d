use crate::policy::{GameState, Policy, PolicyConfig};
use crate::rng::stream;

use super::env::{step_env, BanditEnv};
use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub t: u64,
    /// `sum_i (mu* - mu_i) n_i(t)`
    pub pseudo_regret: f64,
    /// `mu* t - sum of collected rewards`
    pub realized_regret: f64,
}

/// One realization of one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub checkpoints: Vec<Checkpoint>,
    pub pulls: Vec<u64>,
    pub best_arm: usize,
    pub gap: f64,
    pub seed: u64,
}

impl RunRecord {
    pub fn horizon(&self) -> u64 {
        self.pulls.iter().sum()
    }

    pub fn final_pseudo_regret(&self) -> f64 {
        self.checkpoints.last().map_or(0.0, |c| c.pseudo_regret)
    }

    /// Share of the horizon spent away from the best arm.
    pub fn off_best_fraction(&self) -> f64 {
        let horizon = self.horizon();
        (horizon - self.pulls[self.best_arm]) as f64 / horizon as f64
    }
}

/// `count` log-spaced integer times from `k` to `horizon`. Rounding
/// collisions at small times are pushed one step later, so the grid has
/// `min(count, horizon - k + 1)` strictly increasing entries.
pub fn log_checkpoints(k: u64, horizon: u64, count: usize) -> Vec<u64> {
    assert!(k >= 1 && horizon >= k);
    let span = horizon - k + 1;
    if count as u64 >= span {
        return (k..=horizon).collect();
    }
    if count <= 1 {
        return vec![horizon];
    }
    let ratio = (horizon as f64 / k as f64).ln();
    let mut out: Vec<u64> = Vec::with_capacity(count);
    for j in 0..count {
        let ideal = ((k as f64) * (ratio * j as f64 / (count - 1) as f64).exp()).round() as u64;
        let floor = out.last().map_or(k, |&last| last + 1);
        let ceiling = horizon - (count - 1 - j) as u64;
        out.push(ideal.clamp(floor, ceiling));
    }
    out
}

pub fn run_episode(
    config: &PolicyConfig,
    env: &BanditEnv,
    horizon: u64,
    checkpoints: &[u64],
    seed: u64,
) -> Result<RunRecord, SimError> {
    let mut policy = config.build(env.kind, env.k())?;
    run_with_policy(policy.as_mut(), config.forced_init, env, horizon, checkpoints, seed)
}

/// Plays `horizon` steps; `checkpoints` must be increasing and within the horizon.
pub fn run_with_policy(
    policy: &mut dyn Policy,
    forced_init: bool,
    env: &BanditEnv,
    horizon: u64,
    checkpoints: &[u64],
    seed: u64,
) -> Result<RunRecord, SimError> {
    let k = env.k();
    if horizon < k as u64 {
        return Err(SimError::HorizonTooShort { horizon, k });
    }
    let mut rng = stream(seed);
    let mut state = GameState::new(k, env.kind);
    let best = env.best_mean();
    let mut collected = 0.0;
    let mut next = checkpoints.iter().peekable();
    let mut recorded = Vec::with_capacity(checkpoints.len());
    for t in 1..=horizon {
        let arm = if forced_init && t <= k as u64 {
            (t - 1) as usize
        } else {
            policy.select(&state.view(), &mut rng)
        };
        let reward = step_env(env, arm, &mut rng);
        collected += reward;
        state.update(arm, reward);
        if next.peek() == Some(&&t) {
            next.next();
            let pseudo = state.arms.iter().zip(&env.means).map(|(a, &m)| (best - m) * a.pulls as f64).sum();
            recorded.push(Checkpoint { t, pseudo_regret: pseudo, realized_regret: best * t as f64 - collected });
        }
    }
    Ok(RunRecord {
        checkpoints: recorded,
        pulls: state.arms.iter().map(|a| a.pulls).collect(),
        best_arm: env.best_arm(),
        gap: env.gap(),
        seed,
    })
}
