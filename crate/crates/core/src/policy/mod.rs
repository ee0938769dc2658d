//! Arm-selection rules behind one contract.

mod aim;
mod baselines;
mod infomax;

use std::fmt;

use thiserror::Error;

use crate::entropy::ThetaEqForm;
use crate::posterior::{ArmCounts, RewardKind};
use crate::rng::{pick, StreamRng};

pub use aim::{aim_select_multi, aim_select_pair, aim_tuned_select, AimPolicy};
pub use baselines::{
    eps_greedy_select, kl_ucb_index, kl_ucb_select, thompson_select, ucb_tuned_index, ucb_tuned_select, EpsGreedy,
    KlUcb, Thompson, UcbTuned,
};
pub use infomax::{exact_entropy, infomax_select, EntropyGrid, Infomax};

/// What a policy sees before choosing: per-arm counts, the reward family and
/// the number of pulls made so far.
#[derive(Debug, Clone, Copy)]
pub struct GameView<'a> {
    pub arms: &'a [ArmCounts],
    pub kind: RewardKind,
    pub t: u64,
}

impl<'a> GameView<'a> {
    pub fn new(arms: &'a [ArmCounts], kind: RewardKind) -> Self {
        Self { arms, kind, t: arms.iter().map(|a| a.pulls).sum() }
    }
}

pub trait Policy: Send {
    fn name(&self) -> &str;

    /// Index of the arm to pull next. Randomness is drawn only from `rng`.
    fn select(&mut self, view: &GameView<'_>, rng: &mut StreamRng) -> usize;
}

/// Counts owned by an episode; only the pulled arm changes.
#[derive(Debug, Clone, PartialEq)]
pub struct GameState {
    pub arms: Vec<ArmCounts>,
    pub kind: RewardKind,
}

impl GameState {
    pub fn new(k: usize, kind: RewardKind) -> Self {
        Self { arms: vec![ArmCounts::default(); k], kind }
    }

    pub fn view(&self) -> GameView<'_> {
        GameView::new(&self.arms, self.kind)
    }

    pub fn update(&mut self, arm: usize, reward: f64) {
        self.arms[arm].record(reward);
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("{variant} does not support {what}")]
    Unsupported { variant: &'static str, what: String },
    #[error("{variant}: parameter {param} = {value} out of range")]
    BadParam { variant: &'static str, param: &'static str, value: f64 },
}

/// Policy family with its hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    Aim { alpha: f64, form: ThetaEqForm },
    AimTuned { alpha: f64, form: ThetaEqForm },
    Thompson,
    UcbTuned { c: f64, d: f64 },
    KlUcb { c: f64 },
    EpsGreedy { c: f64, d: f64 },
    Infomax { grid_points: usize },
}

impl Rule {
    pub const VARIANTS: [&'static str; 7] =
        ["aim", "aim-tuned", "thompson", "ucb-tuned", "kl-ucb", "eps-greedy", "infomax-numeric"];

    /// Variant with default hyperparameters for the given reward family.
    pub fn with_defaults(variant: &str, kind: RewardKind) -> Option<Rule> {
        let bern = kind.is_bernoulli();
        Some(match variant {
            "aim" => Rule::Aim { alpha: 1.0, form: ThetaEqForm::Exact },
            "aim-tuned" => Rule::AimTuned { alpha: 1.0, form: ThetaEqForm::Exact },
            "thompson" => Rule::Thompson,
            "ucb-tuned" if bern => Rule::UcbTuned { c: 0.73, d: 0.19 },
            "ucb-tuned" => Rule::UcbTuned { c: 2.1, d: 0.25 },
            "kl-ucb" => Rule::KlUcb { c: 1e-5 },
            "eps-greedy" => Rule::EpsGreedy { c: if bern { 10.0 } else { 30.0 }, d: 1.0 },
            "infomax-numeric" => Rule::Infomax { grid_points: 4097 },
            _ => return None,
        })
    }

    pub fn variant(&self) -> &'static str {
        match self {
            Rule::Aim { .. } => "aim",
            Rule::AimTuned { .. } => "aim-tuned",
            Rule::Thompson => "thompson",
            Rule::UcbTuned { .. } => "ucb-tuned",
            Rule::KlUcb { .. } => "kl-ucb",
            Rule::EpsGreedy { .. } => "eps-greedy",
            Rule::Infomax { .. } => "infomax-numeric",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyConfig {
    pub name: String,
    pub rule: Rule,
    /// Pull every arm once, in index order, before the rule takes over.
    pub forced_init: bool,
}

impl PolicyConfig {
    pub fn new(rule: Rule) -> Self {
        Self { name: rule.variant().to_string(), rule, forced_init: true }
    }

    pub fn defaults(variant: &str, kind: RewardKind) -> Option<Self> {
        Rule::with_defaults(variant, kind).map(Self::new)
    }

    pub fn check(&self, kind: RewardKind, k: usize) -> Result<(), PolicyError> {
        let variant = self.rule.variant();
        let unsupported = |what: &str| Err(PolicyError::Unsupported { variant, what: what.to_string() });
        let positive = |param, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(PolicyError::BadParam { variant, param, value })
            }
        };
        match self.rule {
            Rule::Aim { alpha, .. } | Rule::AimTuned { alpha, .. } => positive("alpha", alpha)?,
            Rule::Thompson => {}
            Rule::UcbTuned { c, d } | Rule::EpsGreedy { c, d } => {
                positive("c", c)?;
                positive("d", d)?;
            }
            Rule::KlUcb { c } => {
                if !kind.is_bernoulli() {
                    return unsupported("gaussian rewards");
                }
                if !(c >= 0.0 && c.is_finite()) {
                    return Err(PolicyError::BadParam { variant, param: "c", value: c });
                }
            }
            Rule::Infomax { grid_points } => {
                if !kind.is_bernoulli() {
                    return unsupported("gaussian rewards");
                }
                if k != 2 {
                    return unsupported(&format!("{k} arms"));
                }
                if grid_points < 3 || grid_points % 2 == 0 {
                    return Err(PolicyError::BadParam { variant, param: "grid-points", value: grid_points as f64 });
                }
            }
        }
        if !self.forced_init {
            let prior_only = matches!(self.rule, Rule::Thompson | Rule::EpsGreedy { .. }) && kind.is_bernoulli();
            if !prior_only {
                return unsupported("disabling forced-init");
            }
        }
        Ok(())
    }

    pub fn build(&self, kind: RewardKind, k: usize) -> Result<Box<dyn Policy>, PolicyError> {
        self.check(kind, k)?;
        let name = self.name.clone();
        Ok(match self.rule {
            Rule::Aim { alpha, form } => Box::new(AimPolicy::new(name, alpha, form, false)),
            Rule::AimTuned { alpha, form } => Box::new(AimPolicy::new(name, alpha, form, true)),
            Rule::Thompson => Box::new(Thompson::new(name)),
            Rule::UcbTuned { c, d } => Box::new(UcbTuned::new(name, c, d)),
            Rule::KlUcb { c } => Box::new(KlUcb::new(name, c)),
            Rule::EpsGreedy { c, d } => Box::new(EpsGreedy::new(name, c, d)),
            Rule::Infomax { grid_points } => Box::new(Infomax::new(name, grid_points)),
        })
    }
}

impl fmt::Display for PolicyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Index of the largest score; exact ties resolved by one draw.
pub(crate) fn argmax_random_ties(scores: &[f64], rng: &mut StreamRng) -> usize {
    let mut best = f64::NEG_INFINITY;
    let mut first = 0;
    let mut count = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > best {
            best = s;
            first = i;
            count = 1;
        } else if s == best {
            count += 1;
        }
    }
    if count == 1 {
        return first;
    }
    let nth = pick(rng, count);
    scores.iter().enumerate().filter(|&(_, &s)| s == best).nth(nth).map(|(i, _)| i).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn argmax_without_ties_leaves_stream_alone() {
        let mut rng = stream(3);
        let mut twin = stream(3);
        assert_eq!(argmax_random_ties(&[0.1, 0.7, 0.3], &mut rng), 1);
        assert_eq!(rand::Rng::random::<u64>(&mut rng), rand::Rng::random::<u64>(&mut twin));
    }

    #[test]
    fn argmax_ties_are_uniform() {
        let mut rng = stream(5);
        let mut hits = [0usize; 4];
        for _ in 0..4000 {
            hits[argmax_random_ties(&[1.0, 0.0, 1.0, 1.0], &mut rng)] += 1;
        }
        assert_eq!(hits[1], 0);
        for &h in &[hits[0], hits[2], hits[3]] {
            assert!((1150..1520).contains(&h), "{hits:?}");
        }
    }

    #[test]
    fn config_checks() {
        let bern = RewardKind::Bernoulli;
        let gauss = RewardKind::Gaussian { sigma: 1.0 };
        for v in Rule::VARIANTS {
            assert!(PolicyConfig::defaults(v, bern).unwrap().check(bern, 2).is_ok(), "{v}");
        }
        assert!(PolicyConfig::defaults("kl-ucb", gauss).unwrap().check(gauss, 2).is_err());
        assert!(PolicyConfig::defaults("infomax-numeric", bern).unwrap().check(bern, 3).is_err());
        let mut thompson = PolicyConfig::defaults("thompson", bern).unwrap();
        thompson.forced_init = false;
        assert!(thompson.check(bern, 2).is_ok());
        assert!(thompson.check(gauss, 2).is_err());
        let mut aim = PolicyConfig::defaults("aim", bern).unwrap();
        aim.forced_init = false;
        assert!(aim.check(bern, 2).is_err());
        let bad = PolicyConfig::new(Rule::Aim { alpha: -1.0, form: ThetaEqForm::Exact });
        assert!(bad.check(bern, 2).is_err());
        assert_eq!(Rule::with_defaults("ucb-tuned", gauss), Some(Rule::UcbTuned { c: 2.1, d: 0.25 }));
        assert_eq!(Rule::with_defaults("eps-greedy", gauss), Some(Rule::EpsGreedy { c: 30.0, d: 1.0 }));
        assert_eq!(Rule::with_defaults("ucb", bern), None);
    }
}
