use crate::entropy::{
    approx_entropy_given_tail, theta_eq, tuned_entropy_bernoulli_given_tail, tuned_gradient_gaussian, PairView,
    ThetaEq, ThetaEqForm,
};
use crate::posterior::{outranks, summarize, ArmCounts, MomentSummary, RankedArm, RewardKind};
use crate::rng::{pick, StreamRng};
use crate::special::beta_split;

use super::{argmax_random_ties, GameView, Policy};

/// Greedy approximate-entropy policy. Two arms use the pairwise decision
/// tree, more arms compare every arm against the current best. The tuned
/// flavour swaps in the simplified entropy (Bernoulli) or the closed-form
/// expected gradient (Gaussian).
pub struct AimPolicy {
    name: String,
    engine: Engine,
}

impl AimPolicy {
    pub fn new(name: impl Into<String>, alpha: f64, form: ThetaEqForm, tuned: bool) -> Self {
        Self { name: name.into(), engine: Engine::new(RewardKind::Bernoulli, alpha, form, tuned) }
    }
}

impl Policy for AimPolicy {
    fn name(&self) -> &str {
        &self.name
    }

    fn select(&mut self, view: &GameView<'_>, rng: &mut StreamRng) -> usize {
        self.engine.kind = view.kind;
        self.engine.choose(view.arms, rng)
    }
}

pub fn aim_select_pair(arms: &[ArmCounts], kind: RewardKind, alpha: f64, form: ThetaEqForm, rng: &mut StreamRng) -> usize {
    Engine::new(kind, alpha, form, false).pair(arms, rng)
}

pub fn aim_select_multi(arms: &[ArmCounts], kind: RewardKind, alpha: f64, form: ThetaEqForm, rng: &mut StreamRng) -> usize {
    Engine::new(kind, alpha, form, false).multi(arms, rng)
}

pub fn aim_tuned_select(arms: &[ArmCounts], kind: RewardKind, alpha: f64, form: ThetaEqForm, rng: &mut StreamRng) -> usize {
    Engine::new(kind, alpha, form, true).choose(arms, rng)
}

/// Tail weights for one partition point. A miss also stores the two
/// neighbouring count states reached by one more pull, which are exactly the
/// ones the gradient asks for next.
#[derive(Default)]
struct TailMemo {
    entries: Vec<(u64, f64, f64)>,
}

impl TailMemo {
    fn clear(&mut self) {
        self.entries.clear();
    }

    fn get(&mut self, counts: &ArmCounts, theta_eq: ThetaEq) -> f64 {
        let x = match theta_eq {
            ThetaEq::At(x) if x < 1.0 => x,
            _ => return 0.0,
        };
        if let Some(&(_, _, c)) = self.entries.iter().find(|e| e.0 == counts.pulls && e.1 == counts.reward) {
            return c;
        }
        let s = counts.reward;
        let (a, b) = (s + 1.0, counts.pulls as f64 - s + 1.0);
        let split = beta_split(x, a, b);
        self.entries.push((counts.pulls, s, split.upper));
        self.entries.push((counts.pulls + 1, s + 1.0, (split.upper + split.front / a).min(1.0)));
        self.entries.push((counts.pulls + 1, s, (split.upper - split.front / b).max(0.0)));
        split.upper
    }
}

struct Engine {
    kind: RewardKind,
    alpha: f64,
    form: ThetaEqForm,
    tuned: bool,
    theta_eq: ThetaEq,
    tails: TailMemo,
    summaries: Vec<MomentSummary>,
    scores: Vec<f64>,
}

impl Engine {
    fn new(kind: RewardKind, alpha: f64, form: ThetaEqForm, tuned: bool) -> Self {
        Self {
            kind,
            alpha,
            form,
            tuned,
            theta_eq: ThetaEq::Sup,
            tails: TailMemo::default(),
            summaries: Vec::new(),
            scores: Vec::new(),
        }
    }

    fn choose(&mut self, arms: &[ArmCounts], rng: &mut StreamRng) -> usize {
        match (self.tuned, self.kind) {
            (true, RewardKind::Gaussian { sigma }) => self.tuned_gaussian(arms, sigma, rng),
            (true, RewardKind::Bernoulli) => self.multi(arms, rng),
            (false, _) if arms.len() == 2 => self.pair(arms, rng),
            (false, _) => self.multi(arms, rng),
        }
    }

    fn summary(&self, counts: &ArmCounts) -> MomentSummary {
        summarize(counts, self.kind).expect("arm summarized before its first pull")
    }

    fn fill_summaries(&mut self, arms: &[ArmCounts]) {
        self.summaries.clear();
        for a in arms {
            let s = self.summary(a);
            self.summaries.push(s);
        }
    }

    fn set_theta_eq(&mut self, max: &MomentSummary, min: &MomentSummary) {
        self.theta_eq = theta_eq(max, min, self.kind, self.form);
        self.tails.clear();
    }

    /// Approximate entropy of the pair; the arms are ranked afresh but the
    /// partition point stays fixed.
    fn score(&mut self, a: ArmCounts, b: ArmCounts) -> f64 {
        let ra = RankedArm { counts: a, summary: self.summary(&a) };
        let rb = RankedArm { counts: b, summary: self.summary(&b) };
        let (max, min) = if outranks(&ra.summary, &rb.summary) { (ra, rb) } else { (rb, ra) };
        let pair = PairView::new(max, min, self.theta_eq);
        match self.kind {
            RewardKind::Bernoulli => {
                let c = self.tails.get(&min.counts, self.theta_eq);
                if self.tuned {
                    tuned_entropy_bernoulli_given_tail(&pair, c)
                } else {
                    approx_entropy_given_tail(&pair, self.kind, c).s_total
                }
            }
            RewardKind::Gaussian { .. } => crate::entropy::approx_entropy(&pair, self.kind).s_total,
        }
    }

    /// Expected absolute entropy change when `arm` is pulled once more.
    fn gradient(&mut self, arm: ArmCounts, other: ArmCounts, base: f64) -> f64 {
        let expected = match self.kind {
            RewardKind::Bernoulli => {
                let p = arm.reward / arm.pulls as f64;
                let mut e = 0.0;
                if p > 0.0 {
                    e += p * self.score(arm.after(1.0), other);
                }
                if p < 1.0 {
                    e += (1.0 - p) * self.score(arm.after(0.0), other);
                }
                e
            }
            RewardKind::Gaussian { sigma } => {
                let mean = arm.empirical_mean();
                let step = self.alpha * sigma;
                0.5 * self.score(arm.after(mean + step), other) + 0.5 * self.score(arm.after(mean - step), other)
            }
        };
        (expected - base).abs()
    }

    fn pair(&mut self, arms: &[ArmCounts], rng: &mut StreamRng) -> usize {
        debug_assert_eq!(arms.len(), 2);
        if let Some(i) = first_unpulled(arms) {
            return i;
        }
        let (sa, sb) = (self.summary(&arms[0]), self.summary(&arms[1]));
        if sa.theta == sb.theta {
            return match arms[0].pulls.cmp(&arms[1].pulls) {
                std::cmp::Ordering::Less => 0,
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Equal => pick(rng, 2),
            };
        }
        let (hi, lo) = if sa.theta > sb.theta { (0, 1) } else { (1, 0) };
        let (max, min) = if hi == 0 { (sa, sb) } else { (sb, sa) };
        if min.n_eff >= max.n_eff {
            return hi;
        }
        self.set_theta_eq(&max, &min);
        let base = self.score(arms[hi], arms[lo]);
        let g_hi = self.gradient(arms[hi], arms[lo], base);
        let g_lo = self.gradient(arms[lo], arms[hi], base);
        if g_hi > g_lo {
            hi
        } else if g_lo > g_hi {
            lo
        } else {
            pick(rng, 2)
        }
    }

    fn multi(&mut self, arms: &[ArmCounts], rng: &mut StreamRng) -> usize {
        if let Some(i) = first_unpulled(arms) {
            return i;
        }
        self.fill_summaries(arms);
        let best = best_arm(&self.summaries, rng);
        let mut scores = std::mem::take(&mut self.scores);
        scores.clear();
        let mut any_challenger = false;
        for i in 0..arms.len() {
            if i == best {
                scores.push(f64::NEG_INFINITY);
                continue;
            }
            let (max, min) = (self.summaries[best], self.summaries[i]);
            self.set_theta_eq(&max, &min);
            let base = self.score(arms[best], arms[i]);
            let g_i = self.gradient(arms[i], arms[best], base);
            let g_max = self.gradient(arms[best], arms[i], base);
            let diff = g_i - g_max;
            if diff >= 0.0 {
                any_challenger = true;
                scores.push(diff);
            } else {
                scores.push(f64::NEG_INFINITY);
            }
        }
        let choice = if any_challenger { argmax_random_ties(&scores, rng) } else { best };
        self.scores = scores;
        choice
    }

    fn tuned_gaussian(&mut self, arms: &[ArmCounts], sigma: f64, rng: &mut StreamRng) -> usize {
        if let Some(i) = first_unpulled(arms) {
            return i;
        }
        self.fill_summaries(arms);
        let best = best_arm(&self.summaries, rng);
        let mut scores = std::mem::take(&mut self.scores);
        scores.clear();
        let mut any_challenger = false;
        for i in 0..arms.len() {
            if i == best {
                scores.push(f64::NEG_INFINITY);
                continue;
            }
            let (max, min) = (self.summaries[best], self.summaries[i]);
            let th = theta_eq(&max, &min, self.kind, self.form);
            let g = tuned_gradient_gaussian(&max, &min, th, sigma);
            if g > 0.0 {
                scores.push(f64::NEG_INFINITY);
            } else {
                any_challenger = true;
                scores.push(-g);
            }
        }
        let choice = if any_challenger { argmax_random_ties(&scores, rng) } else { best };
        self.scores = scores;
        choice
    }
}

pub(crate) fn first_unpulled(arms: &[ArmCounts]) -> Option<usize> {
    arms.iter().position(|a| a.pulls == 0)
}

/// Largest mean, then largest effective count, then a draw.
fn best_arm(summaries: &[MomentSummary], rng: &mut StreamRng) -> usize {
    let mut best = 0;
    let mut ties = 1;
    for (i, s) in summaries.iter().enumerate().skip(1) {
        let b = &summaries[best];
        if s.theta > b.theta || (s.theta == b.theta && s.n_eff > b.n_eff) {
            best = i;
            ties = 1;
        } else if s.theta == b.theta && s.n_eff == b.n_eff {
            ties += 1;
        }
    }
    if ties == 1 {
        return best;
    }
    let top = summaries[best];
    let nth = pick(rng, ties);
    summaries
        .iter()
        .enumerate()
        .filter(|(_, s)| s.theta == top.theta && s.n_eff == top.n_eff)
        .nth(nth)
        .map(|(i, _)| i)
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{approx_entropy, theta_eq_bernoulli};
    use crate::rng::stream;

    fn counts(pairs: &[(f64, u64)]) -> Vec<ArmCounts> {
        pairs.iter().map(|&(s, n)| ArmCounts::new(s, n)).collect()
    }

    #[test]
    fn memo_matches_direct_tails() {
        let x = ThetaEq::At(0.63);
        let mut memo = TailMemo::default();
        let base = ArmCounts::new(12.0, 30);
        memo.get(&base, x);
        for c in [base, base.after(1.0), base.after(0.0)] {
            let direct = crate::entropy::c_tail_bernoulli(&c, x);
            assert!((memo.get(&c, x) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn current_best_played_when_it_has_fewer_draws() {
        let arms = counts(&[(5.0, 9), (41.0, 192)]);
        let mut rng = stream(1);
        assert_eq!(aim_select_pair(&arms, RewardKind::Bernoulli, 1.0, ThetaEqForm::Exact, &mut rng), 0);
    }

    #[test]
    fn least_drawn_on_mean_tie() {
        let mut rng = stream(2);
        // (1+1)/(2+2) = (3+1)/(6+2)
        let arms = counts(&[(1.0, 2), (3.0, 6)]);
        assert_eq!(aim_select_pair(&arms, RewardKind::Bernoulli, 1.0, ThetaEqForm::Exact, &mut rng), 0);
        let arms = counts(&[(3.0, 6), (1.0, 2)]);
        assert_eq!(aim_select_pair(&arms, RewardKind::Bernoulli, 1.0, ThetaEqForm::Exact, &mut rng), 1);
    }

    #[test]
    fn identical_arms_pick_randomly() {
        let arms = counts(&[(4.0, 10), (4.0, 10)]);
        let mut rng = stream(3);
        let mut hits = [0; 2];
        for _ in 0..1000 {
            hits[aim_select_pair(&arms, RewardKind::Bernoulli, 1.0, ThetaEqForm::Exact, &mut rng)] += 1;
        }
        assert!(hits[0] > 400 && hits[1] > 400);
    }

    // Straight-line evaluation of the pairwise gradients for one state, using
    // only the public entropy functions.
    fn brute_force_pair(arms: &[ArmCounts]) -> usize {
        let kind = RewardKind::Bernoulli;
        let rank = |c: ArmCounts| RankedArm::new(c, kind).unwrap();
        let (a, b) = (rank(arms[0]), rank(arms[1]));
        let (max, min) = if a.summary.theta > b.summary.theta { (a, b) } else { (b, a) };
        let th = theta_eq_bernoulli(&max.summary, &min.summary);
        let s = |x: ArmCounts, y: ArmCounts| {
            let (x, y) = (rank(x), rank(y));
            let (hi, lo) = if outranks(&x.summary, &y.summary) { (x, y) } else { (y, x) };
            approx_entropy(&PairView::new(hi, lo, th), kind).s_total
        };
        let base = s(arms[0], arms[1]);
        let grad = |i: usize| {
            let (me, other) = (arms[i], arms[1 - i]);
            let p = me.reward / me.pulls as f64;
            (p * s(me.after(1.0), other) + (1.0 - p) * s(me.after(0.0), other) - base).abs()
        };
        if grad(0) > grad(1) {
            0
        } else {
            1
        }
    }

    #[test]
    fn pinned_small_state() {
        let arms = counts(&[(1.0, 2), (9.0, 10)]);
        let expected = brute_force_pair(&arms);
        let mut rng = stream(4);
        assert_eq!(aim_select_pair(&arms, RewardKind::Bernoulli, 1.0, ThetaEqForm::Exact, &mut rng), expected);
        assert_eq!(expected, 1);
    }

    #[test]
    fn best_arm_rules() {
        let mut rng = stream(6);
        let s = |theta, n_eff| MomentSummary { theta, n_eff, var: 0.1 };
        assert_eq!(best_arm(&[s(0.2, 3.0), s(0.5, 4.0), s(0.4, 9.0)], &mut rng), 1);
        assert_eq!(best_arm(&[s(0.5, 3.0), s(0.5, 8.0), s(0.4, 9.0)], &mut rng), 1);
        let mut hits = [0; 3];
        for _ in 0..900 {
            hits[best_arm(&[s(0.5, 3.0), s(0.1, 8.0), s(0.5, 3.0)], &mut rng)] += 1;
        }
        assert_eq!(hits[1], 0);
        assert!(hits[0] > 350 && hits[2] > 350);
    }

    #[test]
    fn tuned_gaussian_plays_best_without_tail() {
        let kind = RewardKind::Gaussian { sigma: 1.0 };
        let arms = counts(&[(4.0, 5), (6.0, 10)]);
        let mut rng = stream(8);
        assert_eq!(aim_tuned_select(&arms, kind, 1.0, ThetaEqForm::Exact, &mut rng), 0);
    }
}
