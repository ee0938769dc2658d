//! Closed-form approximate entropy of the posterior of the maximal mean for a
//! pair of arms, split into a body term, a tail term and a tail correction.

use std::f64::consts::{E, PI};

use crate::posterior::{ArmCounts, MomentSummary, RankedArm, RewardKind};
use crate::special::{beta_split, erf, erfc, kl_bernoulli_unchecked};

/// Calibration constant of the body correction term.
pub const A_C: f64 = 1.25889;

/// Largest tail weight kept before `(1 - c) ln(1 - c)` loses all precision.
const C_TAIL_CAP: f64 = 1.0 - 1e-15;

/// Partition point between body and tail. `Sup` means the tail is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaEq {
    Sup,
    At(f64),
}

impl ThetaEq {
    /// Position as a real number, `+inf` for `Sup`.
    pub fn value(self) -> f64 {
        match self {
            ThetaEq::Sup => f64::INFINITY,
            ThetaEq::At(x) => x,
        }
    }
}

/// How the Gaussian partition point is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaEqForm {
    /// Larger root of the quadratic crossing condition.
    #[default]
    Exact,
    /// Closed form with the `2/|D|` prefactor in front of the square root.
    DoubledRoot,
    /// Closed form with the `4 N_max N_min` term inside the square root.
    ScaledRoot,
}

impl ThetaEqForm {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exact" => Some(ThetaEqForm::Exact),
            "doubled-root" => Some(ThetaEqForm::DoubledRoot),
            "scaled-root" => Some(ThetaEqForm::ScaledRoot),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ThetaEqForm::Exact => "exact",
            ThetaEqForm::DoubledRoot => "doubled-root",
            ThetaEqForm::ScaledRoot => "scaled-root",
        }
    }
}

/// Ordered pair of arms for one entropy evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairView {
    pub max: RankedArm,
    pub min: RankedArm,
    pub delta: f64,
    pub v_t: f64,
    pub theta_eq: ThetaEq,
}

impl PairView {
    pub fn new(max: RankedArm, min: RankedArm, theta_eq: ThetaEq) -> Self {
        Self {
            max,
            min,
            delta: max.summary.theta - min.summary.theta,
            v_t: max.summary.var + min.summary.var,
            theta_eq,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyBreakdown {
    pub s_body: f64,
    pub s_tail: f64,
    pub c_tail: f64,
    pub s_total: f64,
}

pub fn theta_eq_bernoulli(max: &MomentSummary, min: &MomentSummary) -> ThetaEq {
    if max.n_eff <= min.n_eff {
        return ThetaEq::Sup;
    }
    let kl = kl_bernoulli_unchecked(min.theta, max.theta);
    let spread = 2.0 * max.var * (min.n_eff * kl + 0.5 * (max.n_eff / min.n_eff).ln());
    ThetaEq::At((max.theta + spread.sqrt()).min(1.0))
}

pub fn theta_eq_gaussian(max: &MomentSummary, min: &MomentSummary, sigma: f64, form: ThetaEqForm) -> ThetaEq {
    let (n_max, n_min) = (max.n_eff, min.n_eff);
    if n_max <= n_min {
        return ThetaEq::Sup;
    }
    let s2 = sigma * sigma;
    let delta = max.theta - min.theta;
    let d = n_max - n_min;
    let log_ratio = (n_max / n_min).ln();
    let cross = n_max * n_min * delta * delta;
    let shift = n_min * delta / d;
    let x = match form {
        ThetaEqForm::Exact => {
            // Root written relative to theta_max so that nothing cancels.
            let disc = (cross + s2 * d * log_ratio).sqrt();
            let lead = n_min * delta;
            let u = if lead >= 0.0 {
                (lead + disc) / d
            } else {
                (n_min * delta * delta + s2 * log_ratio) / (disc - lead)
            };
            max.theta + u
        }
        ThetaEqForm::DoubledRoot => max.theta + shift + 2.0 / d * (cross + s2 * d * log_ratio).sqrt(),
        ThetaEqForm::ScaledRoot => max.theta + shift + (4.0 * cross / (d * d) + s2 * log_ratio / d).sqrt(),
    };
    ThetaEq::At(x)
}

pub fn theta_eq(max: &MomentSummary, min: &MomentSummary, kind: RewardKind, form: ThetaEqForm) -> ThetaEq {
    match kind {
        RewardKind::Bernoulli => theta_eq_bernoulli(max, min),
        RewardKind::Gaussian { sigma } => theta_eq_gaussian(max, min, sigma, form),
    }
}

/// Posterior mass of the min arm above the partition point.
pub fn c_tail_bernoulli(min: &ArmCounts, theta_eq: ThetaEq) -> f64 {
    match theta_eq {
        ThetaEq::At(x) if x < 1.0 => {
            let s = min.reward;
            beta_split(x, s + 1.0, min.pulls as f64 - s + 1.0).upper
        }
        _ => 0.0,
    }
}

pub fn c_tail_gaussian(min: &MomentSummary, theta_eq: ThetaEq, sigma: f64) -> f64 {
    match theta_eq {
        ThetaEq::Sup => 0.0,
        ThetaEq::At(x) => 0.5 * erfc(min.n_eff.sqrt() * (x - min.theta) / (2.0 * sigma * sigma).sqrt()),
    }
}

pub fn s_body(pair: &PairView) -> f64 {
    s_body_with(pair, A_C)
}

pub(crate) fn s_body_with(pair: &PairView, a_c: f64) -> f64 {
    let v_max = pair.max.summary.var;
    let (delta, v_t) = (pair.delta, pair.v_t);
    let log_v = (2.0 * PI * v_max).ln();
    let low = 0.25 * (log_v + 1.0 - 2.0 * a_c);
    let high = 0.25 * (log_v + 1.0 + 2.0 * a_c) * erf(delta / (2.0 * v_t).sqrt());
    let bump = delta * v_max * (-delta * delta / (2.0 * v_t)).exp() / (2.0 * (2.0 * PI).sqrt() * v_t.powf(1.5));
    low + high - bump
}

pub fn s_tail_bernoulli(min: &MomentSummary, theta_eq: ThetaEq, c_tail: f64) -> f64 {
    match theta_eq {
        ThetaEq::At(x) if x < 1.0 && c_tail != 0.0 => {
            c_tail * (min.n_eff * kl_bernoulli_unchecked(min.theta, x) + 0.5 * (2.0 * PI * min.var).ln())
        }
        _ => 0.0,
    }
}

pub fn s_tail_gaussian(min: &MomentSummary, theta_eq: ThetaEq) -> f64 {
    let x = match theta_eq {
        ThetaEq::Sup => return 0.0,
        ThetaEq::At(x) => x,
    };
    let v = min.var;
    let gap = x - min.theta;
    if gap == f64::INFINITY {
        return 0.0;
    }
    0.25 * (2.0 * PI * v * E).ln() * erfc(gap / (2.0 * v).sqrt())
        + gap * (-gap * gap / (2.0 * v)).exp() / (2.0 * (2.0 * PI * v).sqrt())
}

/// Combines the three terms; the tail weight is capped just below one.
pub fn compose(s_body: f64, s_tail: f64, c_tail: f64) -> EntropyBreakdown {
    let c_tail = c_tail.min(C_TAIL_CAP);
    let keep = 1.0 - c_tail;
    let s_total = keep * s_body + s_tail - keep * keep.ln();
    EntropyBreakdown { s_body, s_tail, c_tail, s_total }
}

pub fn c_tail(pair: &PairView, kind: RewardKind) -> f64 {
    match kind {
        RewardKind::Bernoulli => c_tail_bernoulli(&pair.min.counts, pair.theta_eq),
        RewardKind::Gaussian { sigma } => c_tail_gaussian(&pair.min.summary, pair.theta_eq, sigma),
    }
}

pub fn approx_entropy(pair: &PairView, kind: RewardKind) -> EntropyBreakdown {
    approx_entropy_given_tail(pair, kind, c_tail(pair, kind))
}

/// Same as [`approx_entropy`] with a precomputed tail weight.
pub(crate) fn approx_entropy_given_tail(pair: &PairView, kind: RewardKind, c_tail: f64) -> EntropyBreakdown {
    let s_tail = match kind {
        RewardKind::Bernoulli => s_tail_bernoulli(&pair.min.summary, pair.theta_eq, c_tail),
        RewardKind::Gaussian { .. } => s_tail_gaussian(&pair.min.summary, pair.theta_eq),
    };
    compose(s_body(pair), s_tail, c_tail)
}

/// Body reduced to its leading term, tail kept, tail correction dropped.
pub fn tuned_entropy_bernoulli(pair: &PairView) -> f64 {
    tuned_entropy_bernoulli_given_tail(pair, c_tail_bernoulli(&pair.min.counts, pair.theta_eq))
}

pub(crate) fn tuned_entropy_bernoulli_given_tail(pair: &PairView, c_tail: f64) -> f64 {
    let max = &pair.max.summary;
    -(2.0 * PI * max.theta * (1.0 - max.theta) / max.n_eff).ln() + s_tail_bernoulli(&pair.min.summary, pair.theta_eq, c_tail)
}

/// Expected entropy change of a max pull minus that of a min pull for the
/// tuned Gaussian entropy. Positive values favour the max arm.
pub fn tuned_gradient_gaussian(max: &MomentSummary, min: &MomentSummary, theta_eq: ThetaEq, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    let (n_max, n_min) = (max.n_eff, min.n_eff);
    let gap = theta_eq.value() - min.theta;
    let z = gap / (2.0 * s2 / n_min).sqrt();
    let z_next = gap * (n_min + 1.0) / ((2.0 * s2).sqrt() * (n_min + 2.0).sqrt());
    let (erf_z, erfc_z) = (erf(z), erfc(z));
    let (erf_next, erfc_next) = (erf(z_next), erfc(z_next));
    let body_scale = 2.0 * PI * (1.0 - 2.0 * A_C).exp() * s2;
    let tail_scale = 2.0 * PI * s2 * E;
    let mut g = 0.125 * (1.0 + erf_z) * (1.0 / n_max).ln_1p();
    g -= 0.125 * (n_max / body_scale).ln() * (erf_next - erf_z);
    if erfc_next != 0.0 {
        g -= 2.0 * ((n_min + 1.0) / tail_scale).ln() * erfc_next;
    }
    if erfc_z != 0.0 {
        g += 2.0 * (n_min / tail_scale).ln() * erfc_z;
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posterior::summarize_bernoulli;
    use approx::assert_relative_eq;

    fn gauss(theta: f64, n: f64, sigma: f64) -> MomentSummary {
        MomentSummary { theta, n_eff: n, var: sigma * sigma / n }
    }

    fn bern(s: u64, n: u64) -> RankedArm {
        RankedArm::new(ArmCounts::new(s as f64, n), RewardKind::Bernoulli).unwrap()
    }

    fn synthetic(v_max: f64, v_min: f64, delta: f64) -> PairView {
        let arm = |theta, var| RankedArm {
            counts: ArmCounts::default(),
            summary: MomentSummary { theta, n_eff: 1.0, var },
        };
        PairView::new(arm(0.5 + delta, v_max), arm(0.5, v_min), ThetaEq::Sup)
    }

    #[test]
    fn theta_eq_bernoulli_examples() {
        let max = MomentSummary { theta: 0.5, n_eff: 100.0, var: 0.25 / 100.0 };
        let min = MomentSummary { theta: 0.5, n_eff: 10.0, var: 0.25 / 10.0 };
        match theta_eq_bernoulli(&max, &min) {
            ThetaEq::At(x) => assert_relative_eq!(x, 0.575_871, epsilon = 1e-6),
            ThetaEq::Sup => panic!("expected a finite partition point"),
        }
        let max = MomentSummary { theta: 0.99, n_eff: 100.0, var: 0.99 * 0.01 / 100.0 };
        let min = MomentSummary { theta: 0.5, n_eff: 3.0, var: 0.25 / 3.0 };
        assert_eq!(theta_eq_bernoulli(&max, &min), ThetaEq::At(1.0));
        assert_eq!(theta_eq_bernoulli(&min, &max), ThetaEq::Sup);
    }

    #[test]
    fn theta_eq_gaussian_examples() {
        let x = theta_eq_gaussian(&gauss(0.8, 100.0, 1.0), &gauss(0.7, 10.0, 1.0), 1.0, ThetaEqForm::Exact);
        assert_relative_eq!(x.value(), 0.974_876, epsilon = 1e-6);
        let x = theta_eq_gaussian(&gauss(0.5, 100.0, 1.0), &gauss(0.5, 10.0, 1.0), 1.0, ThetaEqForm::Exact);
        assert_relative_eq!(x.value(), 0.5 + (10f64.ln() / 90.0).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(x.value(), 0.659_951, epsilon = 1e-6);
        let tie = theta_eq_gaussian(&gauss(0.8, 10.0, 1.0), &gauss(0.7, 10.0, 1.0), 1.0, ThetaEqForm::Exact);
        assert_eq!(tie, ThetaEq::Sup);
    }

    #[test]
    fn printed_gaussian_forms() {
        let (max, min) = (gauss(0.8, 100.0, 1.0), gauss(0.7, 10.0, 1.0));
        let b = (100.0 * 0.8 - 10.0 * 0.7) / 90.0;
        let cross = 1000.0 * 0.01;
        let doubled = theta_eq_gaussian(&max, &min, 1.0, ThetaEqForm::DoubledRoot).value();
        assert_relative_eq!(doubled, b + 2.0 / 90.0 * (cross + 90.0 * 10f64.ln()).sqrt(), max_relative = 1e-14);
        let scaled = theta_eq_gaussian(&max, &min, 1.0, ThetaEqForm::ScaledRoot).value();
        assert_relative_eq!(scaled, b + (4.0 * cross / 8100.0 + 10f64.ln() / 90.0).sqrt(), max_relative = 1e-14);
        for form in [ThetaEqForm::Exact, ThetaEqForm::DoubledRoot, ThetaEqForm::ScaledRoot] {
            assert_eq!(ThetaEqForm::parse(form.as_str()), Some(form));
        }
        assert_eq!(ThetaEqForm::parse("nope"), None);
    }

    #[test]
    fn c_tail_examples() {
        let counts = ArmCounts::new(5.0, 9);
        assert_eq!(c_tail_bernoulli(&counts, ThetaEq::Sup), 0.0);
        assert_eq!(c_tail_bernoulli(&counts, ThetaEq::At(0.0)), 1.0);
        assert_eq!(c_tail_bernoulli(&counts, ThetaEq::At(1.0)), 0.0);
        // Mass of Beta(6, 5) above the point, i.e. P(Bin(10, x) <= 5).
        assert_relative_eq!(c_tail_bernoulli(&counts, ThetaEq::At(0.575871)), 0.428_419_222_4, epsilon = 1e-9);

        let min = gauss(0.7, 10.0, 1.0);
        assert_eq!(c_tail_gaussian(&min, ThetaEq::At(0.7), 1.0), 0.5);
        assert_eq!(c_tail_gaussian(&min, ThetaEq::Sup, 1.0), 0.0);
        assert_relative_eq!(c_tail_gaussian(&min, ThetaEq::At(0.974876), 1.0), 0.1924, epsilon = 1e-4);
    }

    #[test]
    fn s_body_examples() {
        let pair = synthetic(0.0025, 0.025, 0.1);
        assert_relative_eq!(s_body(&pair), -1.4990, epsilon = 1e-4);
        let flat = synthetic(0.0025, 0.025, 0.0);
        assert_relative_eq!(s_body(&flat), 0.25 * (2.0 * PI * 0.0025 * (1.0 - 2.0 * A_C).exp()).ln(), max_relative = 1e-14);
        let far = synthetic(0.0025, 0.025, 50.0);
        assert_relative_eq!(s_body(&far), 0.5 * (2.0 * PI * 0.0025 * E).ln(), epsilon = 1e-12);
    }

    #[test]
    fn s_body_constant_enters_two_terms() {
        for &(v_max, v_min, delta) in &[(0.0025, 0.025, 0.1), (0.01, 0.2, 0.3), (0.1, 0.1, 0.0)] {
            let pair = synthetic(v_max, v_min, delta);
            let shift = s_body_with(&pair, 2.0 * A_C) - s_body_with(&pair, A_C);
            let expected = -0.5 * A_C + 0.5 * A_C * erf(delta / (2.0 * (v_max + v_min)).sqrt());
            assert_relative_eq!(shift, expected, epsilon = 1e-13);
        }
    }

    #[test]
    fn constant_closed_form() {
        let ln2 = std::f64::consts::LN_2;
        assert!(((2.0 * ln2 - 1.0) / (1.0 - ln2) - A_C).abs() < 1e-5);
    }

    #[test]
    fn s_tail_examples() {
        let min = summarize_bernoulli(&ArmCounts::new(5.0, 9));
        assert_relative_eq!(s_tail_bernoulli(&min, ThetaEq::At(0.575871), 0.5716), -0.5706, epsilon = 1e-4);
        assert_eq!(s_tail_bernoulli(&min, ThetaEq::Sup, 0.5), 0.0);
        assert_eq!(s_tail_bernoulli(&min, ThetaEq::At(0.7), 0.0), 0.0);

        let min = MomentSummary { theta: 0.7, n_eff: 10.0, var: 0.1 };
        assert_relative_eq!(s_tail_gaussian(&min, ThetaEq::At(0.974876)), 0.1703, epsilon = 1e-4);
        assert_relative_eq!(s_tail_gaussian(&min, ThetaEq::At(0.7)), 0.25 * (2.0 * PI * 0.1 * E).ln(), max_relative = 1e-14);
        assert_eq!(s_tail_gaussian(&min, ThetaEq::Sup), 0.0);
        assert!(s_tail_gaussian(&min, ThetaEq::At(1e6)).abs() < 1e-300);
    }

    #[test]
    fn composition() {
        let e = compose(-1.2, 0.0, 0.0);
        assert_eq!(e.s_total, -1.2);
        let tiny = compose(-1.2, 0.0, 1e-12);
        assert!((tiny.s_total - tiny.s_body).abs() < 1e-11);
        let full = compose(-1.2, 0.3, 1.0);
        assert!(full.s_total.is_finite());
        assert!(full.c_tail < 1.0);
    }

    #[test]
    fn suppressed_tail_reduces_to_body() {
        // Current best arm has fewer draws than the other one.
        let max = bern(5, 9);
        let min = bern(41, 192);
        let th = theta_eq_bernoulli(&max.summary, &min.summary);
        assert_eq!(th, ThetaEq::Sup);
        let pair = PairView::new(max, min, th);
        let e = approx_entropy(&pair, RewardKind::Bernoulli);
        assert_eq!(e.c_tail, 0.0);
        assert_eq!(e.s_total, e.s_body);
    }

    // Labels taken as given (the "max" slot holds the lower mean), values from
    // an independent 50-digit evaluation.
    fn regression_pair() -> PairView {
        let max = bern(50, 100);
        let min = bern(5, 9);
        PairView::new(max, min, theta_eq_bernoulli(&max.summary, &min.summary))
    }

    #[test]
    fn regression_state() {
        let pair = regression_pair();
        let e = approx_entropy(&pair, RewardKind::Bernoulli);
        assert_relative_eq!(pair.theta_eq.value(), 0.573_885_455_635_512_4, max_relative = 1e-13);
        assert_relative_eq!(e.c_tail, 0.433_549_964_818_901_86, max_relative = 1e-12);
        assert_relative_eq!(e.s_body, -1.380_114_544_407_098_2, max_relative = 1e-12);
        assert_relative_eq!(e.s_tail, -0.434_018_456_829_298_35, max_relative = 1e-12);
        assert_relative_eq!(e.s_total, -0.893_833_220_906_285_1, max_relative = 1e-12);
        assert_relative_eq!(tuned_entropy_bernoulli(&pair), 3.749_127_826_110_882_6, max_relative = 1e-12);
    }

    #[test]
    fn tuned_bernoulli_examples() {
        let max = bern(50, 100);
        let min = bern(5, 9);
        let pair = PairView::new(max, min, ThetaEq::Sup);
        assert_relative_eq!(tuned_entropy_bernoulli(&pair), -(2.0 * PI * max.summary.var).ln(), max_relative = 1e-14);
    }

    #[test]
    fn tuned_gradient_limit() {
        let (max, min) = (gauss(0.8, 40.0, 1.0), gauss(0.3, 7.0, 1.0));
        let g = tuned_gradient_gaussian(&max, &min, ThetaEq::Sup, 1.0);
        assert_relative_eq!(g, 0.25 * (1.0 / 40.0f64).ln_1p(), max_relative = 1e-14);
        let g = tuned_gradient_gaussian(&gauss(0.8, 1e12, 1.0), &min, ThetaEq::Sup, 1.0);
        assert!(g.abs() < 1e-12);
    }
}
