//! Built-in invariant and oracle checks. Each oracle here is computed by a
//! route independent of the production code (series, sums or quadrature).

use std::f64::consts::{E, LN_2, PI};

use rand::Rng;

use crate::config::{ExperimentSpec, MeansSpec};
use crate::entropy::{
    approx_entropy_given_tail, c_tail_bernoulli, compose, s_body, theta_eq_gaussian, tuned_gradient_gaussian, PairView,
    ThetaEq, ThetaEqForm, A_C,
};
use crate::policy::{GameState, PolicyConfig, Rule};
use crate::posterior::{outranks, rank_pair, ArmCounts, MomentSummary, RankedArm, RewardKind, TieRule};
use crate::rng::stream;
use crate::sim::{log_checkpoints, monte_carlo, run_episode, BanditEnv, RunOptions};
use crate::special::{erf, erfc, kl_bernoulli, log_gamma, reg_inc_beta};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }

    /// Passes when `worst <= tol`; `cases` is the number of points compared.
    fn bound(name: &'static str, worst: f64, tol: f64, cases: usize) -> Self {
        Self::new(name, worst <= tol, format!("worst {worst:.3e} over {cases} points, tolerance {tol:.0e}"))
    }
}

/// Largest scaled error `|a - b| / max(floor, |b|)` over pairs.
fn worst_relative(pairs: impl IntoIterator<Item = (f64, f64)>, floor: f64) -> (f64, usize) {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (got, want) in pairs {
        let err = if got == want { 0.0 } else { (got - want).abs() / want.abs().max(floor) };
        worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
        count += 1;
    }
    (worst, count)
}

pub mod oracle {
    //! Slow reference evaluations.

    use std::f64::consts::PI;

    /// `erf` from the positive-term series `2/sqrt(pi) e^{-x^2} sum 2^n x^{2n+1} / (2n+1)!!`.
    pub fn erf(x: f64) -> f64 {
        if x < 0.0 {
            return -erf(-x);
        }
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        while term > sum * 1e-18 {
            n += 1.0;
            term *= 2.0 * x * x / (2.0 * n + 1.0);
            sum += term;
        }
        2.0 / PI.sqrt() * (-x * x).exp() * sum
    }

    /// `erfc` from `1 - erf` below 2 and from the continued fraction
    /// `e^{-x^2}/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))` above,
    /// evaluated bottom-up with a fixed depth.
    pub fn erfc(x: f64) -> f64 {
        if x < 2.0 {
            return 1.0 - erf(x);
        }
        let mut tail = x;
        for k in (1..=400).rev() {
            tail = x + (k as f64 / 2.0) / tail;
        }
        (-x * x).exp() / PI.sqrt() / tail
    }

    /// `ln Gamma(x)` for `x > 0` by upward recurrence to 15 and the Stirling
    /// series there.
    pub fn log_gamma(x: f64) -> f64 {
        let mut product = 1.0;
        let mut z = x;
        while z < 15.0 {
            product *= z;
            z += 1.0;
        }
        let shift = product.ln();
        // Bernoulli-number coefficients B_{2k} / (2k (2k - 1)).
        const C: [f64; 8] = [
            1.0 / 12.0,
            -1.0 / 360.0,
            1.0 / 1260.0,
            -1.0 / 1680.0,
            1.0 / 1188.0,
            -691.0 / 360360.0,
            1.0 / 156.0,
            -3617.0 / 122400.0,
        ];
        let mut series = 0.0;
        let mut power = z;
        for c in C {
            series += c / power;
            power *= z * z;
        }
        (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series - shift
    }

    /// `I_x(a, b)` from the positive-term series
    /// `x^a (1-x)^b / (a B(a,b)) sum (a+b)_n / (a+1)_n x^n`; converges for `x < 1`.
    pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let ln_beta = log_gamma(a) + log_gamma(b) - log_gamma(a + b);
        let front = (a * x.ln() + b * (-x).ln_1p() - ln_beta).exp() / a;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut n = 0.0;
        while term > sum * 1e-18 {
            term *= (a + b + n) / (a + 1.0 + n) * x;
            sum += term;
            n += 1.0;
        }
        front * sum
    }

    /// `P(Bin(n, x) >= k)` by direct summation.
    pub fn binomial_upper(n: u64, k: u64, x: f64) -> f64 {
        (k..=n).map(|j| binomial_pmf(n, j, x)).sum()
    }

    /// `P(Bin(n, x) <= k)` by direct summation.
    pub fn binomial_lower(n: u64, k: u64, x: f64) -> f64 {
        (0..=k.min(n)).map(|j| binomial_pmf(n, j, x)).sum()
    }

    fn binomial_pmf(n: u64, j: u64, x: f64) -> f64 {
        let mut c = 1.0;
        for i in 0..j {
            c = c * (n - i) as f64 / (i + 1) as f64;
        }
        c * x.powi(j as i32) * (1.0 - x).powi((n - j) as i32)
    }

    /// Tuned Gaussian entropy of a pair at a fixed partition point.
    pub fn tuned_gaussian_entropy(theta_min: f64, n_max: f64, n_min: f64, theta_eq: f64, sigma: f64) -> f64 {
        let s2 = sigma * sigma;
        let z = (theta_eq - theta_min) / (2.0 * s2 / n_min).sqrt();
        let body = (2.0 * PI * (1.0 - 2.0 * crate::entropy::A_C).exp() * s2 / n_max).ln();
        let tail = (2.0 * PI * std::f64::consts::E * s2 / n_min).ln();
        0.125 * (1.0 + super::erf_ref(z)) * body + 2.0 * tail * super::erfc_ref(z)
    }

    /// Expected entropy change of a max pull (in magnitude) plus the signed
    /// expected change of a min pull whose reward is `theta_min + mu`,
    /// `mu ~ N(0, sigma^2)`; composite Simpson over `|mu| <= 14 sigma`.
    pub fn tuned_gaussian_gradient(theta_min: f64, n_max: f64, n_min: f64, theta_eq: f64, sigma: f64) -> f64 {
        let here = tuned_gaussian_entropy(theta_min, n_max, n_min, theta_eq, sigma);
        let max_step = (tuned_gaussian_entropy(theta_min, n_max + 1.0, n_min, theta_eq, sigma) - here).abs();
        let intervals = 40_000;
        let (lo, hi) = (-14.0 * sigma, 14.0 * sigma);
        let h = (hi - lo) / intervals as f64;
        let mut acc = 0.0;
        for j in 0..=intervals {
            let mu = lo + j as f64 * h;
            let w = if j == 0 || j == intervals {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let density = (-mu * mu / (2.0 * sigma * sigma)).exp() / (2.0 * PI * sigma * sigma).sqrt();
            let moved = (theta_min * n_min + theta_min + mu) / (n_min + 1.0);
            let change = tuned_gaussian_entropy(moved, n_max, n_min + 1.0, theta_eq, sigma) - here;
            acc += w * density * change;
        }
        max_step + acc * h / 3.0
    }
}

// The quadrature oracle needs erf on arguments where the series above loses
// nothing, so it reuses the oracle versions.
fn erf_ref(x: f64) -> f64 {
    oracle::erf(x)
}

fn erfc_ref(x: f64) -> f64 {
    if x < 0.0 {
        2.0 - oracle::erfc(-x)
    } else {
        oracle::erfc(x)
    }
}

/// Special functions against brute-force oracles.
pub fn special_functions() -> Vec<Check> {
    let mut out = Vec::new();

    let xs: Vec<f64> = (0..=240).map(|j| -6.0 + j as f64 * 0.05).collect();
    let (w, n) = worst_relative(xs.iter().filter(|x| x.abs() > 1e-3).map(|&x| (erf(x), oracle::erf(x))), 0.0);
    out.push(Check::bound("erf matches series", w, 1e-12, n));

    let xs: Vec<f64> = (0..=260).map(|j| -3.0 + j as f64 * 0.1).collect();
    let (w, n) = worst_relative(xs.iter().map(|&x| (erfc(x), erfc_ref(x))), 0.0);
    out.push(Check::bound("erfc matches series and continued fraction", w, 1e-12, n));

    // Scaled by max(1, |value|) because ln Gamma has zeros at 1 and 2.
    let xs: Vec<f64> = (1..=250).map(|j| 0.013 * (j as f64).powf(1.7)).collect();
    let (w, n) = worst_relative(xs.iter().map(|&x| (log_gamma(x).unwrap(), oracle::log_gamma(x))), 1.0);
    out.push(Check::bound("log_gamma matches Stirling with recurrence", w, 1e-12, n));

    let mut pairs = Vec::new();
    for &a in &[0.5, 1.0, 1.7, 3.0, 6.5, 12.0, 25.0] {
        for &b in &[0.5, 1.0, 2.3, 4.0, 9.0, 20.0] {
            for &x in &[0.05, 0.2, 0.35, 0.5, 0.65, 0.8] {
                pairs.push((reg_inc_beta(x, a, b).unwrap(), oracle::reg_inc_beta(x, a, b)));
            }
        }
    }
    let (w, n) = worst_relative(pairs, 1e-300);
    out.push(Check::bound("reg_inc_beta matches power series", w, 1e-12, n));

    let mut worst = 0.0f64;
    let mut count = 0;
    for total in 1..=30u64 {
        for k in 1..=total {
            for &x in &[0.01, 0.1, 0.27, 0.5, 0.73, 0.9, 0.99] {
                let got = reg_inc_beta(x, k as f64, (total - k + 1) as f64).unwrap();
                worst = worst.max((got - oracle::binomial_upper(total, k, x)).abs());
                count += 1;
            }
        }
    }
    out.push(Check::bound("reg_inc_beta matches binomial tail", worst, 1e-12, count));

    let mut ok = true;
    for p in 0..=20 {
        for q in 1..20 {
            let (p, q) = (p as f64 / 20.0, q as f64 / 20.0);
            let kl = kl_bernoulli(p, q).unwrap();
            ok &= kl >= 0.0 && (kl == 0.0) == (p == q);
        }
    }
    out.push(Check::new("kl_bernoulli is nonnegative and vanishes only on the diagonal", ok, String::new()));
    out
}

fn gauss(theta: f64, n: f64, sigma: f64) -> MomentSummary {
    MomentSummary { theta, n_eff: n, var: sigma * sigma / n }
}

fn synthetic(theta: f64, var: f64) -> RankedArm {
    RankedArm { counts: ArmCounts::default(), summary: MomentSummary { theta, n_eff: 1.0, var } }
}

/// Closed-form entropy pieces against their defining identities.
pub fn entropy_identities() -> Vec<Check> {
    let mut out = Vec::new();
    let mut rng = stream(0x5eed);

    let mut worst = 0.0f64;
    for &(v_max, v_min) in &[(1e-4f64, 1e-3), (0.0025, 0.025), (0.01, 0.01), (0.3, 0.05)] {
        let delta = 40.0 * (v_max + v_min).sqrt();
        let pair = PairView::new(synthetic(0.5 + delta, v_max), synthetic(0.5, v_min), ThetaEq::Sup);
        worst = worst.max((s_body(&pair) - 0.5 * (2.0 * PI * v_max * E).ln()).abs());
    }
    out.push(Check::bound("s_body tends to the single-arm entropy as the gap grows", worst, 1e-9, 4));

    let closed = (2.0 * LN_2 - 1.0) / (1.0 - LN_2);
    out.push(Check::bound("A_c matches its closed form", (closed - A_C).abs(), 1e-5, 1));

    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 10_000 {
        let n_min = rng.random_range(1.0..500.0f64).floor();
        let n_max = n_min + rng.random_range(1.0..2000.0f64).floor();
        let sigma = rng.random_range(0.1..3.0);
        let (t_max, t_min) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let (max, min) = (gauss(t_max, n_max, sigma), gauss(t_min, n_min, sigma));
        let ThetaEq::At(x) = theta_eq_gaussian(&max, &min, sigma, ThetaEqForm::Exact) else {
            worst = f64::INFINITY;
            break;
        };
        let residual = n_min * (x - t_min).powi(2) - n_max * (x - t_max).powi(2) + sigma * sigma * (n_max / n_min).ln();
        worst = worst.max(residual.abs() / n_max.max(1.0));
        count += 1;
    }
    out.push(Check::bound("gaussian partition point solves its quadratic", worst, 1e-9, count));

    let mut pairs = Vec::new();
    for _ in 0..20 {
        let n_min = rng.random_range(1.0..60.0f64).floor();
        let n_max = n_min + rng.random_range(1.0..400.0f64).floor();
        let sigma = rng.random_range(0.3..2.0);
        let t_min = rng.random_range(0.0..1.0);
        let x = t_min + rng.random_range(-1.0..3.0) * sigma / n_min.sqrt();
        let got = tuned_gradient_gaussian(&gauss(t_min + 0.1, n_max, sigma), &gauss(t_min, n_min, sigma), ThetaEq::At(x), sigma);
        pairs.push((got, oracle::tuned_gaussian_gradient(t_min, n_max, n_min, x, sigma)));
    }
    let (w, n) = worst_relative(pairs, 0.0);
    out.push(Check::bound("tuned gaussian gradient matches quadrature", w, 1e-6, n));

    let mut worst = 0.0f64;
    let mut count = 0;
    for n in 0..=20u64 {
        for s in 0..=n {
            for j in 1..20 {
                let x = j as f64 / 20.0;
                let got = c_tail_bernoulli(&ArmCounts::new(s as f64, n), ThetaEq::At(x));
                worst = worst.max((got - oracle::binomial_lower(n + 1, s, x)).abs());
                count += 1;
            }
        }
    }
    out.push(Check::bound("bernoulli tail weight matches binomial sum", worst, 1e-12, count));

    let pair = PairView::new(
        RankedArm::new(ArmCounts::new(50.0, 100), RewardKind::Bernoulli).unwrap(),
        RankedArm::new(ArmCounts::new(5.0, 9), RewardKind::Bernoulli).unwrap(),
        ThetaEq::Sup,
    );
    let body = s_body(&pair);
    let near = compose(body, 0.0, 1e-12).s_total;
    let at_zero = approx_entropy_given_tail(&pair, RewardKind::Bernoulli, 0.0).s_total;
    out.push(Check::bound("entropy is continuous as the tail weight vanishes", (near - body).abs().max((at_zero - body).abs()), 1e-9, 2));
    out
}

/// Policy contract, ranking and simulator invariants.
pub fn policies_and_simulation() -> Vec<Check> {
    let mut out = Vec::new();
    let mut rng = stream(0xc0ffee);

    let mut ok = true;
    for _ in 0..2000 {
        let (na, nb) = (rng.random_range(1..6u64), rng.random_range(1..6u64));
        let a = MomentSummary { theta: rng.random_range(0..5) as f64 / 4.0, n_eff: na as f64, var: 0.1 };
        let b = MomentSummary { theta: rng.random_range(0..5) as f64 / 4.0, n_eff: nb as f64, var: 0.1 };
        let (ab, ba) = (rank_pair(&a, &b, &mut rng), rank_pair(&b, &a, &mut rng));
        ok &= outranks(&a, &b) || outranks(&b, &a);
        if ab.tie != TieRule::Full {
            ok &= ab.max == ba.min && ab.tie == ba.tie && outranks([&a, &b][ab.max], [&a, &b][ab.min]);
        }
    }
    out.push(Check::new("pair ranking is antisymmetric and total", ok, String::new()));

    let mut bad = Vec::new();
    for (kind, k) in [(RewardKind::Bernoulli, 2), (RewardKind::Bernoulli, 5), (RewardKind::Gaussian { sigma: 1.0 }, 4)] {
        for variant in Rule::VARIANTS {
            let Some(config) = PolicyConfig::defaults(variant, kind) else { continue };
            if config.check(kind, k).is_err() {
                continue;
            }
            let mut policy = config.build(kind, k).unwrap();
            let mut state = GameState::new(k, kind);
            for _ in 0..60 {
                let arm = policy.select(&state.view(), &mut rng);
                if arm >= k {
                    bad.push(format!("{variant} chose {arm} of {k}"));
                    break;
                }
                let reward = if kind.is_bernoulli() { f64::from(u8::from(rng.random_bool(0.5))) } else { rng.random::<f64>() };
                state.update(arm, reward);
            }
        }
    }
    out.push(Check::new("every policy returns an arm index", bad.is_empty(), bad.join("; ")));

    let env = BanditEnv::new(RewardKind::Bernoulli, vec![0.2, 0.5, 0.4]).unwrap();
    let cps = log_checkpoints(3, 3, 1);
    let mut ok = true;
    for variant in ["aim", "thompson", "ucb-tuned", "kl-ucb", "eps-greedy"] {
        let config = PolicyConfig::defaults(variant, RewardKind::Bernoulli).unwrap();
        let rec = run_episode(&config, &env, 3, &cps, 4).unwrap();
        ok &= rec.pulls == [1, 1, 1];
    }
    out.push(Check::new("forced initialization pulls each arm once", ok, String::new()));

    let mut ok = true;
    for variant in ["aim", "thompson", "ucb-tuned"] {
        let config = PolicyConfig::defaults(variant, RewardKind::Bernoulli).unwrap();
        let cps = log_checkpoints(3, 500, 16);
        let a = run_episode(&config, &env, 500, &cps, 11).unwrap();
        let b = run_episode(&config, &env, 500, &cps, 11).unwrap();
        ok &= a == b && a.checkpoints.iter().all(|c| c.pseudo_regret >= 0.0);
        ok &= a.checkpoints.windows(2).all(|w| w[0].pseudo_regret <= w[1].pseudo_regret);
    }
    out.push(Check::new("episodes replay exactly and pseudo-regret is nondecreasing", ok, String::new()));

    let policies = vec![PolicyConfig::new(Rule::Thompson), PolicyConfig::defaults("aim", RewardKind::Bernoulli).unwrap()];
    let spec = ExperimentSpec::new(RewardKind::Bernoulli, 2, 400, 8, MeansSpec::Uniform, policies, 3).unwrap();
    let one = monte_carlo(&spec, &RunOptions { workers: 1, ..Default::default() });
    let two = monte_carlo(&spec, &RunOptions { workers: 2, ..Default::default() });
    let same = matches!((&one, &two), (Ok(a), Ok(b)) if a == b);
    out.push(Check::new("monte carlo is independent of the worker count", same, String::new()));
    out
}

pub fn run_all() -> Vec<Check> {
    let mut out = special_functions();
    out.extend(entropy_identities());
    out.extend(policies_and_simulation());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracles_agree_on_known_values() {
        assert!((oracle::erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-15);
        assert!((oracle::erfc(3.0) / 2.209_049_699_858_544e-5 - 1.0).abs() < 1e-13);
        assert!((oracle::log_gamma(0.5) - 0.5 * PI.ln()).abs() < 1e-14);
        assert!((oracle::reg_inc_beta(0.3, 2.0, 3.0) - oracle::binomial_upper(4, 2, 0.3)).abs() < 1e-15);
    }

    #[test]
    fn all_checks_pass() {
        let failed: Vec<_> = run_all().into_iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "{failed:#?}");
    }
}
