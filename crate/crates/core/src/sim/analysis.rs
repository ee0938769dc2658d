use crate::posterior::RewardKind;
use crate::special::kl_bernoulli_unchecked;

use super::env::BanditEnv;
use super::episode::RunRecord;
use super::montecarlo::AggregateCurve;
use super::SimError;

#[derive(Debug, Clone, PartialEq)]
pub struct TailStats {
    /// `(r, P(R > r))` on zero and every distinct final regret, ascending.
    pub survival: Vec<(f64, f64)>,
    /// `(gap, off-best fraction)` of the highest-regret records.
    pub scatter: Vec<(f64, f64)>,
}

/// Survival function of the final pseudo-regret and the arm-share scatter of
/// the top `top_fraction` records.
pub fn tail_statistics(records: &[RunRecord], top_fraction: f64) -> Result<TailStats, SimError> {
    let n = records.len();
    if !(top_fraction > 0.0 && top_fraction < 1.0) {
        return Err(SimError::Degenerate(format!("top fraction {top_fraction} must lie in (0, 1)")));
    }
    if top_fraction * (n as f64) < 1.0 {
        return Err(SimError::EmptySelection { fraction: top_fraction, records: n });
    }
    let mut finals: Vec<f64> = records.iter().map(|r| r.final_pseudo_regret()).collect();
    finals.sort_by(f64::total_cmp);

    let mut support = vec![0.0];
    for &v in &finals {
        if v > *support.last().unwrap() {
            support.push(v);
        }
    }
    let mut survival = Vec::with_capacity(support.len());
    let mut idx = 0;
    for r in support {
        while idx < n && finals[idx] <= r {
            idx += 1;
        }
        survival.push((r, (n - idx) as f64 / n as f64));
    }

    let take = (top_fraction * n as f64).ceil() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        records[b].final_pseudo_regret().total_cmp(&records[a].final_pseudo_regret()).then(a.cmp(&b))
    });
    let scatter = order[..take].iter().map(|&i| (records[i].gap, records[i].off_best_fraction())).collect();
    Ok(TailStats { survival, scatter })
}

/// Asymptotic regret-per-ln(t) constant of a Bernoulli game.
pub fn lai_robbins_reference(env: &BanditEnv) -> Result<f64, SimError> {
    if env.kind != RewardKind::Bernoulli {
        return Err(SimError::Degenerate("reference constant needs bernoulli arms".into()));
    }
    let best = env.best_mean();
    let mut beta = 0.0;
    let mut suboptimal = 0;
    for &m in &env.means {
        if m < best {
            suboptimal += 1;
            beta += (best - m) / kl_bernoulli_unchecked(m, best);
        }
    }
    if suboptimal == 0 {
        return Err(SimError::Degenerate("all arms share the same mean".into()));
    }
    Ok(beta)
}

/// Least-squares slope of mean regret against ln t over `t_lo <= t <= t_hi`.
pub fn slope_fit(curve: &AggregateCurve, window: (u64, u64)) -> Result<f64, SimError> {
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| p.t >= window.0 && p.t <= window.1)
        .map(|p| ((p.t as f64).ln(), p.mean))
        .collect();
    if pts.len() < 3 {
        return Err(SimError::TooFewPoints { need: 3, got: pts.len() });
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}
