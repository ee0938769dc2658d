use rand::distr::Open01;
use rand::Rng;
use rayon::prelude::*;

use crate::config::{ExperimentSpec, MeansSpec};
use crate::rng::{episode_seed, stream, MEANS_TAG};

use super::env::BanditEnv;
use super::episode::{log_checkpoints, run_episode, RunRecord};
use super::SimError;

/// Which regret a curve averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegretMeasure {
    #[default]
    Pseudo,
    Realized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
    pub keep_records: bool,
    pub measure: RegretMeasure,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { workers: 0, keep_records: false, measure: RegretMeasure::Pseudo }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregatePoint {
    pub t: u64,
    pub mean: f64,
    /// Standard error of the mean.
    pub sem: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub policy: String,
    pub points: Vec<AggregatePoint>,
}

impl AggregateCurve {
    pub fn last(&self) -> &AggregatePoint {
        self.points.last().expect("curve has at least one checkpoint")
    }

    pub fn at(&self, t: u64) -> Option<&AggregatePoint> {
        self.points.iter().find(|p| p.t == t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    pub curves: Vec<AggregateCurve>,
    /// Per policy, per realization; empty unless records were kept.
    pub records: Vec<Vec<RunRecord>>,
}

/// Arm means of realization `realization`, drawn from their own stream so
/// that every policy faces the same game.
pub fn draw_means(spec: &ExperimentSpec, realization: u64) -> Vec<f64> {
    match &spec.means {
        MeansSpec::Fixed(m) => m.clone(),
        MeansSpec::Uniform => {
            let mut rng = stream(episode_seed(spec.master_seed, realization, MEANS_TAG));
            (0..spec.k).map(|_| rng.sample(Open01)).collect()
        }
    }
}

pub fn monte_carlo(spec: &ExperimentSpec, options: &RunOptions) -> Result<MonteCarloResult, SimError> {
    spec.validate()?;
    let checkpoints = log_checkpoints(spec.k as u64, spec.horizon, spec.checkpoints);
    let realization = |r: usize| -> Result<Vec<RunRecord>, SimError> {
        let env = BanditEnv::new(spec.kind, draw_means(spec, r as u64))?;
        spec.policies
            .iter()
            .enumerate()
            .map(|(p, cfg)| {
                let seed = episode_seed(spec.master_seed, r as u64, p as u64);
                run_episode(cfg, &env, spec.horizon, &checkpoints, seed)
            })
            .collect()
    };
    let work = || (0..spec.runs).into_par_iter().map(realization).collect::<Result<Vec<_>, _>>();
    let by_run = if options.workers == 0 {
        work()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(options.workers)
            .build()
            .map_err(|e| SimError::Workers(e.to_string()))?
            .install(work)?
    };

    let mut records: Vec<Vec<RunRecord>> = vec![Vec::with_capacity(spec.runs); spec.policies.len()];
    for run in by_run {
        for (p, rec) in run.into_iter().enumerate() {
            records[p].push(rec);
        }
    }
    let curves = spec
        .policies
        .iter()
        .zip(&records)
        .map(|(cfg, recs)| aggregate(&cfg.name, recs, options.measure))
        .collect();
    if !options.keep_records {
        records.clear();
    }
    Ok(MonteCarloResult { curves, records })
}

/// Mean and standard error per checkpoint, summed in record order.
pub fn aggregate(policy: &str, records: &[RunRecord], measure: RegretMeasure) -> AggregateCurve {
    let runs = records.len();
    let Some(first) = records.first() else {
        return AggregateCurve { policy: policy.to_string(), points: Vec::new() };
    };
    let value = |r: &RunRecord, j: usize| match measure {
        RegretMeasure::Pseudo => r.checkpoints[j].pseudo_regret,
        RegretMeasure::Realized => r.checkpoints[j].realized_regret,
    };
    let points = (0..first.checkpoints.len())
        .map(|j| {
            let mean = records.iter().map(|r| value(r, j)).sum::<f64>() / runs as f64;
            let sem = if runs > 1 {
                let ss: f64 = records.iter().map(|r| (value(r, j) - mean).powi(2)).sum();
                (ss / (runs - 1) as f64).sqrt() / (runs as f64).sqrt()
            } else {
                0.0
            };
            AggregatePoint { t: first.checkpoints[j].t, mean, sem, runs }
        })
        .collect();
    AggregateCurve { policy: policy.to_string(), points }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{PolicyConfig, Rule};
    use crate::posterior::RewardKind;

    fn spec(runs: usize, horizon: u64, means: MeansSpec) -> ExperimentSpec {
        let policies = vec![PolicyConfig::new(Rule::Thompson), PolicyConfig::defaults("aim", RewardKind::Bernoulli).unwrap()];
        ExperimentSpec::new(RewardKind::Bernoulli, 2, horizon, runs, means, policies, 5).unwrap()
    }

    #[test]
    fn single_run_equals_record() {
        let s = spec(1, 2, MeansSpec::Fixed(vec![0.3, 0.6]));
        let res = monte_carlo(&s, &RunOptions { keep_records: true, ..Default::default() }).unwrap();
        let rec = &res.records[0][0];
        assert_eq!(res.curves[0].points.len(), 1);
        assert_eq!(res.curves[0].points[0].mean, rec.final_pseudo_regret());
        assert_eq!(res.curves[0].points[0].sem, 0.0);
    }

    #[test]
    fn fixed_means_everywhere() {
        let s = spec(5, 50, MeansSpec::Fixed(vec![0.7, 0.8]));
        for r in 0..5 {
            assert_eq!(draw_means(&s, r), vec![0.7, 0.8]);
        }
    }

    #[test]
    fn uniform_means_shared_and_open() {
        let s = spec(5, 50, MeansSpec::Uniform);
        let a = draw_means(&s, 3);
        assert_eq!(a, draw_means(&s, 3));
        assert_ne!(a, draw_means(&s, 4));
        assert!(a.iter().all(|&m| m > 0.0 && m < 1.0));
    }

    #[test]
    fn worker_count_does_not_matter() {
        let s = spec(12, 300, MeansSpec::Uniform);
        let one = monte_carlo(&s, &RunOptions { workers: 1, ..Default::default() }).unwrap();
        let three = monte_carlo(&s, &RunOptions { workers: 3, ..Default::default() }).unwrap();
        assert_eq!(one, three);
    }
}
