//! Experiment description and its JSON form.
//!
//! ```json
//! {
//!   "kind": "bernoulli",
//!   "K": 2,
//!   "horizon": 10000,
//!   "runs": 100,
//!   "means": "uniform",
//!   "policies": ["thompson", {"variant": "aim", "params": {"alpha": 1.0}}],
//!   "master_seed": 1
//! }
//! ```
//!
//! Optional keys: `sigma` (gaussian only, default 1), `checkpoints` (default
//! 64), `output` (default `"out"`). A policy object may also carry
//! `forced-init` (default true) and `label` (default: the variant name).

use std::collections::HashSet;
use std::path::PathBuf;

use serde_json::{Map, Value};
use thiserror::Error;

use crate::entropy::ThetaEqForm;
use crate::policy::{PolicyConfig, Rule};
use crate::posterior::RewardKind;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

fn err<T>(path: impl Into<String>, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { path: path.into(), message: message.into() })
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeansSpec {
    Fixed(Vec<f64>),
    /// Fresh means per realization, uniform on ]0, 1[.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: RewardKind,
    pub k: usize,
    pub horizon: u64,
    pub runs: usize,
    pub means: MeansSpec,
    pub policies: Vec<PolicyConfig>,
    pub master_seed: u64,
    pub checkpoints: usize,
    pub output: PathBuf,
}

impl ExperimentSpec {
    /// Spec with default checkpoints and output, validated.
    pub fn new(
        kind: RewardKind,
        k: usize,
        horizon: u64,
        runs: usize,
        means: MeansSpec,
        policies: Vec<PolicyConfig>,
        master_seed: u64,
    ) -> Result<Self, ConfigError> {
        let spec = Self {
            kind,
            k,
            horizon,
            runs,
            means,
            policies,
            master_seed,
            checkpoints: 64,
            output: PathBuf::from("out"),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k < 2 {
            return err("K", format!("need at least 2 arms, got {}", self.k));
        }
        if self.horizon < self.k as u64 {
            return err("horizon", format!("{} is shorter than K = {}", self.horizon, self.k));
        }
        if self.runs < 1 {
            return err("runs", "need at least one run");
        }
        if self.checkpoints < 1 {
            return err("checkpoints", "need at least one checkpoint");
        }
        if let MeansSpec::Fixed(means) = &self.means {
            if means.len() != self.k {
                return err("means", format!("{} values for K = {}", means.len(), self.k));
            }
            for (i, &m) in means.iter().enumerate() {
                let ok = match self.kind {
                    RewardKind::Bernoulli => (0.0..=1.0).contains(&m),
                    RewardKind::Gaussian { .. } => m.is_finite(),
                };
                if !ok {
                    return err(format!("means[{i}]"), format!("{m} is not a valid mean"));
                }
            }
        }
        if self.policies.is_empty() {
            return err("policies", "no policies");
        }
        let mut names = HashSet::new();
        for (i, p) in self.policies.iter().enumerate() {
            if let Err(e) = p.check(self.kind, self.k) {
                return err(format!("policies[{i}]"), e.to_string());
            }
            if !names.insert(p.name.as_str()) {
                return err(format!("policies[{i}]"), format!("duplicate policy name {:?}, set a label", p.name));
            }
        }
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentSpec, ConfigError> {
    let doc: Value = serde_json::from_str(text).or_else(|e| err("", format!("invalid JSON: {e}")))?;
    let obj = doc.as_object().map_or_else(|| err("", "top level must be an object"), Ok)?;
    const KEYS: [&str; 10] =
        ["kind", "K", "horizon", "runs", "means", "sigma", "policies", "master_seed", "checkpoints", "output"];
    reject_unknown(obj, &KEYS, "")?;

    let kind_name = required(obj, "kind", "")?.as_str().map_or_else(|| err("kind", "expected a string"), Ok)?;
    let kind = match kind_name {
        "bernoulli" => {
            if obj.contains_key("sigma") {
                return err("sigma", "only applies to gaussian rewards");
            }
            RewardKind::Bernoulli
        }
        "gaussian" => {
            let sigma = match obj.get("sigma") {
                None => 1.0,
                Some(v) => number(v, "sigma")?,
            };
            RewardKind::gaussian(sigma).or_else(|e| err("sigma", e.to_string()))?
        }
        other => return err("kind", format!("unknown reward kind {other:?}")),
    };
    let k = integer(required(obj, "K", "")?, "K")? as usize;
    let horizon = integer(required(obj, "horizon", "")?, "horizon")?;
    let runs = integer(required(obj, "runs", "")?, "runs")? as usize;
    let master_seed = integer(required(obj, "master_seed", "")?, "master_seed")?;
    let checkpoints = match obj.get("checkpoints") {
        None => 64,
        Some(v) => integer(v, "checkpoints")? as usize,
    };
    let output = match obj.get("output") {
        None => PathBuf::from("out"),
        Some(v) => PathBuf::from(v.as_str().map_or_else(|| err("output", "expected a string"), Ok)?),
    };
    let means = match required(obj, "means", "")? {
        Value::String(s) if s == "uniform" => MeansSpec::Uniform,
        Value::Array(items) => MeansSpec::Fixed(
            items.iter().enumerate().map(|(i, v)| number(v, &format!("means[{i}]"))).collect::<Result<_, _>>()?,
        ),
        _ => return err("means", "expected \"uniform\" or a list of numbers"),
    };
    let list = required(obj, "policies", "")?.as_array().map_or_else(|| err("policies", "expected a list"), Ok)?;
    let policies = list
        .iter()
        .enumerate()
        .map(|(i, v)| parse_policy(v, kind, &format!("policies[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;

    let spec = ExperimentSpec { kind, k, horizon, runs, means, policies, master_seed, checkpoints, output };
    spec.validate()?;
    Ok(spec)
}

fn parse_policy(v: &Value, kind: RewardKind, path: &str) -> Result<PolicyConfig, ConfigError> {
    let defaults = |variant: &str, at: &str| {
        PolicyConfig::defaults(variant, kind).map_or_else(
            || err(at, format!("unknown policy {variant:?}, expected one of {}", Rule::VARIANTS.join(", "))),
            Ok,
        )
    };
    let obj = match v {
        Value::String(s) => return defaults(s, path),
        Value::Object(obj) => obj,
        _ => return err(path, "expected a policy name or object"),
    };
    reject_unknown(obj, &["variant", "params", "forced-init", "label"], path)?;
    let vpath = format!("{path}.variant");
    let variant = required(obj, "variant", path)?.as_str().map_or_else(|| err(&vpath, "expected a string"), Ok)?;
    let mut config = defaults(variant, &vpath)?;
    if let Some(params) = obj.get("params") {
        let ppath = format!("{path}.params");
        let params = params.as_object().map_or_else(|| err(&ppath, "expected an object"), Ok)?;
        apply_params(&mut config.rule, params, &ppath)?;
    }
    if let Some(flag) = obj.get("forced-init") {
        config.forced_init = flag.as_bool().map_or_else(|| err(format!("{path}.forced-init"), "expected a boolean"), Ok)?;
    }
    if let Some(label) = obj.get("label") {
        let lpath = format!("{path}.label");
        let label = label.as_str().map_or_else(|| err(&lpath, "expected a string"), Ok)?;
        if label.is_empty() || label.contains([',', '"', '\n']) {
            return err(lpath, "labels must be non-empty and free of commas, quotes and newlines");
        }
        config.name = label.to_string();
    }
    Ok(config)
}

fn apply_params(rule: &mut Rule, params: &Map<String, Value>, path: &str) -> Result<(), ConfigError> {
    for (key, value) in params {
        let at = format!("{path}.{key}");
        match (&mut *rule, key.as_str()) {
            (Rule::Aim { alpha, .. } | Rule::AimTuned { alpha, .. }, "alpha") => *alpha = number(value, &at)?,
            (Rule::Aim { form, .. } | Rule::AimTuned { form, .. }, "theta-eq-form") => {
                let name = value.as_str().map_or_else(|| err(&at, "expected a string"), Ok)?;
                *form = ThetaEqForm::parse(name)
                    .map_or_else(|| err(&at, "expected one of exact, doubled-root, scaled-root"), Ok)?;
            }
            (Rule::UcbTuned { c, .. } | Rule::EpsGreedy { c, .. } | Rule::KlUcb { c }, "c") => *c = number(value, &at)?,
            (Rule::UcbTuned { d, .. } | Rule::EpsGreedy { d, .. }, "d") => *d = number(value, &at)?,
            (Rule::Infomax { grid_points }, "grid-points") => *grid_points = integer(value, &at)? as usize,
            _ => return err(at, format!("unknown parameter for {}", rule.variant())),
        }
    }
    Ok(())
}

fn reject_unknown(obj: &Map<String, Value>, known: &[&str], path: &str) -> Result<(), ConfigError> {
    for key in obj.keys() {
        if !known.contains(&key.as_str()) {
            return err(join(path, key), "unknown key");
        }
    }
    Ok(())
}

fn required<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, ConfigError> {
    obj.get(key).map_or_else(|| err(join(path, key), "missing"), Ok)
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn number(v: &Value, path: &str) -> Result<f64, ConfigError> {
    v.as_f64().map_or_else(|| err(path, "expected a number"), Ok)
}

fn integer(v: &Value, path: &str) -> Result<u64, ConfigError> {
    v.as_u64().map_or_else(|| err(path, "expected a non-negative integer"), Ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"kind": "bernoulli", "K": 2, "horizon": 10000, "runs": 100,
        "means": "uniform", "policies": ["thompson"], "master_seed": 1}"#;

    #[test]
    fn minimal_gets_defaults() {
        let spec = parse_config(MINIMAL).unwrap();
        assert_eq!(spec.kind, RewardKind::Bernoulli);
        assert_eq!((spec.k, spec.horizon, spec.runs, spec.master_seed), (2, 10_000, 100, 1));
        assert_eq!(spec.checkpoints, 64);
        assert_eq!(spec.means, MeansSpec::Uniform);
        assert_eq!(spec.policies, vec![PolicyConfig::new(Rule::Thompson)]);
        assert!(spec.policies[0].forced_init);
        assert_eq!(spec.output, PathBuf::from("out"));
    }

    #[test]
    fn fixed_means_and_params() {
        let text = r#"{"kind": "gaussian", "K": 2, "horizon": 100, "runs": 3, "means": [0.7, 0.8],
            "sigma": 0.5, "master_seed": 9, "checkpoints": 10, "output": "res",
            "policies": [{"variant": "aim", "params": {"alpha": 2.0, "theta-eq-form": "scaled-root"}},
                         {"variant": "aim", "label": "aim-exact"},
                         {"variant": "eps-greedy", "params": {"c": 5, "d": 0.5}}]}"#;
        let spec = parse_config(text).unwrap();
        assert_eq!(spec.kind, RewardKind::Gaussian { sigma: 0.5 });
        assert_eq!(spec.means, MeansSpec::Fixed(vec![0.7, 0.8]));
        assert_eq!(spec.policies[0].rule, Rule::Aim { alpha: 2.0, form: ThetaEqForm::ScaledRoot });
        assert_eq!(spec.policies[1].name, "aim-exact");
        assert_eq!(spec.policies[2].rule, Rule::EpsGreedy { c: 5.0, d: 0.5 });
    }

    fn error_path(text: &str) -> String {
        parse_config(text).unwrap_err().path
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(error_path(&MINIMAL.replace("\"K\": 2", "\"K\": 1")), "K");
        assert_eq!(error_path(&MINIMAL.replace("\"runs\": 100", "\"runs\": \"many\"")), "runs");
        assert_eq!(error_path(&MINIMAL.replace("\"runs\": 100,", "\"runs\": 100, \"extra\": 1,")), "extra");
        assert_eq!(error_path(&MINIMAL.replace("\"horizon\": 10000,", "")), "horizon");
        assert_eq!(error_path(&MINIMAL.replace("\"uniform\"", "[0.5]")), "means");
        assert_eq!(error_path(&MINIMAL.replace("\"uniform\"", "[0.5, 1.5]")), "means[1]");
        assert_eq!(error_path(&MINIMAL.replace("[\"thompson\"]", "[\"greedy\"]")), "policies[0]");
        assert_eq!(
            error_path(&MINIMAL.replace("[\"thompson\"]", r#"[{"variant": "aim", "params": {"alpha": "x"}}]"#)),
            "policies[0].params.alpha"
        );
        assert_eq!(
            error_path(&MINIMAL.replace("[\"thompson\"]", r#"[{"variant": "aim", "params": {"beta": 1}}]"#)),
            "policies[0].params.beta"
        );
        assert_eq!(error_path(&MINIMAL.replace("[\"thompson\"]", "[\"thompson\", \"thompson\"]")), "policies[1]");
        assert_eq!(error_path(&MINIMAL.replace("\"kind\": \"bernoulli\",", "\"kind\": \"bernoulli\", \"sigma\": 2,")), "sigma");
        assert_eq!(error_path("[1, 2]"), "");
        assert_eq!(error_path("{"), "");
    }
}
