//! Experiment commands behind the `aim` binary: regret curves, tail
//! statistics and the built-in validation suite.

pub mod svg;
pub mod table;

use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};

use aim_core::selfcheck::{self, Check};
use aim_core::sim::{monte_carlo, tail_statistics, RunOptions, SimError};
use aim_core::{parse_config, ConfigError, ExperimentSpec, MonteCarloResult};
use thiserror::Error;

pub use svg::{emit_svg, SvgError};

pub const REGRET_FILE: &str = "regret.csv";
pub const PLOT_FILE: &str = "regret.svg";
pub const SURVIVAL_FILE: &str = "tail_survival.csv";
pub const SCATTER_FILE: &str = "tail_scatter.csv";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("reading {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("config {0}")]
    Config(#[from] ConfigError),
    #[error("invalid option: {0}")]
    Option(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("writing {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Plot(#[from] SvgError),
    #[error("{} validation check(s) failed", .0.len())]
    Validation(Vec<Check>),
}

impl CliError {
    /// 2 for unusable input, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Read { .. } | CliError::Config(_) | CliError::Option(_) => 2,
            _ => 1,
        }
    }
}

pub fn load_spec(path: &Path, seed: Option<u64>, out: Option<&Path>) -> Result<ExperimentSpec, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_owned(), source })?;
    let mut spec = parse_config(&text)?;
    if let Some(seed) = seed {
        spec.master_seed = seed;
    }
    if let Some(out) = out {
        spec.output = out.to_owned();
    }
    Ok(spec)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_owned(), source })?;
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(|source| CliError::Write { path, source })
}

fn csv_error(path: PathBuf, e: csv::Error) -> CliError {
    CliError::Write { path, source: e.into() }
}

/// Runs the experiment and writes `regret.csv` (and `regret.svg`) into the
/// spec's output directory.
pub fn cmd_run(spec: &ExperimentSpec, options: &RunOptions, plot: bool) -> Result<MonteCarloResult, CliError> {
    let result = monte_carlo(spec, options)?;
    let dir = &spec.output;
    table::write_regret(create(dir, REGRET_FILE)?, &result.curves).map_err(|e| csv_error(dir.join(REGRET_FILE), e))?;
    if plot {
        let svg = emit_svg(&result.curves)?;
        let path = dir.join(PLOT_FILE);
        fs::write(&path, svg).map_err(|source| CliError::Write { path, source })?;
    }
    Ok(result)
}

/// Runs the experiment keeping every record and writes the survival function
/// and the top-fraction scatter of each policy.
pub fn cmd_tail(spec: &ExperimentSpec, top_fraction: f64, options: &RunOptions) -> Result<(), CliError> {
    let options = RunOptions { keep_records: true, ..options.clone() };
    let result = monte_carlo(spec, &options)?;
    let tails = spec
        .policies
        .iter()
        .zip(&result.records)
        .map(|(p, records)| Ok((p.name.clone(), tail_statistics(records, top_fraction)?)))
        .collect::<Result<Vec<_>, SimError>>()?;
    let dir = &spec.output;
    table::write_tail(create(dir, SURVIVAL_FILE)?, create(dir, SCATTER_FILE)?, &tails)
        .map_err(|e| csv_error(dir.join(SURVIVAL_FILE), e))?;
    Ok(())
}

/// Runs every built-in check; fails with the list of failing ones.
pub fn cmd_validate() -> Result<Vec<Check>, CliError> {
    let checks = selfcheck::run_all();
    let failed: Vec<Check> = checks.iter().filter(|c| !c.passed).cloned().collect();
    if failed.is_empty() {
        Ok(checks)
    } else {
        Err(CliError::Validation(failed))
    }
}
