use std::path::PathBuf;
use std::process::ExitCode;

use aim_cli::{cmd_run, cmd_tail, cmd_validate, load_spec, CliError};
use aim_core::RunOptions;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aim", version, about = "Bandit regret experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean regret curves of every policy in the config.
    Run {
        #[command(flatten)]
        common: Common,
        /// Also write regret.svg.
        #[arg(long)]
        svg: bool,
    },
    /// Survival function of the final regret and the top-fraction scatter.
    Tail {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.001)]
        top_fraction: f64,
    },
    /// Runs the built-in invariant and oracle checks.
    Validate,
}

#[derive(Args)]
struct Common {
    /// JSON experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's master_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { common, svg } => {
            let spec = load_spec(&common.config, common.seed, common.out.as_deref())?;
            let result = cmd_run(&spec, &RunOptions { workers: common.workers, ..Default::default() }, svg)?;
            for curve in &result.curves {
                let last = curve.last();
                println!("{:<20} t={:<10} mean regret {:.4} ± {:.4}", curve.policy, last.t, last.mean, last.sem);
            }
            println!("wrote {}", spec.output.display());
        }
        Command::Tail { common, top_fraction } => {
            if !(top_fraction > 0.0 && top_fraction < 1.0) {
                return Err(CliError::Option(format!("--top-fraction {top_fraction} must lie in (0, 1)")));
            }
            let spec = load_spec(&common.config, common.seed, common.out.as_deref())?;
            cmd_tail(&spec, top_fraction, &RunOptions { workers: common.workers, ..Default::default() })?;
            println!("wrote {}", spec.output.display());
        }
        Command::Validate => {
            for check in cmd_validate()? {
                println!("ok   {} {}", check.name, check.detail);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let CliError::Validation(failed) = &e {
                for check in failed {
                    eprintln!("FAIL {} {}", check.name, check.detail);
                }
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
