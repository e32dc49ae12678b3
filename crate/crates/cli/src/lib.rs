//! Batch runner for liftlab experiments: TOML configs in, CSV/JSON/SVG reports out.

pub mod config;
pub mod error;
pub mod jobs;
pub mod output;
pub mod plot;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{parse_config, ExperimentConfig, JobKind};
pub use error::CliError;
pub use jobs::{run_job, Bundle};

#[derive(Debug, Parser)]
#[command(name = "liftlab", version, about = "Fractional energies, liftings and inequality checks on grids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate an energy of a generated or loaded field.
    Energy,
    /// Lift a circle- or torus-valued field through a covering.
    Lift,
    /// Split a real field into a fractional and a first-order part.
    Decompose,
    /// Run one inequality suite, or `all`.
    Verify { suite: String },
    /// Run the critical-exponent counterexample.
    Counterexample,
}

#[derive(Debug, Args)]
pub struct Flags {
    /// TOML experiment file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Grid points per axis.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// `r-over-s1`, `kfold:<k>` or `r2-over-t2`.
    #[arg(long, global = true)]
    pub covering: Option<String>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

/// Loads the config file, if any, and applies the command line on top.
pub fn resolve(cli: &Cli) -> Result<(JobKind, ExperimentConfig), CliError> {
    let mut config = match &cli.flags.config {
        Some(path) => parse_config(&std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?)?,
        None => ExperimentConfig::default(),
    };
    let job = match &cli.command {
        Command::Energy => JobKind::Energy,
        Command::Lift => JobKind::Lift,
        Command::Decompose => JobKind::Decompose,
        Command::Verify { suite } => {
            config.suite = suite.clone();
            JobKind::Verify
        }
        Command::Counterexample => JobKind::Counterexample,
    };
    if config.job.is_some_and(|j| j != job) {
        return Err(CliError::Schema("job".into()));
    }
    let f = &cli.flags;
    if let Some(out) = &f.out {
        config.out = out.clone();
    }
    if let Some(n) = f.n {
        config.n = n;
    }
    if let Some(seed) = f.seed {
        config.seed = seed;
    }
    if let Some(c) = &f.covering {
        config.covering = c.clone();
    }
    if f.threads.is_some() {
        config.threads = f.threads;
    }
    config.validate()?;
    Ok((job, config))
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: &Cli) -> u8 {
    let (job, config) = match resolve(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let bundle = match config.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| run_job(job, &config)),
            Err(e) => {
                eprintln!("error: cannot start {t} worker threads: {e}");
                return error::EXIT_IO;
            }
        },
        None => run_job(job, &config),
    };
    if let Err(e) = bundle.write(&config.out) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    let s = &bundle.summary;
    println!("{}: {}/{} cases pass", s.job, s.passed, s.cases);
    if let Some(e) = &s.error {
        eprintln!("error: {}: {}", e.kind, e.message);
    }
    for suite in s.suites.iter().filter(|x| x.error.is_some() || !x.failed_cases.is_empty()) {
        match &suite.error {
            Some(e) => eprintln!("{}: {}: {}", suite.suite_id, e.kind, e.message),
            None => eprintln!("{}: failed {}", suite.suite_id, suite.failed_cases.join(", ")),
        }
    }
    bundle.exit_code()
}
