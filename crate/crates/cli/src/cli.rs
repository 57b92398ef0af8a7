use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use coherence_core::{CheckOptions, Condition, LinearEntropyConvention, MeasureId, RoofConfig};

use crate::commands::{self, SearchSpec, Settings};
use crate::error::CliError;
use crate::report::ReportDocument;

#[derive(Debug, Parser)]
#[command(
    name = "coherence-roof",
    version,
    about = "Convex-roof coherence measures and superadditivity checks"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for state sampling and optimizer restarts.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// A check is satisfied when its gap is at least minus this value.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_slack: f64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Emit a flat table instead of JSON.
    #[arg(long, global = true)]
    pub csv: bool,
    /// Omit the timestamp so reports are byte-identical across runs.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// Use `Σ|c_i|⁴` for the linear-entropy measure instead of `1 - Σ|c_i|⁴`.
    #[arg(long, global = true)]
    pub literal_linear_entropy: bool,
    /// Optimizer restarts per convex-roof evaluation.
    #[arg(long, global = true, default_value_t = 32)]
    pub restarts: usize,
    /// Iteration cap per restart.
    #[arg(long, global = true, default_value_t = 2000)]
    pub max_iters: usize,
    /// Convergence threshold on the per-iteration objective decrease.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Ensemble size; defaults to the squared rank, capped at 16.
    #[arg(long, global = true)]
    pub ensemble_size: Option<usize>,
}

impl GlobalArgs {
    pub fn settings(&self) -> Settings {
        let convention = if self.literal_linear_entropy {
            LinearEntropyConvention::Literal
        } else {
            LinearEntropyConvention::Corrected
        };
        Settings {
            seed: self.seed,
            check: CheckOptions {
                numeric_slack: self.tol_slack,
                convention,
                ..CheckOptions::default()
            },
            roof: RoofConfig {
                ensemble_size: self.ensemble_size,
                restarts: self.restarts,
                max_iters: self.max_iters,
                step_tolerance: self.tol,
                seed: self.seed,
            },
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the fixed suite of reference checks; exits 1 if any deviates.
    Reproduce,
    /// Sample random bipartite pure states and report violations.
    Search {
        #[arg(long)]
        measure: MeasureId,
        /// sufficient, alternative or full.
        #[arg(long, default_value = "sufficient")]
        condition: Condition,
        #[arg(long, default_value_t = 2)]
        dim_a: usize,
        #[arg(long, default_value_t = 2)]
        dim_b: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Evaluate one measure on a state file.
    Evaluate {
        #[arg(long)]
        measure: MeasureId,
        state: PathBuf,
    },
    /// Check the superadditivity conditions on a bipartite pure state file.
    Check {
        #[arg(long)]
        measure: MeasureId,
        /// Run only this condition.
        #[arg(long)]
        condition: Option<Condition>,
        state: PathBuf,
    },
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.clone(),
        source,
    })
}

/// Runs a parsed command line, writes the report and returns the exit code.
pub fn run(cli: &Cli) -> Result<i32, CliError> {
    let settings = cli.global.settings();
    let mut doc: ReportDocument = match &cli.command {
        Command::Reproduce => commands::reproduce(&settings)?,
        Command::Search {
            measure,
            condition,
            dim_a,
            dim_b,
            trials,
        } => {
            let spec = SearchSpec {
                measure: *measure,
                dim_a: *dim_a,
                dim_b: *dim_b,
                trials: *trials,
                seed: settings.seed,
                condition: *condition,
            };
            commands::search(&spec, &settings)?
        }
        Command::Evaluate { measure, state } => commands::evaluate(*measure, &read(state)?, &settings)?,
        Command::Check {
            measure,
            condition,
            state,
        } => commands::check(*measure, *condition, &read(state)?, &settings)?,
    };
    if !cli.global.no_timestamp {
        doc.timestamp = Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    }
    let text = if cli.global.csv { doc.to_csv()? } else { doc.to_json() };
    match &cli.global.output {
        Some(path) => std::fs::write(path, &text).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        })?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Write {
                    path: "<stdout>".into(),
                    source,
                })?;
        }
    }
    for e in &doc.expectations {
        if !e.passed {
            eprintln!("FAIL {} observed {:e} ({:?})", e.name, e.observed, e.rule);
        }
    }
    Ok(if doc.all_passed() { 0 } else { 1 })
}
