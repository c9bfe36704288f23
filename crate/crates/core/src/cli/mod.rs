//! Command-line driver: flags and an optional JSON config file merge into a
//! [`RunConfig`], which fully determines the output.

pub mod config;
pub mod output;
pub mod run;
pub mod spec;
pub mod verify;

use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

pub use config::{Command, OutputFormat, Profile, RunConfig};
pub use spec::{FieldSpec, PotentialSpec, RegionSpec};
pub use verify::{run_check, run_verify, CheckResult, Fault, VerifySummary};

use crate::error::{FracError, Result};
use crate::model::{LimitModel, Method, NormFlavor};

#[derive(Debug, Parser)]
#[command(name = "fraclim", version, about = "Magnetic fractional energies and their limits")]
pub struct Cli {
    /// Subcommand; defaults to the config file's, then `energy`.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// JSON config file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Field spec, e.g. `gaussian:w=1` or `indicator:ball:r=1`.
    #[arg(long)]
    pub field: Option<FieldSpec>,
    /// Potential spec, e.g. `potential:rotational:b=2`.
    #[arg(long)]
    pub potential: Option<PotentialSpec>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    /// Comma-separated s values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub s_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub shards: Option<usize>,
    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub model: Option<LimitModel>,
    /// Pair count for `audit`.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, value_enum)]
    pub profile: Option<Profile>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub norm_flavor: Option<NormFlavor>,
    #[arg(long, hide = true)]
    pub inject_fault: Option<Fault>,
}

impl Cli {
    /// File entries first, then every flag that was given.
    pub fn into_config(self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_json(&std::fs::read_to_string(path)?)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $($dst:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag { c.$($dst).+ = v; })*
            };
        }
        set!(
            command => command, field => field, potential => potential, n => n, p => p,
            s_grid => s_grid, method => engine.method, budget => engine.budget, seed => engine.seed,
            shards => engine.shards, r_min => engine.r_min, tolerance => engine.tolerance,
            model => model, samples => samples, profile => profile, format => format,
            norm_flavor => norm_flavor,
        );
        if self.s.is_some() {
            c.s = self.s;
        }
        if self.r_max.is_some() {
            c.engine.r_max = self.r_max;
        }
        if self.out.is_some() {
            c.out = self.out;
        }
        Ok(c)
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(text) = std::env::var("FRACLIM_THREADS") {
        let threads: usize = text
            .parse()
            .map_err(|_| FracError::Config(format!("FRACLIM_THREADS must be a positive integer, got `{text}`")))?;
        // a pool built earlier in the same process is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global();
    }
    Ok(())
}

fn emit(config: &RunConfig, text: &str) -> Result<()> {
    match &config.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Runs one invocation; the return value is the process exit code
/// (0 success, 1 failed verification or i/o, 2 bad input, 3 no convergence).
pub fn run(cli: Cli) -> i32 {
    let fault = cli.inject_fault;
    let outcome = configure_threads().and_then(|_| cli.into_config()).and_then(|config| {
        if config.command == Command::Verify {
            let summary = run_verify(config.profile, fault, |c| eprintln!("{c}"));
            let text = match config.format {
                OutputFormat::Json => output::json_report(&config, &summary),
                OutputFormat::Csv => verify_csv(&summary),
            };
            emit(&config, &text)?;
            Ok(if summary.passed { 0 } else { 1 })
        } else {
            let text = run::execute(&config)?;
            emit(&config, &text)?;
            Ok(0)
        }
    });
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    })
}

fn verify_csv(summary: &VerifySummary) -> String {
    let mut out = String::from("id,name,passed,measured,target,tolerance\n");
    for c in &summary.checks {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.id,
            c.name,
            c.passed,
            output::fmt_sig(c.measured),
            output::fmt_sig(c.target),
            output::fmt_sig(c.tolerance)
        ));
    }
    out
}
