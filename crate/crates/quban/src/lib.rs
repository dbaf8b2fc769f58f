//! Command-line front end for `quban-core`: experiment presets and config
//! files, parallel run dispatch, CSV/JSON output and the validation battery.

use std::path::Path;

use quban_core::analysis::{self, SuiteConfig, ValidationReport};
use quban_core::metrics::{Aggregate, RunMetrics};
use quban_core::rng::run_seed;
use quban_core::sim;
use rayon::prelude::*;

pub mod config;
pub mod output;

pub use config::{Experiment, ExperimentConfig};
pub use output::{Summary, VariantSummary};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "QUBAN_THREADS";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0} validation check(s) failed")]
    Validation(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
            CliError::Validation(_) => 3,
        }
    }
}

/// Sizes the global thread pool from `QUBAN_THREADS`, if set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // A second initialisation (e.g. in tests) keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs every variant of `exp` and writes its artifacts under `out`.
pub fn run_experiment(exp: &Experiment, out: &Path) -> Result<Summary, CliError> {
    output::create_dir(out)?;
    let mut variants = Vec::with_capacity(exp.variants.len());
    for cfg in &exp.variants {
        let metrics: Vec<RunMetrics> = (0..exp.runs as u64)
            .into_par_iter()
            .map(|i| sim::run_once(cfg, run_seed(exp.seed, i)).map(|o| o.metrics))
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Config(format!("variant {}: {e}", cfg.name)))?;
        let agg = Aggregate::from_runs(&metrics).map_err(|e| CliError::Config(e.to_string()))?;

        let dir = out.join(&cfg.name);
        output::create_dir(&dir)?;
        for (i, m) in metrics.iter().enumerate() {
            output::write_run(&output::run_file(&dir, i), m)?;
        }
        output::write_aggregate(&dir.join("aggregate.csv"), &agg)?;
        variants.push(VariantSummary::new(&cfg.name, &agg));
    }
    let summary = Summary {
        preset: exp.preset.name().to_string(),
        seed: exp.seed,
        variants,
    };
    output::write_summary(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Rebuilds each variant's aggregate from its run CSVs and writes the
/// figure datasets next to them. Returns the variant names processed.
pub fn plot_data(input: &Path) -> Result<Vec<String>, CliError> {
    if !input.is_dir() {
        return Err(CliError::Io(format!("{}: not a directory", input.display())));
    }
    let mut dirs: Vec<_> = std::fs::read_dir(input)
        .map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    let mut done = Vec::new();
    for dir in dirs {
        let runs = output::list_runs(&dir)?;
        if runs.is_empty() {
            continue;
        }
        let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let metrics = runs
            .iter()
            .map(|p| output::read_run(p, &name))
            .collect::<Result<Vec<_>, _>>()?;
        let agg = Aggregate::from_runs(&metrics).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        output::write_plot_data(&dir, &agg)?;
        done.push(name);
    }
    if done.is_empty() {
        return Err(CliError::Io(format!("{}: no run CSVs found", input.display())));
    }
    Ok(done)
}

/// Runs the codec battery: `10^4` draws per estimate when `quick`, `10^6`
/// otherwise.
pub fn validate(quick: bool, seed: u64) -> ValidationReport {
    let cfg = if quick {
        SuiteConfig::quick(seed)
    } else {
        SuiteConfig::full(seed)
    };
    analysis::codec_validation_suite(&cfg)
}

/// `NAME status statistic tolerance`, one line per check.
pub fn format_report(report: &ValidationReport) -> String {
    let mut out = String::new();
    for c in &report.checks {
        let status = if c.passed { "pass" } else { "FAIL" };
        out.push_str(&format!("{} {status} {:e} {:e}\n", c.name, c.statistic, c.tolerance));
    }
    out
}
