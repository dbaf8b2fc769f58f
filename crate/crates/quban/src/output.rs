//! CSV and JSON artifacts of an experiment.
//!
//! Layout under the output directory:
//!
//! ```text
//! summary.json
//! <variant>/run_<i>.csv      t,action,reward,reward_hat,bits,cum_bits,regret_realized,regret_pseudo
//! <variant>/aggregate.csv    t,regret_mean,regret_std,bits_mean,avg_bits_mean
//! ```
//!
//! `plotdata` adds, per variant directory:
//!
//! ```text
//! regret_vs_t.csv               t,regret_mean,regret_std
//! regret_per_iter_vs_bits.csv   cum_bits,regret_per_iter
//! avg_bits_vs_t.csv             t,avg_bits_mean
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use quban_core::metrics::{Aggregate, RunMetrics, StepRecord};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Serialize, Deserialize)]
struct RunRow {
    t: u64,
    action: usize,
    reward: f64,
    reward_hat: f64,
    bits: u32,
    cum_bits: u64,
    regret_realized: f64,
    regret_pseudo: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct AggregateCsvRow {
    t: u64,
    regret_mean: f64,
    regret_std: f64,
    bits_mean: f64,
    avg_bits_mean: f64,
}

/// One variant's entry in `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub name: String,
    pub runs: usize,
    pub horizon: u64,
    pub final_regret_mean: f64,
    pub final_regret_std: f64,
    pub final_pseudo_regret_mean: f64,
    pub final_pseudo_regret_std: f64,
    /// Mean `cum_bits / n`, identical to the last `avg_bits_mean` of the
    /// aggregate CSV.
    pub avg_bits: f64,
    pub avg_bits_std: f64,
    pub guard_activations_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub preset: String,
    pub seed: u64,
    pub variants: Vec<VariantSummary>,
}

impl VariantSummary {
    pub fn new(name: &str, agg: &Aggregate) -> Self {
        let last = agg.curve.last();
        Self {
            name: name.to_string(),
            runs: agg.runs,
            horizon: agg.horizon,
            final_regret_mean: agg.final_regret.mean,
            final_regret_std: agg.final_regret.std,
            final_pseudo_regret_mean: agg.final_pseudo_regret.mean,
            final_pseudo_regret_std: agg.final_pseudo_regret.std,
            avg_bits: last.map_or(0.0, |r| r.avg_bits_mean),
            avg_bits_std: agg.avg_bits.std,
            guard_activations_mean: agg.guard_activations.mean,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| io_err(path, e))
}

pub fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

pub fn run_file(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("run_{index}.csv"))
}

pub fn write_run(path: &Path, m: &RunMetrics) -> Result<(), CliError> {
    let mut w = writer(path)?;
    for r in &m.records {
        w.serialize(RunRow {
            t: r.t,
            action: r.action,
            reward: r.reward,
            reward_hat: r.reward_hat,
            bits: r.bits,
            cum_bits: r.cum_bits,
            regret_realized: r.regret_realized,
            regret_pseudo: r.regret_pseudo,
        })
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_run(path: &Path, tag: &str) -> Result<RunMetrics, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let mut m = RunMetrics::new(tag);
    for row in reader.deserialize::<RunRow>() {
        let r = row.map_err(|e| io_err(path, e))?;
        m.records.push(StepRecord {
            t: r.t,
            action: r.action,
            reward: r.reward,
            reward_hat: r.reward_hat,
            bits: r.bits,
            cum_bits: r.cum_bits,
            regret_realized: r.regret_realized,
            regret_pseudo: r.regret_pseudo,
        });
    }
    if let Some(last) = m.records.last() {
        m.cum_bits = last.cum_bits;
        m.realized_regret = last.regret_realized;
        m.pseudo_regret = last.regret_pseudo;
    }
    Ok(m)
}

pub fn write_aggregate(path: &Path, agg: &Aggregate) -> Result<(), CliError> {
    let mut w = writer(path)?;
    for r in &agg.curve {
        w.serialize(AggregateCsvRow {
            t: r.t,
            regret_mean: r.regret_mean,
            regret_std: r.regret_std,
            bits_mean: r.bits_mean,
            avg_bits_mean: r.avg_bits_mean,
        })
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(summary).map_err(|e| io_err(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

#[derive(Serialize)]
struct RegretRow {
    t: u64,
    regret_mean: f64,
    regret_std: f64,
}

#[derive(Serialize)]
struct RegretPerBitRow {
    cum_bits: f64,
    regret_per_iter: f64,
}

#[derive(Serialize)]
struct AvgBitsRow {
    t: u64,
    avg_bits_mean: f64,
}

fn write_rows<T: Serialize>(path: &Path, rows: impl Iterator<Item = T>) -> Result<(), CliError> {
    let mut w = writer(path)?;
    for row in rows {
        w.serialize(row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Writes the three figure datasets for one variant directory.
pub fn write_plot_data(dir: &Path, agg: &Aggregate) -> Result<(), CliError> {
    write_rows(
        &dir.join("regret_vs_t.csv"),
        agg.curve.iter().map(|r| RegretRow {
            t: r.t,
            regret_mean: r.regret_mean,
            regret_std: r.regret_std,
        }),
    )?;
    write_rows(
        &dir.join("regret_per_iter_vs_bits.csv"),
        agg.curve.iter().map(|r| RegretPerBitRow {
            cum_bits: r.bits_mean,
            regret_per_iter: r.regret_mean / r.t as f64,
        }),
    )?;
    write_rows(
        &dir.join("avg_bits_vs_t.csv"),
        agg.curve.iter().map(|r| AvgBitsRow {
            t: r.t,
            avg_bits_mean: r.avg_bits_mean,
        }),
    )
}

/// Run CSVs in `dir`, ordered by run index.
pub fn list_runs(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut runs: Vec<(usize, PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| io_err(dir, e))? {
        let path = entry.map_err(|e| io_err(dir, e))?.path();
        let index = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_prefix("run_"))
            .and_then(|n| n.strip_suffix(".csv"))
            .and_then(|n| n.parse().ok());
        if let Some(i) = index {
            runs.push((i, path));
        }
    }
    runs.sort();
    Ok(runs.into_iter().map(|(_, p)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_csv_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunMetrics::new("x");
        m.push(3, 0.1 + 0.2, -1.0 / 3.0, 5, 2.5, 1.0);
        m.push(0, 1e-300, 7.25, 4, 2.5, 2.5);
        let path = run_file(dir.path(), 0);
        write_run(&path, &m).unwrap();
        let back = read_run(&path, "x").unwrap();
        assert_eq!(back.records, m.records);
        assert_eq!(back.cum_bits, 9);
        let header = fs::read_to_string(&path).unwrap();
        assert!(header.starts_with("t,action,reward,reward_hat,bits,cum_bits,regret_realized,regret_pseudo\n"));
    }

    #[test]
    fn lists_runs_in_index_order() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["run_10.csv", "run_2.csv", "aggregate.csv", "run_x.csv"] {
            fs::write(dir.path().join(name), "").unwrap();
        }
        let names: Vec<String> = list_runs(dir.path())
            .unwrap()
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, ["run_2.csv", "run_10.csv"]);
    }
}
