use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quban::{CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "quban", version, about = "Quantized-reward bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or config file and write per-run and aggregate CSVs.
    Run {
        /// JSON experiment file.
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        /// setup1, setup2, setup3 or appG.
        #[arg(long)]
        preset: Option<String>,
        /// Output directory; overrides the config's output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        horizon: Option<u64>,
        /// Restrict to these variants (repeatable).
        #[arg(long = "variant")]
        variants: Vec<String>,
    },
    /// Run the codec validation battery.
    Validate {
        /// 10^4 draws per estimate instead of 10^6.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Build figure datasets from a run output directory.
    Plotdata {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    quban::init_threads()?;
    match cli.command {
        Command::Run {
            config,
            preset,
            out,
            runs,
            seed,
            horizon,
            variants,
        } => {
            let mut cfg = match (config, preset) {
                (Some(path), _) => ExperimentConfig::load(&path)?,
                (None, Some(name)) => ExperimentConfig::from_preset(&name),
                (None, None) => return Err(CliError::Config("need --config or --preset".into())),
            };
            let o = &mut cfg.overrides;
            o.runs = runs.or(o.runs);
            o.seed = seed.or(o.seed);
            o.horizon = horizon.or(o.horizon);
            if !variants.is_empty() {
                o.variants = Some(variants);
            }
            let exp = cfg.resolve()?;
            let out = out
                .or(exp.output_dir.clone())
                .ok_or_else(|| CliError::Config("need --out or output_dir".into()))?;
            let summary = quban::run_experiment(&exp, &out)?;
            for v in &summary.variants {
                println!(
                    "{:<32} regret {:>12.3} +- {:<10.3} bits/reward {:.4}",
                    v.name, v.final_regret_mean, v.final_regret_std, v.avg_bits
                );
            }
            Ok(())
        }
        Command::Validate { quick, seed } => {
            let report = quban::validate(quick, seed);
            print!("{}", quban::format_report(&report));
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(CliError::Validation(failed));
            }
            Ok(())
        }
        Command::Plotdata { input } => {
            for name in quban::plot_data(&input)? {
                println!("{}", input.join(name).display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("quban: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
