//! Experiment driver for the federated quantum fraud-detection simulator.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::ExperimentConfig;
use qfnn::data::SynthConfig;

#[derive(Parser)]
#[command(
    name = "qfnn",
    version,
    about = "Federated variational quantum classifier experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file; omit to run with the reference defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for result files (created if absent).
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker count. Accepted for interface stability; execution is
    /// currently sequential regardless of the value.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Also write raw per-sample predictions.
    #[arg(long)]
    dump_predictions: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded federated training trials and write history/summary files.
    Train(RunArgs),
    /// Train once, then evaluate across noise kinds and strengths.
    NoiseSweep(RunArgs),
    /// Run the oracle cross-check suites (gradient, simulator, channels).
    Validate {
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Emit a synthetic transaction CSV.
    Synth {
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = SynthConfig::default().n_samples)]
        samples: usize,
        #[arg(long, default_value_t = SynthConfig::default().n_informative)]
        informative: usize,
        #[arg(long, default_value_t = SynthConfig::default().class_sep)]
        class_sep: f64,
        #[arg(long, default_value_t = SynthConfig::default().fraud_rate)]
        fraud_rate: f64,
        #[arg(long, default_value_t = SynthConfig::default().seed)]
        seed: u64,
    },
}

fn load_run_config(args: &RunArgs) -> anyhow::Result<ExperimentConfig> {
    if args.parallel == 0 {
        anyhow::bail!("--parallel must be at least 1");
    }
    let mut config = ExperimentConfig::load(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        config.experiment.seed = seed;
    }
    Ok(config)
}

fn run() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Train(args) => {
            let config = load_run_config(&args)?;
            commands::cmd_train(&config, &args.out, args.dump_predictions)
        }
        Command::NoiseSweep(args) => {
            let config = load_run_config(&args)?;
            commands::cmd_noise_sweep(&config, &args.out, args.dump_predictions)
        }
        Command::Validate { seed } => commands::cmd_validate(seed),
        Command::Synth {
            out,
            samples,
            informative,
            class_sep,
            fraud_rate,
            seed,
        } => commands::cmd_synth(
            &SynthConfig {
                n_samples: samples,
                n_informative: informative,
                class_sep,
                fraud_rate,
                seed,
            },
            &out,
        ),
    }
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
