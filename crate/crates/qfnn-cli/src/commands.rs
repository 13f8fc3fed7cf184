//! Subcommand implementations. Each writes its artifacts under the output
//! directory with fixed filenames so downstream plotting never guesses.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use serde::Serialize;

use qfnn::data::{balance_upsample, load_and_join, preprocess, synth_fraud, Dataset, SynthConfig};
use qfnn::federated::{noise_sweep_trained, run_federated, RunOutput};
use qfnn::metrics::{export_history, ExportFormat, MetricsRecord, Scope};
use qfnn::model::{forward, CircuitSpec, NoiseSpec, ParamVector};
use qfnn::training::Batch;
use qfnn::validate::run_all;

use crate::config::ExperimentConfig;

/// Builds the preprocessed (and optionally rebalanced) dataset from either
/// the configured CSV files or the synthetic generator.
fn load_dataset(config: &ExperimentConfig) -> anyhow::Result<Dataset> {
    let table = match &config.data.transactions {
        Some(tx) => load_and_join(tx, config.data.identity.as_deref())
            .with_context(|| format!("loading {}", tx.display()))?,
        None => synth_fraud(&config.synth_config()).context("generating synthetic data")?,
    };
    let dataset = preprocess(&table, &config.preprocess_config()).context("preprocessing")?;
    if config.data.balance {
        Ok(balance_upsample(&dataset, config.experiment.seed).context("rebalancing")?)
    } else {
        Ok(dataset)
    }
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> anyhow::Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct ScoreStats {
    accuracy: f64,
    precision: f64,
    recall: f64,
    f1: f64,
    mse_loss: f64,
}

#[derive(Debug, Serialize)]
struct Summary {
    trials: usize,
    rounds: usize,
    seed: u64,
    final_per_trial: Vec<MetricsRecord>,
    mean: ScoreStats,
    stddev: ScoreStats,
}

fn stats_over<F: Fn(&MetricsRecord) -> f64>(records: &[MetricsRecord], f: F) -> (f64, f64) {
    let n = records.len() as f64;
    let mean = records.iter().map(&f).sum::<f64>() / n;
    let var = records.iter().map(|r| (f(r) - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn summarize(finals: &[MetricsRecord], rounds: usize, seed: u64) -> Summary {
    let (acc_m, acc_s) = stats_over(finals, |r| r.accuracy);
    let (pre_m, pre_s) = stats_over(finals, |r| r.precision);
    let (rec_m, rec_s) = stats_over(finals, |r| r.recall);
    let (f1_m, f1_s) = stats_over(finals, |r| r.f1);
    let (mse_m, mse_s) = stats_over(finals, |r| r.mse_loss);
    Summary {
        trials: finals.len(),
        rounds,
        seed,
        final_per_trial: finals.to_vec(),
        mean: ScoreStats {
            accuracy: acc_m,
            precision: pre_m,
            recall: rec_m,
            f1: f1_m,
            mse_loss: mse_m,
        },
        stddev: ScoreStats {
            accuracy: acc_s,
            precision: pre_s,
            recall: rec_s,
            f1: f1_s,
            mse_loss: mse_s,
        },
    }
}

/// Elementwise mean of each trial's global-scope rows, per round.
fn mean_global_history(histories: &[Vec<MetricsRecord>]) -> Vec<MetricsRecord> {
    let globals: Vec<Vec<&MetricsRecord>> = histories
        .iter()
        .map(|h| h.iter().filter(|r| r.scope == Scope::Global).collect())
        .collect();
    let rounds = globals[0].len();
    let n = globals.len() as f64;
    (0..rounds)
        .map(|i| {
            let rows: Vec<&MetricsRecord> = globals.iter().map(|g| g[i]).collect();
            MetricsRecord {
                round: rows[0].round,
                scope: Scope::Global,
                accuracy: rows.iter().map(|r| r.accuracy).sum::<f64>() / n,
                precision: rows.iter().map(|r| r.precision).sum::<f64>() / n,
                recall: rows.iter().map(|r| r.recall).sum::<f64>() / n,
                f1: rows.iter().map(|r| r.f1).sum::<f64>() / n,
                mse_loss: rows.iter().map(|r| r.mse_loss).sum::<f64>() / n,
            }
        })
        .collect()
}

fn prediction_rows(
    spec: &CircuitSpec,
    params: &ParamVector,
    batch: &Batch,
) -> anyhow::Result<String> {
    let mut out = String::from("index,label,y_hat,predicted\n");
    for (i, (x, &y)) in batch.features().iter().zip(batch.labels()).enumerate() {
        let y_hat = forward(spec, params, x)?;
        out.push_str(&format!("{i},{y},{y_hat},{}\n", u8::from(y_hat >= 0.5)));
    }
    Ok(out)
}

/// `train`: seeded trials of the full federated protocol plus averaged and
/// summarized artifacts.
pub fn cmd_train(
    config: &ExperimentConfig,
    out: &Path,
    dump_predictions: bool,
) -> anyhow::Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let dataset = load_dataset(config)?;
    let mut cache = Vec::new();
    dataset.write_cache(&mut cache)?;
    write_file(out, "dataset_cache.csv", &cache)?;

    let spec = config.circuit_spec();
    let adam = config.adam_config();
    let mut histories = Vec::new();
    let mut finals = Vec::new();
    let mut first_run: Option<RunOutput> = None;

    for trial in 0..config.experiment.trials {
        let seed = config.experiment.seed + trial as u64;
        let fed = config.federated_config(seed);
        let run = run_federated(&fed, &spec, &adam, &dataset)
            .with_context(|| format!("trial {trial} (seed {seed})"))?;
        let csv = export_history(&run.history, ExportFormat::Csv)?;
        write_file(out, &format!("trial_{trial:02}_history.csv", trial = trial), &csv)?;
        let last_global = run
            .history
            .iter()
            .rev()
            .find(|r| r.scope == Scope::Global)
            .expect("at least one round")
            .clone();
        println!(
            "trial {trial}: final accuracy {:.4}, mse {:.4}",
            last_global.accuracy, last_global.mse_loss
        );
        finals.push(last_global);
        histories.push(run.history.clone());
        if first_run.is_none() {
            first_run = Some(run);
        }
    }

    let mean_history = mean_global_history(&histories);
    write_file(
        out,
        "history_mean.csv",
        &export_history(&mean_history, ExportFormat::Csv)?,
    )?;

    let summary = summarize(&finals, config.federated.rounds, config.experiment.seed);
    let mut json = serde_json::to_vec_pretty(&summary)?;
    json.push(b'\n');
    write_file(out, "summary.json", &json)?;

    if dump_predictions {
        let run = first_run.expect("at least one trial");
        let rows = prediction_rows(&spec, &run.model.params, &run.global_validation)?;
        write_file(out, "predictions.csv", rows.as_bytes())?;
    }
    println!(
        "mean final accuracy {:.4} +/- {:.4}",
        summary.mean.accuracy, summary.stddev.accuracy
    );
    Ok(())
}

/// `noise-sweep`: one training run, then accuracy across kinds x strengths.
pub fn cmd_noise_sweep(
    config: &ExperimentConfig,
    out: &Path,
    dump_predictions: bool,
) -> anyhow::Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let dataset = load_dataset(config)?;
    let spec = config.circuit_spec();
    let adam = config.adam_config();
    let fed = config.federated_config(config.experiment.seed);
    let run = run_federated(&fed, &spec, &adam, &dataset).context("training for sweep")?;
    write_file(
        out,
        "history.csv",
        &export_history(&run.history, ExportFormat::Csv)?,
    )?;

    let kinds = &config.noise.sweep_kinds;
    let grid = &config.noise.sweep_grid;
    let table = noise_sweep_trained(&spec, &run, kinds, grid)?;
    let mut csv = String::from("kind,strength,accuracy\n");
    for (row, &kind) in table.kinds.iter().enumerate() {
        for (col, &p) in table.grid.iter().enumerate() {
            csv.push_str(&format!("{kind},{p},{}\n", table.accuracy[row][col]));
        }
    }
    write_file(out, "noise_sweep.csv", csv.as_bytes())?;

    if dump_predictions {
        let placement = spec
            .noise
            .map(|n| n.placement)
            .unwrap_or(qfnn::model::NoisePlacement::AfterEachLayer);
        let mut rows = String::from("kind,strength,index,label,y_hat\n");
        for &kind in kinds {
            for &p in grid {
                let cell_spec = CircuitSpec::new(spec.n_qubits, spec.n_layers).with_noise(
                    NoiseSpec {
                        kind,
                        strength: p,
                        placement,
                    },
                );
                let batch = &run.global_validation;
                for (i, (x, &y)) in batch.features().iter().zip(batch.labels()).enumerate() {
                    let y_hat = forward(&cell_spec, &run.model.params, x)?;
                    rows.push_str(&format!("{kind},{p},{i},{y},{y_hat}\n"));
                }
            }
        }
        write_file(out, "sweep_predictions.csv", rows.as_bytes())?;
    }
    println!("wrote {} sweep cells", kinds.len() * grid.len());
    Ok(())
}

/// `validate`: runs the independent oracle suites and fails on any miss.
pub fn cmd_validate(seed: u64) -> anyhow::Result<()> {
    let report = run_all(seed).context("running validation suites")?;
    print!("{report}");
    if !report.all_passed() {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect();
        bail!("validation failed: {}", failed.join(", "));
    }
    Ok(())
}

/// `synth`: writes a synthetic transaction CSV.
pub fn cmd_synth(config: &SynthConfig, out: &Path) -> anyhow::Result<()> {
    let table = synth_fraud(config).context("generating synthetic data")?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let file = fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
    table.write_csv(std::io::BufWriter::new(file))?;
    println!("wrote {} rows to {}", table.n_rows(), out.display());
    Ok(())
}
