//! Dataset preprocessing: the ingest → impute → encode → standardize →
//! reduce recipe, class rebalancing, seeded splitting, and a synthetic
//! fraud-like generator for desk-scale runs.

mod synth;
mod table;

pub use synth::{synth_fraud, SynthConfig};
pub use table::{load_and_join, Cell, RawTable, JOIN_KEY};

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::FeatureVector;
use crate::training::Batch;

/// Whether a feature column came from a numeric source or a one-hot level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Numeric,
    OneHot,
}

/// Per-feature standardization statistics (identity for one-hot columns).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalerStat {
    pub mean: f64,
    pub std: f64,
}

impl ScalerStat {
    pub const IDENTITY: ScalerStat = ScalerStat {
        mean: 0.0,
        std: 1.0,
    };
}

/// A fully preprocessed dataset ready for the circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<FeatureVector>,
    pub labels: Vec<u8>,
    pub feature_names: Vec<String>,
    pub kinds: Vec<FeatureKind>,
    pub scaler: Vec<ScalerStat>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn to_batch(&self) -> Result<Batch> {
        Batch::new(self.features.clone(), self.labels.clone())
    }

    /// Copies out the rows at `indices`, keeping feature metadata.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            kinds: self.kinds.clone(),
            scaler: self.scaler.clone(),
        }
    }

    /// Writes the columnar cache format: a header of feature names plus
    /// `label`, then one comma-separated row of decimal floats per sample.
    pub fn write_cache<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "{},label", self.feature_names.join(","))?;
        for (x, y) in self.features.iter().zip(&self.labels) {
            let fields: Vec<String> = x.values.iter().map(|v| format!("{v}")).collect();
            writeln!(writer, "{},{y}", fields.join(","))?;
        }
        Ok(())
    }

    /// Reads the cache format back. Scaler statistics are not persisted;
    /// cached features are taken as-is.
    pub fn read_cache<R: BufRead>(reader: R) -> Result<Dataset> {
        let mut lines = reader.lines();
        let header = lines.next().ok_or(Error::MalformedHistory(0))??;
        let mut names: Vec<String> = header.split(',').map(str::to_string).collect();
        if names.pop().as_deref() != Some("label") {
            return Err(Error::MissingColumn("label".to_string()));
        }
        let dim = names.len();
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let bad = || Error::MalformedCsv {
                line: (i + 2) as u64,
                message: "bad cache row".to_string(),
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != dim + 1 {
                return Err(bad());
            }
            let values: Vec<f64> = fields[..dim]
                .iter()
                .map(|f| f.parse().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            features.push(FeatureVector::new(values));
            labels.push(fields[dim].parse().map_err(|_| bad())?);
        }
        Ok(Dataset {
            features,
            labels,
            kinds: vec![FeatureKind::Numeric; dim],
            scaler: vec![ScalerStat::IDENTITY; dim],
            feature_names: names,
        })
    }
}

/// Preprocessing knobs. `target_dim` must match the circuit's feature
/// capacity (2 qubits' worth of angles per qubit).
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessConfig {
    pub label_column: String,
    pub target_dim: usize,
    pub missing_threshold: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            label_column: "isFraud".to_string(),
            target_dim: 8,
            missing_threshold: 0.5,
        }
    }
}

struct Column {
    name: String,
    kind: FeatureKind,
    values: Vec<f64>,
    scaler: ScalerStat,
}

/// Applies the preprocessing recipe:
/// columns above the missing threshold are dropped; remaining missing
/// numerics get the column median and missing categoricals a sentinel level;
/// categoricals are one-hot encoded; numerics are standardized; features are
/// ranked by absolute point-biserial correlation with the label and the top
/// `target_dim` kept.
pub fn preprocess(table: &RawTable, config: &PreprocessConfig) -> Result<Dataset> {
    let label_idx = table
        .column_index(&config.label_column)
        .ok_or_else(|| Error::MissingColumn(config.label_column.clone()))?;
    let labels = extract_labels(table, label_idx, &config.label_column)?;
    let n = labels.len();
    if n == 0 {
        return Err(Error::EmptyBatch);
    }

    let mut columns: Vec<Column> = Vec::new();
    for (j, name) in table.columns.iter().enumerate() {
        if j == label_idx || name == JOIN_KEY {
            continue;
        }
        let cells: Vec<&Cell> = table.rows.iter().map(|r| &r[j]).collect();
        let missing = cells.iter().filter(|c| matches!(c, Cell::Missing)).count();
        if missing as f64 / n as f64 > config.missing_threshold {
            continue;
        }
        let numeric = cells.iter().any(|c| matches!(c, Cell::Num(_)));
        if numeric {
            if let Some(col) = numeric_column(name, &cells) {
                columns.push(col);
            }
        } else {
            columns.extend(one_hot_columns(name, &cells));
        }
    }

    // Rank by |correlation with the label|; stable sort keeps original
    // column order on ties.
    let label_f: Vec<f64> = labels.iter().map(|&y| f64::from(y)).collect();
    let mut ranked: Vec<(f64, usize)> = columns
        .iter()
        .enumerate()
        .map(|(i, col)| (pearson(&col.values, &label_f).abs(), i))
        .collect();
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));

    if columns.len() < config.target_dim {
        return Err(Error::TooFewFeatures {
            available: columns.len(),
            needed: config.target_dim,
        });
    }
    let selected: Vec<usize> = ranked[..config.target_dim].iter().map(|r| r.1).collect();

    let features = (0..n)
        .map(|row| FeatureVector::new(selected.iter().map(|&c| columns[c].values[row]).collect()))
        .collect();
    Ok(Dataset {
        features,
        labels,
        feature_names: selected.iter().map(|&c| columns[c].name.clone()).collect(),
        kinds: selected.iter().map(|&c| columns[c].kind).collect(),
        scaler: selected.iter().map(|&c| columns[c].scaler).collect(),
    })
}

fn extract_labels(table: &RawTable, label_idx: usize, column: &str) -> Result<Vec<u8>> {
    table
        .rows
        .iter()
        .map(|row| match &row[label_idx] {
            Cell::Num(v) if *v == 0.0 => Ok(0),
            Cell::Num(v) if *v == 1.0 => Ok(1),
            Cell::Cat(s) if s == "0" => Ok(0),
            Cell::Cat(s) if s == "1" => Ok(1),
            other => Err(Error::NonBinaryLabel {
                column: column.to_string(),
                value: format!("{other:?}"),
            }),
        })
        .collect()
}

/// Median-imputes and standardizes one numeric column. Returns `None` for
/// zero-variance columns, which carry no signal and would break the scaler.
fn numeric_column(name: &str, cells: &[&Cell]) -> Option<Column> {
    let mut present: Vec<f64> = cells
        .iter()
        .filter_map(|c| match c {
            Cell::Num(v) => Some(*v),
            _ => None,
        })
        .collect();
    if present.is_empty() {
        return None;
    }
    present.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = present[present.len() / 2];
    let values: Vec<f64> = cells
        .iter()
        .map(|c| match c {
            Cell::Num(v) => *v,
            _ => median,
        })
        .collect();
    let (mean, std) = mean_std(&values);
    if std < 1e-12 {
        return None;
    }
    Some(Column {
        name: name.to_string(),
        kind: FeatureKind::Numeric,
        values: values.iter().map(|v| (v - mean) / std).collect(),
        scaler: ScalerStat { mean, std },
    })
}

/// Expands a categorical column into one indicator per level, with missing
/// cells mapped to a sentinel level. Levels are sorted for determinism.
fn one_hot_columns(name: &str, cells: &[&Cell]) -> Vec<Column> {
    const SENTINEL: &str = "(missing)";
    let mut levels: Vec<&str> = cells
        .iter()
        .map(|c| match c {
            Cell::Cat(s) => s.as_str(),
            _ => SENTINEL,
        })
        .collect();
    levels.sort_unstable();
    levels.dedup();
    if levels.len() < 2 {
        return Vec::new(); // constant column, no signal
    }
    levels
        .iter()
        .map(|level| Column {
            name: format!("{name}={level}"),
            kind: FeatureKind::OneHot,
            values: cells
                .iter()
                .map(|c| {
                    let v = match c {
                        Cell::Cat(s) => s.as_str(),
                        _ => SENTINEL,
                    };
                    f64::from(v == *level)
                })
                .collect(),
            scaler: ScalerStat::IDENTITY,
        })
        .collect()
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in x.iter().zip(y) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx <= 0.0 || vy <= 0.0 {
        return 0.0;
    }
    cov / (vx.sqrt() * vy.sqrt())
}

/// Resamples the minority class with replacement until the classes are
/// balanced, then shuffles. Feature values are never altered, only row
/// multiplicity.
pub fn balance_upsample(dataset: &Dataset, seed: u64) -> Result<Dataset> {
    let positives: Vec<usize> = (0..dataset.len()).filter(|&i| dataset.labels[i] == 1).collect();
    let negatives: Vec<usize> = (0..dataset.len()).filter(|&i| dataset.labels[i] == 0).collect();
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::SingleClass);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (minority, deficit) = if positives.len() < negatives.len() {
        (&positives, negatives.len() - positives.len())
    } else {
        (&negatives, positives.len() - negatives.len())
    };
    let mut indices: Vec<usize> = (0..dataset.len()).collect();
    for _ in 0..deficit {
        indices.push(minority[rng.gen_range(0..minority.len())]);
    }
    indices.shuffle(&mut rng);
    Ok(dataset.select(&indices))
}

/// Seeded shuffle-and-split. The train side gets `round(fraction * n)` rows
/// (clamped so both sides are nonempty). Numeric features are re-standardized
/// with statistics computed on the train rows only, then the same transform
/// is applied to the validation rows, so no validation information leaks
/// into the scaler.
pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(0.0 < train_fraction && train_fraction < 1.0) {
        return Err(Error::InvalidFraction(train_fraction));
    }
    let n = dataset.len();
    if n < 2 {
        return Err(Error::TooManyClients {
            clients: 2,
            size: n,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng);
    let n_train = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut train = dataset.select(&indices[..n_train]);
    let mut validation = dataset.select(&indices[n_train..]);

    for f in 0..dataset.feature_dim() {
        if dataset.kinds[f] != FeatureKind::Numeric {
            continue;
        }
        let column: Vec<f64> = train.features.iter().map(|x| x.values[f]).collect();
        let (mean, std) = mean_std(&column);
        if std < 1e-12 {
            continue;
        }
        for x in train.features.iter_mut().chain(validation.features.iter_mut()) {
            x.values[f] = (x.values[f] - mean) / std;
        }
        let stat = ScalerStat { mean, std };
        train.scaler[f] = stat;
        validation.scaler[f] = stat;
    }
    Ok((train, validation))
}
