//! Synthetic fraud-like table generator.
//!
//! Produces a raw table in the same shape the CSV ingester emits: informative
//! Gaussian features separated by class, nuisance numeric and categorical
//! columns, a sprinkle of missing cells, a `TransactionID` column, and an
//! `isFraud` label. The positive count is exact by construction.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::table::{Cell, RawTable};
use crate::error::{Error, Result};

const N_NUISANCE_NUMERIC: usize = 3;
/// Within-class spread of the informative features; class centroids sit at
/// -class_sep and +class_sep, so clusters are class_sep / 0.5 standard
/// deviations from the midpoint.
const CLUSTER_STD: f64 = 0.5;
const CAT_LEVELS: [&[&str]; 2] = [&["A", "B", "C"], &["X", "Y"]];
const MISSING_RATE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub n_samples: usize,
    pub n_informative: usize,
    pub class_sep: f64,
    pub fraud_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_samples: 2000,
            n_informative: 6,
            class_sep: 2.0,
            fraud_rate: 0.5,
            seed: 42,
        }
    }
}

/// Generates a synthetic transaction table per `config`.
pub fn synth_fraud(config: &SynthConfig) -> Result<RawTable> {
    if !(0.0..=1.0).contains(&config.fraud_rate) || !config.fraud_rate.is_finite() {
        return Err(Error::InvalidRate(config.fraud_rate));
    }
    let n = config.n_samples;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let nuisance = Normal::new(0.0, 1.0).expect("unit normal");
    let cluster = Normal::new(0.0, CLUSTER_STD).expect("cluster normal");

    let n_pos = (config.fraud_rate * n as f64).round() as usize;
    let mut labels = vec![1u8; n_pos];
    labels.resize(n, 0);
    labels.shuffle(&mut rng);

    let mut columns = vec!["TransactionID".to_string()];
    for j in 0..config.n_informative {
        columns.push(format!("f{j}"));
    }
    for j in 0..N_NUISANCE_NUMERIC {
        columns.push(format!("noise{j}"));
    }
    for j in 0..CAT_LEVELS.len() {
        columns.push(format!("cat{j}"));
    }
    columns.push("isFraud".to_string());

    let mut rows = Vec::with_capacity(n);
    for (i, &label) in labels.iter().enumerate() {
        let mut row = Vec::with_capacity(columns.len());
        row.push(Cell::Num((i + 1) as f64));
        // Class centroids sit at -class_sep and +class_sep along every
        // informative axis, as in scikit-learn's make_classification.
        let shift = if label == 1 {
            config.class_sep
        } else {
            -config.class_sep
        };
        for _ in 0..config.n_informative {
            row.push(Cell::Num(cluster.sample(&mut rng) + shift));
        }
        for _ in 0..N_NUISANCE_NUMERIC {
            let cell = if rng.gen_bool(MISSING_RATE) {
                Cell::Missing
            } else {
                Cell::Num(nuisance.sample(&mut rng))
            };
            row.push(cell);
        }
        for levels in CAT_LEVELS {
            let cell = if rng.gen_bool(MISSING_RATE) {
                Cell::Missing
            } else {
                Cell::Cat(levels[rng.gen_range(0..levels.len())].to_string())
            };
            row.push(cell);
        }
        row.push(Cell::Num(f64::from(label)));
        rows.push(row);
    }
    Ok(RawTable { columns, rows })
}
