//! End-to-end pipeline checks: synthetic table through preprocessing,
//! sharding, and a short federated run.

use qfnn::data::{preprocess, split, synth_fraud, FeatureKind, PreprocessConfig, SynthConfig};
use qfnn::federated::{run_federated, FederatedConfig, Aggregation};
use qfnn::metrics::Scope;
use qfnn::model::CircuitSpec;
use qfnn::training::{AdamConfig, Convergence};

fn small_preprocess(target_dim: usize) -> PreprocessConfig {
    PreprocessConfig {
        target_dim,
        ..PreprocessConfig::default()
    }
}

#[test]
fn preprocessing_yields_standardized_target_dim_features() {
    let table = synth_fraud(&SynthConfig {
        n_samples: 500,
        ..SynthConfig::default()
    })
    .unwrap();
    let ds = preprocess(&table, &small_preprocess(8)).unwrap();
    assert_eq!(ds.feature_dim(), 8);
    assert_eq!(ds.len(), 500);
    for (j, kind) in ds.kinds.iter().enumerate() {
        if *kind != FeatureKind::Numeric {
            continue;
        }
        let mean: f64 = ds.features.iter().map(|f| f.values[j]).sum::<f64>() / ds.len() as f64;
        let var: f64 = ds
            .features
            .iter()
            .map(|f| (f.values[j] - mean).powi(2))
            .sum::<f64>()
            / ds.len() as f64;
        assert!(mean.abs() < 1e-9, "column {j} mean {mean}");
        assert!((var - 1.0).abs() < 1e-9, "column {j} variance {var}");
    }
}

#[test]
fn informative_columns_outrank_nuisance_columns() {
    let table = synth_fraud(&SynthConfig {
        n_samples: 1000,
        n_informative: 3,
        class_sep: 3.0,
        ..SynthConfig::default()
    })
    .unwrap();
    let ds = preprocess(&table, &small_preprocess(4)).unwrap();
    for name in ["f0", "f1", "f2"] {
        assert!(
            ds.feature_names.iter().any(|n| n == name),
            "{name} missing from {:?}",
            ds.feature_names
        );
    }
}

#[test]
fn eighty_twenty_split_of_ten_rows() {
    let table = synth_fraud(&SynthConfig {
        n_samples: 10,
        ..SynthConfig::default()
    })
    .unwrap();
    let ds = preprocess(&table, &small_preprocess(4)).unwrap();
    let (train, val) = split(&ds, 0.8, 7).unwrap();
    assert_eq!((train.len(), val.len()), (8, 2));
}

fn quick_fed_config(seed: u64) -> FederatedConfig {
    FederatedConfig {
        n_clients: 2,
        rounds: 5,
        local_iters: 1,
        batch_size: 16,
        aggregation: Aggregation::UnweightedMean,
        convergence: Some(Convergence::default()),
        train_fraction: 0.8,
        seed,
    }
}

#[test]
fn separable_data_trains_above_chance() {
    let table = synth_fraud(&SynthConfig {
        n_samples: 300,
        n_informative: 4,
        class_sep: 3.0,
        ..SynthConfig::default()
    })
    .unwrap();
    let ds = preprocess(&table, &small_preprocess(4)).unwrap();
    let spec = CircuitSpec::new(2, 2);
    let run = run_federated(&quick_fed_config(1), &spec, &AdamConfig::default(), &ds).unwrap();
    let last = run
        .history
        .iter()
        .rev()
        .find(|r| r.scope == Scope::Global)
        .unwrap();
    assert!(last.accuracy > 0.7, "accuracy {}", last.accuracy);
}

#[test]
fn unseparable_data_stays_near_chance() {
    let table = synth_fraud(&SynthConfig {
        n_samples: 300,
        n_informative: 4,
        class_sep: 0.0,
        ..SynthConfig::default()
    })
    .unwrap();
    let ds = preprocess(&table, &small_preprocess(4)).unwrap();
    let spec = CircuitSpec::new(2, 2);
    let run = run_federated(&quick_fed_config(2), &spec, &AdamConfig::default(), &ds).unwrap();
    let last = run
        .history
        .iter()
        .rev()
        .find(|r| r.scope == Scope::Global)
        .unwrap();
    assert!(
        (0.3..=0.7).contains(&last.accuracy),
        "accuracy {} should be near chance",
        last.accuracy
    );
}
