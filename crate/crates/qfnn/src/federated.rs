//! Federated training runtime: IID sharding, per-client local training,
//! parameter aggregation, broadcast, and the noise-robustness sweep.
//!
//! Data locality is structural: a client's shard is only ever handed to
//! `local_train`, and only parameter vectors cross the client/server
//! boundary. Clients run sequentially in client-id order, so every reduction
//! has a fixed summation order and runs are bit-reproducible.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{split, Dataset};
use crate::error::{Error, Result};
use crate::metrics::{confusion, derive_metrics, MetricsRecord, Scope};
use crate::model::{predict_label, CircuitSpec, NoiseSpec, ParamVector};
use crate::quantum::ChannelKind;
use crate::training::{
    local_train, mse_loss, AdamConfig, AdamState, Batch, Convergence, LocalTrainConfig, Shard,
};

/// How client parameters are combined at the server.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    UnweightedMean,
    WeightedBySize,
}

/// Outer-loop configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct FederatedConfig {
    pub n_clients: usize,
    pub rounds: usize,
    pub local_iters: usize,
    pub batch_size: usize,
    pub aggregation: Aggregation,
    pub convergence: Option<Convergence>,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for FederatedConfig {
    fn default() -> Self {
        Self {
            n_clients: 15,
            rounds: 100,
            local_iters: 1,
            batch_size: 32,
            aggregation: Aggregation::UnweightedMean,
            convergence: Some(Convergence::default()),
            train_fraction: 0.8,
            seed: 42,
        }
    }
}

/// One federated client: its local shard, parameter copy, and optimizer
/// moments. The shard never leaves the client.
#[derive(Debug, Clone)]
pub struct ClientState {
    pub id: usize,
    pub shard: Shard,
    pub params: ParamVector,
    pub adam: AdamState,
}

impl ClientState {
    /// Local training-set size |D_i| used for weighted aggregation.
    pub fn data_size(&self) -> usize {
        self.shard.train.len()
    }
}

/// The server-side model.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalModel {
    pub params: ParamVector,
    pub round: usize,
}

/// Shuffles under the seed and deals near-equal disjoint shards (sizes
/// differ by at most one, earlier clients get the remainder).
pub fn partition_iid(dataset: &Dataset, n_clients: usize, seed: u64) -> Result<Vec<Dataset>> {
    if n_clients == 0 || dataset.len() < n_clients {
        return Err(Error::TooManyClients {
            clients: n_clients,
            size: dataset.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..dataset.len()).collect();
    indices.shuffle(&mut rng);
    let base = dataset.len() / n_clients;
    let remainder = dataset.len() % n_clients;
    let mut shards = Vec::with_capacity(n_clients);
    let mut start = 0;
    for i in 0..n_clients {
        let size = base + usize::from(i < remainder);
        shards.push(dataset.select(&indices[start..start + size]));
        start += size;
    }
    Ok(shards)
}

/// Combines client parameters. Computed as an offset from the first client's
/// vector so that identical inputs aggregate to themselves exactly.
pub fn aggregate(clients: &[ClientState], mode: Aggregation) -> Result<ParamVector> {
    let first = clients.first().ok_or(Error::NoClients)?;
    let p = first.params.len();
    for c in clients {
        if c.params.len() != p {
            return Err(Error::LengthMismatch {
                what: "client parameters",
                expected: p,
                actual: c.params.len(),
            });
        }
    }
    let mut ordered: Vec<&ClientState> = clients.iter().collect();
    ordered.sort_by_key(|c| c.id);

    let weights: Vec<f64> = match mode {
        Aggregation::UnweightedMean => {
            vec![1.0 / clients.len() as f64; clients.len()]
        }
        Aggregation::WeightedBySize => {
            let total: usize = ordered.iter().map(|c| c.data_size()).sum();
            ordered
                .iter()
                .map(|c| c.data_size() as f64 / total as f64)
                .collect()
        }
    };

    let base = &ordered[0].params.values;
    let mut values = base.clone();
    for i in 0..p {
        let mut delta = 0.0;
        for (c, w) in ordered.iter().zip(&weights) {
            delta += w * (c.params.values[i] - base[i]);
        }
        values[i] += delta;
    }
    Ok(ParamVector::new(values))
}

/// Everything `run_federated` sets up before the round loop; exposed so
/// callers can replay the exact same initialization.
pub struct PreparedRun {
    pub clients: Vec<ClientState>,
    pub global_validation: Batch,
    pub initial_params: ParamVector,
}

/// Derives the global 80/20-style split, IID shards with per-client
/// validation splits, and the uniform [0, 1) parameter initialization, all
/// from the config seed.
pub fn prepare_run(
    config: &FederatedConfig,
    spec: &CircuitSpec,
    dataset: &Dataset,
) -> Result<PreparedRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let split_seed = rng.gen::<u64>();
    let partition_seed = rng.gen::<u64>();

    let (train, global_val) = split(dataset, config.train_fraction, split_seed)?;
    let shards = partition_iid(&train, config.n_clients, partition_seed)?;
    let mut clients = Vec::with_capacity(shards.len());
    for (id, shard) in shards.into_iter().enumerate() {
        let client_seed = rng.gen::<u64>();
        let (local_train_ds, local_val_ds) = split(&shard, config.train_fraction, client_seed)?;
        clients.push(ClientState {
            id,
            shard: Shard {
                train: local_train_ds.to_batch()?,
                validation: local_val_ds.to_batch()?,
            },
            params: ParamVector::zeros(spec.param_count()),
            adam: AdamState::new(spec.param_count()),
        });
    }

    // Random rotation angles over the full circle.
    let initial_params = ParamVector::new(
        (0..spec.param_count())
            .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
            .collect(),
    );
    Ok(PreparedRun {
        clients,
        global_validation: global_val.to_batch()?,
        initial_params,
    })
}

/// Result of a full federated run.
pub struct RunOutput {
    pub model: GlobalModel,
    pub history: Vec<MetricsRecord>,
    pub global_validation: Batch,
}

/// The full protocol: broadcast, local train, aggregate, evaluate, repeat.
pub fn run_federated(
    config: &FederatedConfig,
    spec: &CircuitSpec,
    adam_config: &AdamConfig,
    dataset: &Dataset,
) -> Result<RunOutput> {
    let prepared = prepare_run(config, spec, dataset)?;
    run_prepared(config, spec, adam_config, prepared)
}

/// Runs the round loop on an already prepared setup.
pub fn run_prepared(
    config: &FederatedConfig,
    spec: &CircuitSpec,
    adam_config: &AdamConfig,
    mut prepared: PreparedRun,
) -> Result<RunOutput> {
    let train_config = LocalTrainConfig {
        max_epochs: config.local_iters,
        batch_size: config.batch_size,
        convergence: config.convergence,
    };
    let mut global = prepared.initial_params.clone();
    let mut history = Vec::new();

    for round in 1..=config.rounds {
        for client in prepared.clients.iter_mut() {
            let (params, adam, _trace) = local_train(
                &client.shard,
                spec,
                adam_config,
                &train_config,
                &global,
            )?;
            client.params = params;
            client.adam = adam;
            history.push(evaluate(
                spec,
                &client.params,
                &client.shard.validation,
                round,
                Scope::Client(client.id),
            )?);
        }
        global = aggregate(&prepared.clients, config.aggregation)?;
        history.push(evaluate(
            spec,
            &global,
            &prepared.global_validation,
            round,
            Scope::Global,
        )?);
    }

    Ok(RunOutput {
        model: GlobalModel {
            params: global,
            round: config.rounds,
        },
        history,
        global_validation: prepared.global_validation,
    })
}

/// Scores one parameter vector on a batch.
pub fn evaluate(
    spec: &CircuitSpec,
    params: &ParamVector,
    batch: &Batch,
    round: usize,
    scope: Scope,
) -> Result<MetricsRecord> {
    let predictions: Vec<u8> = batch
        .features()
        .iter()
        .map(|x| predict_label(spec, params, x, 0.5))
        .collect::<Result<_>>()?;
    let counts = confusion(batch.labels(), &predictions)?;
    let mse = mse_loss(spec, params, batch)?;
    derive_metrics(&counts, mse, round, scope)
}

/// Accuracy of a trained model per (channel kind, strength) cell.
pub struct SweepTable {
    pub kinds: Vec<ChannelKind>,
    pub grid: Vec<f64>,
    pub accuracy: Vec<Vec<f64>>,
}

impl SweepTable {
    pub fn cell(&self, kind: ChannelKind, p_index: usize) -> Option<f64> {
        let row = self.kinds.iter().position(|k| *k == kind)?;
        self.accuracy.get(row)?.get(p_index).copied()
    }
}

/// Evaluates an already trained model across channel kinds and strengths on
/// the run's global validation set. The placement comes from the training
/// spec's noise setting when present, otherwise after each layer.
pub fn noise_sweep_trained(
    spec: &CircuitSpec,
    run: &RunOutput,
    kinds: &[ChannelKind],
    grid: &[f64],
) -> Result<SweepTable> {
    for &p in grid {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::InvalidStrength(p));
        }
    }
    let placement = spec
        .noise
        .map(|n| n.placement)
        .unwrap_or(crate::model::NoisePlacement::AfterEachLayer);
    let mut accuracy = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let mut row = Vec::with_capacity(grid.len());
        for &p in grid {
            let noisy_spec = CircuitSpec {
                n_qubits: spec.n_qubits,
                n_layers: spec.n_layers,
                noise: Some(NoiseSpec {
                    kind,
                    strength: p,
                    placement,
                }),
            };
            let record = evaluate(
                &noisy_spec,
                &run.model.params,
                &run.global_validation,
                run.model.round,
                Scope::Global,
            )?;
            row.push(record.accuracy);
        }
        accuracy.push(row);
    }
    Ok(SweepTable {
        kinds: kinds.to_vec(),
        grid: grid.to_vec(),
        accuracy,
    })
}

/// Trains per the config (noiselessly unless the spec carries noise), then
/// evaluates across the sweep grid.
pub fn noise_sweep(
    config: &FederatedConfig,
    spec: &CircuitSpec,
    adam_config: &AdamConfig,
    dataset: &Dataset,
    kinds: &[ChannelKind],
    grid: &[f64],
) -> Result<(SweepTable, RunOutput)> {
    let run = run_federated(config, spec, adam_config, dataset)?;
    let table = noise_sweep_trained(spec, &run, kinds, grid)?;
    Ok((table, run))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureKind, ScalerStat};
    use crate::model::FeatureVector;

    fn toy_dataset(n: usize) -> Dataset {
        let features = (0..n)
            .map(|i| {
                let v = if i % 2 == 0 { 1.0 } else { -1.0 };
                FeatureVector::new(vec![v, 0.5 * v])
            })
            .collect();
        let labels = (0..n).map(|i| u8::from(i % 2 == 1)).collect();
        Dataset {
            features,
            labels,
            feature_names: vec!["a".to_string(), "b".to_string()],
            kinds: vec![FeatureKind::Numeric; 2],
            scaler: vec![ScalerStat::IDENTITY; 2],
        }
    }

    fn client_with(id: usize, values: Vec<f64>, shard_size: usize) -> ClientState {
        let features = vec![FeatureVector::new(vec![0.0, 0.0]); shard_size + 1];
        let mut labels = vec![0u8; shard_size + 1];
        labels[0] = 1;
        let train = Batch::new(features[..shard_size].to_vec(), labels[..shard_size].to_vec())
            .unwrap();
        let validation = Batch::new(features[shard_size..].to_vec(), labels[shard_size..].to_vec())
            .unwrap();
        ClientState {
            id,
            shard: Shard { train, validation },
            params: ParamVector::new(values),
            adam: AdamState::new(2),
        }
    }

    #[test]
    fn partition_even_sizes() {
        let shards = partition_iid(&toy_dataset(100), 4, 1).unwrap();
        assert_eq!(shards.len(), 4);
        assert!(shards.iter().all(|s| s.len() == 25));
    }

    #[test]
    fn partition_remainder_rule() {
        let shards = partition_iid(&toy_dataset(10), 3, 1).unwrap();
        let sizes: Vec<usize> = shards.iter().map(|s| s.len()).collect();
        assert_eq!(sizes, vec![4, 3, 3]);
    }

    #[test]
    fn partition_shards_are_disjoint_and_cover() {
        let ds = toy_dataset(37);
        let shards = partition_iid(&ds, 5, 9).unwrap();
        let total: usize = shards.iter().map(|s| s.len()).sum();
        assert_eq!(total, ds.len());
    }

    #[test]
    fn partition_rejects_too_many_clients() {
        assert!(matches!(
            partition_iid(&toy_dataset(3), 5, 0),
            Err(Error::TooManyClients { .. })
        ));
    }

    #[test]
    fn partition_preserves_label_proportions() {
        let ds = toy_dataset(10_000);
        let shards = partition_iid(&ds, 10, 42).unwrap();
        for shard in &shards {
            let pos = shard.labels.iter().filter(|&&y| y == 1).count();
            let frac = pos as f64 / shard.len() as f64;
            assert!((frac - 0.5).abs() <= 0.10, "shard proportion {frac}");
        }
    }

    #[test]
    fn single_client_aggregate_is_identity() {
        let c = client_with(0, vec![0.3, -0.7], 4);
        for mode in [Aggregation::UnweightedMean, Aggregation::WeightedBySize] {
            let out = aggregate(std::slice::from_ref(&c), mode).unwrap();
            assert_eq!(out.values, c.params.values);
        }
    }

    #[test]
    fn two_client_mean_both_modes() {
        let a = client_with(0, vec![0.0, 0.0], 4);
        let b = client_with(1, vec![1.0, 1.0], 4);
        for mode in [Aggregation::UnweightedMean, Aggregation::WeightedBySize] {
            let out = aggregate(&[a.clone(), b.clone()], mode).unwrap();
            assert_eq!(out.values, vec![0.5, 0.5]);
        }
    }

    #[test]
    fn weighted_aggregation_uses_shard_sizes() {
        let a = client_with(0, vec![0.0], 10);
        let b = client_with(1, vec![1.0], 30);
        let a = ClientState {
            params: ParamVector::new(vec![0.0]),
            adam: AdamState::new(1),
            ..a
        };
        let b = ClientState {
            params: ParamVector::new(vec![1.0]),
            adam: AdamState::new(1),
            ..b
        };
        let out = aggregate(&[a, b], Aggregation::WeightedBySize).unwrap();
        assert!((out.values[0] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn identical_params_aggregate_exactly_for_any_count() {
        let values = vec![0.123456789, -0.987654321, 0.333333333];
        let clients: Vec<ClientState> = (0..15)
            .map(|id| client_with(id, values.clone(), 3))
            .collect();
        let out = aggregate(&clients, Aggregation::UnweightedMean).unwrap();
        assert_eq!(out.values, values);
    }

    #[test]
    fn aggregation_is_permutation_invariant() {
        let mut clients: Vec<ClientState> = (0..5)
            .map(|id| client_with(id, vec![id as f64 * 0.17, 1.0 - id as f64 * 0.05], 3))
            .collect();
        let forward_order = aggregate(&clients, Aggregation::UnweightedMean).unwrap();
        clients.reverse();
        let reverse_order = aggregate(&clients, Aggregation::UnweightedMean).unwrap();
        assert_eq!(forward_order.values, reverse_order.values);
    }

    #[test]
    fn empty_client_list_rejected() {
        assert!(matches!(
            aggregate(&[], Aggregation::UnweightedMean),
            Err(Error::NoClients)
        ));
    }

    #[test]
    fn round_history_is_seed_deterministic() {
        let ds = toy_dataset(60);
        let spec = CircuitSpec::new(1, 1);
        let config = FederatedConfig {
            n_clients: 2,
            rounds: 2,
            local_iters: 1,
            batch_size: 8,
            seed: 7,
            ..FederatedConfig::default()
        };
        let adam = AdamConfig::default();
        let a = run_federated(&config, &spec, &adam, &ds).unwrap();
        let b = run_federated(&config, &spec, &adam, &ds).unwrap();
        assert_eq!(a.model.params, b.model.params);
        assert_eq!(a.history, b.history);
    }

    #[test]
    fn history_contains_expected_row_counts() {
        let ds = toy_dataset(60);
        let spec = CircuitSpec::new(1, 1);
        let config = FederatedConfig {
            n_clients: 3,
            rounds: 4,
            ..FederatedConfig::default()
        };
        let run = run_federated(&config, &spec, &AdamConfig::default(), &ds).unwrap();
        let global_rows = run
            .history
            .iter()
            .filter(|r| r.scope == Scope::Global)
            .count();
        assert_eq!(global_rows, 4);
        assert_eq!(run.history.len(), 4 * (3 + 1));
    }
}
