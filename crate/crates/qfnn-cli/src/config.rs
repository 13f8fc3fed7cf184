//! TOML experiment configuration.
//!
//! Every field has a default matching the reference experimental setup
//! (4 qubits, 4 layers, Adam at η=0.1, 15 clients, 100 rounds, 1 local
//! iteration, 10 trials), so the canonical run is `qfnn train` with an empty
//! config file. Unknown keys are rejected so typos fail loudly.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Deserialize;

use qfnn::data::{PreprocessConfig, SynthConfig};
use qfnn::federated::{Aggregation, FederatedConfig};
use qfnn::model::{CircuitSpec, NoisePlacement, NoiseSpec};
use qfnn::quantum::ChannelKind;
use qfnn::training::{AdamConfig, Convergence};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub data: DataSection,
    pub circuit: CircuitSection,
    pub adam: AdamSection,
    pub federated: FederatedSection,
    pub noise: NoiseSection,
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    /// Transaction CSV; when absent a synthetic table is generated instead.
    pub transactions: Option<PathBuf>,
    /// Optional identity CSV left-joined on TransactionID.
    pub identity: Option<PathBuf>,
    pub label_column: String,
    pub target_dim: usize,
    pub missing_threshold: f64,
    pub balance: bool,
    pub synth_samples: usize,
    pub synth_informative: usize,
    pub synth_class_sep: f64,
    pub synth_fraud_rate: f64,
}

impl Default for DataSection {
    fn default() -> Self {
        let pre = PreprocessConfig::default();
        let synth = SynthConfig::default();
        Self {
            transactions: None,
            identity: None,
            label_column: pre.label_column,
            target_dim: pre.target_dim,
            missing_threshold: pre.missing_threshold,
            balance: true,
            synth_samples: synth.n_samples,
            synth_informative: synth.n_informative,
            synth_class_sep: synth.class_sep,
            synth_fraud_rate: synth.fraud_rate,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitSection {
    pub n_qubits: usize,
    pub n_layers: usize,
}

impl Default for CircuitSection {
    fn default() -> Self {
        Self {
            n_qubits: 4,
            n_layers: 4,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdamSection {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamSection {
    fn default() -> Self {
        let adam = AdamConfig::default();
        Self {
            learning_rate: adam.learning_rate,
            beta1: adam.beta1,
            beta2: adam.beta2,
            epsilon: adam.epsilon,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FederatedSection {
    pub n_clients: usize,
    pub rounds: usize,
    pub local_iters: usize,
    pub batch_size: usize,
    pub aggregation: Aggregation,
    pub train_fraction: f64,
    pub early_stop: bool,
    pub patience: usize,
    pub min_improvement: f64,
}

impl Default for FederatedSection {
    fn default() -> Self {
        let fed = FederatedConfig::default();
        let conv = Convergence::default();
        Self {
            n_clients: fed.n_clients,
            rounds: fed.rounds,
            local_iters: fed.local_iters,
            batch_size: fed.batch_size,
            aggregation: fed.aggregation,
            train_fraction: fed.train_fraction,
            early_stop: true,
            patience: conv.patience,
            min_improvement: conv.min_improvement,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    /// Channel applied during training; absent means noiseless training.
    pub train_kind: Option<ChannelKind>,
    pub train_strength: f64,
    pub placement: NoisePlacement,
    pub sweep_kinds: Vec<ChannelKind>,
    pub sweep_grid: Vec<f64>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            train_kind: None,
            train_strength: 0.0,
            placement: NoisePlacement::AfterEachLayer,
            sweep_kinds: ChannelKind::ALL.to_vec(),
            sweep_grid: (0..=10).map(|i| f64::from(i) / 10.0).collect(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub trials: usize,
    pub seed: u64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            trials: 10,
            seed: 42,
        }
    }
}

impl ExperimentConfig {
    /// Loads and validates a TOML config; `None` yields the all-defaults run.
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let config: ExperimentConfig = match path {
            None => ExperimentConfig::default(),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                toml::from_str(&text)
                    .with_context(|| format!("parsing config {}", path.display()))?
            }
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> anyhow::Result<()> {
        if self.circuit.n_qubits == 0 {
            bail!("circuit.n_qubits must be at least 1");
        }
        if self.circuit.n_layers == 0 {
            bail!("circuit.n_layers must be at least 1");
        }
        let expected = 2 * self.circuit.n_qubits;
        if self.data.target_dim != expected {
            bail!(
                "data.target_dim ({}) must equal 2 * circuit.n_qubits ({expected})",
                self.data.target_dim
            );
        }
        if !(0.0..=1.0).contains(&self.data.missing_threshold) {
            bail!("data.missing_threshold must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.data.synth_fraud_rate) {
            bail!("data.synth_fraud_rate must lie in [0, 1]");
        }
        if !(self.adam.learning_rate.is_finite() && self.adam.learning_rate >= 0.0) {
            bail!("adam.learning_rate must be a nonnegative number");
        }
        for (name, beta) in [("adam.beta1", self.adam.beta1), ("adam.beta2", self.adam.beta2)] {
            if !(0.0..1.0).contains(&beta) {
                bail!("{name} must lie in [0, 1)");
            }
        }
        if self.federated.n_clients == 0 {
            bail!("federated.n_clients must be at least 1");
        }
        if self.federated.rounds == 0 {
            bail!("federated.rounds must be at least 1");
        }
        if self.federated.batch_size == 0 {
            bail!("federated.batch_size must be at least 1");
        }
        if !(0.0 < self.federated.train_fraction && self.federated.train_fraction < 1.0) {
            bail!("federated.train_fraction must lie strictly between 0 and 1");
        }
        if !(0.0..=1.0).contains(&self.noise.train_strength) {
            bail!("noise.train_strength must lie in [0, 1]");
        }
        if self.noise.sweep_grid.is_empty() {
            bail!("noise.sweep_grid must not be empty");
        }
        for &p in &self.noise.sweep_grid {
            if !(0.0..=1.0).contains(&p) {
                bail!("noise.sweep_grid entries must lie in [0, 1], got {p}");
            }
        }
        if self.experiment.trials == 0 {
            bail!("experiment.trials must be at least 1");
        }
        Ok(())
    }

    pub fn circuit_spec(&self) -> CircuitSpec {
        let mut spec = CircuitSpec::new(self.circuit.n_qubits, self.circuit.n_layers);
        if let Some(kind) = self.noise.train_kind {
            spec = spec.with_noise(NoiseSpec {
                kind,
                strength: self.noise.train_strength,
                placement: self.noise.placement,
            });
        }
        spec
    }

    pub fn adam_config(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.adam.learning_rate,
            beta1: self.adam.beta1,
            beta2: self.adam.beta2,
            epsilon: self.adam.epsilon,
        }
    }

    /// Federated config for one trial; the trial index offsets the seed.
    pub fn federated_config(&self, seed: u64) -> FederatedConfig {
        FederatedConfig {
            n_clients: self.federated.n_clients,
            rounds: self.federated.rounds,
            local_iters: self.federated.local_iters,
            batch_size: self.federated.batch_size,
            aggregation: self.federated.aggregation,
            convergence: self.federated.early_stop.then_some(Convergence {
                patience: self.federated.patience,
                min_improvement: self.federated.min_improvement,
            }),
            train_fraction: self.federated.train_fraction,
            seed,
        }
    }

    pub fn preprocess_config(&self) -> PreprocessConfig {
        PreprocessConfig {
            label_column: self.data.label_column.clone(),
            target_dim: self.data.target_dim,
            missing_threshold: self.data.missing_threshold,
        }
    }

    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            n_samples: self.data.synth_samples,
            n_informative: self.data.synth_informative,
            class_sep: self.data.synth_class_sep,
            fraud_rate: self.data.synth_fraud_rate,
            seed: self.experiment.seed,
        }
    }
}
