//! Loss, parameter-shift gradients, and the Adam optimizer.
//!
//! Gradients are exact: the shift rule is applied per sample at the
//! prediction level and chained through the squared error, so the result
//! matches finite differences of the batch loss to numerical precision while
//! still costing two circuit evaluations per parameter per sample.

use crate::error::{Error, Result};
use crate::model::{forward, predict_label, CircuitSpec, FeatureVector, ParamVector};

/// Adam hyperparameters. Defaults: η=0.1, β1=0.9, β2=0.999, ε=1e-8.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam moment accumulators and step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }
}

/// A labeled mini-batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    features: Vec<FeatureVector>,
    labels: Vec<u8>,
}

impl Batch {
    pub fn new(features: Vec<FeatureVector>, labels: Vec<u8>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::LengthMismatch {
                what: "batch labels",
                expected: features.len(),
                actual: labels.len(),
            });
        }
        if features.is_empty() {
            return Err(Error::EmptyBatch);
        }
        Ok(Self { features, labels })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        false // enforced nonempty at construction
    }

    pub fn features(&self) -> &[FeatureVector] {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Copies out a contiguous sub-batch.
    pub fn slice(&self, start: usize, end: usize) -> Batch {
        Batch {
            features: self.features[start..end].to_vec(),
            labels: self.labels[start..end].to_vec(),
        }
    }
}

/// Mean squared error (1/m) Σ (y_j - ŷ_j)².
pub fn mse_loss(spec: &CircuitSpec, params: &ParamVector, batch: &Batch) -> Result<f64> {
    let mut acc = 0.0;
    for (x, &y) in batch.features.iter().zip(&batch.labels) {
        let pred = forward(spec, params, x)?;
        let diff = f64::from(y) - pred;
        acc += diff * diff;
    }
    Ok(acc / batch.len() as f64)
}

/// Gradient of `mse_loss` with respect to every parameter, via the shift
/// rule on predictions: ∂ŷ/∂θ_i = [ŷ(θ_i + π/2) - ŷ(θ_i - π/2)] / 2, then
/// ∂L/∂θ_i = (2/m) Σ_j (ŷ_j - y_j) ∂ŷ_j/∂θ_i.
pub fn param_shift_grad(
    spec: &CircuitSpec,
    params: &ParamVector,
    batch: &Batch,
) -> Result<Vec<f64>> {
    let p = params.len();
    let m = batch.len() as f64;
    let preds: Vec<f64> = batch
        .features
        .iter()
        .map(|x| forward(spec, params, x))
        .collect::<Result<_>>()?;

    let mut grad = vec![0.0; p];
    let mut shifted = params.clone();
    for i in 0..p {
        let original = shifted.values[i];
        let mut acc = 0.0;
        for (j, x) in batch.features.iter().enumerate() {
            shifted.values[i] = original + std::f64::consts::FRAC_PI_2;
            let plus = forward(spec, &shifted, x)?;
            shifted.values[i] = original - std::f64::consts::FRAC_PI_2;
            let minus = forward(spec, &shifted, x)?;
            let dy = (plus - minus) / 2.0;
            acc += (preds[j] - f64::from(batch.labels[j])) * dy;
        }
        shifted.values[i] = original;
        let g = 2.0 * acc / m;
        if !g.is_finite() {
            return Err(Error::NonFiniteGradient(i));
        }
        grad[i] = g;
    }
    Ok(grad)
}

/// One Adam update with bias correction. Pure: returns the new parameters
/// and state, leaving the inputs untouched.
pub fn adam_step(
    state: &AdamState,
    config: &AdamConfig,
    params: &ParamVector,
    grad: &[f64],
) -> Result<(ParamVector, AdamState)> {
    if grad.len() != params.len() || state.m.len() != params.len() {
        return Err(Error::LengthMismatch {
            what: "gradient",
            expected: params.len(),
            actual: grad.len(),
        });
    }
    let t = state.t + 1;
    let bias1 = 1.0 - config.beta1.powi(t as i32);
    let bias2 = 1.0 - config.beta2.powi(t as i32);
    let mut next = AdamState::new(params.len());
    next.t = t;
    let mut values = params.values.clone();
    for i in 0..params.len() {
        let m = config.beta1 * state.m[i] + (1.0 - config.beta1) * grad[i];
        let v = config.beta2 * state.v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
        let m_hat = m / bias1;
        let v_hat = v / bias2;
        values[i] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
        next.m[i] = m;
        next.v[i] = v;
    }
    Ok((ParamVector::new(values), next))
}

/// Early-exit rule: stop once validation loss has failed to improve by at
/// least `min_improvement` for `patience` consecutive epochs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub patience: usize,
    pub min_improvement: f64,
}

impl Default for Convergence {
    fn default() -> Self {
        Self {
            patience: 5,
            min_improvement: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalTrainConfig {
    pub max_epochs: usize,
    pub batch_size: usize,
    pub convergence: Option<Convergence>,
}

impl Default for LocalTrainConfig {
    fn default() -> Self {
        Self {
            max_epochs: 1,
            batch_size: 32,
            convergence: Some(Convergence::default()),
        }
    }
}

/// One client's local data: a training set plus a held-out validation set.
#[derive(Debug, Clone, PartialEq)]
pub struct Shard {
    pub train: Batch,
    pub validation: Batch,
}

/// Per-epoch record returned from `local_train`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

/// Batched Adam training over one shard, evaluated on the shard's validation
/// split each epoch. Sees exactly one client's data by construction.
pub fn local_train(
    shard: &Shard,
    spec: &CircuitSpec,
    adam_config: &AdamConfig,
    train_config: &LocalTrainConfig,
    initial: &ParamVector,
) -> Result<(ParamVector, AdamState, Vec<EpochRecord>)> {
    let mut params = initial.clone();
    let mut adam = AdamState::new(params.len());
    let mut trace = Vec::new();
    let mut best_val = f64::INFINITY;
    let mut stall = 0usize;
    let n = shard.train.len();
    let step = train_config.batch_size.max(1);

    for epoch in 1..=train_config.max_epochs {
        let mut start = 0;
        while start < n {
            let end = (start + step).min(n);
            let sub = shard.train.slice(start, end);
            let grad = param_shift_grad(spec, &params, &sub)?;
            let (next_params, next_adam) = adam_step(&adam, adam_config, &params, &grad)?;
            params = next_params;
            adam = next_adam;
            start = end;
        }

        let train_loss = mse_loss(spec, &params, &shard.train)?;
        let val_loss = mse_loss(spec, &params, &shard.validation)?;
        let val_accuracy = accuracy(spec, &params, &shard.validation)?;
        trace.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            val_accuracy,
        });

        if let Some(conv) = &train_config.convergence {
            if best_val - val_loss >= conv.min_improvement {
                best_val = val_loss;
                stall = 0;
            } else {
                stall += 1;
                if stall >= conv.patience {
                    break;
                }
            }
        }
    }
    Ok((params, adam, trace))
}

/// Fraction of validation samples classified correctly at threshold 0.5.
pub fn accuracy(spec: &CircuitSpec, params: &ParamVector, batch: &Batch) -> Result<f64> {
    let mut correct = 0usize;
    for (x, &y) in batch.features.iter().zip(&batch.labels) {
        if predict_label(spec, params, x, 0.5)? == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / batch.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_qubit_spec() -> CircuitSpec {
        CircuitSpec::new(1, 1)
    }

    #[test]
    fn perfect_predictions_give_zero_loss() {
        let spec = one_qubit_spec();
        let params = ParamVector::zeros(2);
        // All-zero features with zero params predict exactly 1.
        let batch = Batch::new(vec![FeatureVector::new(vec![0.0, 0.0])], vec![1]).unwrap();
        assert!(mse_loss(&spec, &params, &batch).unwrap() < 1e-24);
    }

    #[test]
    fn single_sample_half_off_gives_quarter() {
        let spec = one_qubit_spec();
        // Ry(pi/2) in the variational layer puts the prediction at 0.5.
        let params = ParamVector::new(vec![std::f64::consts::FRAC_PI_2, 0.0]);
        let batch = Batch::new(vec![FeatureVector::new(vec![0.0, 0.0])], vec![1]).unwrap();
        let loss = mse_loss(&spec, &params, &batch).unwrap();
        assert!((loss - 0.25).abs() < 1e-12);
    }

    #[test]
    fn empty_batch_rejected() {
        assert!(matches!(Batch::new(vec![], vec![]), Err(Error::EmptyBatch)));
    }

    #[test]
    fn gradient_matches_closed_form_single_rotation() {
        // One qubit, one layer, zero encoding: the variational Ry(theta)
        // dominates and Rz contributes only phase, so the prediction is
        // (1 + cos theta) / 2. With label 0 the loss is that squared and
        // dL/dtheta = -(1 + cos theta)/2 * sin theta.
        let spec = one_qubit_spec();
        let batch = Batch::new(vec![FeatureVector::new(vec![0.0, 0.0])], vec![0]).unwrap();
        for theta in [0.3, 1.1, -0.7, 2.4] {
            let params = ParamVector::new(vec![theta, 0.4]);
            let grad = param_shift_grad(&spec, &params, &batch).unwrap();
            let expected = -(1.0 + theta.cos()) / 2.0 * theta.sin();
            assert!(
                (grad[0] - expected).abs() < 1e-12,
                "theta={theta}: {} vs {}",
                grad[0],
                expected
            );
            assert!(grad[1].abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_zero_at_flat_point() {
        let spec = one_qubit_spec();
        let params = ParamVector::zeros(2);
        let batch = Batch::new(vec![FeatureVector::new(vec![0.0, 0.0])], vec![1]).unwrap();
        let grad = param_shift_grad(&spec, &params, &batch).unwrap();
        assert!(grad.iter().all(|g| g.abs() < 1e-12));
    }

    #[test]
    fn adam_zero_gradient_leaves_params_unchanged() {
        let config = AdamConfig::default();
        let state = AdamState::new(3);
        let params = ParamVector::new(vec![0.1, -0.2, 0.3]);
        let (next, state) = adam_step(&state, &config, &params, &[0.0; 3]).unwrap();
        assert_eq!(next.values, params.values);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn adam_first_step_moves_by_learning_rate_scale() {
        let config = AdamConfig::default();
        let state = AdamState::new(2);
        let params = ParamVector::zeros(2);
        let (next, _) = adam_step(&state, &config, &params, &[1.0, 0.0]).unwrap();
        // After bias correction m-hat = g and v-hat = g^2, so the step is
        // -lr * g / (|g| + eps).
        let expected = -config.learning_rate * 1.0 / (1.0 + config.epsilon);
        assert!((next.values[0] - expected).abs() < 1e-15);
        assert!(next.values[1].abs() < 1e-15);
    }

    #[test]
    fn adam_constant_gradient_step_approaches_learning_rate() {
        let config = AdamConfig {
            learning_rate: 0.05,
            ..AdamConfig::default()
        };
        let mut state = AdamState::new(1);
        let mut params = ParamVector::zeros(1);
        let mut last_step = 0.0;
        for _ in 0..1000 {
            let before = params.values[0];
            let (next, next_state) = adam_step(&state, &config, &params, &[0.37]).unwrap();
            last_step = (next.values[0] - before).abs();
            params = next;
            state = next_state;
        }
        assert!(
            (last_step - config.learning_rate).abs() / config.learning_rate < 0.05,
            "step {last_step} vs lr {}",
            config.learning_rate
        );
    }

    #[test]
    fn adam_is_deterministic() {
        let config = AdamConfig::default();
        let state = AdamState::new(2);
        let params = ParamVector::new(vec![0.5, -0.5]);
        let a = adam_step(&state, &config, &params, &[0.2, -0.1]).unwrap();
        let b = adam_step(&state, &config, &params, &[0.2, -0.1]).unwrap();
        assert_eq!(a.0.values, b.0.values);
        assert_eq!(a.1, b.1);
    }

    fn separable_shard(spec: &CircuitSpec) -> Shard {
        // Labels follow the sign of the first feature; the rest are zero.
        let dim = spec.feature_dim();
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..40 {
            let v = if i % 2 == 0 { 1.2 } else { -1.2 };
            let mut x = vec![0.0; dim];
            x[0] = v;
            features.push(FeatureVector::new(x));
            labels.push(u8::from(v < 0.0));
        }
        let train = Batch::new(features[..32].to_vec(), labels[..32].to_vec()).unwrap();
        let validation = Batch::new(features[32..].to_vec(), labels[32..].to_vec()).unwrap();
        Shard { train, validation }
    }

    #[test]
    fn zero_epochs_returns_initial_params() {
        let spec = CircuitSpec::new(2, 1);
        let shard = separable_shard(&spec);
        let initial = ParamVector::zeros(spec.param_count());
        let cfg = LocalTrainConfig {
            max_epochs: 0,
            ..LocalTrainConfig::default()
        };
        let (params, _, trace) =
            local_train(&shard, &spec, &AdamConfig::default(), &cfg, &initial).unwrap();
        assert_eq!(params, initial);
        assert!(trace.is_empty());
    }

    #[test]
    fn local_train_fits_separable_shard() {
        let spec = CircuitSpec::new(2, 2);
        let shard = separable_shard(&spec);
        let initial = ParamVector::new(vec![0.1; spec.param_count()]);
        let cfg = LocalTrainConfig {
            max_epochs: 100,
            batch_size: 8,
            convergence: Some(Convergence::default()),
        };
        let (params, _, trace) =
            local_train(&shard, &spec, &AdamConfig::default(), &cfg, &initial).unwrap();
        let final_acc = accuracy(&spec, &params, &shard.validation).unwrap();
        assert!(final_acc >= 0.9, "accuracy {final_acc}, trace {trace:?}");
    }

    #[test]
    fn plateau_triggers_early_exit() {
        // Learning rate 0 freezes the parameters, so the validation loss
        // never improves and the patience rule must fire before max_epochs.
        let spec = CircuitSpec::new(2, 1);
        let shard = separable_shard(&spec);
        let initial = ParamVector::new(vec![0.1; spec.param_count()]);
        let adam = AdamConfig {
            learning_rate: 0.0,
            ..AdamConfig::default()
        };
        let cfg = LocalTrainConfig {
            max_epochs: 50,
            batch_size: 8,
            convergence: Some(Convergence {
                patience: 5,
                min_improvement: 1e-4,
            }),
        };
        let (_, _, trace) = local_train(&shard, &spec, &adam, &cfg, &initial).unwrap();
        assert!(trace.len() < 50, "ran {} epochs", trace.len());
    }
}
