//! The variational classifier circuit.
//!
//! A feature vector of length 2n is angle-encoded onto n qubits (one Ry and
//! one Rz per qubit) followed by a CNOT chain. L variational layers repeat
//! the same shape with trainable angles. The prediction is the Z expectation
//! of qubit 0 mapped affinely onto [0, 1].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{ChannelKind, DensityMatrix, Gate, KrausChannel, StateVector};

/// Where noise channels are inserted when the spec carries a noise setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoisePlacement {
    AfterEachLayer,
    AfterFullCircuit,
}

/// Noise configuration: a channel kind at strength `p`, applied to every
/// qubit at the given placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: ChannelKind,
    pub strength: f64,
    pub placement: NoisePlacement,
}

/// Architecture of the classifier circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub noise: Option<NoiseSpec>,
}

impl CircuitSpec {
    pub fn new(n_qubits: usize, n_layers: usize) -> Self {
        assert!(n_qubits >= 1 && n_layers >= 1);
        Self {
            n_qubits,
            n_layers,
            noise: None,
        }
    }

    pub fn with_noise(mut self, noise: NoiseSpec) -> Self {
        self.noise = Some(noise);
        self
    }

    /// Trainable parameter count P = 2 * n_qubits * n_layers.
    pub fn param_count(&self) -> usize {
        2 * self.n_qubits * self.n_layers
    }

    /// Features consumed per encoding = 2 * n_qubits.
    pub fn feature_dim(&self) -> usize {
        2 * self.n_qubits
    }
}

impl Default for CircuitSpec {
    fn default() -> Self {
        Self::new(4, 4)
    }
}

/// Trainable rotation angles, length `CircuitSpec::param_count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub values: Vec<f64>,
}

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One preprocessed sample, length `CircuitSpec::feature_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }
}

fn check_features(spec: &CircuitSpec, x: &FeatureVector) -> Result<()> {
    if x.values.len() != spec.feature_dim() {
        return Err(Error::LengthMismatch {
            what: "feature vector",
            expected: spec.feature_dim(),
            actual: x.values.len(),
        });
    }
    Ok(())
}

fn check_params(spec: &CircuitSpec, params: &ParamVector) -> Result<()> {
    if params.len() != spec.param_count() {
        return Err(Error::LengthMismatch {
            what: "parameter vector",
            expected: spec.param_count(),
            actual: params.len(),
        });
    }
    if let Some(i) = params.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteParam(i));
    }
    Ok(())
}

/// Encoding block: qubit j gets Ry(x[2j]) then Rz(x[2j+1]), followed by the
/// CNOT chain over adjacent pairs.
fn encoding_gates(spec: &CircuitSpec, x: &FeatureVector) -> Vec<Gate> {
    let n = spec.n_qubits;
    let mut gates = Vec::with_capacity(3 * n);
    for q in 0..n {
        gates.push(Gate::ry(x.values[2 * q], q));
        gates.push(Gate::rz(x.values[2 * q + 1], q));
    }
    gates.extend(cnot_chain(n));
    gates
}

/// Variational layer `layer`: per-qubit Ry/Rz from the parameter slice, then
/// the CNOT chain.
fn layer_gates(spec: &CircuitSpec, params: &ParamVector, layer: usize) -> Vec<Gate> {
    let n = spec.n_qubits;
    let mut gates = Vec::with_capacity(3 * n);
    for q in 0..n {
        let base = 2 * (layer * n + q);
        gates.push(Gate::ry(params.values[base], q));
        gates.push(Gate::rz(params.values[base + 1], q));
    }
    gates.extend(cnot_chain(n));
    gates
}

fn cnot_chain(n: usize) -> Vec<Gate> {
    (0..n.saturating_sub(1)).map(|k| Gate::cnot(k, k + 1)).collect()
}

/// Prepares the data-dependent state: encoding rotations plus the CNOT chain
/// applied to |0...0⟩.
pub fn encode(spec: &CircuitSpec, x: &FeatureVector) -> Result<StateVector> {
    check_features(spec, x)?;
    let mut state = StateVector::zero(spec.n_qubits);
    for gate in encoding_gates(spec, x) {
        state.apply_gate(&gate)?;
    }
    Ok(state)
}

/// Runs the full circuit and returns the fraud probability
/// ŷ = (1 + ⟨Z_0⟩) / 2.
///
/// Noiseless specs run on a statevector; a noise setting switches the whole
/// computation to the density-matrix path with the channel applied to every
/// qubit at the configured placement.
pub fn forward(spec: &CircuitSpec, params: &ParamVector, x: &FeatureVector) -> Result<f64> {
    check_features(spec, x)?;
    check_params(spec, params)?;
    let z = match &spec.noise {
        None => forward_pure(spec, params, x)?,
        Some(noise) => forward_noisy(spec, params, x, noise)?,
    };
    Ok((1.0 + z) / 2.0)
}

fn forward_pure(spec: &CircuitSpec, params: &ParamVector, x: &FeatureVector) -> Result<f64> {
    let mut state = StateVector::zero(spec.n_qubits);
    for gate in encoding_gates(spec, x) {
        state.apply_gate(&gate)?;
    }
    for layer in 0..spec.n_layers {
        for gate in layer_gates(spec, params, layer) {
            state.apply_gate(&gate)?;
        }
    }
    state.expectation_z(0)
}

fn forward_noisy(
    spec: &CircuitSpec,
    params: &ParamVector,
    x: &FeatureVector,
    noise: &NoiseSpec,
) -> Result<f64> {
    let channel = KrausChannel::new(noise.kind, noise.strength)?;
    let mut rho = DensityMatrix::ground(spec.n_qubits);
    for gate in encoding_gates(spec, x) {
        rho.apply_gate(&gate)?;
    }
    for layer in 0..spec.n_layers {
        for gate in layer_gates(spec, params, layer) {
            rho.apply_gate(&gate)?;
        }
        if noise.placement == NoisePlacement::AfterEachLayer {
            for q in 0..spec.n_qubits {
                rho.apply_channel(&channel, q)?;
            }
        }
    }
    if noise.placement == NoisePlacement::AfterFullCircuit {
        for q in 0..spec.n_qubits {
            rho.apply_channel(&channel, q)?;
        }
    }
    rho.expectation_z(0)
}

/// Binarizes ŷ; ties at the threshold go to the positive class.
pub fn predict_label(
    spec: &CircuitSpec,
    params: &ParamVector,
    x: &FeatureVector,
    threshold: f64,
) -> Result<u8> {
    if !(0.0 < threshold && threshold < 1.0) {
        return Err(Error::InvalidThreshold(threshold));
    }
    let y = forward(spec, params, x)?;
    Ok(u8::from(y >= threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_features_encode_to_ground_state() {
        let spec = CircuitSpec::new(3, 1);
        let x = FeatureVector::new(vec![0.0; 6]);
        let state = encode(&spec, &x).unwrap();
        assert!((state.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_qubit_pi_encoding_gives_one() {
        let spec = CircuitSpec::new(1, 1);
        let x = FeatureVector::new(vec![PI, 0.0]);
        let state = encode(&spec, &x).unwrap();
        assert!(state.amplitudes()[0].norm() < 1e-12);
        assert!((state.amplitudes()[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wrong_feature_length_reports_expected_and_actual() {
        let spec = CircuitSpec::new(2, 1);
        let x = FeatureVector::new(vec![0.0; 3]);
        match encode(&spec, &x).unwrap_err() {
            Error::LengthMismatch {
                expected, actual, ..
            } => {
                assert_eq!(expected, 4);
                assert_eq!(actual, 3);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn all_zero_inputs_predict_one() {
        let spec = CircuitSpec::new(4, 4);
        let params = ParamVector::zeros(spec.param_count());
        let x = FeatureVector::new(vec![0.0; spec.feature_dim()]);
        let y = forward(&spec, &params, &x).unwrap();
        assert!((y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_depolarizing_noise_predicts_half() {
        for placement in [NoisePlacement::AfterEachLayer, NoisePlacement::AfterFullCircuit] {
            let spec = CircuitSpec::new(2, 2).with_noise(NoiseSpec {
                kind: ChannelKind::Depolarizing,
                strength: 1.0,
                placement,
            });
            let params = ParamVector::new(vec![0.3, -0.8, 1.2, 0.5, 0.1, -1.0, 2.0, 0.7]);
            let x = FeatureVector::new(vec![0.4, 1.1, -0.6, 0.9]);
            let y = forward(&spec, &params, &x).unwrap();
            assert!((y - 0.5).abs() < 1e-10, "{placement:?}");
        }
    }

    #[test]
    fn zero_strength_noise_matches_pure_path() {
        let x = FeatureVector::new(vec![0.3, -0.4, 0.8, 1.5]);
        let params = ParamVector::new(vec![0.2, 0.9, -0.5, 0.1, 1.3, -0.2, 0.6, 0.4]);
        let pure = CircuitSpec::new(2, 2);
        let y_pure = forward(&pure, &params, &x).unwrap();
        for kind in ChannelKind::ALL {
            let noisy = CircuitSpec::new(2, 2).with_noise(NoiseSpec {
                kind,
                strength: 0.0,
                placement: NoisePlacement::AfterEachLayer,
            });
            let y_noisy = forward(&noisy, &params, &x).unwrap();
            assert!((y_pure - y_noisy).abs() < 1e-10, "{kind}");
        }
    }

    #[test]
    fn predict_label_tie_goes_positive() {
        let spec = CircuitSpec::new(1, 1);
        // Ry(pi/2) on qubit 0 puts <Z> at 0, so y-hat is exactly 0.5.
        let params = ParamVector::new(vec![PI / 2.0, 0.0]);
        let x = FeatureVector::new(vec![0.0, 0.0]);
        assert!((forward(&spec, &params, &x).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(predict_label(&spec, &params, &x, 0.5).unwrap(), 1);
    }

    #[test]
    fn predict_label_extremes() {
        let spec = CircuitSpec::new(1, 1);
        let x = FeatureVector::new(vec![0.0, 0.0]);
        let near_one = ParamVector::new(vec![0.1, 0.0]);
        assert_eq!(predict_label(&spec, &near_one, &x, 0.5).unwrap(), 1);
        let near_zero = ParamVector::new(vec![PI, 0.0]);
        assert_eq!(predict_label(&spec, &near_zero, &x, 0.5).unwrap(), 0);
    }

    #[test]
    fn non_finite_parameter_rejected() {
        let spec = CircuitSpec::new(1, 1);
        let params = ParamVector::new(vec![f64::NAN, 0.0]);
        let x = FeatureVector::new(vec![0.0, 0.0]);
        assert!(matches!(
            forward(&spec, &params, &x),
            Err(Error::NonFiniteParam(0))
        ));
    }
}
