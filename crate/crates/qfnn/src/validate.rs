//! Independent cross-checks for the fast simulation paths.
//!
//! Everything here is deliberately slow and obvious: gates are embedded as
//! full 2^n x 2^n matrices and applied by dense matrix-vector products,
//! gradients are recomputed by central finite differences, and density
//! matrices are spectrally decomposed with a textbook Jacobi iteration. The
//! production kernels are validated against these oracles, never against
//! themselves.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{CircuitSpec, FeatureVector, ParamVector};
use crate::quantum::{
    completeness_deviation, ChannelKind, DensityMatrix, Gate, KrausChannel, StateVector,
};
use crate::training::{mse_loss, param_shift_grad, Batch};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Embeds a gate into the full 2^n x 2^n unitary (row-major). The element
/// M[i][j] is the gate's sub-matrix entry for the touched qubits when all
/// untouched bits of `i` and `j` agree, and zero otherwise.
pub fn embed_gate(gate: &Gate, n_qubits: usize) -> Vec<Complex64> {
    let dim = 1usize << n_qubits;
    let mut full = vec![c(0.0, 0.0); dim * dim];
    match gate {
        Gate::One(g) => {
            let mask = 1usize << (n_qubits - 1 - g.target);
            for i in 0..dim {
                for j in 0..dim {
                    if (i & !mask) == (j & !mask) {
                        let bi = usize::from(i & mask != 0);
                        let bj = usize::from(j & mask != 0);
                        full[i * dim + j] = g.matrix[bi][bj];
                    }
                }
            }
        }
        Gate::Two(g) => {
            let cm = 1usize << (n_qubits - 1 - g.control);
            let tm = 1usize << (n_qubits - 1 - g.target);
            let rest = !(cm | tm);
            for i in 0..dim {
                for j in 0..dim {
                    if (i & rest) == (j & rest) {
                        let si = 2 * usize::from(i & cm != 0) + usize::from(i & tm != 0);
                        let sj = 2 * usize::from(j & cm != 0) + usize::from(j & tm != 0);
                        full[i * dim + j] = g.matrix[si][sj];
                    }
                }
            }
        }
    }
    full
}

/// Dense matrix-vector product for a row-major square matrix.
pub fn apply_full_matrix(matrix: &[Complex64], vector: &[Complex64]) -> Vec<Complex64> {
    let dim = vector.len();
    assert_eq!(matrix.len(), dim * dim, "matrix/vector dimension mismatch");
    let mut out = vec![c(0.0, 0.0); dim];
    for (i, o) in out.iter_mut().enumerate() {
        for (j, v) in vector.iter().enumerate() {
            *o += matrix[i * dim + j] * v;
        }
    }
    out
}

/// Central finite differences of the batch loss, the reference the shift-rule
/// gradient is compared against.
pub fn finite_difference_grad(
    spec: &CircuitSpec,
    params: &ParamVector,
    batch: &Batch,
    step: f64,
) -> Result<Vec<f64>> {
    let mut grad = vec![0.0; params.len()];
    let mut probe = params.clone();
    for i in 0..params.len() {
        let original = probe.values[i];
        probe.values[i] = original + step;
        let plus = mse_loss(spec, &probe, batch)?;
        probe.values[i] = original - step;
        let minus = mse_loss(spec, &probe, batch)?;
        probe.values[i] = original;
        grad[i] = (plus - minus) / (2.0 * step);
    }
    Ok(grad)
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations,
/// sorted ascending. Row-major input of dimension `dim`.
pub fn hermitian_eigenvalues(matrix: &[Complex64], dim: usize) -> Vec<f64> {
    assert_eq!(matrix.len(), dim * dim, "matrix must be square");
    let mut a = matrix.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..dim {
            for q in p + 1..dim {
                off = off.max(a[p * dim + q].norm());
            }
        }
        if off < 1e-13 {
            break;
        }
        for p in 0..dim {
            for q in p + 1..dim {
                let beta = a[p * dim + q];
                if beta.norm() < 1e-15 {
                    continue;
                }
                let alpha = a[p * dim + p].re;
                let gamma = a[q * dim + q].re;
                let phi = beta.im.atan2(beta.re);
                let theta = 0.5 * (2.0 * beta.norm()).atan2(alpha - gamma);
                let (s, co) = theta.sin_cos();
                let e_pos = c(phi.cos(), phi.sin());
                let e_neg = e_pos.conj();
                // Columns: A <- A U with U = [[c, -s e^{i phi}], [s e^{-i phi}, c]]
                // on the (p, q) plane, then rows: A <- U-dagger A.
                for k in 0..dim {
                    let ap = a[k * dim + p];
                    let aq = a[k * dim + q];
                    a[k * dim + p] = co * ap + s * e_neg * aq;
                    a[k * dim + q] = -s * e_pos * ap + co * aq;
                }
                for k in 0..dim {
                    let pk = a[p * dim + k];
                    let qk = a[q * dim + k];
                    a[p * dim + k] = co * pk + s * e_pos * qk;
                    a[q * dim + k] = -s * e_neg * pk + co * qk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..dim).map(|i| a[i * dim + i].re).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    eigs
}

/// A Haar-ish random pure state: independent complex Gaussians, normalized.
pub fn random_state(n_qubits: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let dim = 1usize << n_qubits;
    let mut amps: Vec<Complex64> = (0..dim)
        .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in amps.iter_mut() {
        *a /= norm;
    }
    StateVector::from_amplitudes(n_qubits, amps).expect("normalized by construction")
}

/// A random mixed state: a convex mixture of a few random pure states, so it
/// is positive semidefinite with unit trace by construction.
pub fn random_density(n_qubits: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let dim = 1usize << n_qubits;
    let n_terms = 3;
    let mut weights: Vec<f64> = (0..n_terms).map(|_| rng.gen::<f64>() + 0.1).collect();
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    let mut elems = vec![c(0.0, 0.0); dim * dim];
    for &w in &weights {
        let pure = DensityMatrix::from_pure(&random_state(n_qubits, rng));
        for (e, p) in elems.iter_mut().zip(pure.elements()) {
            *e += w * p;
        }
    }
    DensityMatrix::from_elements(n_qubits, elems).expect("dimension fixed above")
}

/// A random gate drawn from the families the classifier circuit uses.
pub fn random_gate(n_qubits: usize, rng: &mut ChaCha8Rng) -> Gate {
    let angle = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    let target = rng.gen_range(0..n_qubits);
    match rng.gen_range(0..6u8) {
        0 => Gate::ry(angle, target),
        1 => Gate::rz(angle, target),
        2 => Gate::hadamard(target),
        3 => Gate::pauli_x(target),
        4 => Gate::pauli_y(target),
        _ if n_qubits >= 2 => {
            let mut control = rng.gen_range(0..n_qubits);
            while control == target {
                control = rng.gen_range(0..n_qubits);
            }
            Gate::cnot(control, target)
        }
        _ => Gate::pauli_z(target),
    }
}

/// Outcome of one named cross-check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub worst_deviation: f64,
    pub tolerance: f64,
}

impl CheckResult {
    fn new(name: &'static str, worst: f64, tolerance: f64) -> Self {
        Self {
            name,
            passed: worst.is_finite() && worst <= tolerance,
            worst_deviation: worst,
            tolerance,
        }
    }
}

impl std::fmt::Display for CheckResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {} (worst {:.3e}, tol {:.1e})",
            self.name,
            if self.passed { "pass" } else { "FAIL" },
            self.worst_deviation,
            self.tolerance
        )
    }
}

/// All cross-check outcomes for one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|ch| ch.passed)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for check in &self.checks {
            writeln!(f, "{check}")?;
        }
        Ok(())
    }
}

/// Random circuits on the pair-update kernels versus the full-matrix oracle.
pub fn check_simulator(seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for trial in 0..40 {
        let n_qubits = 1 + trial % 5;
        let mut fast = random_state(n_qubits, &mut rng);
        let mut slow = fast.amplitudes().to_vec();
        for _ in 0..8 {
            let gate = random_gate(n_qubits, &mut rng);
            fast.apply_gate(&gate)?;
            slow = apply_full_matrix(&embed_gate(&gate, n_qubits), &slow);
        }
        for (a, b) in fast.amplitudes().iter().zip(&slow) {
            worst = worst.max((a - b).norm());
        }
    }
    Ok(CheckResult::new("simulator-vs-full-matrix", worst, 1e-10))
}

/// Density-matrix unitary path versus the pure-state outer product.
pub fn check_density(seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let n_qubits = 1 + trial % 4;
        let mut sv = random_state(n_qubits, &mut rng);
        let mut rho = DensityMatrix::from_pure(&sv);
        for _ in 0..6 {
            let gate = random_gate(n_qubits, &mut rng);
            sv.apply_gate(&gate)?;
            rho.apply_gate(&gate)?;
        }
        let expect = DensityMatrix::from_pure(&sv);
        for (a, b) in rho.elements().iter().zip(expect.elements()) {
            worst = worst.max((a - b).norm());
        }
    }
    Ok(CheckResult::new("density-vs-pure-outer-product", worst, 1e-10))
}

/// Completeness of every channel kind across a strength grid.
pub fn check_channels() -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for kind in ChannelKind::ALL {
        for step in 0..=10 {
            let p = step as f64 / 10.0;
            let channel = KrausChannel::new(kind, p)?;
            worst = worst.max(completeness_deviation(&channel.operators));
        }
    }
    Ok(CheckResult::new("kraus-completeness", worst, 1e-10))
}

/// Channel action on random mixed states: the output must stay a density
/// matrix (unit trace, Hermitian, nonnegative spectrum).
pub fn check_channel_action(seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for kind in ChannelKind::ALL {
        for &p in &[0.1, 0.5, 0.9] {
            let channel = KrausChannel::new(kind, p)?;
            let n_qubits = 2;
            let mut rho = random_density(n_qubits, &mut rng);
            rho.apply_channel(&channel, rng.gen_range(0..n_qubits))?;
            worst = worst.max((rho.trace() - c(1.0, 0.0)).norm());
            worst = worst.max(rho.hermiticity_deviation());
            let eigs = hermitian_eigenvalues(rho.elements(), rho.dim());
            let min_eig = eigs.first().copied().unwrap_or(f64::NEG_INFINITY);
            worst = worst.max((-min_eig).max(0.0));
        }
    }
    Ok(CheckResult::new("channel-action-cptp", worst, 1e-10))
}

/// Shift-rule gradient versus central finite differences of the batch loss.
pub fn check_gradient(seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = CircuitSpec::new(2, 2);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let params = ParamVector::new(
            (0..spec.param_count())
                .map(|_| rng.gen_range(-1.5..1.5))
                .collect(),
        );
        let features: Vec<FeatureVector> = (0..4)
            .map(|_| {
                FeatureVector::new(
                    (0..spec.feature_dim())
                        .map(|_| rng.gen_range(-1.0..1.0))
                        .collect(),
                )
            })
            .collect();
        let labels: Vec<u8> = (0..4).map(|_| rng.gen_range(0..=1)).collect();
        let batch = Batch::new(features, labels)?;
        let exact = param_shift_grad(&spec, &params, &batch)?;
        let approx = finite_difference_grad(&spec, &params, &batch, 1e-5)?;
        for (a, b) in exact.iter().zip(&approx) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(CheckResult::new("gradient-vs-finite-difference", worst, 1e-5))
}

/// Runs every cross-check under one seed.
pub fn run_all(seed: u64) -> Result<ValidationReport> {
    Ok(ValidationReport {
        checks: vec![
            check_simulator(seed)?,
            check_density(seed.wrapping_add(1))?,
            check_channels()?,
            check_channel_action(seed.wrapping_add(2))?,
            check_gradient(seed.wrapping_add(3))?,
        ],
    })
}
