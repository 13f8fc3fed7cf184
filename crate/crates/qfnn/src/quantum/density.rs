//! Mixed-state simulation via dense density matrices.
//!
//! A density matrix is stored row-major as a 2^n x 2^n complex array.
//! Unitary conjugation ρ → UρU† reuses the pair-update kernels from the
//! statevector path: U is applied down every column, then the elementwise
//! conjugate of U along every row.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::channel::KrausChannel;
use crate::quantum::gate::{Gate, Gate1Q, Gate2Q};
use crate::quantum::state::{apply_1q_kernel, apply_2q_kernel, StateVector};

/// A 2^n x 2^n density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    elems: Vec<Complex64>,
}

impl DensityMatrix {
    /// |0...0⟩⟨0...0|.
    pub fn ground(n_qubits: usize) -> Self {
        assert!(n_qubits >= 1, "register needs at least one qubit");
        let dim = 1usize << n_qubits;
        let mut elems = vec![Complex64::new(0.0, 0.0); dim * dim];
        elems[0] = Complex64::new(1.0, 0.0);
        Self { n_qubits, elems }
    }

    /// The outer product |ψ⟩⟨ψ| of a pure state.
    pub fn from_pure(state: &StateVector) -> Self {
        let amps = state.amplitudes();
        let dim = amps.len();
        let mut elems = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                elems[i * dim + j] = amps[i] * amps[j].conj();
            }
        }
        Self {
            n_qubits: state.n_qubits(),
            elems,
        }
    }

    /// Builds from raw elements without invariant checks; intended for tests
    /// and oracle code that construct matrices directly.
    pub fn from_elements(n_qubits: usize, elems: Vec<Complex64>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if elems.len() != dim * dim {
            return Err(Error::LengthMismatch {
                what: "density matrix elements",
                expected: dim * dim,
                actual: elems.len(),
            });
        }
        Ok(Self { n_qubits, elems })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn elements(&self) -> &[Complex64] {
        &self.elems
    }

    pub fn element(&self, row: usize, col: usize) -> Complex64 {
        self.elems[row * self.dim() + col]
    }

    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        (0..dim).map(|i| self.elems[i * dim + i]).sum()
    }

    /// Max elementwise |ρ - ρ†|; zero for an exactly Hermitian matrix.
    pub fn hermiticity_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                let d = (self.elems[i * dim + j] - self.elems[j * dim + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// ρ → UρU†.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        match gate {
            Gate::One(g) => self.apply_1q(g),
            Gate::Two(g) => self.apply_2q(g),
        }
    }

    fn apply_1q(&mut self, gate: &Gate1Q) -> Result<()> {
        self.check_qubit(gate.target)?;
        self.conjugate_1q(&gate.matrix, gate.target);
        Ok(())
    }

    fn apply_2q(&mut self, gate: &Gate2Q) -> Result<()> {
        self.check_qubit(gate.control)?;
        self.check_qubit(gate.target)?;
        if gate.control == gate.target {
            return Err(Error::ControlEqualsTarget(gate.control));
        }
        let dim = self.dim();
        let n = self.n_qubits;
        let m = &gate.matrix;
        let conj = conj4(m);
        let mut col = vec![Complex64::new(0.0, 0.0); dim];
        for j in 0..dim {
            for i in 0..dim {
                col[i] = self.elems[i * dim + j];
            }
            apply_2q_kernel(&mut col, n, m, gate.control, gate.target);
            for i in 0..dim {
                self.elems[i * dim + j] = col[i];
            }
        }
        for i in 0..dim {
            apply_2q_kernel(
                &mut self.elems[i * dim..(i + 1) * dim],
                n,
                &conj,
                gate.control,
                gate.target,
            );
        }
        Ok(())
    }

    /// ρ → MρM† for an arbitrary (not necessarily unitary) 2x2 matrix.
    fn conjugate_1q(&mut self, m: &[[Complex64; 2]; 2], target: usize) {
        let dim = self.dim();
        let n = self.n_qubits;
        let conj = conj2(m);
        let mut col = vec![Complex64::new(0.0, 0.0); dim];
        for j in 0..dim {
            for i in 0..dim {
                col[i] = self.elems[i * dim + j];
            }
            apply_1q_kernel(&mut col, n, m, target);
            for i in 0..dim {
                self.elems[i * dim + j] = col[i];
            }
        }
        for i in 0..dim {
            apply_1q_kernel(&mut self.elems[i * dim..(i + 1) * dim], n, &conj, target);
        }
    }

    /// ρ → Σ_m K_m ρ K_m† on one qubit.
    pub fn apply_channel(&mut self, channel: &KrausChannel, target: usize) -> Result<()> {
        self.check_qubit(target)?;
        let mut acc = vec![Complex64::new(0.0, 0.0); self.elems.len()];
        for op in &channel.operators {
            let mut term = self.clone();
            term.conjugate_1q(op, target);
            for (a, t) in acc.iter_mut().zip(term.elems.iter()) {
                *a += t;
            }
        }
        self.elems = acc;
        Ok(())
    }

    /// Tr(Z_qubit ρ).
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let dim = self.dim();
        let mask = 1usize << (self.n_qubits - 1 - qubit);
        let mut acc = 0.0;
        for k in 0..dim {
            let p = self.elems[k * dim + k].re;
            acc += if k & mask == 0 { p } else { -p };
        }
        Ok(acc)
    }
}

fn conj2(m: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = *m;
    for row in out.iter_mut() {
        for e in row.iter_mut() {
            *e = e.conj();
        }
    }
    out
}

fn conj4(m: &[[Complex64; 4]; 4]) -> [[Complex64; 4]; 4] {
    let mut out = *m;
    for row in out.iter_mut() {
        for e in row.iter_mut() {
            *e = e.conj();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::channel::ChannelKind;

    #[test]
    fn identity_gate_leaves_rho_unchanged() {
        let mut rho = DensityMatrix::ground(2);
        rho.apply_gate(&Gate::hadamard(0)).unwrap();
        rho.apply_gate(&Gate::cnot(0, 1)).unwrap();
        let before = rho.clone();
        rho.apply_gate(&Gate::identity(1)).unwrap();
        for (a, b) in rho.elements().iter().zip(before.elements()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn x_gate_maps_ground_to_excited() {
        let mut rho = DensityMatrix::ground(1);
        rho.apply_gate(&Gate::pauli_x(0)).unwrap();
        assert!((rho.element(1, 1).re - 1.0).abs() < 1e-12);
        assert!(rho.element(0, 0).norm() < 1e-12);
    }

    #[test]
    fn gate_on_density_matches_pure_outer_product() {
        // Random-ish pure state, then Rz(0.7) down both paths.
        let mut sv = StateVector::zero(2);
        sv.apply_gate(&Gate::ry(0.9, 0)).unwrap();
        sv.apply_gate(&Gate::ry(-1.3, 1)).unwrap();
        sv.apply_gate(&Gate::cnot(0, 1)).unwrap();

        let mut rho = DensityMatrix::from_pure(&sv);
        let gate = Gate::rz(0.7, 1);
        rho.apply_gate(&gate).unwrap();
        let mut sv2 = sv.clone();
        sv2.apply_gate(&gate).unwrap();
        let expect = DensityMatrix::from_pure(&sv2);
        for (a, b) in rho.elements().iter().zip(expect.elements()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn trace_preserved_by_gates_and_channels() {
        let mut rho = DensityMatrix::ground(2);
        rho.apply_gate(&Gate::ry(0.4, 0)).unwrap();
        rho.apply_gate(&Gate::cnot(0, 1)).unwrap();
        let ch = KrausChannel::new(ChannelKind::AmplitudeDamping, 0.3).unwrap();
        rho.apply_channel(&ch, 1).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-10);
        assert!(rho.trace().im.abs() < 1e-12);
        assert!(rho.hermiticity_deviation() < 1e-10);
    }

    #[test]
    fn depolarizing_at_full_strength_gives_maximally_mixed() {
        let mut rho = DensityMatrix::ground(1);
        rho.apply_gate(&Gate::ry(1.1, 0)).unwrap();
        let ch = KrausChannel::new(ChannelKind::Depolarizing, 1.0).unwrap();
        rho.apply_channel(&ch, 0).unwrap();
        assert!((rho.element(0, 0).re - 0.5).abs() < 1e-10);
        assert!((rho.element(1, 1).re - 0.5).abs() < 1e-10);
        assert!(rho.element(0, 1).norm() < 1e-10);
    }

    #[test]
    fn amplitude_damping_full_strength_decays_to_ground() {
        let mut rho = DensityMatrix::ground(1);
        rho.apply_gate(&Gate::pauli_x(0)).unwrap();
        let ch = KrausChannel::new(ChannelKind::AmplitudeDamping, 1.0).unwrap();
        rho.apply_channel(&ch, 0).unwrap();
        assert!((rho.element(0, 0).re - 1.0).abs() < 1e-12);
        assert!(rho.element(1, 1).norm() < 1e-12);
    }

    #[test]
    fn expectation_z_on_maximally_mixed_is_zero() {
        let half = Complex64::new(0.5, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let rho = DensityMatrix::from_elements(1, vec![half, zero, zero, half]).unwrap();
        assert!(rho.expectation_z(0).unwrap().abs() < 1e-12);
    }
}
