//! Pure-state simulation on dense amplitude arrays.
//!
//! Qubit ordering convention (used everywhere in this crate): qubit 0 is the
//! most significant bit of the amplitude index, so for an `n`-qubit register
//! the bit of qubit `q` in basis index `k` is `(k >> (n - 1 - q)) & 1`.
//! Gates are applied by amplitude-pair updates; no 2^n x 2^n matrix is ever
//! materialized.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::gate::{Gate, Gate1Q, Gate2Q};

const NORM_TOL: f64 = 1e-10;

/// Dense amplitudes of an `n`-qubit pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The computational basis state |0...0⟩.
    pub fn zero(n_qubits: usize) -> Self {
        assert!(n_qubits >= 1, "register needs at least one qubit");
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    /// Builds a state from raw amplitudes, checking length and normalization.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n_qubits {
            return Err(Error::LengthMismatch {
                what: "state amplitudes",
                expected: 1 << n_qubits,
                actual: amps.len(),
            });
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
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

    /// Applies a gate in place.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        match gate {
            Gate::One(g) => self.apply_1q(g),
            Gate::Two(g) => self.apply_2q(g),
        }
    }

    fn apply_1q(&mut self, gate: &Gate1Q) -> Result<()> {
        self.check_qubit(gate.target)?;
        apply_1q_kernel(&mut self.amps, self.n_qubits, &gate.matrix, gate.target);
        Ok(())
    }

    fn apply_2q(&mut self, gate: &Gate2Q) -> Result<()> {
        self.check_qubit(gate.control)?;
        self.check_qubit(gate.target)?;
        if gate.control == gate.target {
            return Err(Error::ControlEqualsTarget(gate.control));
        }
        apply_2q_kernel(
            &mut self.amps,
            self.n_qubits,
            &gate.matrix,
            gate.control,
            gate.target,
        );
        Ok(())
    }

    /// ⟨Z_qubit⟩ = Σ_k (-1)^{bit_q(k)} |a_k|².
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = 1usize << (self.n_qubits - 1 - qubit);
        let mut acc = 0.0;
        for (k, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            acc += if k & mask == 0 { p } else { -p };
        }
        Ok(acc)
    }
}

/// In-place pair update for a single-qubit matrix (unitary or not).
pub(crate) fn apply_1q_kernel(
    amps: &mut [Complex64],
    n_qubits: usize,
    m: &[[Complex64; 2]; 2],
    target: usize,
) {
    let stride = 1usize << (n_qubits - 1 - target);
    let len = amps.len();
    let mut base = 0;
    while base < len {
        for i0 in base..base + stride {
            let i1 = i0 | stride;
            let a = amps[i0];
            let b = amps[i1];
            amps[i0] = m[0][0] * a + m[0][1] * b;
            amps[i1] = m[1][0] * a + m[1][1] * b;
        }
        base += stride << 1;
    }
}

/// In-place quadruple update for a two-qubit matrix in the
/// |control target⟩ basis.
pub(crate) fn apply_2q_kernel(
    amps: &mut [Complex64],
    n_qubits: usize,
    m: &[[Complex64; 4]; 4],
    control: usize,
    target: usize,
) {
    let cm = 1usize << (n_qubits - 1 - control);
    let tm = 1usize << (n_qubits - 1 - target);
    for k in 0..amps.len() {
        if k & cm == 0 && k & tm == 0 {
            let idx = [k, k | tm, k | cm, k | cm | tm];
            let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
            for (r, &i) in idx.iter().enumerate() {
                amps[i] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
            }
        }
    }
}
