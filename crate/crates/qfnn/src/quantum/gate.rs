//! Single- and two-qubit gates.
//!
//! Gates carry their own target indices so a circuit is just a `Vec<Gate>`.
//! Matrices are validated for unitarity at construction; the named
//! constructors (`ry`, `cnot`, ...) produce unitaries by definition and skip
//! the check.

use num_complex::Complex64;

use crate::error::{Error, Result};

const UNITARY_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A 2x2 unitary acting on one qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate1Q {
    pub matrix: [[Complex64; 2]; 2],
    pub target: usize,
}

impl Gate1Q {
    /// Builds a gate from an arbitrary matrix, rejecting non-unitaries.
    pub fn new(matrix: [[Complex64; 2]; 2], target: usize) -> Result<Self> {
        let dev = unitarity_deviation_2(&matrix);
        if dev > UNITARY_TOL {
            return Err(Error::NonUnitary { deviation: dev });
        }
        Ok(Self { matrix, target })
    }
}

/// A 4x4 unitary acting on an ordered (control, target) qubit pair.
///
/// The matrix is expressed in the basis |control target⟩ = |00⟩, |01⟩,
/// |10⟩, |11⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate2Q {
    pub matrix: [[Complex64; 4]; 4],
    pub control: usize,
    pub target: usize,
}

impl Gate2Q {
    pub fn new(matrix: [[Complex64; 4]; 4], control: usize, target: usize) -> Result<Self> {
        if control == target {
            return Err(Error::ControlEqualsTarget(control));
        }
        let dev = unitarity_deviation_4(&matrix);
        if dev > UNITARY_TOL {
            return Err(Error::NonUnitary { deviation: dev });
        }
        Ok(Self {
            matrix,
            control,
            target,
        })
    }
}

/// Any gate the simulator can apply.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    One(Gate1Q),
    Two(Gate2Q),
}

impl Gate {
    /// Y-axis rotation by `theta` radians.
    pub fn ry(theta: f64, target: usize) -> Gate {
        let (s, co) = (theta / 2.0).sin_cos();
        Gate::One(Gate1Q {
            matrix: [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]],
            target,
        })
    }

    /// Z-axis rotation by `phi` radians.
    pub fn rz(phi: f64, target: usize) -> Gate {
        let (s, co) = (phi / 2.0).sin_cos();
        Gate::One(Gate1Q {
            matrix: [[c(co, -s), c(0.0, 0.0)], [c(0.0, 0.0), c(co, s)]],
            target,
        })
    }

    pub fn pauli_x(target: usize) -> Gate {
        Gate::One(Gate1Q {
            matrix: [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
            target,
        })
    }

    pub fn pauli_y(target: usize) -> Gate {
        Gate::One(Gate1Q {
            matrix: [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]],
            target,
        })
    }

    pub fn pauli_z(target: usize) -> Gate {
        Gate::One(Gate1Q {
            matrix: [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
            target,
        })
    }

    pub fn hadamard(target: usize) -> Gate {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Gate::One(Gate1Q {
            matrix: [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
            target,
        })
    }

    pub fn identity(target: usize) -> Gate {
        Gate::One(Gate1Q {
            matrix: [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
            target,
        })
    }

    /// Controlled-NOT in the |control target⟩ basis.
    pub fn cnot(control: usize, target: usize) -> Gate {
        let mut m = [[c(0.0, 0.0); 4]; 4];
        m[0][0] = c(1.0, 0.0);
        m[1][1] = c(1.0, 0.0);
        m[2][3] = c(1.0, 0.0);
        m[3][2] = c(1.0, 0.0);
        Gate::Two(Gate2Q {
            matrix: m,
            control,
            target,
        })
    }

    /// Highest qubit index the gate touches.
    pub fn max_qubit(&self) -> usize {
        match self {
            Gate::One(g) => g.target,
            Gate::Two(g) => g.control.max(g.target),
        }
    }
}

fn unitarity_deviation_2(m: &[[Complex64; 2]; 2]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = c(0.0, 0.0);
            for k in 0..2 {
                acc += m[k][i].conj() * m[k][j];
            }
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((acc - c(expect, 0.0)).norm());
        }
    }
    worst
}

fn unitarity_deviation_4(m: &[[Complex64; 4]; 4]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = c(0.0, 0.0);
            for k in 0..4 {
                acc += m[k][i].conj() * m[k][j];
            }
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((acc - c(expect, 0.0)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_gates_are_unitary() {
        for theta in [-3.0, -0.5, 0.0, 0.1, 1.7, 3.14] {
            if let Gate::One(g) = Gate::ry(theta, 0) {
                assert!(unitarity_deviation_2(&g.matrix) < 1e-12);
            }
            if let Gate::One(g) = Gate::rz(theta, 0) {
                assert!(unitarity_deviation_2(&g.matrix) < 1e-12);
            }
        }
    }

    #[test]
    fn non_unitary_matrix_rejected() {
        let m = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.5, 0.0)]];
        assert!(matches!(Gate1Q::new(m, 0), Err(Error::NonUnitary { .. })));
    }

    #[test]
    fn cnot_requires_distinct_qubits() {
        let mut m = [[c(0.0, 0.0); 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = c(1.0, 0.0);
        }
        assert!(matches!(
            Gate2Q::new(m, 2, 2),
            Err(Error::ControlEqualsTarget(2))
        ));
    }
}
