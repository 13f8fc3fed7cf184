//! Single-qubit Kraus noise channels.
//!
//! Operator sets are the standard textbook forms. Every constructed channel
//! is validated against the completeness relation Σ K†K = I, so a channel
//! value is CPTP by construction.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const CPTP_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The six supported noise processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelKind {
    Depolarizing,
    PhaseDamping,
    AmplitudeDamping,
    BitFlip,
    PhaseFlip,
    BitPhaseFlip,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 6] = [
        ChannelKind::Depolarizing,
        ChannelKind::PhaseDamping,
        ChannelKind::AmplitudeDamping,
        ChannelKind::BitFlip,
        ChannelKind::PhaseFlip,
        ChannelKind::BitPhaseFlip,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ChannelKind::Depolarizing => "depolarizing",
            ChannelKind::PhaseDamping => "phase-damping",
            ChannelKind::AmplitudeDamping => "amplitude-damping",
            ChannelKind::BitFlip => "bitflip",
            ChannelKind::PhaseFlip => "phaseflip",
            ChannelKind::BitPhaseFlip => "bitphaseflip",
        }
    }
}

impl std::fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A CPTP single-qubit noise channel at strength `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    pub kind: ChannelKind,
    pub strength: f64,
    pub operators: Vec<[[Complex64; 2]; 2]>,
}

impl KrausChannel {
    pub fn new(kind: ChannelKind, strength: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&strength) || !strength.is_finite() {
            return Err(Error::InvalidStrength(strength));
        }
        let p = strength;
        let operators = match kind {
            ChannelKind::BitFlip => vec![
                scaled_identity((1.0 - p).sqrt()),
                scaled_x(p.sqrt()),
            ],
            ChannelKind::PhaseFlip => vec![
                scaled_identity((1.0 - p).sqrt()),
                scaled_z(p.sqrt()),
            ],
            ChannelKind::BitPhaseFlip => vec![
                scaled_identity((1.0 - p).sqrt()),
                scaled_y(p.sqrt()),
            ],
            ChannelKind::Depolarizing => vec![
                scaled_identity((1.0 - 3.0 * p / 4.0).sqrt()),
                scaled_x((p / 4.0).sqrt()),
                scaled_y((p / 4.0).sqrt()),
                scaled_z((p / 4.0).sqrt()),
            ],
            ChannelKind::AmplitudeDamping => vec![
                [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c((1.0 - p).sqrt(), 0.0)]],
                [[c(0.0, 0.0), c(p.sqrt(), 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]],
            ],
            ChannelKind::PhaseDamping => vec![
                [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c((1.0 - p).sqrt(), 0.0)]],
                [[c(0.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(p.sqrt(), 0.0)]],
            ],
        };
        Self::from_operators(kind, strength, operators)
    }

    /// Wraps an explicit operator set, enforcing the completeness relation.
    pub fn from_operators(
        kind: ChannelKind,
        strength: f64,
        operators: Vec<[[Complex64; 2]; 2]>,
    ) -> Result<Self> {
        let deviation = completeness_deviation(&operators);
        if deviation > CPTP_TOL {
            return Err(Error::NonCptp {
                kind,
                strength,
                deviation,
            });
        }
        Ok(Self {
            kind,
            strength,
            operators,
        })
    }
}

/// Max elementwise |Σ K†K - I| for a set of 2x2 operators.
pub fn completeness_deviation(operators: &[[[Complex64; 2]; 2]]) -> f64 {
    let mut sum = [[c(0.0, 0.0); 2]; 2];
    for k in operators {
        for i in 0..2 {
            for j in 0..2 {
                for r in 0..2 {
                    sum[i][j] += k[r][i].conj() * k[r][j];
                }
            }
        }
    }
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((sum[i][j] - c(expect, 0.0)).norm());
        }
    }
    worst
}

fn scaled_identity(s: f64) -> [[Complex64; 2]; 2] {
    [[c(s, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(s, 0.0)]]
}

fn scaled_x(s: f64) -> [[Complex64; 2]; 2] {
    [[c(0.0, 0.0), c(s, 0.0)], [c(s, 0.0), c(0.0, 0.0)]]
}

fn scaled_y(s: f64) -> [[Complex64; 2]; 2] {
    [[c(0.0, 0.0), c(0.0, -s)], [c(0.0, s), c(0.0, 0.0)]]
}

fn scaled_z(s: f64) -> [[Complex64; 2]; 2] {
    [[c(s, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-s, 0.0)]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{DensityMatrix, Gate};

    #[test]
    fn all_kinds_complete_over_strength_grid() {
        for kind in ChannelKind::ALL {
            for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let ch = KrausChannel::new(kind, p).unwrap();
                assert!(
                    completeness_deviation(&ch.operators) < 1e-10,
                    "{kind} at p={p}"
                );
            }
        }
    }

    #[test]
    fn zero_strength_acts_as_identity() {
        for kind in ChannelKind::ALL {
            let ch = KrausChannel::new(kind, 0.0).unwrap();
            let mut rho = DensityMatrix::ground(1);
            rho.apply_gate(&Gate::ry(0.8, 0)).unwrap();
            let before = rho.clone();
            rho.apply_channel(&ch, 0).unwrap();
            for (a, b) in rho.elements().iter().zip(before.elements()) {
                assert!((a - b).norm() < 1e-12, "{kind}");
            }
        }
    }

    #[test]
    fn bitflip_at_full_strength_equals_x_gate() {
        let mut rho = DensityMatrix::ground(2);
        rho.apply_gate(&Gate::ry(0.7, 0)).unwrap();
        rho.apply_gate(&Gate::cnot(0, 1)).unwrap();

        let mut via_channel = rho.clone();
        let ch = KrausChannel::new(ChannelKind::BitFlip, 1.0).unwrap();
        via_channel.apply_channel(&ch, 1).unwrap();

        let mut via_gate = rho;
        via_gate.apply_gate(&Gate::pauli_x(1)).unwrap();

        for (a, b) in via_channel.elements().iter().zip(via_gate.elements()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn out_of_range_strength_rejected() {
        assert!(matches!(
            KrausChannel::new(ChannelKind::BitFlip, 1.5),
            Err(Error::InvalidStrength(_))
        ));
        assert!(matches!(
            KrausChannel::new(ChannelKind::BitFlip, -0.1),
            Err(Error::InvalidStrength(_))
        ));
    }

    #[test]
    fn corrupted_operator_set_rejected_with_kind() {
        let ops = vec![scaled_identity(0.9)];
        let err = KrausChannel::from_operators(ChannelKind::PhaseFlip, 0.5, ops).unwrap_err();
        match err {
            Error::NonCptp { kind, .. } => assert_eq!(kind, ChannelKind::PhaseFlip),
            other => panic!("unexpected error: {other}"),
        }
    }
}
