use thiserror::Error;

use crate::quantum::ChannelKind;

/// Errors produced by any fallible operation in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("{what}: expected length {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("gate matrix is not unitary (max |U\u{2020}U - I| = {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("control and target must be distinct qubits (both {0})")]
    ControlEqualsTarget(usize),

    #[error("state norm {0} deviates from 1 beyond tolerance")]
    NotNormalized(f64),

    #[error("{kind} channel at p={strength} violates completeness (max deviation {deviation:.3e})")]
    NonCptp {
        kind: ChannelKind,
        strength: f64,
        deviation: f64,
    },

    #[error("channel strength {0} outside [0, 1]")]
    InvalidStrength(f64),

    #[error("non-finite value at parameter index {0}")]
    NonFiniteParam(usize),

    #[error("non-finite loss while shifting parameter index {0}")]
    NonFiniteGradient(usize),

    #[error("threshold {0} outside (0, 1)")]
    InvalidThreshold(f64),

    #[error("batch is empty")]
    EmptyBatch,

    #[error("no clients to aggregate")]
    NoClients,

    #[error("cannot partition {size} samples across {clients} clients")]
    TooManyClients { clients: usize, size: usize },

    #[error("train fraction {0} outside (0, 1)")]
    InvalidFraction(f64),

    #[error("fraud rate {0} outside [0, 1]")]
    InvalidRate(f64),

    #[error("dataset contains only one class")]
    SingleClass,

    #[error("missing required column {0:?}")]
    MissingColumn(String),

    #[error("duplicate join key {0:?}")]
    DuplicateJoinKey(String),

    #[error("malformed CSV at line {line}: {message}")]
    MalformedCsv { line: u64, message: String },

    #[error("only {available} usable features after preprocessing, need {needed}")]
    TooFewFeatures { available: usize, needed: usize },

    #[error("label column {column:?} holds non-binary value {value:?}")]
    NonBinaryLabel { column: String, value: String },

    #[error("unknown export format {0:?}")]
    UnknownFormat(String),

    #[error("malformed history record at line {0}")]
    MalformedHistory(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
