use alloc::string::String;

/// Errors raised by the core numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("qubit count {0} outside supported range 1..=12")]
    QubitCount(usize),
    #[error("qubit index {index} out of range for {n_qubits}-qubit state")]
    QubitIndex { index: usize, n_qubits: usize },
    #[error("control and target qubit are both {0}")]
    QubitCollision(usize),
    #[error("non-finite value: {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("ragged input: row {row} has length {len}, expected {expected}")]
    Ragged { row: usize, len: usize, expected: usize },
    #[error("empty input")]
    Empty,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("class with {count} members cannot be split into {folds} folds")]
    ClassTooSmall { count: usize, folds: usize },
    #[error("kernel matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
