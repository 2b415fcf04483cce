use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("qubit count mismatch: expected {expected}, got {actual}")]
    QubitCountMismatch { expected: usize, actual: usize },

    #[error("parameter vector has length {actual}, circuit expects {expected}")]
    ParamLengthMismatch { expected: usize, actual: usize },

    #[error("parameter slot {slot} not present in parameter vector of length {len}")]
    MissingParameter { slot: usize, len: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("unknown gate kind `{0}`")]
    UnknownGateKind(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("n_shots must be at least 1")]
    ZeroShots,

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid leg subset: {0}")]
    InvalidLegs(String),

    #[error("no parameter-shift rule registered for gate kind {0}")]
    NoShiftRule(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no finite-weight path reaches the terminal node")]
    MetricDisconnected,

    #[error("Hilbert space of {0} qubits is too large")]
    DimensionTooLarge(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed results file: {0}")]
    MalformedCsv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
