use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state is not normalized: squared norm {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("amplitude vector of length {len} is not a power of two")]
    BadLength { len: usize },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid subsystem {labels:?} for a {num_qubits}-qubit register")]
    InvalidSubsystem {
        labels: Vec<usize>,
        num_qubits: usize,
    },

    #[error("{labels:?} is not a permutation of 1..={num_qubits}")]
    InvalidPermutation {
        labels: Vec<usize>,
        num_qubits: usize,
    },

    #[error("direction ({x}, {y}, {z}) is not a unit vector")]
    NonUnitDirection { x: f64, y: f64, z: f64 },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("not a density matrix: {reason}")]
    NotDensity { reason: String },

    #[error("measurement basis rejected: {reason}")]
    InvalidBasis { reason: String },

    #[error("outcome has probability {probability:e}; conditioning on it is impossible")]
    ImpossibleOutcome { probability: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("no records for setting pair {pair}")]
    EmptyBucket { pair: u8 },

    #[error("selection without classical information: trial {trial_id} was not broadcast")]
    SelectionWithoutBroadcast { trial_id: u64 },

    #[error("trial {trial_id} did not perform a Bell measurement at station D")]
    NotBellRun { trial_id: u64 },

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),

    #[error("record I/O failed: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
