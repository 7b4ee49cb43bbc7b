//! Error type shared across the crate.
//!
//! Contract violations on cheap preconditions (dimension mismatches on a
//! single distance call, empty center sets) panic with a message instead;
//! everything data-dependent or recoverable surfaces here.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dataset needs at least two points, got {0}")]
    TooFewPoints(usize),

    #[error("non-finite coordinate at point {index}")]
    NonFiniteCoordinate { index: usize },

    #[error("degenerate dataset: aspect ratio undefined")]
    DegenerateDataset,

    #[error("negative weight {weight} at index {index}")]
    NegativeWeight { index: usize, weight: f64 },

    #[error("non-finite weight at index {index}")]
    NonFiniteWeight { index: usize },

    #[error("index {index} out of range for {len} leaves")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("empty distribution: total weight is zero")]
    EmptyDistribution,

    #[error("degenerate: all points coincide with centers")]
    DegenerateDistribution,

    #[error(
        "invalid amplitude: squared estimate {estimate_sq} exceeds cost estimate {cost_estimate}"
    )]
    InvalidAmplitude { estimate_sq: f64, cost_estimate: f64 },

    #[error("sampler starvation: no acceptance within {proposals} proposals")]
    SamplerStarvation { proposals: u64 },

    #[error("invalid oracle config: {0}")]
    InvalidOracleConfig(String),

    #[error("invalid scheme parameters: {0}")]
    InvalidParams(String),

    #[error(
        "candidate list would hold {predicted} entries (cap {cap}): \
         |M| = {multiset_len}, k = {k}, tau = {tau}, repetitions = {repetitions}"
    )]
    CandidateCapExceeded {
        predicted: u128,
        cap: u64,
        multiset_len: usize,
        k: usize,
        tau: usize,
        repetitions: usize,
    },

    #[error("brute force infeasible: n = {n}, k = {k} exceeds cap n <= {max_n}, k <= {max_k}")]
    BruteForceInfeasible {
        n: usize,
        k: usize,
        max_n: usize,
        max_k: usize,
    },

    #[error("empty candidate list")]
    EmptyCandidateList,

    #[error("{path}:{line}: {msg}")]
    CsvParse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Tags an error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Unwraps stage tags down to the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
