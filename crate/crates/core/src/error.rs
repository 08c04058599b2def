use thiserror::Error;

/// Errors produced anywhere in the detection pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("degenerate degree: {0}")]
    DegenerateDegree(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error(
        "label budget: region {region} has {available} nodes but {required} labels were requested"
    )]
    LabelBudget {
        region: &'static str,
        available: usize,
        required: usize,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("singular filter: kernel has a pole at eigenvalue {eigenvalue:e}")]
    SingularFilter { eigenvalue: f64 },

    #[error("spectral domain: {0}")]
    Domain(String),

    #[error("did not converge after {iterations} iterations (last change {last_change:e})")]
    Convergence { iterations: usize, last_change: f64 },

    #[error("ideal low-pass cutoff selects no eigenvectors")]
    EmptyBand,

    #[error("AUC undefined: {0}")]
    UndefinedAuc(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("{0} is nonstandard and disabled by default: its fixed-point iteration is not stable (the 1/lambda kernel has a pole at the zero eigenvalue of the random-walk Laplacian); set allow_nonstandard (`--allow-nonstandard`) to run it")]
    Nonstandard(String),

    #[error("residual undefined for a zero magnetization vector")]
    UndefinedResidual,

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
