use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum OdmError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The linear system could not be solved to working precision.
    /// `pivot_ratio` is min|u_ii| / max|u_ii| of the LU factor.
    #[error("singular linear system (pivot ratio {pivot_ratio:.3e})")]
    SingularSystem { pivot_ratio: f64 },

    /// Negative gradient on a coordinate with no upper bound and no curvature.
    #[error("unbounded coordinate subproblem (index {index:?})")]
    Unbounded { index: Option<usize> },

    #[error("SVRG diverged at stage {stage} (objective {objective:.6e}); try a smaller eta")]
    Diverged { stage: usize, objective: f64 },

    #[error("leave-one-out retraining failed at index {index}: {source}")]
    LooFailure {
        index: usize,
        #[source]
        source: Box<OdmError>,
    },

    #[error("model has no stored dual solution; retrain with alpha retention enabled")]
    MissingDualSolution,

    #[error("model format error: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, OdmError>;
