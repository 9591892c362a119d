//! Error type shared by all modules.

use thiserror::Error;

/// Crate result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failures raised by problem construction, solvers, and IO.
///
/// Iterate-carrying variants store the offending vector as `f64` regardless
/// of the scalar the solver ran with.
#[derive(Error, Debug)]
pub enum Error {
    /// A feature column has (numerically) zero Euclidean norm.
    #[error("feature column {0} has zero norm")]
    ZeroColumn(usize),

    /// Vector lengths disagree.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// The feature matrix is underdetermined or its columns are linearly
    /// dependent.
    #[error("feature matrix is rank deficient ({rows} rows, {cols} columns)")]
    RankDeficient { rows: usize, cols: usize },

    /// A Gram matrix was not positive definite, even after one jitter retry.
    #[error("Gram matrix is singular or indefinite")]
    SingularGram,

    /// An iterative solver hit its step limit.
    #[error("solver did not converge within {steps} steps")]
    NotConverged { steps: usize, last: Vec<f64> },

    /// More than one feature attains the entering correlation (or more than
    /// one parameter crosses zero) simultaneously.
    #[error("correlation tie between features {0:?}")]
    CorrelationTie(Vec<usize>),

    /// Interpolation query outside the path's alpha range.
    #[error("alpha {alpha} outside the path range [0, {max}]")]
    OutOfRange { alpha: f64, max: f64 },

    /// Fixed-step ISTA iterates blew past the divergence cap.
    #[error("iteration diverged at step {step}; the step size is likely too large")]
    Diverged { step: usize },

    /// The objective evaluated to NaN or infinity.
    #[error("objective is not finite at the current iterate")]
    NonFiniteObjective { at: Vec<f64> },

    /// Uniaxial stretch must be strictly positive.
    #[error("non-positive stretch {0}")]
    NonPositiveStretch(f64),

    /// A dataset must contain at least one sample.
    #[error("dataset has no samples")]
    EmptyDataset,

    /// Debias refit called with an empty support.
    #[error("refit support is empty")]
    EmptySupport,

    /// The Ogden coefficient and exponent must be refit jointly.
    #[error("ogden support must contain both D and delta")]
    SplitOgdenPair,

    /// No knot on the path satisfies the selection criterion.
    #[error("no path knot satisfies the selection criterion")]
    NoQualifyingKnot,

    /// Malformed dataset file.
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    /// Underlying IO failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// A pipeline stage failed; wraps the underlying error.
    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Annotates an error with the pipeline stage it occurred in.
    pub fn at_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }
}
