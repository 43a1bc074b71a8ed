use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A residual, iterate or Jacobian entry became non-finite.
    #[error("overflow: non-finite value encountered")]
    Overflow,

    /// Non-positive predicted reduction with a nonzero gradient model.
    #[error("numerical breakdown: predicted reduction {0:e} is not positive")]
    Breakdown(f64),

    #[error("singular projection: A does not have full column rank")]
    SingularProjection,

    #[error("problem `{0}` has no analytic Jacobian")]
    MissingJacobian(String),

    #[error("degenerate direction draw after {0} attempts")]
    DegenerateFrame(usize),

    #[error("unknown problem id `{0}`")]
    UnknownProblem(String),

    #[error("unknown solver id `{0}`")]
    UnknownSolver(String),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
