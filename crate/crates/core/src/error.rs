use thiserror::Error;

/// Failures raised by the geometry pipeline.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeometryError {
    #[error("every input vector was dropped by Gram-Schmidt")]
    EmptyFrame,
    #[error("field evaluator rejected jet inputs")]
    NotDifferentiable,
    #[error("metric is numerically singular (condition number {condition:.3e})")]
    SingularMetric { condition: f64 },
    #[error("contact metric degenerates: smallest eigenvalue {min_eigenvalue:.3e}")]
    DegenerateContact { min_eigenvalue: f64 },
    #[error("mu is zero; the kernel algebra is the whole torus algebra")]
    ZeroMu,
    #[error("level set is empty: {certificate}")]
    EmptyLevelSet { certificate: String },
    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("projection converged onto the wrong ray (s = {s:.3e})")]
    WrongRay { s: f64 },
    #[error("kernel group action is degenerate: orbit rank {rank} < {expected}")]
    DegenerateAction { rank: usize, expected: usize },
    #[error("frame invariant violated: {what} = {value:.3e}")]
    FrameInconsistent { what: String, value: f64 },
    #[error("CR splitting is ambiguous: singular value {sigma:.3e} too close to threshold")]
    AmbiguousSplit { sigma: f64 },
    #[error("sample in the zero set of Phi is outside the line through mu (residual {residual:.3e})")]
    StratificationLeak { residual: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, GeometryError>;
