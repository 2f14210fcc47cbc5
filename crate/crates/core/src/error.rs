use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("inadmissible deflection: {0}")]
    InadmissibleDeflection(String),

    #[error("query point (x = {x}, z = {z}) lies outside the reference domain")]
    OutOfDomain { x: f64, z: f64 },

    #[error("degenerate geometry at x = {x}: gap H + u = {gap:e} below floor {floor:e}")]
    DegenerateGeometry { x: f64, gap: f64, floor: f64 },

    #[error("assembled matrix is not positive definite (row {row}, diagonal {diag:e})")]
    NotPositiveDefinite { row: usize, diag: f64 },

    #[error("linear solver did not converge: relative residual {residual:e} after {iterations} iterations")]
    SolverDiverged { residual: f64, iterations: usize },

    #[error("perturbation t = {t} leaves the admissible set: {reason}")]
    InadmissiblePerturbation { t: f64, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("malformed input at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
