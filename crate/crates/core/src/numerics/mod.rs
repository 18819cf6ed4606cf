//! Dense complex linear algebra and time integration.

mod integrate;
mod linalg;
mod spline;

pub use integrate::{
    integrate, FnGenerator, Generator, Integration, IntegrationStats, IntegratorOptions,
};
pub use spline::CubicSpline;
pub use linalg::{
    eigh, ComplexVector, EigenDecomposition, HermitianOperator, HERMITICITY_TOL, MAX_DIM,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("matrix is not Hermitian at entry ({row},{col}): deviation {deviation:e} (scale {scale:e})")]
    NotHermitian { row: usize, col: usize, deviation: f64, scale: f64 },
    #[error("matrix with {rows} rows is not square")]
    NotSquare { rows: usize },
    #[error("dimension {dim} unsupported (max {max})")]
    UnsupportedDimension { dim: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value in {context}")]
    NonFinite { context: String },
    #[error("step size underflow at t = {t} (step {step:e})")]
    StepSizeUnderflow { t: f64, step: f64 },
    #[error("step budget of {steps} exhausted at t = {t}")]
    TooManySteps { t: f64, steps: u64 },
    #[error("invalid interval [{t_start}, {t_end}]")]
    InvalidInterval { t_start: f64, t_end: f64 },
    #[error("invalid tolerances rtol = {rtol:e}, atol = {atol:e}")]
    InvalidTolerance { rtol: f64, atol: f64 },
    #[error("output grid needs at least 2 points, got {points}")]
    InvalidOutputGrid { points: usize },
    #[error("generator failed at t = {t}: {message}")]
    Generator { t: f64, message: String },
}
