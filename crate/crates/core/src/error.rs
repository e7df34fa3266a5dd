//! Error types shared across the core modules.

use thiserror::Error;

/// Errors from domain/basis construction and spectral operations.
#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("projection size {n} out of range (basis has {count} modes)")]
    ProjectionOutOfRange { n: usize, count: usize },
    #[error("grid/basis mismatch: expected {expected} grid values, got {got}")]
    GridMismatch { expected: usize, got: usize },
    #[error("fields live on different bases")]
    BasisMismatch,
    #[error("quadrature floor violated: {quad} points per axis < 2 x {modes} modes per axis")]
    QuadratureFloor { quad: usize, modes: usize },
}

/// Errors from model-spec construction and evaluation.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("damping exponent m = {0} outside (1, 5]")]
    DampingExponent(f64),
    #[error("nonlinearity exponent p = {0} outside [2, 5]")]
    NonlinearityExponent(f64),
    #[error("custom table is not strictly monotone")]
    NonMonotoneTable,
    #[error("custom table needs at least two points")]
    TableTooShort,
    #[error("{0}")]
    Invalid(String),
}

/// Errors from time integration and the equilibrium solver.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("Newton did not converge at t = {t}: residual {residual} after {iters} iterations")]
    NewtonFailed { t: f64, residual: f64, iters: usize },
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("singular Jacobian in Newton step {step}")]
    SingularJacobian { step: usize },
    #[error("equilibrium solve did not converge: final residual {residual} after {iters} iterations")]
    EquilibriumFailed { residual: f64, iters: usize },
    #[error("requested time {t} (+ {h}) outside the recorded range")]
    OutOfRecordRange { t: f64, h: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Errors from the certifiers and dynamical experiments.
#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no finite constant up to {cap} certifies the inequality")]
    CertifyFail { cap: f64 },
    #[error("exponent precondition ({0}) violated")]
    ConditionFail(String),
    #[error("identical initial data: continuous-dependence ratio undefined")]
    UndefinedRatio,
    #[error("empty cloud: no post-burn-in samples")]
    EmptyCloud,
    #[error("damping does not satisfy the strong-damping lower bound (gamma > 0 required)")]
    GradientConditionFailed,
    #[error("trajectory {index} never settled into a ball within the horizon")]
    NoAbsorption { index: usize },
    #[error("trajectory {index} failed: {reason}")]
    TrajectoryFailed { index: usize, reason: String },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}
