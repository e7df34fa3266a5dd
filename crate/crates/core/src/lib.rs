//! Spectral Galerkin simulator and verification toolkit for the nonlinear
//! damped wave equation `u_tt + g(u_t) - Delta u + f(u) = phi` with Dirichlet
//! conditions on a box.
//!
//! The crate is generic over the floating-point scalar (`f64` is the working
//! precision, `f32` compiles for smoke checks); concrete aliases for the main
//! types live at the crate root.
//!
//! Modules:
//! - [`spectral`]: sine eigenbasis, transforms, projections and norms
//! - [`model`]: damping/nonlinearity families, validators, exponent arithmetic
//! - [`solver`]: implicit-midpoint / RK4 time integration, equilibria
//! - [`functionals`]: energies and composite space-time quantities
//! - [`analysis`]: inequality certifiers and dynamical experiments

pub mod analysis;
pub mod error;
pub mod functionals;
pub mod linalg;
pub mod model;
pub mod scalar;
pub mod solver;
pub mod spectral;

pub use error::{AnalysisError, ModelError, SolverError, SpectralError};
pub use scalar::Scalar;

/// Concrete working-precision aliases.
pub type DomainSpec64 = spectral::DomainSpec<f64>;
pub type Basis64 = spectral::SpectralBasis<f64>;
pub type Field64 = spectral::Field<f64>;
pub type State64 = solver::State<f64>;
pub type ModelSpec64 = model::ModelSpec<f64>;
pub type SolverConfig64 = solver::SolverConfig<f64>;
pub type TrajectoryRecord64 = solver::TrajectoryRecord<f64>;
pub type FunctionalParams64 = functionals::FunctionalParams<f64>;
pub type EnsembleSpec64 = analysis::EnsembleSpec<f64>;
