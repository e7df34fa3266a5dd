//! Inequality certifiers and dynamical-systems experiments.

mod attractor;
mod certificates;
mod ensemble;
mod sampler;

pub use attractor::{
    attractor_experiment, regularity_check, semidistance, smooth, AttractorCloud,
    AttractorReport, RegularityReport,
};
pub use certificates::{
    check_gronwall, check_interpolation, find_g_delta_constant, verify_g_delta,
    verify_interpolation, GridDescription, HProfile, InequalityCertificate,
    InterpolationExponents,
};
pub use ensemble::{
    absorbing_experiment, absorbing_report, continuous_dependence_ratio, flow_to,
    max_energy_identity_residual, rho_star_for_radius, run_ensemble, AbsorbingReport,
    BallRadiusSearch, EnsembleSpec, RatioSeries, TrajectoryAbsorption,
};
pub use sampler::{sample_state_with_h_norm, FieldSampler};
