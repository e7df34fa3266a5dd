//! Acceptance thresholds, pinned in one place so the report generator and the
//! acceptance suite check the same numbers.

/// Max energy-identity residual on the standard run.
pub const ENERGY_IDENTITY_MAX_RESIDUAL: f64 = 1e-6;
/// Expected residual shrink factor when dt halves (second-order scheme).
pub const ENERGY_IDENTITY_REFINEMENT: (f64, f64) = (3.0, 5.0);
/// Max coefficient error of the linearly damped single mode vs closed form.
pub const OSCILLATOR_MAX_COEFF_ERROR: f64 = 1e-5;
/// Allowed relative change of the fitted absorbing radius under horizon doubling.
pub const ABSORBING_DOUBLING_REL_CHANGE: f64 = 0.01;
/// Lyapunov slack per unit dt between consecutive samples of a damped run.
pub const LYAPUNOV_SLACK_PER_DT: f64 = 1e-6;
/// Allowed factor between the max space-time ratios of two independent ensembles.
pub const SPACE_TIME_RATIO_STABILITY: f64 = 2.0;
/// Agreement of the sup continuous-dependence ratios for the two perturbations.
pub const CONT_DEP_RATIO_AGREEMENT: f64 = 0.10;
/// Max H-distance of post-burn-in cloud points to the equilibrium set.
pub const ATTRACTOR_EQUILIBRIUM_DIST: f64 = 1e-2;
/// Allowed relative change of the V-norm surrogate from N = 32 to N = 64.
pub const REGULARITY_N_CHANGE: f64 = 0.20;
/// Equilibrium solver residual bound used by the report.
pub const EQUILIBRIUM_RESIDUAL: f64 = 1e-10;
