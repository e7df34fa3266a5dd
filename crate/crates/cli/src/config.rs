//! Run configuration: one human-editable TOML file with sections mirroring
//! the library modules. Loading validates every cross-section compatibility
//! rule at once and reports all violations together.

use std::path::Path;
use std::sync::Arc;

use attractor_lab_core::model::{DampingSpec, ModelSpec, NonlinearitySpec, Region};
use attractor_lab_core::solver::{Scheme, SolverConfig, State};
use attractor_lab_core::spectral::{DomainSpec, Field, SpectralBasis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config validation failed:\n{}", .0.join("\n"))]
    Validation(Vec<String>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub lengths: Vec<f64>,
    /// quadrature points per axis; defaults to twice the modes per axis
    #[serde(default)]
    pub quad_points_per_axis: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    pub n_per_axis: usize,
}

/// Forcing: `"zero"`, `"random(seed, amplitude, decay)"`, or an explicit
/// coefficient list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ForcingSpec {
    Text(String),
    Coeffs(Vec<f64>),
}

impl Default for ForcingSpec {
    fn default() -> Self {
        ForcingSpec::Text("zero".into())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSection {
    pub s: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// power | power_plus_linear | linear | zero | table
    pub damping: String,
    #[serde(default = "default_m")]
    pub m: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub damping_table: Option<TableSection>,
    /// power | power_minus_linear | zero | table
    pub nonlinearity: String,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default = "default_omega")]
    pub omega: f64,
    /// derived from the validator when absent
    #[serde(default)]
    pub k_omega: Option<f64>,
    #[serde(default)]
    pub nonlinearity_table: Option<TableSection>,
    /// clamp f outside [-level, level]
    #[serde(default)]
    pub truncation_level: Option<usize>,
    #[serde(default)]
    pub forcing: ForcingSpec,
}

fn default_m() -> f64 {
    3.0
}
fn default_p() -> f64 {
    3.0
}
fn default_omega() -> f64 {
    1e-2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub dt: f64,
    /// implicit_midpoint | rk4_explicit
    pub scheme: String,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    pub record_every: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            scheme: "implicit_midpoint".into(),
            newton_tol: 1e-10,
            newton_max_iters: 25,
            record_every: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FunctionalsSection {
    pub alpha: f64,
}

impl Default for FunctionalsSection {
    fn default() -> Self {
        Self { alpha: 0.1 }
    }
}

/// Initial data: `"zero"`, `"random(seed, amplitude, decay)"`, or explicit
/// 1-based `(mode, coefficient)` pairs for u and v.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialSpec {
    Text(String),
    Modes {
        #[serde(default)]
        u: Vec<(usize, f64)>,
        #[serde(default)]
        v: Vec<(usize, f64)>,
    },
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::Text("zero".into())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    /// simulate | ensemble | equilibria | verify | attractor
    pub kind: String,
    pub t_final: f64,
    pub initial: InitialSpec,
    // ensemble / attractor
    pub count: usize,
    pub radius: f64,
    pub decay: f64,
    pub burn_in: Option<f64>,
    pub stride: usize,
    pub horizon_doubling_check: bool,
    // verify
    pub deltas: Vec<f64>,
    pub interpolation_trials: usize,
    pub gronwall_alphas: Vec<f64>,
    pub verify_densify: usize,
    // equilibria
    pub extra_guesses: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            kind: "simulate".into(),
            t_final: 10.0,
            initial: InitialSpec::default(),
            count: 20,
            radius: 5.0,
            decay: 2.0,
            burn_in: None,
            stride: 5,
            horizon_doubling_check: false,
            deltas: vec![0.5, 0.05],
            interpolation_trials: 200,
            gronwall_alphas: vec![0.1, 1.0],
            verify_densify: 10,
            extra_guesses: 3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default)]
    pub output_dir: Option<String>,
    /// permit exponent pairs in the uncovered region (divergence sweeps)
    #[serde(default)]
    pub allow_uncovered: bool,
    pub domain: DomainSection,
    pub basis: BasisSection,
    pub model: ModelSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub functionals: FunctionalsSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

fn default_seed() -> u64 {
    1
}

/// First Dirichlet eigenvalue of the configured box.
fn lambda_1_of(lengths: &[f64]) -> f64 {
    let pi2 = std::f64::consts::PI.powi(2);
    pi2 * lengths.iter().map(|l| 1.0 / (l * l)).sum::<f64>()
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let mut config: RunConfig = toml::from_str(text)?;
        config.resolve_defaults();
        config.validate()?;
        Ok(config)
    }

    /// Write every derived default back into the config so the manifest pins
    /// the exact values a run used.
    pub fn resolve_defaults(&mut self) {
        if self.domain.quad_points_per_axis.is_none() {
            self.domain.quad_points_per_axis = Some(2 * self.basis.n_per_axis);
        }
        if self.experiment.burn_in.is_none() && self.experiment.kind == "attractor" {
            self.experiment.burn_in = Some(0.6 * self.experiment.t_final);
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut issues = Vec::new();
        let d = self.domain.lengths.len();
        if d == 0 || d > 3 {
            issues.push(format!("domain: dimension {d} not in {{1, 2, 3}}"));
        }
        for &l in &self.domain.lengths {
            if !(l > 0.0) || !l.is_finite() {
                issues.push(format!("domain: non-positive side length {l}"));
            }
        }
        let n = self.basis.n_per_axis;
        if n < 1 {
            issues.push("basis: n_per_axis must be >= 1".into());
        }
        let quad = self.domain.quad_points_per_axis.unwrap_or(2 * n);
        if quad < 2 * n {
            issues.push(format!(
                "domain: anti-aliasing floor violated: quad_points_per_axis = {quad} < 2 x {n} modes per axis"
            ));
        }

        match self.model.damping.as_str() {
            "power" | "power_plus_linear" => {
                if !(self.model.m > 1.0 && self.model.m <= 5.0) {
                    issues.push(format!("model: damping exponent m = {} outside (1, 5]", self.model.m));
                }
                if self.model.gamma < 0.0 {
                    issues.push("model: gamma must be >= 0".into());
                }
            }
            "linear" => {
                if !(self.model.gamma > 0.0) {
                    issues.push("model: linear damping needs gamma > 0".into());
                }
            }
            "zero" => {}
            "table" => {
                if self.model.damping_table.is_none() {
                    issues.push("model: damping = \"table\" needs a [model.damping_table]".into());
                }
            }
            other => issues.push(format!("model: unknown damping family {other:?}")),
        }

        let f_zero = self.model.nonlinearity == "zero";
        match self.model.nonlinearity.as_str() {
            "power" | "power_minus_linear" => {
                if !(self.model.p >= 2.0 && self.model.p <= 5.0) {
                    issues.push(format!("model: nonlinearity exponent p = {} outside [2, 5]", self.model.p));
                }
            }
            "zero" => {}
            "table" => {
                if self.model.nonlinearity_table.is_none() {
                    issues.push("model: nonlinearity = \"table\" needs a [model.nonlinearity_table]".into());
                }
            }
            other => issues.push(format!("model: unknown nonlinearity family {other:?}")),
        }

        // exponent compatibility p <= min(5, 3m) (Figure-1 covered regions)
        let m_eff = match self.model.damping.as_str() {
            "power" | "power_plus_linear" | "table" => Some(self.model.m),
            _ => None,
        };
        if let (Some(m), false) = (m_eff, f_zero) {
            let bound = 5.0f64.min(3.0 * m);
            if self.model.p > bound + 1e-12 && !self.allow_uncovered {
                issues.push(format!(
                    "model: p <= min(5, 3m) violated (p = {}, 3m = {}): exponent pair in the uncovered region",
                    self.model.p,
                    3.0 * m
                ));
            }
        }

        let lambda_1 = lambda_1_of(&self.domain.lengths);
        if (self.model.lambda < 0.0 || self.model.lambda >= lambda_1)
            && self.model.nonlinearity == "power_minus_linear" {
                issues.push(format!(
                    "model: lambda = {} must lie in [0, lambda_1 = {lambda_1})",
                    self.model.lambda
                ));
            }

        if !(self.solver.dt > 0.0) {
            issues.push("solver: dt must be positive".into());
        }
        if self.solver.newton_tol < 1e-14 {
            issues.push("solver: newton_tol below 1e-14".into());
        }
        if self.solver.newton_max_iters < 1 {
            issues.push("solver: newton_max_iters must be >= 1".into());
        }
        if self.solver.record_every < 1 {
            issues.push("solver: record_every must be >= 1".into());
        }
        if !matches!(self.solver.scheme.as_str(), "implicit_midpoint" | "rk4_explicit") {
            issues.push(format!("solver: unknown scheme {:?}", self.solver.scheme));
        }

        if !(self.functionals.alpha > 0.0 && self.functionals.alpha < 1.0) {
            issues.push(format!(
                "functionals: alpha = {} outside (0, 1)",
                self.functionals.alpha
            ));
        }

        let e = &self.experiment;
        if !matches!(
            e.kind.as_str(),
            "simulate" | "ensemble" | "equilibria" | "verify" | "attractor"
        ) {
            issues.push(format!("experiment: unknown kind {:?}", e.kind));
        }
        if !(e.t_final > 0.0) {
            issues.push("experiment: t_final must be positive".into());
        }
        if e.count < 1 {
            issues.push("experiment: ensemble count must be >= 1".into());
        }
        if let Some(b) = e.burn_in {
            if !(b < e.t_final) {
                issues.push(format!(
                    "experiment: burn_in = {b} must be below t_final = {}",
                    e.t_final
                ));
            }
        }
        if let InitialSpec::Text(t) = &e.initial {
            if t != "zero" && parse_random_spec(t).is_none() {
                issues.push(format!("experiment: cannot parse initial spec {t:?}"));
            }
        }
        if let ForcingSpec::Text(t) = &self.model.forcing {
            if t != "zero" && parse_random_spec(t).is_none() {
                issues.push(format!("model: cannot parse forcing spec {t:?}"));
            }
        }

        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Validation(issues))
        }
    }

    pub fn region(&self) -> Region {
        attractor_lab_core::model::region_classify(self.model.m, self.model.p)
    }

    pub fn build_basis(&self) -> Result<Arc<SpectralBasis<f64>>, ConfigError> {
        let quad = self
            .domain
            .quad_points_per_axis
            .unwrap_or(2 * self.basis.n_per_axis);
        let domain = DomainSpec::new(&self.domain.lengths, quad)
            .map_err(|e| ConfigError::Validation(vec![e.to_string()]))?;
        SpectralBasis::build(domain, self.basis.n_per_axis)
            .map_err(|e| ConfigError::Validation(vec![e.to_string()]))
    }

    pub fn build_model(
        &self,
        basis: &Arc<SpectralBasis<f64>>,
    ) -> Result<ModelSpec<f64>, ConfigError> {
        let mk_err = |e: attractor_lab_core::ModelError| ConfigError::Validation(vec![e.to_string()]);
        let damping = match self.model.damping.as_str() {
            "power" => DampingSpec::power(self.model.m).map_err(mk_err)?,
            "power_plus_linear" => {
                DampingSpec::power_plus_linear(self.model.m, self.model.gamma).map_err(mk_err)?
            }
            "linear" => DampingSpec::linear(self.model.gamma).map_err(mk_err)?,
            "zero" => DampingSpec::none(),
            "table" => {
                let t = self.model.damping_table.as_ref().expect("validated");
                DampingSpec::from_table(t.s.clone(), t.values.clone(), self.model.m)
                    .map_err(mk_err)?
            }
            _ => unreachable!("validated"),
        };
        let mut nonlinearity = match self.model.nonlinearity.as_str() {
            "power" => NonlinearitySpec::power(self.model.p).map_err(mk_err)?,
            "power_minus_linear" => {
                NonlinearitySpec::power_minus_linear(self.model.p, self.model.lambda)
                    .map_err(mk_err)?
            }
            "zero" => NonlinearitySpec::zero(),
            "table" => {
                let t = self.model.nonlinearity_table.as_ref().expect("validated");
                NonlinearitySpec::from_table(t.s.clone(), t.values.clone(), self.model.p)
                    .map_err(mk_err)?
            }
            _ => unreachable!("validated"),
        };
        if let Some(level) = self.model.truncation_level {
            nonlinearity = nonlinearity.truncate(level);
        }
        nonlinearity.omega = self.model.omega;
        if let Some(k) = self.model.k_omega {
            nonlinearity.k_omega = k;
        }
        let forcing = self.build_forcing(basis)?;
        let mut model = ModelSpec::new(damping, nonlinearity, forcing);
        if self.model.k_omega.is_none() {
            let k = attractor_lab_core::model::validation::required_k_omega(&model, self.model.omega);
            model.nonlinearity.k_omega = k.max(model.nonlinearity.k_omega);
        }
        Ok(model)
    }

    fn build_forcing(&self, basis: &Arc<SpectralBasis<f64>>) -> Result<Field<f64>, ConfigError> {
        match &self.model.forcing {
            ForcingSpec::Text(t) if t == "zero" => Ok(Field::zero(basis.clone())),
            ForcingSpec::Text(t) => {
                let (seed, amplitude, decay) =
                    parse_random_spec(t).expect("validated forcing spec");
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let sampler = attractor_lab_core::analysis::FieldSampler { amplitude, decay };
                Ok(sampler.sample(basis, &mut rng))
            }
            ForcingSpec::Coeffs(list) => {
                let mut coeffs = vec![0.0; basis.count()];
                if list.len() > basis.count() {
                    return Err(ConfigError::Validation(vec![format!(
                        "forcing coefficient list ({}) longer than basis ({})",
                        list.len(),
                        basis.count()
                    )]));
                }
                coeffs[..list.len()].copy_from_slice(list);
                Ok(Field::from_coeffs(basis.clone(), coeffs))
            }
        }
    }

    pub fn build_initial(
        &self,
        basis: &Arc<SpectralBasis<f64>>,
    ) -> Result<State<f64>, ConfigError> {
        match &self.experiment.initial {
            InitialSpec::Text(t) if t == "zero" => Ok(State::new(
                Field::zero(basis.clone()),
                Field::zero(basis.clone()),
                0.0,
            )),
            InitialSpec::Text(t) => {
                let (seed, amplitude, decay) =
                    parse_random_spec(t).expect("validated initial spec");
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let sampler = attractor_lab_core::analysis::FieldSampler { amplitude, decay };
                let u = sampler.sample(basis, &mut rng);
                let v = sampler.sample(basis, &mut rng);
                Ok(State::new(u, v, 0.0))
            }
            InitialSpec::Modes { u, v } => {
                let fill = |pairs: &[(usize, f64)]| -> Result<Field<f64>, ConfigError> {
                    let mut coeffs = vec![0.0; basis.count()];
                    for &(mode, value) in pairs {
                        if mode == 0 || mode > basis.count() {
                            return Err(ConfigError::Validation(vec![format!(
                                "initial: mode index {mode} out of range 1..={}",
                                basis.count()
                            )]));
                        }
                        coeffs[mode - 1] = value;
                    }
                    Ok(Field::from_coeffs(basis.clone(), coeffs))
                };
                Ok(State::new(fill(u)?, fill(v)?, 0.0))
            }
        }
    }

    pub fn build_solver_config(&self) -> SolverConfig<f64> {
        SolverConfig {
            dt: self.solver.dt,
            scheme: if self.solver.scheme == "rk4_explicit" {
                Scheme::Rk4Explicit
            } else {
                Scheme::ImplicitMidpoint
            },
            newton_tol: self.solver.newton_tol,
            newton_max_iters: self.solver.newton_max_iters,
            record_every: self.solver.record_every,
        }
    }
}

/// Parse `random(seed, amplitude, decay)`.
fn parse_random_spec(text: &str) -> Option<(u64, f64, f64)> {
    let inner = text.trim().strip_prefix("random(")?.strip_suffix(')')?;
    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return None;
    }
    Some((
        parts[0].parse().ok()?,
        parts[1].parse().ok()?,
        parts[2].parse().ok()?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[domain]
lengths = [1.0]

[basis]
n_per_axis = 16

[model]
damping = "power"
m = 3.0
nonlinearity = "power"
p = 3.0
"#;

    #[test]
    fn minimal_config_loads_with_defaults() {
        let config = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(config.domain.quad_points_per_axis, Some(32));
        assert_eq!(config.solver.dt, 1e-3);
        assert_eq!(config.master_seed, 1);
        let basis = config.build_basis().unwrap();
        assert_eq!(basis.count(), 16);
        let model = config.build_model(&basis).unwrap();
        assert_eq!(model.damping.m(), 3.0);
    }

    #[test]
    fn uncovered_region_named_in_error() {
        let text = MINIMAL.replace("m = 3.0", "m = 1.2").replace("p = 3.0", "p = 4.0");
        match RunConfig::from_toml(&text) {
            Err(ConfigError::Validation(issues)) => {
                assert!(
                    issues.iter().any(|m| m.contains("p <= min(5, 3m)")),
                    "{issues:?}"
                );
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn quadrature_floor_named_in_error() {
        let text = format!("{MINIMAL}\n[domain.extra]");
        assert!(RunConfig::from_toml(&text).is_err()); // unknown key -> parse error

        let text = MINIMAL.replace("lengths = [1.0]", "lengths = [1.0]\nquad_points_per_axis = 16");
        match RunConfig::from_toml(&text) {
            Err(ConfigError::Validation(issues)) => {
                assert!(issues.iter().any(|m| m.contains("anti-aliasing floor")), "{issues:?}");
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn all_violations_reported_together() {
        let text = MINIMAL
            .replace("m = 3.0", "m = 0.5")
            .replace("p = 3.0", "p = 7.0");
        match RunConfig::from_toml(&text) {
            Err(ConfigError::Validation(issues)) => {
                assert!(issues.len() >= 2, "{issues:?}");
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn forcing_and_initial_specs_parse() {
        assert_eq!(parse_random_spec("random(7, 0.5, 2.0)"), Some((7, 0.5, 2.0)));
        assert_eq!(parse_random_spec("zero"), None);

        let text = format!(
            "{MINIMAL}\n[experiment]\nkind = \"simulate\"\ninitial = {{ u = [[1, 1.0]], v = [] }}\n"
        );
        let config = RunConfig::from_toml(&text).unwrap();
        let basis = config.build_basis().unwrap();
        let state = config.build_initial(&basis).unwrap();
        assert_eq!(state.u.coeffs()[0], 1.0);
    }
}
