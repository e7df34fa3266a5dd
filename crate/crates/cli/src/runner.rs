//! Experiment orchestration: builds the core objects from a config, runs the
//! requested experiment, and persists artifacts. Deterministic for a fixed
//! (config, master seed): re-running reproduces every artifact byte for byte,
//! regardless of the worker count.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use attractor_lab_core::analysis::{
    absorbing_report, attractor_experiment, check_gronwall, check_interpolation,
    find_g_delta_constant, run_ensemble, verify_g_delta, verify_interpolation, BallRadiusSearch,
    EnsembleSpec, HProfile, InequalityCertificate, InterpolationExponents,
};
use attractor_lab_core::functionals::{self, FunctionalParams};
use attractor_lab_core::model::{exponent_k, validate_assumptions, ModelSpec};
use attractor_lab_core::solver::{
    simulate, solve_equilibrium, Outcome, State, TrajectoryRecord,
};
use attractor_lab_core::spectral::{Field, FieldSnapshot, SpectralBasis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::artifacts::{
    write_cloud_gz, write_json, write_monitors_csv, write_states_gz, CloudPoint,
};
use crate::config::{ConfigError, RunConfig};
use crate::manifest::{
    RunManifest, OUTCOME_COMPLETED, OUTCOME_DIVERGED, OUTCOME_FAILED,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("run diverged at t = {t}")]
    Diverged { t: f64 },
    #[error("experiment failed: {0}")]
    Experiment(String),
    #[error("i/o failure: {0}")]
    Io(#[from] anyhow::Error),
}

impl HarnessError {
    /// Process exit code: 2 validation, 3 experiment failure, 4 divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Experiment(_) | HarnessError::Io(_) => 3,
            HarnessError::Diverged { .. } => 4,
        }
    }
}

type Basis = Arc<SpectralBasis<f64>>;

/// Run the configured experiment into `out_dir`. The manifest is written with
/// a "running" outcome before any work starts and finalized at the end, so a
/// crash leaves a visibly unfinished manifest behind.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<RunManifest, HarnessError> {
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::Io(e.into()))?;
    let mut manifest = RunManifest::new(config);
    manifest
        .write(out_dir)
        .map_err(|e| HarnessError::Io(e.into()))?;

    let result = dispatch(config, out_dir, &mut manifest);
    match &result {
        Ok(()) => {
            if manifest.outcome == crate::manifest::OUTCOME_RUNNING {
                manifest.outcome = OUTCOME_COMPLETED.into();
            }
        }
        Err(HarnessError::Diverged { t }) => {
            manifest.outcome = OUTCOME_DIVERGED.into();
            manifest.diagnostics.push(format!("diverged at t = {t}"));
            if manifest.region == "uncovered" {
                manifest
                    .diagnostics
                    .push("exponent pair lies in the uncovered region".into());
            }
        }
        Err(e) => {
            manifest.outcome = OUTCOME_FAILED.into();
            manifest.diagnostics.push(e.to_string());
        }
    }
    manifest
        .write(out_dir)
        .map_err(|e| HarnessError::Io(e.into()))?;
    result.map(|()| manifest)
}

fn dispatch(
    config: &RunConfig,
    out_dir: &Path,
    manifest: &mut RunManifest,
) -> Result<(), HarnessError> {
    let basis = config.build_basis()?;
    let model = config.build_model(&basis)?;

    let report = validate_assumptions(&model, basis.lambda_1());
    write_json(&out_dir.join("validation.json"), &report)?;
    manifest.artifacts.push("validation.json".into());

    match config.experiment.kind.as_str() {
        "simulate" => simulate_experiment(config, out_dir, manifest, &basis, &model),
        "ensemble" => ensemble_experiment(config, out_dir, manifest, &model),
        "equilibria" => equilibria_experiment(config, out_dir, manifest, &basis, &model),
        "verify" => verify_experiment(config, out_dir, manifest, &basis, &model),
        "attractor" => attractor_run(config, out_dir, manifest, &basis, &model),
        other => Err(HarnessError::Experiment(format!(
            "unknown experiment kind {other:?}"
        ))),
    }
}

fn derive_params(
    config: &RunConfig,
    model: &ModelSpec<f64>,
    basis: &Basis,
    initial: &State<f64>,
) -> FunctionalParams<f64> {
    let report = validate_assumptions(model, basis.lambda_1());
    FunctionalParams::derive(model, &report, initial, config.functionals.alpha)
}

fn simulate_experiment(
    config: &RunConfig,
    out_dir: &Path,
    manifest: &mut RunManifest,
    basis: &Basis,
    model: &ModelSpec<f64>,
) -> Result<(), HarnessError> {
    let initial = config.build_initial(basis)?;
    let params = derive_params(config, model, basis, &initial);
    manifest.derived_params = Some(crate::manifest::DerivedParams::of(&params));
    let record = simulate(
        &initial,
        config.experiment.t_final,
        &config.build_solver_config(),
        model,
        &params,
        config.master_seed,
    )
    .map_err(|e| HarnessError::Experiment(e.to_string()))?;

    write_monitors_csv(&out_dir.join("monitors.csv"), &record)?;
    write_states_gz(&out_dir.join("states.jsonl.gz"), &record)?;
    manifest.artifacts.push("monitors.csv".into());
    manifest.artifacts.push("states.jsonl.gz".into());
    manifest.run_seeds.push(config.master_seed);

    if let Outcome::Diverged { t } = record.outcome {
        return Err(HarnessError::Diverged { t });
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleRunMetrics {
    pub index: usize,
    pub seed: u64,
    pub outcome: String,
    pub initial_h_norm: f64,
    pub big_r: f64,
    pub space_time_integral: f64,
    /// space-time integral / (R^6 + R^5 T)
    pub space_time_ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DoublingCheck {
    pub rho_star_base: f64,
    pub rho_star_doubled: f64,
    pub relative_change: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleArtifact {
    pub absorbing: attractor_lab_core::analysis::AbsorbingReport,
    pub runs: Vec<EnsembleRunMetrics>,
    pub max_space_time_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doubling: Option<DoublingCheck>,
}

fn ensemble_spec(config: &RunConfig, model: &ModelSpec<f64>, horizon: f64) -> EnsembleSpec<f64> {
    EnsembleSpec {
        count: config.experiment.count,
        seed: config.master_seed,
        radius: config.experiment.radius,
        decay: config.experiment.decay,
        horizon,
        model: model.clone(),
        solver: config.build_solver_config(),
        alpha: config.functionals.alpha,
    }
}

fn collect_records(
    results: Vec<Result<TrajectoryRecord<f64>, attractor_lab_core::SolverError>>,
) -> Result<Vec<TrajectoryRecord<f64>>, HarnessError> {
    let mut records = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => {
                return Err(HarnessError::Experiment(format!(
                    "trajectory {i} failed: {e}"
                )))
            }
        }
    }
    Ok(records)
}

pub fn ensemble_metrics(records: &[TrajectoryRecord<f64>], horizon: f64) -> Vec<EnsembleRunMetrics> {
    records
        .iter()
        .enumerate()
        .map(|(index, rec)| {
            let r = functionals::big_r(rec, horizon);
            let st = rec
                .monitors
                .last()
                .map(|m| m.st_norm_cum)
                .unwrap_or(0.0);
            let denom = r.powi(6) + r.powi(5) * horizon;
            let first = rec.monitors.first();
            EnsembleRunMetrics {
                index,
                seed: rec.meta.seed,
                outcome: match rec.outcome {
                    Outcome::Completed => "completed".into(),
                    Outcome::Diverged { t } => format!("diverged at t = {t}"),
                },
                initial_h_norm: first
                    .map(|m| (m.ut_l2 * m.ut_l2 + m.grad_u_l2 * m.grad_u_l2).sqrt())
                    .unwrap_or(0.0),
                big_r: r,
                space_time_integral: st,
                space_time_ratio: st / denom,
            }
        })
        .collect()
}

fn ensemble_experiment(
    config: &RunConfig,
    out_dir: &Path,
    manifest: &mut RunManifest,
    model: &ModelSpec<f64>,
) -> Result<(), HarnessError> {
    let horizon = config.experiment.t_final;
    let spec = ensemble_spec(config, model, horizon);
    let records = collect_records(run_ensemble(&spec))?;
    let params = spec.derive_params(&spec.initial_state(0));
    manifest.derived_params = Some(crate::manifest::DerivedParams::of(&params));
    let search = BallRadiusSearch {
        entry_fraction: 0.5,
        entry_time: Some(0.5 * horizon),
    };
    let absorbing = absorbing_report(&records, &spec, &params, search)
        .map_err(|e| HarnessError::Experiment(e.to_string()))?;

    let runs_dir = out_dir.join("runs");
    std::fs::create_dir_all(&runs_dir).map_err(|e| HarnessError::Io(e.into()))?;
    for (i, rec) in records.iter().enumerate() {
        let dir = runs_dir.join(format!("run_{i:03}"));
        std::fs::create_dir_all(&dir).map_err(|e| HarnessError::Io(e.into()))?;
        write_monitors_csv(&dir.join("monitors.csv"), rec)?;
        manifest.run_seeds.push(rec.meta.seed);
    }

    let runs = ensemble_metrics(&records, horizon);
    let max_ratio = runs
        .iter()
        .map(|r| r.space_time_ratio)
        .fold(0.0f64, f64::max);

    let doubling = if config.experiment.horizon_doubling_check {
        let spec2 = ensemble_spec(config, model, 2.0 * horizon);
        let records2 = collect_records(run_ensemble(&spec2))?;
        let absorbing2 = absorbing_report(&records2, &spec2, &params, search)
            .map_err(|e| HarnessError::Experiment(e.to_string()))?;
        let rel = (absorbing2.rho_star - absorbing.rho_star).abs() / absorbing.rho_star.max(1e-300);
        Some(DoublingCheck {
            rho_star_base: absorbing.rho_star,
            rho_star_doubled: absorbing2.rho_star,
            relative_change: rel,
        })
    } else {
        None
    };

    let artifact = EnsembleArtifact {
        absorbing,
        runs,
        max_space_time_ratio: max_ratio,
        doubling,
    };
    write_json(&out_dir.join("ensemble.json"), &artifact)?;
    manifest.artifacts.push("ensemble.json".into());
    manifest.artifacts.push("runs/".into());
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumEntry {
    pub snapshot: FieldSnapshot,
    pub residual: f64,
    pub iterations: usize,
    /// max drift of the flow started at (u, 0) over the cross-check window
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flow_drift: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriaArtifact {
    pub solutions: Vec<EquilibriumEntry>,
    pub failures: Vec<String>,
}

/// Newton solves from the zero guess plus seeded random guesses; distinct
/// roots are kept (H1-distance dedup) and cross-checked as flow fixed points.
pub fn find_equilibria(
    config: &RunConfig,
    basis: &Basis,
    model: &ModelSpec<f64>,
) -> (Vec<attractor_lab_core::solver::EquilibriumResult<f64>>, Vec<String>) {
    let mut guesses = vec![Field::zero(basis.clone())];
    for i in 0..config.experiment.extra_guesses {
        let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed);
        rng.set_stream(1000 + i as u64);
        let sampler = attractor_lab_core::analysis::FieldSampler {
            amplitude: 1.0,
            decay: 1.5,
        };
        guesses.push(sampler.sample(basis, &mut rng));
    }
    let mut solutions: Vec<attractor_lab_core::solver::EquilibriumResult<f64>> = Vec::new();
    let mut failures = Vec::new();
    for (i, guess) in guesses.iter().enumerate() {
        match solve_equilibrium(guess, model, 1e-10, 60) {
            Ok(res) => {
                let distinct = solutions.iter().all(|kept| {
                    let d = res.field.sub(&kept.field).fractional_norm(1.0);
                    d > 1e-6 * (1.0 + res.field.fractional_norm(1.0))
                });
                if distinct {
                    solutions.push(res);
                }
            }
            Err(e) => failures.push(format!("guess {i}: {e}")),
        }
    }
    (solutions, failures)
}

fn equilibria_experiment(
    config: &RunConfig,
    out_dir: &Path,
    manifest: &mut RunManifest,
    basis: &Basis,
    model: &ModelSpec<f64>,
) -> Result<(), HarnessError> {
    let (solutions, failures) = find_equilibria(config, basis, model);
    if solutions.is_empty() {
        return Err(HarnessError::Experiment(format!(
            "no equilibrium found: {failures:?}"
        )));
    }
    let do_flow_check = !model.damping.is_zero();
    let mut entries = Vec::new();
    for res in &solutions {
        let flow_drift = if do_flow_check {
            let initial = State::new(res.field.clone(), Field::zero(basis.clone()), 0.0);
            let params = derive_params(config, model, basis, &initial);
            let mut cfg = config.build_solver_config();
            cfg.newton_tol = cfg.newton_tol.min(1e-12);
            let horizon = config.experiment.t_final.min(5.0);
            let record = simulate(&initial, horizon, &cfg, model, &params, config.master_seed)
                .map_err(|e| HarnessError::Experiment(e.to_string()))?;
            let drift = record
                .states
                .iter()
                .map(|s| s.h_distance(&initial))
                .fold(0.0f64, f64::max);
            Some(drift)
        } else {
            None
        };
        entries.push(EquilibriumEntry {
            snapshot: FieldSnapshot::of(&res.field),
            residual: res.residual,
            iterations: res.iterations,
            flow_drift,
        });
    }
    let artifact = EquilibriaArtifact {
        solutions: entries,
        failures,
    };
    write_json(&out_dir.join("equilibria.json"), &artifact)?;
    manifest.artifacts.push("equilibria.json".into());
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyArtifact {
    pub certificates: Vec<InequalityCertificate>,
    pub all_pass: bool,
}

/// The three certificate families of the verification suite, each re-checked
/// on an independently generated denser grid.
pub fn verify_certificates(
    config: &RunConfig,
    basis: &Basis,
    model: &ModelSpec<f64>,
) -> Result<Vec<InequalityCertificate>, HarnessError> {
    let mut certs = Vec::new();
    let densify = config.experiment.verify_densify;

    for &delta in &config.experiment.deltas {
        let cert = find_g_delta_constant(&model.damping, delta)
            .map_err(|e| HarnessError::Experiment(e.to_string()))?;
        let mut dense = verify_g_delta(&model.damping, &cert, densify);
        dense.inequality = format!("g_delta_dense_{densify}x");
        certs.push(cert);
        certs.push(dense);
    }

    let m = model.damping.m();
    let k = exponent_k(m).map_err(|e| {
        HarnessError::Experiment(format!("verify needs a power-type damping exponent: {e}"))
    })?;
    let theta = 0.5;
    let trials = config.experiment.interpolation_trials;
    let instances = [
        ("interpolation_k_m", InterpolationExponents { lambda: k, mu: m, k, q: 1.0, m }),
        (
            "interpolation_km1_2",
            InterpolationExponents { lambda: k - 1.0, mu: 2.0, k, q: 1.0, m },
        ),
    ];
    for (name, exps) in instances {
        let mut cert = check_interpolation(basis, exps, theta, trials, config.master_seed)
            .map_err(|e| HarnessError::Experiment(e.to_string()))?;
        cert.inequality = name.into();
        let c_theta = cert.constant("C_theta").unwrap_or(f64::NAN);
        let mut dense = verify_interpolation(
            basis,
            exps,
            theta,
            c_theta,
            trials * densify,
            config.master_seed + 1,
        );
        dense.inequality = format!("{name}_dense_{densify}x");
        certs.push(cert);
        certs.push(dense);
    }

    let steps = 20_000;
    for &alpha in &config.experiment.gronwall_alphas {
        let profiles: [(&str, HProfile<f64>, HProfile<f64>, f64, f64, f64); 3] = [
            ("gronwall_const_source", HProfile::Zero, HProfile::Constant(0.4), 2.0, 0.0, 0.4),
            ("gronwall_pure_decay", HProfile::Zero, HProfile::Zero, 1.0, 0.0, 0.0),
            (
                "gronwall_oscillatory",
                HProfile::Cosine { amplitude: alpha, period: 5.0 },
                HProfile::Constant(0.2),
                1.5,
                1.0,
                0.2,
            ),
        ];
        for (name, h1, h2, phi0, a, b) in profiles {
            let mut cert = check_gronwall(&h1, &h2, phi0, alpha, a, b, 20.0, steps)
                .map_err(|e| HarnessError::Experiment(e.to_string()))?;
            cert.inequality = format!("{name}_alpha_{alpha}");
            let mut dense = check_gronwall(&h1, &h2, phi0, alpha, a, b, 20.0, steps * densify)
                .map_err(|e| HarnessError::Experiment(e.to_string()))?;
            dense.inequality = format!("{name}_alpha_{alpha}_dense_{densify}x");
            certs.push(cert);
            certs.push(dense);
        }
    }
    Ok(certs)
}

fn verify_experiment(
    config: &RunConfig,
    out_dir: &Path,
    manifest: &mut RunManifest,
    basis: &Basis,
    model: &ModelSpec<f64>,
) -> Result<(), HarnessError> {
    let certificates = verify_certificates(config, basis, model)?;
    let all_pass = certificates.iter().all(|c| c.pass);
    let artifact = VerifyArtifact {
        certificates,
        all_pass,
    };
    write_json(&out_dir.join("certificates.json"), &artifact)?;
    manifest.artifacts.push("certificates.json".into());
    if !all_pass {
        let failing: Vec<String> = artifact
            .certificates
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.inequality.clone())
            .collect();
        return Err(HarnessError::Experiment(format!(
            "certificates failed: {failing:?}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttractorArtifact {
    pub report: attractor_lab_core::analysis::AttractorReport,
    pub equilibria_count: usize,
    /// max over cloud points of the H-distance to the equilibrium set
    pub max_cloud_distance_to_equilibria: f64,
}

fn attractor_run(
    config: &RunConfig,
    out_dir: &Path,
    manifest: &mut RunManifest,
    basis: &Basis,
    model: &ModelSpec<f64>,
) -> Result<(), HarnessError> {
    let burn_in = config
        .experiment
        .burn_in
        .unwrap_or(0.6 * config.experiment.t_final);
    let spec = ensemble_spec(config, model, config.experiment.t_final);
    manifest.derived_params = Some(crate::manifest::DerivedParams::of(
        &spec.derive_params(&spec.initial_state(0)),
    ));
    let (report, cloud, records) =
        attractor_experiment(&spec, burn_in, config.experiment.stride)
            .map_err(|e| HarnessError::Experiment(e.to_string()))?;
    for rec in &records {
        manifest.run_seeds.push(rec.meta.seed);
    }

    let (solutions, _failures) = find_equilibria(config, basis, model);
    if solutions.is_empty() {
        return Err(HarnessError::Experiment("no equilibrium found".into()));
    }
    let eq_states: Vec<State<f64>> = solutions
        .iter()
        .map(|res| State::new(res.field.clone(), Field::zero(basis.clone()), 0.0))
        .collect();
    let max_dist = attractor_lab_core::analysis::semidistance(&cloud.states, &eq_states);

    let artifact = AttractorArtifact {
        report,
        equilibria_count: eq_states.len(),
        max_cloud_distance_to_equilibria: max_dist,
    };
    write_json(&out_dir.join("attractor.json"), &artifact)?;
    let points: Vec<CloudPoint> = cloud
        .states
        .iter()
        .map(|s| CloudPoint {
            t: s.t,
            u: s.u.coeffs().to_vec(),
            v: s.v.coeffs().to_vec(),
        })
        .collect();
    write_cloud_gz(&out_dir.join("cloud.jsonl.gz"), &points)?;
    manifest.artifacts.push("attractor.json".into());
    manifest.artifacts.push("cloud.jsonl.gz".into());
    Ok(())
}

/// Resolve the output directory: explicit flag, config value, the
/// `ATTRACTOR_LAB_OUT` root, or `./runs/<stem>`.
pub fn resolve_out_dir(
    flag: Option<PathBuf>,
    config: &RunConfig,
    config_path: &Path,
) -> PathBuf {
    if let Some(dir) = flag {
        return dir;
    }
    if let Some(dir) = &config.output_dir {
        return PathBuf::from(dir);
    }
    let stem = config_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    if let Ok(root) = std::env::var("ATTRACTOR_LAB_OUT") {
        return PathBuf::from(root).join(stem);
    }
    PathBuf::from("runs").join(stem)
}
