//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `--nocapture` to see them). Expensive fixtures (the standard run,
//! the trajectory ensembles, the gradient-regime cloud) are computed once and
//! shared across criteria.

use std::path::Path;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use attractor_lab::config::RunConfig;
use attractor_lab::runner::{run as harness_run, verify_certificates};
use attractor_lab::thresholds;
use attractor_lab_core::analysis::{
    absorbing_report, attractor_experiment, continuous_dependence_ratio, run_ensemble,
    semidistance, AttractorReport, BallRadiusSearch, EnsembleSpec,
};
use attractor_lab_core::functionals::{self, FunctionalParams};
use attractor_lab_core::model::{validate_assumptions, DampingSpec, ModelSpec, NonlinearitySpec};
use attractor_lab_core::solver::{
    simulate, solve_equilibrium, SolverConfig, State, TrajectoryRecord,
};
use attractor_lab_core::spectral::{DomainSpec, Field, SpectralBasis};
use tempfile::TempDir;

type Basis = Arc<SpectralBasis<f64>>;
type Record = TrajectoryRecord<f64>;

fn basis_1d(n: usize) -> Basis {
    let domain = DomainSpec::new(&[1.0], 2 * n).unwrap();
    SpectralBasis::build(domain, n).unwrap()
}

fn standard_model(basis: &Basis) -> ModelSpec<f64> {
    ModelSpec::new(
        DampingSpec::power(3.0).unwrap(),
        NonlinearitySpec::power(3.0).unwrap(),
        Field::zero(basis.clone()),
    )
}

fn gradient_model(basis: &Basis, gamma: f64) -> ModelSpec<f64> {
    ModelSpec::new(
        DampingSpec::power_plus_linear(3.0, gamma).unwrap(),
        NonlinearitySpec::power_minus_linear(3.0, 0.5).unwrap(),
        Field::zero(basis.clone()),
    )
}

/// The standard initial data (modes 1..4 only, so it is exactly representable
/// in every basis of the refinement studies).
fn standard_initial(basis: &Basis) -> State<f64> {
    let n = basis.count();
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    u[0] = 0.1;
    u[1] = -0.04;
    u[2] = 0.01;
    v[0] = 0.03;
    v[3] = -0.02;
    State::new(
        Field::from_coeffs(basis.clone(), u),
        Field::from_coeffs(basis.clone(), v),
        0.0,
    )
}

fn derived_params(model: &ModelSpec<f64>, initial: &State<f64>) -> FunctionalParams<f64> {
    let report = validate_assumptions(model, model.forcing.basis().lambda_1());
    FunctionalParams::derive(model, &report, initial, 0.1)
}

fn standard_config(dt: f64) -> SolverConfig<f64> {
    SolverConfig {
        dt,
        newton_tol: 1e-12,
        record_every: 10,
        ..SolverConfig::default()
    }
}

fn max_residual(record: &Record) -> f64 {
    functionals::energy_identity_residual(record)
        .iter()
        .fold(0.0f64, |a, &r| a.max(r))
}

struct StandardFixture {
    basis: Basis,
    model: ModelSpec<f64>,
    params: FunctionalParams<f64>,
    base: Record,
    halved: Record,
    elapsed: Duration,
}

static STANDARD: OnceLock<StandardFixture> = OnceLock::new();

fn standard_fixture() -> &'static StandardFixture {
    STANDARD.get_or_init(|| {
        let basis = basis_1d(32);
        let model = standard_model(&basis);
        let initial = standard_initial(&basis);
        let params = derived_params(&model, &initial);
        let start = Instant::now();
        let base = simulate(&initial, 10.0, &standard_config(1e-3), &model, &params, 42).unwrap();
        let halved =
            simulate(&initial, 10.0, &standard_config(5e-4), &model, &params, 42).unwrap();
        StandardFixture {
            basis,
            model,
            params,
            base,
            halved,
            elapsed: start.elapsed(),
        }
    })
}

fn ensemble_spec(seed: u64, horizon: f64, basis: &Basis) -> EnsembleSpec<f64> {
    EnsembleSpec {
        count: 20,
        seed,
        radius: 5.0,
        decay: 2.0,
        horizon,
        model: standard_model(basis),
        solver: SolverConfig {
            dt: 1e-2,
            newton_tol: 1e-12,
            record_every: 5,
            ..SolverConfig::default()
        },
        alpha: 0.1,
    }
}

struct EnsembleFixture {
    spec: EnsembleSpec<f64>,
    params: FunctionalParams<f64>,
    base: Vec<Record>,
    doubled: Vec<Record>,
}

static ENSEMBLE: OnceLock<EnsembleFixture> = OnceLock::new();

fn ensemble_fixture() -> &'static EnsembleFixture {
    ENSEMBLE.get_or_init(|| {
        let basis = basis_1d(32);
        let spec = ensemble_spec(42, 100.0, &basis);
        let base = run_ensemble(&spec)
            .into_iter()
            .collect::<Result<Vec<_>, _>>()
            .expect("ensemble trajectories complete");
        let spec2 = ensemble_spec(42, 200.0, &basis);
        let doubled = run_ensemble(&spec2)
            .into_iter()
            .collect::<Result<Vec<_>, _>>()
            .expect("doubled-horizon trajectories complete");
        let params = spec.derive_params(&spec.initial_state(0));
        EnsembleFixture {
            spec,
            params,
            base,
            doubled,
        }
    })
}

struct GradientFixture {
    report: AttractorReport,
    cloud_states: Vec<State<f64>>,
    records: Vec<Record>,
    equilibrium: State<f64>,
}

static GRADIENT: OnceLock<GradientFixture> = OnceLock::new();

fn gradient_fixture() -> &'static GradientFixture {
    GRADIENT.get_or_init(|| {
        let basis = basis_1d(32);
        // gamma = 0.2 keeps the T/2 snapshot mid-transient, so the semidistance
        // comparison T vs T/2 contrasts genuine values rather than noise
        let model = gradient_model(&basis, 0.2);
        let spec = EnsembleSpec {
            count: 6,
            seed: 42,
            radius: 1.0,
            decay: 2.0,
            horizon: 200.0,
            model: model.clone(),
            solver: SolverConfig {
                dt: 1e-2,
                newton_tol: 1e-12,
                record_every: 10,
                ..SolverConfig::default()
            },
            alpha: 0.1,
        };
        let (report, cloud, records) = attractor_experiment(&spec, 120.0, 5).unwrap();
        let eq = solve_equilibrium(&Field::zero(basis.clone()), &model, 1e-12, 50).unwrap();
        let equilibrium = State::new(eq.field, Field::zero(basis.clone()), 0.0);
        GradientFixture {
            report,
            cloud_states: cloud.states,
            records,
            equilibrium,
        }
    })
}

fn verdict(name: &str, pass: bool, detail: &str) -> bool {
    println!(
        "criterion {name}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

#[test]
fn criterion_01_energy_identity() {
    let fx = standard_fixture();
    let base = max_residual(&fx.base);
    let halved = max_residual(&fx.halved);
    let factor = base / halved;
    let (lo, hi) = thresholds::ENERGY_IDENTITY_REFINEMENT;
    let pass = base <= thresholds::ENERGY_IDENTITY_MAX_RESIDUAL
        && (lo..=hi).contains(&factor)
        && fx.elapsed <= Duration::from_secs(60);
    let detail = format!(
        "max residual {base:.3e} (<= 1e-6), refinement factor {factor:.2} in [3, 5], runtime {:.1?} (<= 60 s)",
        fx.elapsed
    );
    assert!(verdict("01 (energy identity)", pass, &detail), "{detail}");
}

#[test]
fn criterion_02_linear_mode_oracle() {
    let start = Instant::now();
    let basis = basis_1d(1);
    let gamma = 0.2;
    let model = ModelSpec::new(
        DampingSpec::linear(gamma).unwrap(),
        NonlinearitySpec::zero(),
        Field::zero(basis.clone()),
    );
    let initial = State::new(
        Field::from_coeffs(basis.clone(), vec![1.0]),
        Field::zero(basis.clone()),
        0.0,
    );
    let config = SolverConfig {
        dt: 1e-3,
        newton_tol: 1e-12,
        record_every: 1,
        ..SolverConfig::default()
    };
    let params = FunctionalParams::basic(0.1, 1e-2, 0.0, 1.0);
    let record = simulate(&initial, 1.0, &config, &model, &params, 42).unwrap();
    let lambda_1 = basis.lambda_1();
    let w = (lambda_1 - gamma * gamma / 4.0).sqrt();
    let max_err = record
        .states
        .iter()
        .map(|s| {
            let exact = (-gamma * s.t / 2.0).exp()
                * ((w * s.t).cos() + gamma / (2.0 * w) * (w * s.t).sin());
            (s.u.coeffs()[0] - exact).abs()
        })
        .fold(0.0f64, f64::max);
    let elapsed = start.elapsed();
    let pass = max_err <= thresholds::OSCILLATOR_MAX_COEFF_ERROR
        && elapsed <= Duration::from_secs(5);
    let detail = format!(
        "max coefficient error {max_err:.3e} (<= 1e-5), runtime {elapsed:.1?} (<= 5 s)"
    );
    assert!(verdict("02 (linear-mode oracle)", pass, &detail), "{detail}");
}

/// H1 x L2 distance between final states on nested bases (coefficients of the
/// smaller basis are the leading coefficients of the larger one in 1D).
fn nested_h_distance(small: &State<f64>, big: &State<f64>) -> f64 {
    let nb = big.basis().count();
    let ns = small.basis().count();
    assert!(ns <= nb);
    let mut acc = 0.0;
    for i in 0..nb {
        let (us, vs) = if i < ns {
            (small.u.coeffs()[i], small.v.coeffs()[i])
        } else {
            (0.0, 0.0)
        };
        let du = us - big.u.coeffs()[i];
        let dv = vs - big.v.coeffs()[i];
        acc += big.basis().eigenvalues()[i] * du * du + dv * dv;
    }
    acc.sqrt()
}

#[test]
fn criterion_03_galerkin_convergence() {
    let finals: Vec<State<f64>> = [8usize, 16, 32, 64]
        .iter()
        .map(|&n| {
            let basis = basis_1d(n);
            let model = standard_model(&basis);
            let initial = standard_initial(&basis);
            let params = derived_params(&model, &initial);
            let config = SolverConfig {
                dt: 1e-3,
                newton_tol: 1e-12,
                record_every: 1_000_000,
                ..SolverConfig::default()
            };
            simulate(&initial, 10.0, &config, &model, &params, 42)
                .unwrap()
                .final_state()
                .clone()
        })
        .collect();
    let e8 = nested_h_distance(&finals[0], &finals[1]);
    let e16 = nested_h_distance(&finals[1], &finals[2]);
    let e32 = nested_h_distance(&finals[2], &finals[3]);
    let pass = e8 > e16 && e16 > e32 && e32 > 0.0;
    let detail =
        format!("|u_2N(T) - u_N(T)| over N in {{8, 16, 32}}: {e8:.3e} > {e16:.3e} > {e32:.3e}");
    assert!(verdict("03 (Galerkin convergence)", pass, &detail), "{detail}");
}

#[test]
fn criterion_04_inequality_certificates() {
    let start = Instant::now();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/verify.toml");
    let config = RunConfig::from_path(&path).unwrap();
    let basis = config.build_basis().unwrap();
    let model = config.build_model(&basis).unwrap();
    let certs = verify_certificates(&config, &basis, &model).unwrap();
    let elapsed = start.elapsed();
    let failed: Vec<&str> = certs
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.inequality.as_str())
        .collect();
    let pass = failed.is_empty() && elapsed <= Duration::from_secs(120);
    let detail = format!(
        "{} certificates (search + 10x dense) all pass, runtime {elapsed:.1?} (<= 120 s){}",
        certs.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failing: {failed:?}")
        }
    );
    assert!(verdict("04 (inequality certificates)", pass, &detail), "{detail}");
}

fn kendall_tau(pairs: &[(f64, f64)]) -> f64 {
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    for i in 0..pairs.len() {
        for j in (i + 1)..pairs.len() {
            let dx = pairs[i].0 - pairs[j].0;
            let dy = pairs[i].1 - pairs[j].1;
            let s = dx * dy;
            if s > 0.0 {
                concordant += 1;
            } else if s < 0.0 {
                discordant += 1;
            }
        }
    }
    (concordant - discordant) as f64 / ((concordant + discordant).max(1) as f64)
}

#[test]
fn criterion_05_absorbing_set() {
    let fx = ensemble_fixture();
    let search = BallRadiusSearch {
        entry_fraction: 0.5,
        entry_time: Some(50.0),
    };
    let report = absorbing_report(&fx.base, &fx.spec, &fx.params, search).unwrap();
    let mut spec2 = fx.spec.clone();
    spec2.horizon = 200.0;
    let report2 = absorbing_report(&fx.doubled, &spec2, &fx.params, search).unwrap();
    let rel_change = (report2.rho_star - report.rho_star).abs() / report.rho_star;

    let all_enter = report.trajectories.len() == 20
        && report.diverged.is_empty()
        && report
            .trajectories
            .iter()
            .all(|t| t.entry_time <= 100.0 && t.post_entry_sup <= report.rho_star + 1e-12);
    let pairs: Vec<(f64, f64)> = report
        .trajectories
        .iter()
        .map(|t| (t.initial_h_norm, t.entry_time))
        .collect();
    let tau = kendall_tau(&pairs);
    let pass = all_enter
        && rel_change <= thresholds::ABSORBING_DOUBLING_REL_CHANGE
        && tau >= -0.1;
    let detail = format!(
        "rho* = {:.4}, all 20 enter and stay, doubling change {rel_change:.2e} (<= 1e-2), entry-time/norm Kendall tau {tau:.2}",
        report.rho_star
    );
    assert!(verdict("05 (absorbing set)", pass, &detail), "{detail}");
}

#[test]
fn criterion_06_lyapunov_monotonicity() {
    let mut worst_ratio = f64::NEG_INFINITY;
    let mut count = 0;
    let mut check = |records: &[Record]| {
        for rec in records {
            let slack = thresholds::LYAPUNOV_SLACK_PER_DT * rec.meta.dt;
            for w in rec.monitors.windows(2) {
                let increase = w[1].lyapunov - w[0].lyapunov;
                worst_ratio = worst_ratio.max(increase / slack);
            }
            count += 1;
        }
    };
    check(std::slice::from_ref(&standard_fixture().base));
    check(&ensemble_fixture().base);
    check(&gradient_fixture().records);
    let pass = worst_ratio <= 1.0;
    let detail = format!(
        "{count} damped runs, worst increase = {worst_ratio:.2e} x slack (<= 1)"
    );
    assert!(verdict("06 (Lyapunov monotonicity)", pass, &detail), "{detail}");
}

fn max_space_time_ratio(records: &[Record], horizon: f64) -> f64 {
    records
        .iter()
        .map(|rec| {
            let r = functionals::big_r(rec, horizon);
            let st = rec.monitors.last().map(|m| m.st_norm_cum).unwrap_or(0.0);
            st / (r.powi(6) + r.powi(5) * horizon)
        })
        .fold(0.0f64, f64::max)
}

#[test]
fn criterion_07_space_time_boundedness() {
    let fx = ensemble_fixture();
    let ratio_a = max_space_time_ratio(&fx.base, 100.0);
    let basis = basis_1d(32);
    let alt_spec = ensemble_spec(4242, 100.0, &basis);
    let alt = run_ensemble(&alt_spec)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .unwrap();
    let ratio_b = max_space_time_ratio(&alt, 100.0);
    let stability = ratio_a.max(ratio_b) / ratio_a.min(ratio_b);
    let pass = ratio_a.is_finite()
        && ratio_b.is_finite()
        && ratio_a > 0.0
        && ratio_b > 0.0
        && stability <= thresholds::SPACE_TIME_RATIO_STABILITY;
    let detail = format!(
        "max ratios {ratio_a:.3e} (seed 42) vs {ratio_b:.3e} (seed 4242), stability factor {stability:.2} (<= 2)"
    );
    assert!(verdict("07 (space-time boundedness)", pass, &detail), "{detail}");
}

#[test]
fn criterion_08_continuous_dependence() {
    let fx = standard_fixture();
    let perturbed_run = |eps: f64| {
        let mut initial = standard_initial(&fx.basis);
        initial.u.coeffs_mut()[0] += eps;
        simulate(&initial, 10.0, &standard_config(1e-3), &fx.model, &fx.params, 42).unwrap()
    };
    let run_a = perturbed_run(1e-6);
    let run_b = perturbed_run(5e-7);
    let ratio_a = continuous_dependence_ratio(&fx.base, &run_a).unwrap();
    let ratio_b = continuous_dependence_ratio(&fx.base, &run_b).unwrap();
    let agreement = (ratio_a.sup_ratio - ratio_b.sup_ratio).abs() / ratio_b.sup_ratio;
    let pass = ratio_a.sup_ratio.is_finite()
        && ratio_b.sup_ratio.is_finite()
        && agreement <= thresholds::CONT_DEP_RATIO_AGREEMENT;
    let detail = format!(
        "sup ratios {:.4} (1e-6) vs {:.4} (5e-7), agreement {:.2}% (<= 10%)",
        ratio_a.sup_ratio,
        ratio_b.sup_ratio,
        agreement * 100.0
    );
    assert!(verdict("08 (continuous dependence)", pass, &detail), "{detail}");
}

#[test]
fn criterion_09_gradient_regime_attractor() {
    let fx = gradient_fixture();
    let max_dist = semidistance(&fx.cloud_states, std::slice::from_ref(&fx.equilibrium));
    // the semidistance to the reference cloud must have settled: compare the
    // smoothed series at the horizon against the value near T/2
    let idx_half = fx
        .report
        .probe_times
        .iter()
        .position(|&t| t >= 100.0)
        .unwrap_or(0);
    let at_half = fx.report.smoothed[idx_half];
    let at_end = *fx.report.smoothed.last().unwrap();
    let pass = max_dist <= thresholds::ATTRACTOR_EQUILIBRIUM_DIST
        && fx.report.trend_nonincreasing
        && at_end < at_half;
    let detail = format!(
        "cloud-to-equilibrium distance {max_dist:.3e} (<= 1e-2), trend non-increasing, semidistance {at_end:.2e} at T < {at_half:.2e} at T/2"
    );
    assert!(verdict("09 (gradient-regime attractor)", pass, &detail), "{detail}");
}

#[test]
fn criterion_10_regularity_surrogate() {
    let v_sup_at = |n: usize| {
        let basis = basis_1d(n);
        let model = gradient_model(&basis, 0.5);
        let nm = basis.count();
        let mut u = vec![0.0; nm];
        let mut v = vec![0.0; nm];
        u[0] = 0.5;
        u[1] = -0.2;
        u[2] = 0.1;
        u[4] = 0.05;
        v[0] = 0.1;
        v[1] = 0.05;
        let initial = State::new(
            Field::from_coeffs(basis.clone(), u),
            Field::from_coeffs(basis.clone(), v),
            0.0,
        );
        let params = derived_params(&model, &initial);
        let config = SolverConfig {
            dt: 2e-3,
            newton_tol: 1e-12,
            record_every: 10,
            ..SolverConfig::default()
        };
        let record = simulate(&initial, 20.0, &config, &model, &params, 42).unwrap();
        attractor_lab_core::analysis::regularity_check(&record, &model, 5.0)
            .unwrap()
            .v_sup
    };
    let v32 = v_sup_at(32);
    let v64 = v_sup_at(64);
    let change = (v64 - v32).abs() / v32;
    let pass = change <= thresholds::REGULARITY_N_CHANGE;
    let detail = format!(
        "post-burn-in V-norm sup: {v32:.6} (N=32) vs {v64:.6} (N=64), change {:.2}% (<= 20%)",
        change * 100.0
    );
    assert!(verdict("10 (regularity surrogate)", pass, &detail), "{detail}");
}

#[test]
fn criterion_11_determinism() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");

    // the standard simulate command, twice
    let config = RunConfig::from_path(&configs.join("standard_run.toml")).unwrap();
    let dir_a = TempDir::new().unwrap();
    let dir_b = TempDir::new().unwrap();
    harness_run(&config, dir_a.path()).unwrap();
    harness_run(&config, dir_b.path()).unwrap();
    let simulate_identical = std::fs::read(dir_a.path().join("monitors.csv")).unwrap()
        == std::fs::read(dir_b.path().join("monitors.csv")).unwrap()
        && std::fs::read(dir_a.path().join("states.jsonl.gz")).unwrap()
            == std::fs::read(dir_b.path().join("states.jsonl.gz")).unwrap();

    // the verification command, twice
    let config = RunConfig::from_path(&configs.join("verify.toml")).unwrap();
    let dir_c = TempDir::new().unwrap();
    let dir_d = TempDir::new().unwrap();
    harness_run(&config, dir_c.path()).unwrap();
    harness_run(&config, dir_d.path()).unwrap();
    let verify_identical = std::fs::read(dir_c.path().join("certificates.json")).unwrap()
        == std::fs::read(dir_d.path().join("certificates.json")).unwrap();

    // a small ensemble with different worker counts
    let mut config = RunConfig::from_path(&configs.join("absorbing_ensemble.toml")).unwrap();
    config.experiment.count = 4;
    config.experiment.t_final = 5.0;
    config.experiment.horizon_doubling_check = false;
    let run_with = |workers: usize| {
        let dir = TempDir::new().unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .unwrap();
        pool.install(|| harness_run(&config, dir.path()).unwrap());
        std::fs::read(dir.path().join("ensemble.json")).unwrap()
    };
    let ensemble_identical = run_with(1) == run_with(4);

    let pass = simulate_identical && verify_identical && ensemble_identical;
    let detail = format!(
        "simulate bytes identical: {simulate_identical}; verify bytes identical: {verify_identical}; ensemble workers 1 vs 4 identical: {ensemble_identical}"
    );
    assert!(verdict("11 (determinism)", pass, &detail), "{detail}");
}
