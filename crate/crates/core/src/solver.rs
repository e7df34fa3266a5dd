//! Time integration of the Galerkin ODE system, the steady-state Newton
//! solver, and the difference-quotient diagnostic.
//!
//! The default scheme is the implicit midpoint rule: the damping term is stiff
//! for large exponents, the stage equation inherits monotonicity from g' >= 0,
//! and the scheme tracks the energy identity at second order. The stage system
//! on the 2N mode coefficients is solved by Newton with a dense LU; the
//! factorization is reused across iterations and steps while convergence stays
//! fast, and rebuilt at the current iterate when it does not.

use std::sync::Arc;

use crate::error::SolverError;
use crate::functionals::{self, FunctionalParams};
use crate::linalg::LuFactors;
use crate::model::ModelSpec;
use crate::scalar::{cast, Scalar};
use crate::spectral::{Field, SpectralBasis};

/// Phase-space point `(u, u_t)` at time `t`.
#[derive(Debug, Clone)]
pub struct State<T> {
    pub u: Field<T>,
    pub v: Field<T>,
    pub t: T,
}

impl<T: Scalar> State<T> {
    pub fn new(u: Field<T>, v: Field<T>, t: T) -> Self {
        assert_eq!(u.basis().id(), v.basis().id(), "u and v must share a basis");
        Self { u, v, t }
    }

    pub fn basis(&self) -> &Arc<SpectralBasis<T>> {
        self.u.basis()
    }

    /// Norm in H = H^1_0 x L^2: sqrt(|grad u|^2 + |v|^2).
    pub fn h_norm(&self) -> T {
        let gu = self.u.fractional_norm(T::one());
        let vn = self.v.fractional_norm(T::zero());
        (gu * gu + vn * vn).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite() && self.t.is_finite()
    }

    /// H-distance to another state on the same basis.
    pub fn h_distance(&self, other: &State<T>) -> T {
        let du = self.u.sub(&other.u);
        let dv = self.v.sub(&other.v);
        let gu = du.fractional_norm(T::one());
        let vn = dv.fractional_norm(T::zero());
        (gu * gu + vn * vn).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Scheme {
    ImplicitMidpoint,
    Rk4Explicit,
}

#[derive(Debug, Clone)]
pub struct SolverConfig<T> {
    pub dt: T,
    pub scheme: Scheme,
    pub newton_tol: T,
    pub newton_max_iters: usize,
    /// full-state snapshot stride (monitors are recorded every step)
    pub record_every: usize,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            dt: cast(1e-3),
            scheme: Scheme::ImplicitMidpoint,
            newton_tol: cast(1e-10),
            newton_max_iters: 25,
            record_every: 10,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    fn assert_valid(&self) {
        assert!(self.dt > T::zero(), "dt must be positive");
        assert!(self.newton_tol >= cast(1e-14), "newton_tol below 1e-14");
        assert!(self.newton_max_iters >= 1);
        assert!(self.record_every >= 1);
    }

    pub fn hash(&self) -> u64 {
        let parts = [
            self.dt.as_f64().to_bits(),
            match self.scheme {
                Scheme::ImplicitMidpoint => 0u64,
                Scheme::Rk4Explicit => 1,
            },
            self.newton_tol.as_f64().to_bits(),
            self.newton_max_iters as u64,
            self.record_every as u64,
        ];
        let mut h = 0xcbf29ce484222325u64;
        for p in parts {
            for b in p.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        }
        h
    }
}

/// Per-sample monitored quantities (one row per time step).
#[derive(Debug, Clone, Copy)]
pub struct MonitorSample<T> {
    pub t: T,
    pub energy: T,
    pub energy_alpha: T,
    pub strong_energy: T,
    pub lyapunov: T,
    pub ut_l2: T,
    pub grad_u_l2: T,
    pub diss_cum: T,
    pub ut_m1_cum: T,
    pub st_norm_cum: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome<T> {
    Completed,
    Diverged { t: T },
}

/// Run metadata carried by every record; enough to recompute the composite
/// estimates offline.
#[derive(Debug, Clone, Copy)]
pub struct RecordMeta<T> {
    pub model_hash: u64,
    pub config_hash: u64,
    pub seed: u64,
    pub dt: T,
    pub m: T,
    pub k: T,
    pub phi_l2: T,
}

/// Time series of states and monitors from one trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord<T> {
    pub states: Vec<State<T>>,
    pub monitors: Vec<MonitorSample<T>>,
    pub meta: RecordMeta<T>,
    pub outcome: Outcome<T>,
}

impl<T: Scalar> TrajectoryRecord<T> {
    pub fn final_state(&self) -> &State<T> {
        self.states.last().expect("record holds at least the initial state")
    }

    pub fn completed(&self) -> bool {
        matches!(self.outcome, Outcome::Completed)
    }
}

/// Right-hand side of the Galerkin system with cut-off `n`:
/// `du = v`, `dv = -lambda u - P_n g(v) - P_n f(u) + P_n phi`.
pub fn rhs<T: Scalar>(
    state: &State<T>,
    model: &ModelSpec<T>,
    n: usize,
) -> (Field<T>, Field<T>) {
    let basis = state.basis().clone();
    assert!(n <= basis.count(), "cut-off beyond basis size");
    let (du, dv) = rhs_raw(
        state.u.coeffs(),
        state.v.coeffs(),
        model,
        &basis,
        n,
    );
    (
        Field::from_coeffs(basis.clone(), du),
        Field::from_coeffs(basis, dv),
    )
}

fn rhs_raw<T: Scalar>(
    u: &[T],
    v: &[T],
    model: &ModelSpec<T>,
    basis: &SpectralBasis<T>,
    n: usize,
) -> (Vec<T>, Vec<T>) {
    let count = basis.count();
    let du = v.to_vec();
    let mut dv = vec![T::zero(); count];
    for i in 0..count {
        dv[i] = -basis.eigenvalues()[i] * u[i];
    }
    if !model.damping.is_zero() {
        let mut grid = basis.to_grid(v);
        for g in grid.iter_mut() {
            *g = model.damping.eval(*g);
        }
        let coeffs = basis.to_coeffs(&grid).expect("grid from basis");
        for i in 0..n {
            dv[i] -= coeffs[i];
        }
    }
    if !model.nonlinearity.is_zero() {
        let mut grid = basis.to_grid(u);
        for g in grid.iter_mut() {
            *g = model.nonlinearity.eval(*g);
        }
        let coeffs = basis.to_coeffs(&grid).expect("grid from basis");
        for i in 0..n {
            dv[i] -= coeffs[i];
        }
    }
    for i in 0..n {
        dv[i] += model.forcing.coeffs()[i];
    }
    (du, dv)
}

/// Accumulate `scale * S^T diag(d) S` into the dense `n x n` matrix `out`;
/// `d` holds the pointwise derivative already multiplied by the quadrature
/// weight. Exploits symmetry (upper triangle accumulated, then mirrored).
fn accumulate_pointwise_jacobian<T: Scalar>(
    basis: &SpectralBasis<T>,
    d: &[T],
    scale: T,
    out: &mut [T],
) {
    let s = basis.full_eval_matrix();
    let n = basis.count();
    for (q, &dq) in d.iter().enumerate() {
        let c0 = scale * dq;
        if c0 == T::zero() {
            continue;
        }
        let row = &s[q * n..(q + 1) * n];
        for i in 0..n {
            let c = c0 * row[i];
            let base = i * n;
            for j in i..n {
                out[base + j] += c * row[j];
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            out[j * n + i] = out[i * n + j];
        }
    }
}

/// Factorized stage system of the implicit midpoint rule.
///
/// The 2N Newton matrix `[[I, -h I], [h (L + A_f), I + h A_g]]` (h = dt/2)
/// reduces by block elimination to the N x N system
/// `(I + h A_g + h^2 L + h^2 A_f) dv = r_v - h (L + A_f) r_u`,
/// after which `du = r_u + h dv`. `a_f` is kept for the right-hand-side
/// product so a cached (possibly stale) factorization stays self-consistent.
struct ReducedFactors<T> {
    lu: LuFactors<T>,
    a_f: Option<Vec<T>>,
}

struct MidpointWorkspace<T> {
    factors: Option<ReducedFactors<T>>,
    /// previous step needed many iterations: refresh eagerly
    rebuild_next: bool,
}

impl<T> MidpointWorkspace<T> {
    fn new() -> Self {
        Self {
            factors: None,
            rebuild_next: false,
        }
    }
}

fn build_reduced_factors<T: Scalar>(
    yu: &[T],
    yv: &[T],
    h2: T,
    model: &ModelSpec<T>,
    basis: &SpectralBasis<T>,
) -> Option<ReducedFactors<T>> {
    let n = basis.count();
    let w = basis.quad_weight();
    let a_f = if model.nonlinearity.is_zero() {
        None
    } else {
        let grid = basis.to_grid(yu);
        let d: Vec<T> = grid
            .iter()
            .map(|&g| w * model.nonlinearity.eval_prime(g))
            .collect();
        let mut a = vec![T::zero(); n * n];
        accumulate_pointwise_jacobian(basis, &d, T::one(), &mut a);
        Some(a)
    };

    let h22 = h2 * h2;
    let mut m = vec![T::zero(); n * n];
    if !model.damping.is_zero() {
        let grid = basis.to_grid(yv);
        let d: Vec<T> = grid
            .iter()
            .map(|&g| w * model.damping.eval_prime(g))
            .collect();
        accumulate_pointwise_jacobian(basis, &d, h2, &mut m);
    }
    if let Some(a) = &a_f {
        for (mij, aij) in m.iter_mut().zip(a) {
            *mij += h22 * *aij;
        }
    }
    for i in 0..n {
        m[i * n + i] += T::one() + h22 * basis.eigenvalues()[i];
    }
    LuFactors::factorize(m, n).map(|lu| ReducedFactors { lu, a_f })
}

impl<T: Scalar> ReducedFactors<T> {
    /// Solve the full 2N Newton system given the residual split (r_u, r_v);
    /// overwrites both halves with (du, dv).
    fn solve(&self, h2: T, eigenvalues: &[T], r_u: &mut [T], r_v: &mut [T]) {
        let n = r_u.len();
        // r_v <- r_v - h (L + A_f) r_u
        if let Some(a) = &self.a_f {
            for i in 0..n {
                let row = &a[i * n..(i + 1) * n];
                let mut acc = T::zero();
                for j in 0..n {
                    acc += row[j] * r_u[j];
                }
                r_v[i] -= h2 * (eigenvalues[i] * r_u[i] + acc);
            }
        } else {
            for i in 0..n {
                r_v[i] -= h2 * eigenvalues[i] * r_u[i];
            }
        }
        self.lu.solve(r_v);
        for i in 0..n {
            r_u[i] += h2 * r_v[i];
        }
    }
}

fn l2_norm<T: Scalar>(x: &[T]) -> T {
    x.iter().map(|&a| a * a).sum::<T>().sqrt()
}

fn midpoint_step<T: Scalar>(
    state: &State<T>,
    config: &SolverConfig<T>,
    model: &ModelSpec<T>,
    ws: &mut MidpointWorkspace<T>,
) -> Result<State<T>, SolverError> {
    let basis = state.basis().clone();
    let n = basis.count();
    let dt = config.dt;
    let h2 = dt * cast::<T>(0.5);

    let zu = state.u.coeffs();
    let zv = state.v.coeffs();

    // predictor: explicit half step
    let (fu0, fv0) = rhs_raw(zu, zv, model, &basis, n);
    let mut yu: Vec<T> = zu.iter().zip(&fu0).map(|(&a, &d)| a + h2 * d).collect();
    let mut yv: Vec<T> = zv.iter().zip(&fv0).map(|(&a, &d)| a + h2 * d).collect();

    let mut ru = vec![T::zero(); n];
    let mut rv = vec![T::zero(); n];
    let mut last_norm = T::infinity();
    let mut final_norm = T::nan();
    for iter in 0..config.newton_max_iters {
        let (fu, fv) = rhs_raw(&yu, &yv, model, &basis, n);
        for i in 0..n {
            ru[i] = yu[i] - zu[i] - h2 * fu[i];
            rv[i] = yv[i] - zv[i] - h2 * fv[i];
        }
        let rn = (l2_norm(&ru).powi(2) + l2_norm(&rv).powi(2)).sqrt();
        final_norm = rn;
        if !rn.is_finite() {
            return Err(SolverError::NonFinite {
                t: state.t.as_f64(),
            });
        }
        if rn <= config.newton_tol {
            // a step that needed many iterations leaves a refresh request
            ws.rebuild_next = iter > 4;
            let un: Vec<T> = yu.iter().zip(zu).map(|(&y, &z)| y + y - z).collect();
            let vn: Vec<T> = yv.iter().zip(zv).map(|(&y, &z)| y + y - z).collect();
            let next = State::new(
                Field::from_coeffs(basis.clone(), un),
                Field::from_coeffs(basis, vn),
                state.t + dt,
            );
            if !next.is_finite() {
                return Err(SolverError::NonFinite {
                    t: next.t.as_f64(),
                });
            }
            return Ok(next);
        }
        // keep the cached factorization while the cheap quasi-Newton
        // iterations contract; refresh on schedule or when the residual grows
        let diverging = rn > last_norm * cast(10.0);
        let scheduled = iter == 2 || iter == 6 || iter + 2 >= config.newton_max_iters;
        if ws.factors.is_none() || (iter == 0 && ws.rebuild_next) || scheduled || diverging {
            ws.factors = Some(
                build_reduced_factors(&yu, &yv, h2, model, &basis)
                    .ok_or(SolverError::SingularJacobian { step: iter })?,
            );
            ws.rebuild_next = false;
        }
        last_norm = rn;
        let factors = ws.factors.as_ref().unwrap();
        factors.solve(h2, basis.eigenvalues(), &mut ru, &mut rv);
        for i in 0..n {
            yu[i] -= ru[i];
            yv[i] -= rv[i];
        }
    }
    Err(SolverError::NewtonFailed {
        t: state.t.as_f64(),
        residual: final_norm.as_f64(),
        iters: config.newton_max_iters,
    })
}

fn rk4_step<T: Scalar>(
    state: &State<T>,
    config: &SolverConfig<T>,
    model: &ModelSpec<T>,
) -> Result<State<T>, SolverError> {
    let basis = state.basis().clone();
    let n = basis.count();
    let dt = config.dt;
    let half = cast::<T>(0.5);
    let sixth = cast::<T>(1.0 / 6.0);
    let two = cast::<T>(2.0);

    let u0 = state.u.coeffs();
    let v0 = state.v.coeffs();
    let stage = |u: &[T], v: &[T]| rhs_raw(u, v, model, &basis, n);
    let add = |a: &[T], b: &[T], s: T| -> Vec<T> {
        a.iter().zip(b).map(|(&x, &y)| x + s * y).collect()
    };

    let (k1u, k1v) = stage(u0, v0);
    let (k2u, k2v) = stage(&add(u0, &k1u, half * dt), &add(v0, &k1v, half * dt));
    let (k3u, k3v) = stage(&add(u0, &k2u, half * dt), &add(v0, &k2v, half * dt));
    let (k4u, k4v) = stage(&add(u0, &k3u, dt), &add(v0, &k3v, dt));

    let combine = |x0: &[T], k1: &[T], k2: &[T], k3: &[T], k4: &[T]| -> Vec<T> {
        (0..x0.len())
            .map(|i| x0[i] + dt * sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]))
            .collect()
    };
    let next = State::new(
        Field::from_coeffs(basis.clone(), combine(u0, &k1u, &k2u, &k3u, &k4u)),
        Field::from_coeffs(basis, combine(v0, &k1v, &k2v, &k3v, &k4v)),
        state.t + dt,
    );
    if !next.is_finite() {
        return Err(SolverError::NonFinite {
            t: next.t.as_f64(),
        });
    }
    Ok(next)
}

/// Advance one step with the configured scheme.
pub fn step<T: Scalar>(
    state: &State<T>,
    config: &SolverConfig<T>,
    model: &ModelSpec<T>,
) -> Result<State<T>, SolverError> {
    config.assert_valid();
    match config.scheme {
        Scheme::ImplicitMidpoint => {
            let mut ws = MidpointWorkspace::new();
            midpoint_step(state, config, model, &mut ws)
        }
        Scheme::Rk4Explicit => rk4_step(state, config, model),
    }
}

const ENERGY_DIVERGENCE_CAP: f64 = 1e12;

/// Integrate to `t_final`, recording monitors every step and state snapshots
/// every `record_every` steps (plus first and last). Cumulative integrals use
/// the trapezoid rule on the per-step rate samples, matching the scheme order.
///
/// Divergence (non-finite state or energy beyond 1e12) ends the run early with
/// a `Diverged` outcome; Newton failures are hard errors carrying the time.
pub fn simulate<T: Scalar>(
    initial: &State<T>,
    t_final: T,
    config: &SolverConfig<T>,
    model: &ModelSpec<T>,
    params: &FunctionalParams<T>,
    seed: u64,
) -> Result<TrajectoryRecord<T>, SolverError> {
    config.assert_valid();
    assert!(t_final > T::zero(), "t_final must be positive");
    let n_steps = (t_final.as_f64() / config.dt.as_f64()).round().max(1.0) as usize;

    let meta = RecordMeta {
        model_hash: model.hash(),
        config_hash: config.hash(),
        seed,
        dt: config.dt,
        m: model.damping.m(),
        k: params.k,
        phi_l2: model.phi_l2(),
    };

    let mut states = Vec::new();
    let mut monitors: Vec<MonitorSample<T>> = Vec::with_capacity(n_steps + 1);

    let mut ws = MidpointWorkspace::new();
    let mut current = initial.clone();
    let mut diss_cum = T::zero();
    let mut ut_m1_cum = T::zero();
    let mut st_cum = T::zero();
    let mut prev_rates = functionals::monitor_rates(&current, model, params);

    let first = monitor_sample(&current, model, params, diss_cum, ut_m1_cum, st_cum);
    states.push(current.clone());
    monitors.push(first);

    let half_dt = config.dt * cast::<T>(0.5);
    for step_idx in 1..=n_steps {
        let next = match config.scheme {
            Scheme::ImplicitMidpoint => midpoint_step(&current, config, model, &mut ws),
            Scheme::Rk4Explicit => rk4_step(&current, config, model),
        };
        let next = match next {
            Ok(s) => s,
            Err(SolverError::NonFinite { t }) => {
                return Ok(TrajectoryRecord {
                    states,
                    monitors,
                    meta,
                    outcome: Outcome::Diverged { t: cast(t) },
                });
            }
            Err(e) => return Err(e),
        };

        let rates = functionals::monitor_rates(&next, model, params);
        diss_cum += half_dt * (prev_rates.dissipation + rates.dissipation);
        ut_m1_cum += half_dt * (prev_rates.ut_m_plus_1 + rates.ut_m_plus_1);
        st_cum += half_dt * (prev_rates.space_time + rates.space_time);
        prev_rates = rates;

        let sample = monitor_sample(&next, model, params, diss_cum, ut_m1_cum, st_cum);
        if !sample.energy.is_finite() || sample.energy.as_f64().abs() > ENERGY_DIVERGENCE_CAP {
            monitors.push(sample);
            states.push(next.clone());
            return Ok(TrajectoryRecord {
                states,
                monitors,
                meta,
                outcome: Outcome::Diverged { t: next.t },
            });
        }
        monitors.push(sample);
        if step_idx % config.record_every == 0 || step_idx == n_steps {
            states.push(next.clone());
        }
        current = next;
    }

    Ok(TrajectoryRecord {
        states,
        monitors,
        meta,
        outcome: Outcome::Completed,
    })
}

fn monitor_sample<T: Scalar>(
    state: &State<T>,
    model: &ModelSpec<T>,
    params: &FunctionalParams<T>,
    diss_cum: T,
    ut_m1_cum: T,
    st_cum: T,
) -> MonitorSample<T> {
    let energy = functionals::energy_e(state, model);
    MonitorSample {
        t: state.t,
        energy,
        energy_alpha: energy + params.alpha * state.u.l2_dot(&state.v),
        strong_energy: functionals::strong_energy(state, model, params),
        lyapunov: functionals::lyapunov(state, model),
        ut_l2: state.v.fractional_norm(T::zero()),
        grad_u_l2: state.u.fractional_norm(T::one()),
        diss_cum,
        ut_m1_cum,
        st_norm_cum: st_cum,
    }
}

/// Result of the steady-state Newton solve.
#[derive(Debug, Clone)]
pub struct EquilibriumResult<T> {
    pub field: Field<T>,
    pub iterations: usize,
    pub residual: T,
}

/// Solve `-Delta u + P_N f(u) = P_N phi` by Newton with the spectral Jacobian
/// `diag(lambda) + S^T diag(w f'(u)) S` and simple backtracking.
pub fn solve_equilibrium<T: Scalar>(
    guess: &Field<T>,
    model: &ModelSpec<T>,
    tol: T,
    max_iters: usize,
) -> Result<EquilibriumResult<T>, SolverError> {
    assert!(tol > T::zero());
    let basis = guess.basis().clone();
    let n = basis.count();
    let w = basis.quad_weight();

    let residual_of = |a: &[T]| -> Vec<T> {
        let mut r = vec![T::zero(); n];
        for i in 0..n {
            r[i] = basis.eigenvalues()[i] * a[i] - model.forcing.coeffs()[i];
        }
        if !model.nonlinearity.is_zero() {
            let mut grid = basis.to_grid(a);
            for g in grid.iter_mut() {
                *g = model.nonlinearity.eval(*g);
            }
            let coeffs = basis.to_coeffs(&grid).expect("grid from basis");
            for i in 0..n {
                r[i] += coeffs[i];
            }
        }
        r
    };

    let mut a = guess.coeffs().to_vec();
    let mut r = residual_of(&a);
    let mut rn = l2_norm(&r);
    for iter in 0..max_iters {
        if rn <= tol {
            return Ok(EquilibriumResult {
                field: Field::from_coeffs(basis, a),
                iterations: iter,
                residual: rn,
            });
        }
        let mut jac = vec![T::zero(); n * n];
        for i in 0..n {
            jac[i * n + i] = basis.eigenvalues()[i];
        }
        if !model.nonlinearity.is_zero() {
            let grid = basis.to_grid(&a);
            let d: Vec<T> = grid
                .iter()
                .map(|&g| w * model.nonlinearity.eval_prime(g))
                .collect();
            accumulate_pointwise_jacobian(&basis, &d, T::one(), &mut jac);
        }
        let lu = LuFactors::factorize(jac, n)
            .ok_or(SolverError::SingularJacobian { step: iter })?;
        let mut delta = r.clone();
        lu.solve(&mut delta);

        // backtracking: accept the first step that reduces the residual
        let mut lam = T::one();
        let mut accepted = false;
        for _ in 0..10 {
            let trial: Vec<T> = a.iter().zip(&delta).map(|(&x, &d)| x - lam * d).collect();
            let tr = residual_of(&trial);
            let trn = l2_norm(&tr);
            if trn < rn || trn <= tol {
                a = trial;
                r = tr;
                rn = trn;
                accepted = true;
                break;
            }
            lam *= cast(0.5);
        }
        if !accepted {
            return Err(SolverError::EquilibriumFailed {
                residual: rn.as_f64(),
                iters: iter,
            });
        }
    }
    if rn <= tol {
        return Ok(EquilibriumResult {
            field: Field::from_coeffs(basis, a),
            iterations: max_iters,
            residual: rn,
        });
    }
    Err(SolverError::EquilibriumFailed {
        residual: rn.as_f64(),
        iters: max_iters,
    })
}

fn state_at<T: Scalar>(
    record: &TrajectoryRecord<T>,
    t: T,
) -> Result<(Field<T>, Field<T>), SolverError> {
    let states = &record.states;
    let t0 = states.first().map(|s| s.t).unwrap_or_else(T::zero);
    let t1 = states.last().map(|s| s.t).unwrap_or_else(T::zero);
    let eps = cast::<T>(1e-9) * (T::one() + t.abs());
    if t < t0 - eps || t > t1 + eps {
        return Err(SolverError::OutOfRecordRange {
            t: t.as_f64(),
            h: 0.0,
        });
    }
    // binary search for the bracketing samples
    let mut lo = 0usize;
    let mut hi = states.len() - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if states[mid].t <= t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sl = &states[lo];
    if (sl.t - t).abs() <= eps {
        return Ok((sl.u.clone(), sl.v.clone()));
    }
    let sr = &states[hi];
    if (sr.t - t).abs() <= eps {
        return Ok((sr.u.clone(), sr.v.clone()));
    }
    let theta = (t - sl.t) / (sr.t - sl.t);
    let interp = |a: &Field<T>, b: &Field<T>| a.scale(T::one() - theta).add(&b.scale(theta));
    Ok((interp(&sl.u, &sr.u), interp(&sl.v, &sr.v)))
}

/// Difference quotient `(D_h u, D_h u_t)` at time `t`; samples are linearly
/// interpolated between recorded snapshots when `t` or `t + h` fall between
/// them.
pub fn difference_quotient<T: Scalar>(
    record: &TrajectoryRecord<T>,
    t: T,
    h: T,
) -> Result<(Field<T>, Field<T>), SolverError> {
    assert!(h > T::zero(), "difference quotient needs h > 0");
    let (u0, v0) = state_at(record, t)?;
    let (u1, v1) = state_at(record, t + h).map_err(|_| SolverError::OutOfRecordRange {
        t: t.as_f64(),
        h: h.as_f64(),
    })?;
    let inv = T::one() / h;
    Ok((u1.sub(&u0).scale(inv), v1.sub(&v0).scale(inv)))
}
