//! Numeric certifiers for the supporting inequalities.
//!
//! Each certifier searches for the least constant making its inequality hold
//! on a sample grid (or trial set), then records enough of the grid/seed
//! description that the certificate can be re-verified offline on an
//! independently generated, denser grid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::sampler::FieldSampler;
use crate::error::AnalysisError;
use crate::model::validation::sign_symmetric_log_grid;
use crate::model::DampingSpec;
use crate::scalar::{cast, pow_abs, Scalar};
use crate::spectral::SpectralBasis;

/// Description of the sample set a certificate was checked on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridDescription {
    pub kind: String,
    pub points: usize,
    pub lo: f64,
    pub hi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

/// A certified inequality: witnessed constants, worst violation (<= 0 means
/// pass) and the slack at the edge of the sampled range.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityCertificate {
    pub inequality: String,
    pub pass: bool,
    pub constants: Vec<(String, f64)>,
    pub grid: GridDescription,
    pub max_violation: f64,
    pub margin_at_edge: f64,
    pub note: String,
}

impl InequalityCertificate {
    pub fn constant(&self, key: &str) -> Option<f64> {
        self.constants.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

const SEARCH_MAGNITUDES: usize = 400;
const GRID_LO: f64 = 1e-6;
const GRID_HI: f64 = 1e3;
const CONSTANT_CAP: f64 = 1e9;

/// Bisect the least `c` (3 significant digits) satisfying a monotone
/// predicate, doubling up from 1 first. `None` if the cap is exceeded.
fn least_constant<T: Scalar>(mut holds: impl FnMut(T) -> bool) -> Option<T> {
    let mut hi = T::one();
    let mut lo = T::zero();
    while !holds(hi) {
        lo = hi;
        hi *= cast(2.0);
        if hi.as_f64() > CONSTANT_CAP {
            return None;
        }
    }
    for _ in 0..64 {
        if (hi - lo).as_f64() <= 1e-3 * hi.as_f64() {
            break;
        }
        let mid = (hi + lo) * cast(0.5);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Worst normalized violation and normalized edge margin; violations are
/// scaled by `1 + |LHS|` per point so one tolerance works across twelve
/// orders of magnitude.
fn g_delta_violation<T: Scalar>(
    damping: &DampingSpec<T>,
    delta: T,
    c: T,
    grid: &[T],
) -> (T, T) {
    let m = damping.m();
    let exp2 = (m + T::one()) / m;
    let mut worst = T::neg_infinity();
    let mut edge = T::infinity();
    let hi = cast::<T>(GRID_HI);
    for &s in grid {
        let gs = damping.eval(s) * s;
        let rhs = c * gs + delta;
        let lhs1 = s * s + pow_abs(s, m + T::one());
        let lhs2 = pow_abs(damping.eval(s), exp2);
        let v1 = (lhs1 - rhs) / (T::one() + lhs1.abs());
        let v2 = (lhs2 - rhs) / (T::one() + lhs2.abs());
        worst = worst.max(v1).max(v2);
        if s.abs() >= hi * cast(0.999) {
            edge = edge.min(-v1).min(-v2);
        }
    }
    (worst, edge)
}

/// Least `c(delta)` so that both
/// `s^2 + |s|^(m+1) <= c g(s) s + delta` and
/// `|g(s)|^((m+1)/m) <= c g(s) s + delta`
/// hold jointly on the sign-symmetric log grid.
pub fn find_g_delta_constant<T: Scalar>(
    damping: &DampingSpec<T>,
    delta: T,
) -> Result<InequalityCertificate, AnalysisError> {
    assert!(delta > T::zero() && delta < T::one(), "delta must lie in (0, 1)");
    let grid = sign_symmetric_log_grid::<T>(SEARCH_MAGNITUDES, GRID_LO, GRID_HI);
    let tol = cast::<T>(1e-12);
    let c = least_constant(|c| g_delta_violation(damping, delta, c, &grid).0 <= tol)
        .ok_or(AnalysisError::CertifyFail { cap: CONSTANT_CAP })?;
    let (worst, edge) = g_delta_violation(damping, delta, c, &grid);
    Ok(InequalityCertificate {
        inequality: "g_delta".into(),
        pass: worst <= tol,
        constants: vec![
            ("c_delta".into(), c.as_f64()),
            ("delta".into(), delta.as_f64()),
            ("m".into(), damping.m().as_f64()),
        ],
        grid: GridDescription {
            kind: "sign_symmetric_log".into(),
            points: SEARCH_MAGNITUDES,
            lo: GRID_LO,
            hi: GRID_HI,
            seed: None,
            trials: None,
        },
        max_violation: worst.as_f64(),
        margin_at_edge: edge.as_f64(),
        note: "joint damping coercivity bounds".into(),
    })
}

/// Re-check a `g_delta` certificate on an independently generated grid with
/// `densify`-times more magnitudes.
pub fn verify_g_delta<T: Scalar>(
    damping: &DampingSpec<T>,
    certificate: &InequalityCertificate,
    densify: usize,
) -> InequalityCertificate {
    let c = cast::<T>(certificate.constant("c_delta").unwrap_or(f64::NAN));
    let delta = cast::<T>(certificate.constant("delta").unwrap_or(f64::NAN));
    let points = SEARCH_MAGNITUDES * densify;
    let grid = sign_symmetric_log_grid::<T>(points, GRID_LO, GRID_HI);
    let tol = cast::<T>(1e-12);
    let (worst, edge) = g_delta_violation(damping, delta, c, &grid);
    InequalityCertificate {
        inequality: "g_delta".into(),
        pass: worst <= tol,
        constants: certificate.constants.clone(),
        grid: GridDescription {
            kind: "sign_symmetric_log".into(),
            points,
            lo: GRID_LO,
            hi: GRID_HI,
            seed: None,
            trials: None,
        },
        max_violation: worst.as_f64(),
        margin_at_edge: edge.as_f64(),
        note: format!("re-verification at {densify}x density"),
    }
}

/// Exponent tuple of the interpolation inequality.
#[derive(Debug, Clone, Copy)]
pub struct InterpolationExponents<T> {
    pub lambda: T,
    pub mu: T,
    pub k: T,
    pub q: T,
    pub m: T,
}

impl<T: Scalar> InterpolationExponents<T> {
    /// Check conditions (i)-(iii); returns the name of the first violated one.
    pub fn violated_condition(&self) -> Option<&'static str> {
        let one = T::one();
        let eps = cast::<T>(1e-12);
        let three = cast::<T>(3.0);
        if !(self.lambda > T::zero()
            && self.mu > T::zero()
            && self.k >= one
            && self.q >= one
            && self.q <= three)
        {
            return Some("(i)");
        }
        let t2 = self.lambda / (three * self.k + three) + self.mu / (self.m + one);
        if t2 > one + eps {
            return Some("(ii)");
        }
        let t3 = (self.lambda - (self.q - one) * (self.k - one)) / (self.k + cast(5.0))
            + self.mu / (self.m + one);
        if t3 > one + eps {
            return Some("(iii)");
        }
        None
    }
}

struct InterpolationTrial<T> {
    lhs: T,
    theta_part: T,
    denom: T,
    amplitude: T,
}

fn interpolation_trials<T: Scalar>(
    basis: &std::sync::Arc<SpectralBasis<T>>,
    exps: &InterpolationExponents<T>,
    theta: T,
    trials: usize,
    seed: u64,
) -> Vec<InterpolationTrial<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amplitudes = [cast::<T>(0.3), T::one(), cast::<T>(3.0)];
    let w = basis.quad_weight();
    let q_lhs = T::one() / exps.q;
    let p3k3 = cast::<T>(3.0) * exps.k + cast::<T>(3.0);
    let six = cast::<T>(6.0);
    let m1 = exps.m + T::one();
    (0..trials)
        .map(|i| {
            let amplitude = amplitudes[i % amplitudes.len()];
            let sampler = FieldSampler {
                amplitude,
                decay: T::one(),
            };
            let phi = sampler.sample(basis, &mut rng);
            let psi = sampler.sample(basis, &mut rng);
            let phi_grid = phi.to_grid();
            let psi_grid = psi.to_grid();
            let mut acc = T::zero();
            for (&a, &b) in phi_grid.iter().zip(&psi_grid) {
                acc += pow_abs(a, exps.lambda) * pow_abs(b, exps.mu);
            }
            let lhs = (w * acc).powf(q_lhs);
            let theta_part = theta + theta * phi.lq_norm(p3k3).powf(exps.k + T::one());
            let denom = (T::one() + phi.lq_norm(six).powf(exps.lambda * m1 / exps.mu))
                * psi.lq_norm(m1).powf(m1);
            InterpolationTrial {
                lhs,
                theta_part,
                denom,
                amplitude,
            }
        })
        .collect()
}

fn interpolation_certificate<T: Scalar>(
    exps: &InterpolationExponents<T>,
    theta: T,
    c_theta: T,
    trial_data: &[InterpolationTrial<T>],
    trials: usize,
    seed: u64,
    note: String,
) -> InequalityCertificate {
    let mut worst = T::neg_infinity();
    let mut edge = T::infinity();
    let max_amp = trial_data
        .iter()
        .map(|t| t.amplitude)
        .fold(T::zero(), |a, b| a.max(b));
    for t in trial_data {
        let slack = t.theta_part + c_theta * t.denom - t.lhs;
        worst = worst.max(-slack);
        if t.amplitude == max_amp {
            edge = edge.min(slack);
        }
    }
    InequalityCertificate {
        inequality: "interpolation".into(),
        pass: worst <= cast::<T>(1e-9),
        constants: vec![
            ("C_theta".into(), c_theta.as_f64()),
            ("theta".into(), theta.as_f64()),
            ("lambda".into(), exps.lambda.as_f64()),
            ("mu".into(), exps.mu.as_f64()),
            ("k".into(), exps.k.as_f64()),
            ("q".into(), exps.q.as_f64()),
            ("m".into(), exps.m.as_f64()),
        ],
        grid: GridDescription {
            kind: "random_field_pairs".into(),
            points: 0,
            lo: 0.3,
            hi: 3.0,
            seed: Some(seed),
            trials: Some(trials),
        },
        max_violation: worst.as_f64(),
        margin_at_edge: edge.as_f64(),
        note,
    }
}

/// Find `C_theta` by bisection so that
/// `(int |phi|^lambda |psi|^mu)^(1/q) <= theta + theta |phi|_{3k+3}^{k+1}
///  + C_theta (1 + |phi|_6^{lambda(m+1)/mu}) |psi|_{m+1}^{m+1}`
/// holds on `trials` seeded random field pairs.
pub fn check_interpolation<T: Scalar>(
    basis: &std::sync::Arc<SpectralBasis<T>>,
    exps: InterpolationExponents<T>,
    theta: T,
    trials: usize,
    seed: u64,
) -> Result<InequalityCertificate, AnalysisError> {
    assert!(theta > T::zero());
    if let Some(cond) = exps.violated_condition() {
        return Ok(InequalityCertificate {
            inequality: "interpolation".into(),
            pass: false,
            constants: vec![
                ("lambda".into(), exps.lambda.as_f64()),
                ("mu".into(), exps.mu.as_f64()),
                ("k".into(), exps.k.as_f64()),
                ("q".into(), exps.q.as_f64()),
                ("m".into(), exps.m.as_f64()),
            ],
            grid: GridDescription {
                kind: "random_field_pairs".into(),
                points: 0,
                lo: 0.0,
                hi: 0.0,
                seed: Some(seed),
                trials: Some(0),
            },
            max_violation: f64::INFINITY,
            margin_at_edge: f64::NEG_INFINITY,
            note: format!("exponent condition {cond} violated"),
        });
    }
    let data = interpolation_trials(basis, &exps, theta, trials, seed);
    let c_least = least_constant(|c: T| {
        data.iter()
            .all(|t| t.lhs <= t.theta_part + c * t.denom + cast::<T>(1e-12))
    })
    .ok_or(AnalysisError::CertifyFail { cap: CONSTANT_CAP })?;
    // The least covering constant sits on the worst search trial and will not
    // generalize; the constant is existential, so certify a padded one and
    // record the least constant alongside.
    let c = cast::<T>(3.0) * c_least + theta;
    let mut cert = interpolation_certificate(
        &exps,
        theta,
        c,
        &data,
        trials,
        seed,
        "padded least constant (3x bisected + theta) from the trial set".into(),
    );
    cert.constants
        .push(("C_theta_least".into(), c_least.as_f64()));
    Ok(cert)
}

/// Re-check a found `C_theta` on freshly sampled trials (held-out validation).
pub fn verify_interpolation<T: Scalar>(
    basis: &std::sync::Arc<SpectralBasis<T>>,
    exps: InterpolationExponents<T>,
    theta: T,
    c_theta: T,
    trials: usize,
    seed: u64,
) -> InequalityCertificate {
    let data = interpolation_trials(basis, &exps, theta, trials, seed);
    interpolation_certificate(
        &exps,
        theta,
        c_theta,
        &data,
        trials,
        seed,
        format!("held-out verification with {trials} fresh trials"),
    )
}

/// Integrable coefficient profiles for the Gronwall certifier: closed forms
/// or a tabulated function (piecewise linear, constant extension).
#[derive(Debug, Clone)]
pub enum HProfile<T> {
    Zero,
    Constant(T),
    /// `amplitude * cos(2 pi t / period)`
    Cosine { amplitude: T, period: T },
    /// square bursts of the given height, active for `duty * period` each cycle
    Bursts { height: T, period: T, duty: T },
    /// `(t, value)` samples, strictly increasing in t
    Table(Vec<(T, T)>),
}

impl<T: Scalar> HProfile<T> {
    pub fn eval(&self, t: T) -> T {
        match self {
            HProfile::Zero => T::zero(),
            HProfile::Constant(c) => *c,
            HProfile::Cosine { amplitude, period } => {
                (cast::<T>(2.0) * T::PI() * t / *period).cos() * *amplitude
            }
            HProfile::Bursts { height, period, duty } => {
                let phase = (t / *period).fract();
                if phase < *duty {
                    *height
                } else {
                    T::zero()
                }
            }
            HProfile::Table(points) => {
                debug_assert!(points.len() >= 2);
                if t <= points[0].0 {
                    return points[0].1;
                }
                if t >= points[points.len() - 1].0 {
                    return points[points.len() - 1].1;
                }
                let i = points.partition_point(|&(x, _)| x <= t) - 1;
                let (x0, y0) = points[i];
                let (x1, y1) = points[i + 1];
                y0 + (y1 - y0) * (t - x0) / (x1 - x0)
            }
        }
    }
}

/// Certify the decay bound `Phi(t) <= mu |Phi(0)| e^(-alpha t) + rho` with
/// `mu = e^a` and `rho = b mu e^(2 alpha) / (e^alpha - 1)` along the extremal
/// solution of `Phi' + 2 alpha Phi = h1 Phi + h2`, integrated by RK4 with
/// `steps` nodes (the oracle).
///
/// The stated integral preconditions on `h1`, `h2` are verified numerically
/// first; a violated precondition yields a failed certificate naming it.
#[allow(clippy::too_many_arguments)]
pub fn check_gronwall<T: Scalar>(
    h1: &HProfile<T>,
    h2: &HProfile<T>,
    phi0: T,
    alpha: T,
    a: T,
    b: T,
    t_final: T,
    steps: usize,
) -> Result<InequalityCertificate, AnalysisError> {
    assert!(alpha > T::zero() && t_final > T::zero() && steps >= 10);
    assert!(a >= T::zero() && b >= T::zero());
    let dt = t_final / cast::<T>(steps as f64);
    let half = cast::<T>(0.5);

    // cumulative integrals of |h1| and |h2| on the oracle grid (trapezoid)
    let mut cum1 = Vec::with_capacity(steps + 1);
    let mut cum2 = Vec::with_capacity(steps + 1);
    cum1.push(T::zero());
    cum2.push(T::zero());
    let mut prev1 = h1.eval(T::zero()).abs();
    let mut prev2 = h2.eval(T::zero()).abs();
    for i in 1..=steps {
        let t = dt * cast::<T>(i as f64);
        let v1 = h1.eval(t).abs();
        let v2 = h2.eval(t).abs();
        cum1.push(cum1[i - 1] + half * dt * (prev1 + v1));
        cum2.push(cum2[i - 1] + half * dt * (prev2 + v2));
        prev1 = v1;
        prev2 = v2;
    }

    // sup over tau < t of int |h1| - alpha (t - tau) <= a
    let mut min_shift = T::infinity();
    let mut h1_excess = T::neg_infinity();
    for i in 0..=steps {
        let t = dt * cast::<T>(i as f64);
        let shifted = cum1[i] - alpha * t;
        h1_excess = h1_excess.max(shifted - min_shift);
        min_shift = min_shift.min(shifted);
    }
    let tol = cast::<T>(1e-6);
    if h1_excess > a + tol {
        return Ok(failed_gronwall_certificate(
            alpha,
            a,
            b,
            steps,
            format!(
                "precondition on h1 violated: excess {} > a = {}",
                h1_excess.as_f64(),
                a.as_f64()
            ),
        ));
    }
    // sup_t int_t^(t+1) |h2| <= b
    let window = (T::one() / dt).as_f64().round() as usize;
    let mut h2_sup = T::zero();
    if window >= 1 && window <= steps {
        for i in 0..=(steps - window) {
            h2_sup = h2_sup.max(cum2[i + window] - cum2[i]);
        }
    } else {
        h2_sup = cum2[steps];
    }
    if h2_sup > b + tol {
        return Ok(failed_gronwall_certificate(
            alpha,
            a,
            b,
            steps,
            format!(
                "precondition on h2 violated: sup window integral {} > b = {}",
                h2_sup.as_f64(),
                b.as_f64()
            ),
        ));
    }

    // oracle integration of Phi' = (h1 - 2 alpha) Phi + h2
    let mu = a.exp();
    let rho = b * mu * (cast::<T>(2.0) * alpha).exp() / (alpha.exp() - T::one());
    let rhs = |t: T, phi: T| (h1.eval(t) - cast::<T>(2.0) * alpha) * phi + h2.eval(t);
    let mut phi = phi0;
    let mut worst = T::neg_infinity();
    let mut edge = T::infinity();
    let two = cast::<T>(2.0);
    let six = cast::<T>(6.0);
    for i in 0..=steps {
        let t = dt * cast::<T>(i as f64);
        let bound = mu * phi0.abs() * (-alpha * t).exp() + rho;
        let violation = phi - bound;
        worst = worst.max(violation);
        if i == steps {
            edge = bound - phi;
        }
        if i < steps {
            let k1 = rhs(t, phi);
            let k2 = rhs(t + half * dt, phi + half * dt * k1);
            let k3 = rhs(t + half * dt, phi + half * dt * k2);
            let k4 = rhs(t + dt, phi + dt * k3);
            phi += dt / six * (k1 + two * k2 + two * k3 + k4);
        }
    }
    let scale = cast::<T>(1e-9) * (T::one() + phi0.abs() + rho.abs());
    Ok(InequalityCertificate {
        inequality: "gronwall".into(),
        pass: worst <= scale,
        constants: vec![
            ("mu".into(), mu.as_f64()),
            ("rho".into(), rho.as_f64()),
            ("alpha".into(), alpha.as_f64()),
            ("a".into(), a.as_f64()),
            ("b".into(), b.as_f64()),
            ("phi0".into(), phi0.as_f64()),
        ],
        grid: GridDescription {
            kind: "uniform_time".into(),
            points: steps,
            lo: 0.0,
            hi: t_final.as_f64(),
            seed: None,
            trials: None,
        },
        max_violation: worst.as_f64(),
        margin_at_edge: edge.as_f64(),
        note: "RK4 oracle along the extremal differential inequality".into(),
    })
}

fn failed_gronwall_certificate<T: Scalar>(
    alpha: T,
    a: T,
    b: T,
    steps: usize,
    note: String,
) -> InequalityCertificate {
    InequalityCertificate {
        inequality: "gronwall".into(),
        pass: false,
        constants: vec![
            ("alpha".into(), alpha.as_f64()),
            ("a".into(), a.as_f64()),
            ("b".into(), b.as_f64()),
        ],
        grid: GridDescription {
            kind: "uniform_time".into(),
            points: steps,
            lo: 0.0,
            hi: 0.0,
            seed: None,
            trials: None,
        },
        max_violation: f64::INFINITY,
        margin_at_edge: f64::NEG_INFINITY,
        note,
    }
}
