//! Sampled certification of the structural assumptions on `g` and `f`.
//!
//! The conditions are asymptotic, so the validator samples a sign-symmetric
//! logarithmic grid and reports the margin at the grid edge instead of
//! pretending to prove anything. Failures are report entries, never errors.

use serde::{Deserialize, Serialize};

use super::ModelSpec;
use crate::scalar::{cast, pow_abs, Scalar};

/// Sign-symmetric grid: 0 together with +-`n_magnitudes` log-spaced points in
/// `[lo, hi]`.
pub fn sign_symmetric_log_grid<T: Scalar>(n_magnitudes: usize, lo: f64, hi: f64) -> Vec<T> {
    assert!(n_magnitudes >= 2 && lo > 0.0 && hi > lo);
    let mut grid = Vec::with_capacity(2 * n_magnitudes + 1);
    grid.push(T::zero());
    let log_lo = lo.ln();
    let log_hi = hi.ln();
    for i in 0..n_magnitudes {
        let t = i as f64 / (n_magnitudes - 1) as f64;
        let mag = (log_lo + t * (log_hi - log_lo)).exp();
        grid.push(cast(mag));
        grid.push(cast(-mag));
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid
}

/// One certified condition with its witnessed constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: String,
    pub pass: bool,
    pub constants: Vec<(String, f64)>,
    /// worst slack at the largest sampled |s| (negative = violated there)
    pub margin_at_edge: f64,
    pub note: String,
}

impl ConditionCheck {
    pub fn constant(&self, key: &str) -> Option<f64> {
        self.constants.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

/// Outcome of [`validate_assumptions`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub lambda_1: f64,
    /// the dissipative-shift lambda actually used for the (F2)-family bounds
    pub lambda_used: f64,
    pub grid_magnitudes: usize,
    pub grid_min: f64,
    pub grid_max: f64,
    pub checks: Vec<ConditionCheck>,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passes(&self, name: &str) -> bool {
        self.check(name).map(|c| c.pass).unwrap_or(false)
    }
}

const GRID_MAGNITUDES: usize = 400;
const GRID_LO: f64 = 1e-6;
const GRID_HI: f64 = 1e3;
const TOL: f64 = 1e-9;

/// Smallest `K` such that `f'(s) >= -omega s^4 - K` on the sample grid.
pub fn required_k_omega<T: Scalar>(model: &ModelSpec<T>, omega: T) -> T {
    let grid = sign_symmetric_log_grid::<T>(GRID_MAGNITUDES, GRID_LO, GRID_HI);
    let mut k = T::zero();
    for &s in &grid {
        let need = -(model.nonlinearity.eval_prime(s)) - omega * s * s * s * s;
        if need > k {
            k = need;
        }
    }
    k
}

/// Certify (G1), (G2), (F1)-(F3) and the derived inequalities on the sample
/// grid, reporting witnessed constants and edge margins.
pub fn validate_assumptions<T: Scalar>(model: &ModelSpec<T>, lambda_1: T) -> ValidationReport {
    let grid = sign_symmetric_log_grid::<T>(GRID_MAGNITUDES, GRID_LO, GRID_HI);
    let edge = cast::<T>(GRID_HI);
    let g = &model.damping;
    let f = &model.nonlinearity;
    let mut checks = Vec::new();

    // --- damping monotonicity and g(0) = 0 ---
    {
        let mut strictly_increasing = true;
        let mut prev = g.eval(grid[0]);
        for &s in &grid[1..] {
            let v = g.eval(s);
            if !(v > prev) {
                strictly_increasing = false;
                break;
            }
            prev = v;
        }
        let g0 = g.eval(T::zero()).as_f64();
        checks.push(ConditionCheck {
            name: "g_monotone".into(),
            pass: strictly_increasing && g0.abs() <= TOL,
            constants: vec![("g_at_0".into(), g0)],
            margin_at_edge: (g.eval(edge) - g.eval(edge * cast(0.999))).as_f64(),
            note: "g strictly increasing with g(0) = 0 on the sample grid".into(),
        });
    }

    // --- (G1): c1 (|s|^m - c2) <= |g(s)| <= c3 (|s|^m + 1) ---
    {
        let m = g.m();
        let m_ok = m > T::one() && m <= cast(5.0);
        if !m_ok {
            checks.push(ConditionCheck {
                name: "G1".into(),
                pass: false,
                constants: vec![("m".into(), m.as_f64())],
                margin_at_edge: 0.0,
                note: "exponent m outside (1, 5]".into(),
            });
        } else {
            let (c1, c2, c3) = match g.g1_constants {
                Some([c1, c2, c3]) => (c1, c2, c3),
                None => {
                    let mut c3 = T::zero();
                    let mut c1 = T::infinity();
                    for &s in &grid {
                        let sm = pow_abs(s, m);
                        let ga = g.eval(s).abs();
                        let up = ga / (sm + T::one());
                        if up > c3 {
                            c3 = up;
                        }
                        if s.abs() >= T::one() {
                            let low = ga / sm;
                            if low < c1 {
                                c1 = low;
                            }
                        }
                    }
                    let mut c2 = T::zero();
                    if c1 > T::zero() && c1.is_finite() {
                        for &s in &grid {
                            let gap = pow_abs(s, m) - g.eval(s).abs() / c1;
                            if gap > c2 {
                                c2 = gap;
                            }
                        }
                    }
                    (c1, c2, c3)
                }
            };
            let mut worst = T::neg_infinity();
            for &s in &grid {
                let sm = pow_abs(s, m);
                let ga = g.eval(s).abs();
                let v1 = c1 * (sm - c2) - ga; // <= 0 wanted
                let v2 = ga - c3 * (sm + T::one()); // <= 0 wanted
                worst = worst.max(v1).max(v2);
            }
            let edge_margin = {
                let sm = pow_abs(edge, m);
                let ga = g.eval(edge).abs();
                (ga - c1 * (sm - c2)).min(c3 * (sm + T::one()) - ga)
            };
            let scale = T::one() + pow_abs(edge, m);
            checks.push(ConditionCheck {
                name: "G1".into(),
                pass: c1 > T::zero()
                    && c1.is_finite()
                    && worst <= cast::<T>(TOL) * scale,
                constants: vec![
                    ("c1".into(), c1.as_f64()),
                    ("c2".into(), c2.as_f64()),
                    ("c3".into(), c3.as_f64()),
                    ("m".into(), m.as_f64()),
                ],
                margin_at_edge: edge_margin.as_f64(),
                note: "two-sided growth of |g| at rate m".into(),
            });
        }
    }

    // --- (G2): gamma <= g'(s) <= c (1 + g(s) s)^(2/3) ---
    {
        let gamma = g.gamma();
        let mut min_gp = T::infinity();
        let mut c_up = T::zero();
        for &s in &grid {
            let gp = g.eval_prime(s);
            min_gp = min_gp.min(gp);
            let denom = (T::one() + g.eval(s) * s).powf(cast(2.0 / 3.0));
            let r = gp / denom;
            if r > c_up {
                c_up = r;
            }
        }
        let pass = gamma > T::zero()
            && min_gp >= gamma - cast::<T>(TOL)
            && c_up.is_finite();
        checks.push(ConditionCheck {
            name: "G2".into(),
            pass,
            constants: vec![
                ("gamma".into(), gamma.as_f64()),
                ("min_g_prime".into(), min_gp.as_f64()),
                ("c".into(), c_up.as_f64()),
            ],
            margin_at_edge: (g.eval_prime(edge) - gamma).as_f64(),
            note: "strong-damping bounds; requires gamma > 0".into(),
        });
    }

    // --- (F1): |f''(s)| <= c (1 + |s|^(p-2)), f(0) = f'(0) = 0, p range ---
    {
        let p = f.p();
        let mut c_growth = T::zero();
        for &s in &grid {
            let r = f.eval_second_abs(s) / (T::one() + pow_abs(s, p - cast(2.0)));
            if r > c_growth {
                c_growth = r;
            }
        }
        let f0 = f.eval(T::zero()).as_f64();
        let fp0 = f.eval_prime(T::zero()).as_f64();
        let p_ok = f.is_zero() || (p >= cast(2.0) && p <= cast(5.0));
        checks.push(ConditionCheck {
            name: "F1".into(),
            pass: c_growth.is_finite() && f0.abs() <= TOL && fp0.abs() <= TOL && p_ok,
            constants: vec![
                ("c".into(), c_growth.as_f64()),
                ("p".into(), p.as_f64()),
                ("f_at_0".into(), f0),
                ("f_prime_at_0".into(), fp0),
            ],
            margin_at_edge: {
                let r = c_growth * (T::one() + pow_abs(edge, p - cast(2.0)))
                    - f.eval_second_abs(edge);
                r.as_f64()
            },
            note: "second-derivative growth at rate p - 2".into(),
        });
    }

    // --- exponent compatibility p <= min(5, 3m) ---
    {
        let p = f.p().as_f64();
        let m = g.m().as_f64();
        let bound = 5.0f64.min(3.0 * m);
        let pass = model.exponents_compatible();
        checks.push(ConditionCheck {
            name: "compat".into(),
            pass,
            constants: vec![("p".into(), p), ("m".into(), m), ("bound".into(), bound)],
            margin_at_edge: bound - p,
            note: "p <= min(5, 3m)".into(),
        });
    }

    // --- (F2): liminf f(s)/s > -lambda, with the induced two-sided bound ---
    let lambda_used = if f.lambda() > T::zero() {
        f.lambda()
    } else {
        lambda_1 * cast(0.5)
    };
    {
        let lambda_lt_lambda1 = lambda_used < lambda_1;
        let tail_start = cast::<T>(GRID_HI / 10.0);
        let mut tail_margin = T::infinity();
        for &s in &grid {
            if s.abs() >= tail_start {
                tail_margin = tail_margin.min(f.eval(s) / s + lambda_used);
            }
        }
        // witnessed C for f(s) s >= -lambda s^2 - C and F(s) >= -lambda/2 s^2 - C
        let mut c_low = T::zero();
        let mut c_up_f = T::zero();
        for &s in &grid {
            let v1 = -(f.eval(s) * s) - lambda_used * s * s;
            let v2 = -f.eval_big_f(s) - cast::<T>(0.5) * lambda_used * s * s;
            c_low = c_low.max(v1).max(v2);
            let up = f.eval_big_f(s) / (T::one() + pow_abs(s, f.p() + T::one()));
            c_up_f = c_up_f.max(up);
        }
        if !(c_low > T::zero()) {
            c_low = T::zero(); // normalize a possible IEEE -0.0 from the max chain
        }
        checks.push(ConditionCheck {
            name: "F2".into(),
            pass: lambda_lt_lambda1 && tail_margin > T::zero(),
            constants: vec![
                ("lambda".into(), lambda_used.as_f64()),
                ("lambda_1".into(), lambda_1.as_f64()),
                ("tail_margin".into(), tail_margin.as_f64()),
                ("C".into(), c_low.as_f64()),
                ("C_upper_F".into(), c_up_f.as_f64()),
            ],
            margin_at_edge: (f.eval(edge) / edge + lambda_used).as_f64(),
            note: "dissipative slope at infinity with witnessed C of the quadratic lower bounds".into(),
        });
    }

    // --- (F3): f'(s) >= -omega s^4 - K_omega ---
    {
        let omega = f.omega;
        let k_omega = f.k_omega;
        let mut worst = T::infinity();
        for &s in &grid {
            let margin = f.eval_prime(s) + omega * s * s * s * s + k_omega;
            worst = worst.min(margin);
        }
        checks.push(ConditionCheck {
            name: "F3".into(),
            pass: worst >= -cast::<T>(TOL),
            constants: vec![
                ("omega".into(), omega.as_f64()),
                ("K_omega".into(), k_omega.as_f64()),
                ("min_margin".into(), worst.as_f64()),
            ],
            margin_at_edge: (f.eval_prime(edge) + omega * edge.powi(4) + k_omega).as_f64(),
            note: "quartic lower bound on f'".into(),
        });
    }

    // --- derived: f(s)s - F(s) >= -omega s^6 - K_omega s^2 ---
    {
        let omega = f.omega;
        let k_omega = f.k_omega;
        let mut worst = T::infinity();
        for &s in &grid {
            let lhs = f.eval(s) * s - f.eval_big_f(s);
            let margin = lhs + omega * s.powi(6) + k_omega * s * s;
            worst = worst.min(margin);
        }
        checks.push(ConditionCheck {
            name: "ineq_1_5".into(),
            pass: worst >= -cast::<T>(TOL),
            constants: vec![("min_margin".into(), worst.as_f64())],
            margin_at_edge: {
                let lhs = f.eval(edge) * edge - f.eval_big_f(edge);
                (lhs + omega * edge.powi(6) + k_omega * edge * edge).as_f64()
            },
            note: "sextic lower bound on f(s)s - F(s)".into(),
        });
    }

    ValidationReport {
        lambda_1: lambda_1.as_f64(),
        lambda_used: lambda_used.as_f64(),
        grid_magnitudes: GRID_MAGNITUDES,
        grid_min: GRID_LO,
        grid_max: GRID_HI,
        checks,
    }
}
