//! Damping and nonlinearity families, their primitives, exponent arithmetic
//! and the well-posedness region classification.
//!
//! Built-in families: `g(s) = |s|^(m-1) s + gamma s` and
//! `f(s) = |s|^(p-1) s - lambda s`. Custom strictly monotone tables are
//! interpolated with a shape-preserving cubic. Truncation clamps `f` outside
//! `[-n, n]`, which keeps every stated value exact (no resampling involved).

mod table;
pub mod validation;

pub use table::MonotoneTable;
pub use validation::{validate_assumptions, ConditionCheck, ValidationReport};

use crate::error::ModelError;
use crate::scalar::{cast, pow_abs, Scalar};
use crate::spectral::Field;

#[derive(Debug, Clone)]
pub enum DampingKind<T> {
    /// g = 0 (conservative diagnostic regime)
    Zero,
    /// g(s) = gamma s
    Linear,
    /// g(s) = |s|^(m-1) s
    Power,
    /// g(s) = |s|^(m-1) s + gamma s
    PowerPlusLinear,
    /// strictly increasing table
    Table(MonotoneTable<T>),
}

/// Nonlinear damping family with exponent `m` and linear part `gamma`.
#[derive(Debug, Clone)]
pub struct DampingSpec<T> {
    kind: DampingKind<T>,
    m: T,
    gamma: T,
    /// optional pinned (c1, c2, c3) witnesses for the growth condition
    pub g1_constants: Option<[T; 3]>,
}

impl<T: Scalar> DampingSpec<T> {
    pub fn power(m: T) -> Result<Self, ModelError> {
        check_m(m)?;
        Ok(Self {
            kind: DampingKind::Power,
            m,
            gamma: T::zero(),
            g1_constants: None,
        })
    }

    pub fn power_plus_linear(m: T, gamma: T) -> Result<Self, ModelError> {
        check_m(m)?;
        if gamma < T::zero() {
            return Err(ModelError::Invalid("gamma must be >= 0".into()));
        }
        Ok(Self {
            kind: DampingKind::PowerPlusLinear,
            m,
            gamma,
            g1_constants: None,
        })
    }

    /// Pure linear damping g(s) = gamma s; exponent bookkeeping uses m = 1.
    pub fn linear(gamma: T) -> Result<Self, ModelError> {
        if !(gamma > T::zero()) {
            return Err(ModelError::Invalid("linear damping needs gamma > 0".into()));
        }
        Ok(Self {
            kind: DampingKind::Linear,
            m: T::one(),
            gamma,
            g1_constants: None,
        })
    }

    /// No damping at all (for conservative sanity checks).
    pub fn none() -> Self {
        Self {
            kind: DampingKind::Zero,
            m: T::one(),
            gamma: T::zero(),
            g1_constants: None,
        }
    }

    pub fn from_table(xs: Vec<T>, ys: Vec<T>, m: T) -> Result<Self, ModelError> {
        check_m(m)?;
        let table = MonotoneTable::new(xs, ys)?;
        Ok(Self {
            kind: DampingKind::Table(table),
            m,
            gamma: T::zero(),
            g1_constants: None,
        })
    }

    pub fn kind(&self) -> &DampingKind<T> {
        &self.kind
    }

    pub fn m(&self) -> T {
        self.m
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, DampingKind::Zero)
    }

    pub fn eval(&self, s: T) -> T {
        match &self.kind {
            DampingKind::Zero => T::zero(),
            DampingKind::Linear => self.gamma * s,
            DampingKind::Power => pow_abs(s, self.m - T::one()) * s,
            DampingKind::PowerPlusLinear => pow_abs(s, self.m - T::one()) * s + self.gamma * s,
            DampingKind::Table(t) => t.eval(s),
        }
    }

    pub fn eval_prime(&self, s: T) -> T {
        match &self.kind {
            DampingKind::Zero => T::zero(),
            DampingKind::Linear => self.gamma,
            DampingKind::Power => self.m * pow_abs(s, self.m - T::one()),
            DampingKind::PowerPlusLinear => self.m * pow_abs(s, self.m - T::one()) + self.gamma,
            DampingKind::Table(t) => t.eval_prime(s),
        }
    }

    /// Primitive G(s) = integral of g from 0 to s; G >= 0 for increasing g.
    pub fn eval_primitive(&self, s: T) -> T {
        let half = cast::<T>(0.5);
        match &self.kind {
            DampingKind::Zero => T::zero(),
            DampingKind::Linear => half * self.gamma * s * s,
            DampingKind::Power => pow_abs(s, self.m + T::one()) / (self.m + T::one()),
            DampingKind::PowerPlusLinear => {
                pow_abs(s, self.m + T::one()) / (self.m + T::one()) + half * self.gamma * s * s
            }
            DampingKind::Table(t) => t.integral_from(T::zero(), s),
        }
    }

    fn hash_parts(&self) -> Vec<u64> {
        let tag = match self.kind {
            DampingKind::Zero => 0u64,
            DampingKind::Linear => 1,
            DampingKind::Power => 2,
            DampingKind::PowerPlusLinear => 3,
            DampingKind::Table(_) => 4,
        };
        vec![tag, self.m.as_f64().to_bits(), self.gamma.as_f64().to_bits()]
    }
}

fn check_m<T: Scalar>(m: T) -> Result<(), ModelError> {
    if !(m > T::one() && m <= cast::<T>(5.0)) {
        return Err(ModelError::DampingExponent(m.as_f64()));
    }
    Ok(())
}

fn check_p<T: Scalar>(p: T) -> Result<(), ModelError> {
    if !(p >= cast::<T>(2.0) && p <= cast::<T>(5.0)) {
        return Err(ModelError::NonlinearityExponent(p.as_f64()));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub enum NonlinearityKind<T> {
    /// f = 0
    Zero,
    /// f(s) = |s|^(p-1) s
    Power,
    /// f(s) = |s|^(p-1) s - lambda s
    PowerMinusLinear,
    Table(MonotoneTable<T>),
    /// f clamped to its values at +-level
    Truncated { inner: Box<NonlinearityKind<T>>, level: T },
}

/// Nonlinearity family with exponent `p`, dissipative shift `lambda` and the
/// (F3) certificate pair `(omega, k_omega)`.
#[derive(Debug, Clone)]
pub struct NonlinearitySpec<T> {
    kind: NonlinearityKind<T>,
    p: T,
    lambda: T,
    pub omega: T,
    pub k_omega: T,
}

impl<T: Scalar> NonlinearitySpec<T> {
    pub fn power(p: T) -> Result<Self, ModelError> {
        check_p(p)?;
        Ok(Self {
            kind: NonlinearityKind::Power,
            p,
            lambda: T::zero(),
            omega: cast(1e-2),
            k_omega: T::zero(),
        })
    }

    pub fn power_minus_linear(p: T, lambda: T) -> Result<Self, ModelError> {
        check_p(p)?;
        if lambda < T::zero() {
            return Err(ModelError::Invalid("lambda must be >= 0".into()));
        }
        Ok(Self {
            kind: NonlinearityKind::PowerMinusLinear,
            p,
            lambda,
            omega: cast(1e-2),
            // f'(s) = p|s|^(p-1) - lambda >= -lambda, so K = lambda certifies (F3)
            k_omega: lambda,
        })
    }

    pub fn zero() -> Self {
        Self {
            kind: NonlinearityKind::Zero,
            p: cast(2.0),
            lambda: T::zero(),
            omega: cast(1e-2),
            k_omega: T::zero(),
        }
    }

    pub fn from_table(xs: Vec<T>, ys: Vec<T>, p: T) -> Result<Self, ModelError> {
        check_p(p)?;
        let table = MonotoneTable::new(xs, ys)?;
        Ok(Self {
            kind: NonlinearityKind::Table(table),
            p,
            lambda: T::zero(),
            omega: cast(1e-2),
            k_omega: T::zero(),
        })
    }

    pub fn kind(&self) -> &NonlinearityKind<T> {
        &self.kind
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, NonlinearityKind::Zero)
    }

    pub fn eval(&self, s: T) -> T {
        eval_kind(&self.kind, self.p, self.lambda, s)
    }

    pub fn eval_prime(&self, s: T) -> T {
        eval_prime_kind(&self.kind, self.p, self.lambda, s)
    }

    /// |f''(s)|, used by the growth certifier; finite differences of f' for
    /// table-backed families.
    pub fn eval_second_abs(&self, s: T) -> T {
        match &self.kind {
            NonlinearityKind::Zero => T::zero(),
            NonlinearityKind::Power | NonlinearityKind::PowerMinusLinear => {
                self.p * (self.p - T::one()) * pow_abs(s, self.p - cast(2.0))
            }
            _ => {
                let h = cast::<T>(1e-5) * (T::one() + s.abs());
                ((self.eval_prime(s + h) - self.eval_prime(s - h)) / (cast::<T>(2.0) * h)).abs()
            }
        }
    }

    /// Primitive F(s) = integral of f from 0 to s.
    pub fn eval_big_f(&self, s: T) -> T {
        eval_big_f_kind(&self.kind, self.p, self.lambda, s)
    }

    /// `f_n`: plateau outside `[-n, n]`, unchanged inside. Globally bounded and
    /// Lipschitz with constant `sup_{|s|<=n} |f'(s)|`.
    pub fn truncate(&self, n: usize) -> NonlinearitySpec<T> {
        assert!(n >= 1, "truncation level must be >= 1");
        NonlinearitySpec {
            kind: NonlinearityKind::Truncated {
                inner: Box::new(self.kind.clone()),
                level: cast(n as f64),
            },
            p: self.p,
            lambda: self.lambda,
            omega: self.omega,
            k_omega: self.k_omega,
        }
    }

    fn hash_parts(&self) -> Vec<u64> {
        fn tag<T>(k: &NonlinearityKind<T>) -> u64 {
            match k {
                NonlinearityKind::Zero => 0,
                NonlinearityKind::Power => 1,
                NonlinearityKind::PowerMinusLinear => 2,
                NonlinearityKind::Table(_) => 3,
                NonlinearityKind::Truncated { inner, .. } => 16 + tag(inner),
            }
        }
        vec![
            tag(&self.kind),
            self.p.as_f64().to_bits(),
            self.lambda.as_f64().to_bits(),
            self.omega.as_f64().to_bits(),
            self.k_omega.as_f64().to_bits(),
        ]
    }
}

fn eval_kind<T: Scalar>(kind: &NonlinearityKind<T>, p: T, lambda: T, s: T) -> T {
    match kind {
        NonlinearityKind::Zero => T::zero(),
        NonlinearityKind::Power => pow_abs(s, p - T::one()) * s,
        NonlinearityKind::PowerMinusLinear => pow_abs(s, p - T::one()) * s - lambda * s,
        NonlinearityKind::Table(t) => t.eval(s),
        NonlinearityKind::Truncated { inner, level } => {
            let clamped = s.min(*level).max(-*level);
            eval_kind(inner, p, lambda, clamped)
        }
    }
}

fn eval_prime_kind<T: Scalar>(kind: &NonlinearityKind<T>, p: T, lambda: T, s: T) -> T {
    match kind {
        NonlinearityKind::Zero => T::zero(),
        NonlinearityKind::Power => p * pow_abs(s, p - T::one()),
        NonlinearityKind::PowerMinusLinear => p * pow_abs(s, p - T::one()) - lambda,
        NonlinearityKind::Table(t) => t.eval_prime(s),
        NonlinearityKind::Truncated { inner, level } => {
            if s.abs() >= *level {
                T::zero()
            } else {
                eval_prime_kind(inner, p, lambda, s)
            }
        }
    }
}

fn eval_big_f_kind<T: Scalar>(kind: &NonlinearityKind<T>, p: T, lambda: T, s: T) -> T {
    let half = cast::<T>(0.5);
    match kind {
        NonlinearityKind::Zero => T::zero(),
        NonlinearityKind::Power => pow_abs(s, p + T::one()) / (p + T::one()),
        NonlinearityKind::PowerMinusLinear => {
            pow_abs(s, p + T::one()) / (p + T::one()) - half * lambda * s * s
        }
        NonlinearityKind::Table(t) => t.integral_from(T::zero(), s),
        NonlinearityKind::Truncated { inner, level } => {
            let n = *level;
            if s > n {
                eval_big_f_kind(inner, p, lambda, n) + eval_kind(inner, p, lambda, n) * (s - n)
            } else if s < -n {
                eval_big_f_kind(inner, p, lambda, -n) + eval_kind(inner, p, lambda, -n) * (s + n)
            } else {
                eval_big_f_kind(inner, p, lambda, s)
            }
        }
    }
}

/// The full model: damping, nonlinearity and time-independent forcing.
#[derive(Debug, Clone)]
pub struct ModelSpec<T> {
    pub damping: DampingSpec<T>,
    pub nonlinearity: NonlinearitySpec<T>,
    pub forcing: Field<T>,
}

impl<T: Scalar> ModelSpec<T> {
    pub fn new(
        damping: DampingSpec<T>,
        nonlinearity: NonlinearitySpec<T>,
        forcing: Field<T>,
    ) -> Self {
        Self {
            damping,
            nonlinearity,
            forcing,
        }
    }

    /// Exponent compatibility `p <= min(5, 3m)`; trivially satisfied by the
    /// diagnostic (zero/linear) families.
    pub fn exponents_compatible(&self) -> bool {
        if self.nonlinearity.is_zero() {
            return true;
        }
        let p = self.nonlinearity.p();
        let bound = if self.damping.is_zero() || matches!(self.damping.kind, DampingKind::Linear) {
            cast::<T>(5.0)
        } else {
            cast::<T>(5.0).min(cast::<T>(3.0) * self.damping.m())
        };
        p <= bound + cast(1e-12)
    }

    pub fn phi_l2(&self) -> T {
        self.forcing.fractional_norm(T::zero())
    }

    /// Deterministic structural hash (family tags, parameters, forcing).
    pub fn hash(&self) -> u64 {
        let mut parts = self.damping.hash_parts();
        parts.extend(self.nonlinearity.hash_parts());
        parts.push(self.forcing.basis().id());
        parts.extend(self.forcing.coeffs().iter().map(|c| c.as_f64().to_bits()));
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

/// Space-time integrability exponent `k = min(5/m, 3m - 2)` for `m in (1, 5]`.
pub fn exponent_k<T: Scalar>(m: T) -> Result<T, ModelError> {
    check_m(m)?;
    Ok((cast::<T>(5.0) / m).min(cast::<T>(3.0) * m - cast::<T>(2.0)))
}

/// Well-posedness region of the `(m, p)` exponent plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Region {
    I,
    II,
    III,
    Uncovered,
    Invalid,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Region::I => "I",
            Region::II => "II",
            Region::III => "III",
            Region::Uncovered => "uncovered",
            Region::Invalid => "invalid",
        };
        f.write_str(s)
    }
}

/// Classify an exponent pair. Exactly one tag applies to every `(m, p)`.
pub fn region_classify<T: Scalar>(m: T, p: T) -> Region {
    let one = T::one();
    let three = cast::<T>(3.0);
    let five = cast::<T>(5.0);
    let six = cast::<T>(6.0);
    if !(m > one && m <= five) || !(p >= one && p <= five) || !m.is_finite() || !p.is_finite() {
        return Region::Invalid;
    }
    if p <= three {
        return Region::I;
    }
    let curve = six * m / (m + one);
    if p <= curve {
        Region::II
    } else if p <= three * m {
        Region::III
    } else {
        Region::Uncovered
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{DomainSpec, SpectralBasis};

    fn forcing_zero() -> Field<f64> {
        let domain = DomainSpec::new(&[1.0], 8).unwrap();
        let basis = SpectralBasis::build(domain, 4).unwrap();
        Field::zero(basis)
    }

    #[test]
    fn damping_closed_forms() {
        let g = DampingSpec::<f64>::power(3.0).unwrap();
        assert_eq!(g.eval(2.0), 8.0);
        assert_eq!(g.eval_prime(2.0), 12.0);
        assert_eq!(g.eval_primitive(2.0), 4.0);
        assert_eq!(g.eval(0.0), 0.0);
        assert_eq!(g.eval(-2.0), -8.0);

        let gpl = DampingSpec::<f64>::power_plus_linear(3.0, 0.5).unwrap();
        assert!((gpl.eval_primitive(1.0) - 0.5).abs() < 1e-15);
        assert_eq!(gpl.eval(0.0), 0.0);

        let lin = DampingSpec::<f64>::linear(0.2).unwrap();
        assert!((lin.eval(3.0) - 0.6).abs() < 1e-15);
        assert_eq!(DampingSpec::<f64>::none().eval(7.0), 0.0);
    }

    #[test]
    fn nonlinearity_closed_forms() {
        let f = NonlinearitySpec::<f64>::power(3.0).unwrap();
        assert_eq!(f.eval(2.0), 8.0);
        assert_eq!(f.eval_big_f(2.0), 4.0);
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.eval_prime(0.0), 0.0);

        let fml = NonlinearitySpec::<f64>::power_minus_linear(3.0, 0.5).unwrap();
        assert!((fml.eval_big_f(1.0) - 0.0).abs() < 1e-15);
        assert_eq!(fml.eval(0.0), 0.0);
        // the shifted family trades f'(0) = 0 for the dissipative slope
        assert_eq!(fml.eval_prime(0.0), -0.5);
    }

    #[test]
    fn exponent_bounds_enforced() {
        assert!(DampingSpec::power(1.0).is_err());
        assert!(DampingSpec::power(5.5).is_err());
        assert!(NonlinearitySpec::power(1.5).is_err());
        assert!(NonlinearitySpec::power(6.0).is_err());
    }

    #[test]
    fn truncation_examples() {
        let f = NonlinearitySpec::<f64>::power(3.0).unwrap();
        let f2 = f.truncate(2);
        assert_eq!(f2.eval(5.0), 8.0);
        assert_eq!(f2.eval(1.0), 1.0);
        assert_eq!(f2.eval(-3.0), -8.0);
        // f_n = f on [-n, n]
        for s in [-2.0, -1.3, 0.0, 0.7, 2.0] {
            assert_eq!(f2.eval(s), f.eval(s));
        }
        // plateau keeps F continuous with linear growth
        assert!((f2.eval_big_f(3.0) - (4.0 + 8.0)).abs() < 1e-14);
        assert_eq!(f2.eval_prime(2.5), 0.0);

        // sup |f_n| over a scan equals max(|f(n)|, |f(-n)|) for the monotone family
        let sup = (-100..=100)
            .map(|i| f2.eval(i as f64 * 0.1).abs())
            .fold(0.0f64, f64::max);
        assert_eq!(sup, 8.0);
    }

    #[test]
    fn exponent_k_values() {
        assert!((exponent_k(5.0 / 3.0f64).unwrap() - 3.0).abs() < 1e-12);
        assert!((exponent_k(5.0f64).unwrap() - 1.0).abs() < 1e-12);
        assert!((exponent_k(1.5f64).unwrap() - 2.5).abs() < 1e-12);
        assert!(exponent_k(1.0f64).is_err());
        assert!(exponent_k(5.1f64).is_err());
    }

    #[test]
    fn region_examples() {
        assert_eq!(region_classify(2.0, 3.0), Region::I);
        assert_eq!(region_classify(3.0, 4.0), Region::II);
        assert_eq!(region_classify(1.2, 4.0), Region::Uncovered);
        assert_eq!(region_classify(5.0 / 3.0, 5.0), Region::III);
        assert_eq!(region_classify(0.9, 2.0), Region::Invalid);
        assert_eq!(region_classify(3.0, 5.5), Region::Invalid);
    }

    #[test]
    fn compatibility() {
        let forcing = forcing_zero();
        let good = ModelSpec::new(
            DampingSpec::power(5.0 / 3.0).unwrap(),
            NonlinearitySpec::power(5.0).unwrap(),
            forcing.clone(),
        );
        assert!(good.exponents_compatible());
        let bad = ModelSpec::new(
            DampingSpec::power(1.2).unwrap(),
            NonlinearitySpec::power(5.0).unwrap(),
            forcing,
        );
        assert!(!bad.exponents_compatible());
    }

    #[test]
    fn model_hash_sensitivity() {
        let forcing = forcing_zero();
        let a = ModelSpec::new(
            DampingSpec::power(3.0).unwrap(),
            NonlinearitySpec::power(3.0).unwrap(),
            forcing.clone(),
        );
        let b = ModelSpec::new(
            DampingSpec::power(3.0).unwrap(),
            NonlinearitySpec::power(3.5).unwrap(),
            forcing,
        );
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), a.clone().hash());
    }
}
