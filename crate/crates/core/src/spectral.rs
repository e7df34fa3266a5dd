//! Dirichlet sine eigenbasis on a box, spectral transforms and norms.
//!
//! The basis functions are L2-orthonormal products of normalized sines,
//! `e_k(x) = prod_j sqrt(2/L_j) sin(k_j pi x_j / L_j)`, with eigenvalues
//! `lambda_k = pi^2 sum_j (k_j / L_j)^2`. Quadrature lives on the uniform
//! interior grid `x_q = (q+1) L / (M+1)`: on that grid the sine modes are
//! discretely orthogonal, so coefficient <-> grid transforms round-trip to
//! machine precision whenever the per-axis mode count stays at or below M.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::SpectralError;
use crate::scalar::{cast, pow_abs, Scalar};

/// Box domain with a fixed quadrature resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec<T> {
    lengths: Vec<T>,
    quad_points_per_axis: usize,
}

impl<T: Scalar> DomainSpec<T> {
    pub fn new(lengths: &[T], quad_points_per_axis: usize) -> Result<Self, SpectralError> {
        if lengths.is_empty() || lengths.len() > 3 {
            return Err(SpectralError::InvalidDomain(format!(
                "dimension {} not in {{1, 2, 3}}",
                lengths.len()
            )));
        }
        for &l in lengths {
            if !(l > T::zero()) || !l.is_finite() {
                return Err(SpectralError::InvalidDomain(format!(
                    "non-positive side length {l}"
                )));
            }
        }
        if quad_points_per_axis < 2 {
            return Err(SpectralError::InvalidDomain(format!(
                "quad_points_per_axis = {quad_points_per_axis} < 2"
            )));
        }
        Ok(Self {
            lengths: lengths.to_vec(),
            quad_points_per_axis,
        })
    }

    pub fn dimension(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[T] {
        &self.lengths
    }

    pub fn quad_points_per_axis(&self) -> usize {
        self.quad_points_per_axis
    }

    pub fn volume(&self) -> T {
        self.lengths.iter().fold(T::one(), |a, &l| a * l)
    }
}

/// Eigenbasis of -Laplace with Dirichlet conditions on a box.
pub struct SpectralBasis<T> {
    id: u64,
    domain: DomainSpec<T>,
    n_per_axis: usize,
    modes: Vec<Vec<usize>>,
    eigenvalues: Vec<T>,
    tensor_to_sorted: Vec<usize>,
    axis_eval: Vec<Vec<T>>,    // (m x n) row-major, mode value at grid point
    axis_synth_w: Vec<Vec<T>>, // (n x m) row-major, weighted adjoint
    axis_deriv: Vec<Vec<T>>,   // (m x n) row-major, mode derivative at grid point
    full_eval: OnceLock<Vec<T>>,
}

fn fnv1a(parts: impl IntoIterator<Item = u64>) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for p in parts {
        for b in p.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}

impl<T: Scalar> SpectralBasis<T> {
    /// Build the first `n_per_axis` modes per axis (so `n_per_axis^d` modes in
    /// total), sorted by ascending eigenvalue with lexicographic tie-break.
    pub fn build(domain: DomainSpec<T>, n_per_axis: usize) -> Result<Arc<Self>, SpectralError> {
        if n_per_axis < 1 {
            return Err(SpectralError::InvalidDomain("n_per_axis must be >= 1".into()));
        }
        let m = domain.quad_points_per_axis;
        if m < 2 * n_per_axis {
            return Err(SpectralError::QuadratureFloor {
                quad: m,
                modes: n_per_axis,
            });
        }
        let d = domain.dimension();
        let n = n_per_axis;
        let count = n.pow(d as u32);

        // enumerate multi-indices in tensor (row-major) order
        let mut modes: Vec<Vec<usize>> = Vec::with_capacity(count);
        let mut idx = vec![1usize; d];
        loop {
            modes.push(idx.clone());
            let mut axis = d;
            loop {
                if axis == 0 {
                    break;
                }
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] <= n {
                    break;
                }
                idx[axis] = 1;
                if axis == 0 {
                    break;
                }
            }
            if idx.iter().all(|&k| k == 1) {
                break;
            }
        }
        debug_assert_eq!(modes.len(), count);

        let pi = T::PI();
        let eig = |mode: &[usize]| -> T {
            let mut s = T::zero();
            for (j, &k) in mode.iter().enumerate() {
                let r = cast::<T>(k as f64) / domain.lengths[j];
                s += r * r;
            }
            pi * pi * s
        };

        let mut order: Vec<usize> = (0..count).collect();
        order.sort_by(|&a, &b| {
            let la = eig(&modes[a]).as_f64();
            let lb = eig(&modes[b]).as_f64();
            la.partial_cmp(&lb)
                .unwrap()
                .then_with(|| modes[a].cmp(&modes[b]))
        });

        let sorted_modes: Vec<Vec<usize>> = order.iter().map(|&i| modes[i].clone()).collect();
        let eigenvalues: Vec<T> = sorted_modes.iter().map(|mode| eig(mode)).collect();
        let mut tensor_to_sorted = vec![0usize; count];
        for (pos, &tensor_idx) in order.iter().enumerate() {
            tensor_to_sorted[tensor_idx] = pos;
        }

        let mut axis_eval = Vec::with_capacity(d);
        let mut axis_synth_w = Vec::with_capacity(d);
        let mut axis_deriv = Vec::with_capacity(d);
        for j in 0..d {
            let l = domain.lengths[j];
            let norm = (cast::<T>(2.0) / l).sqrt();
            let w = l / cast::<T>((m + 1) as f64);
            let mut ev = vec![T::zero(); m * n];
            let mut sw = vec![T::zero(); n * m];
            let mut dv = vec![T::zero(); m * n];
            for q in 0..m {
                for i in 0..n {
                    // sin((i+1) pi (q+1) / (M+1)) is length-independent
                    let theta = cast::<T>(((i + 1) * (q + 1)) as f64) * pi
                        / cast::<T>((m + 1) as f64);
                    let s = norm * theta.sin();
                    let c = norm * cast::<T>((i + 1) as f64) * pi / l * theta.cos();
                    ev[q * n + i] = s;
                    sw[i * m + q] = w * s;
                    dv[q * n + i] = c;
                }
            }
            axis_eval.push(ev);
            axis_synth_w.push(sw);
            axis_deriv.push(dv);
        }

        let id = fnv1a(
            std::iter::once(d as u64)
                .chain(domain.lengths.iter().map(|l| l.as_f64().to_bits()))
                .chain([n as u64, m as u64]),
        );

        Ok(Arc::new(Self {
            id,
            domain,
            n_per_axis,
            modes: sorted_modes,
            eigenvalues,
            tensor_to_sorted,
            axis_eval,
            axis_synth_w,
            axis_deriv,
            full_eval: OnceLock::new(),
        }))
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn domain(&self) -> &DomainSpec<T> {
        &self.domain
    }

    pub fn count(&self) -> usize {
        self.modes.len()
    }

    pub fn n_per_axis(&self) -> usize {
        self.n_per_axis
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    pub fn modes(&self) -> &[Vec<usize>] {
        &self.modes
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn lambda_1(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn grid_len(&self) -> usize {
        self.domain
            .quad_points_per_axis
            .pow(self.dimension() as u32)
    }

    /// Quadrature weight shared by every grid point.
    pub fn quad_weight(&self) -> T {
        let m1 = cast::<T>((self.domain.quad_points_per_axis + 1) as f64);
        self.domain
            .lengths
            .iter()
            .fold(T::one(), |a, &l| a * (l / m1))
    }

    fn contract_axis(
        &self,
        data: &[T],
        shape: &mut Vec<usize>,
        axis: usize,
        mat: &[T],
        rows_out: usize,
    ) -> Vec<T> {
        let n_in = shape[axis];
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product();
        let mut out = vec![T::zero(); outer * rows_out * inner];
        for o in 0..outer {
            let in_base = o * n_in * inner;
            let out_base = o * rows_out * inner;
            for r in 0..rows_out {
                let mrow = &mat[r * n_in..(r + 1) * n_in];
                let out_off = out_base + r * inner;
                for (k, &c) in mrow.iter().enumerate() {
                    if c == T::zero() {
                        continue;
                    }
                    let in_off = in_base + k * inner;
                    for ii in 0..inner {
                        out[out_off + ii] += c * data[in_off + ii];
                    }
                }
            }
        }
        shape[axis] = rows_out;
        out
    }

    fn scatter_to_tensor(&self, coeffs: &[T]) -> Vec<T> {
        let mut tensor = vec![T::zero(); self.count()];
        for (tensor_idx, &pos) in self.tensor_to_sorted.iter().enumerate() {
            tensor[tensor_idx] = coeffs[pos];
        }
        tensor
    }

    /// Pseudospectral synthesis: coefficient vector -> values on the grid.
    pub fn to_grid(&self, coeffs: &[T]) -> Vec<T> {
        assert_eq!(coeffs.len(), self.count());
        let d = self.dimension();
        let n = self.n_per_axis;
        let m = self.domain.quad_points_per_axis;
        let mut shape = vec![n; d];
        let mut data = self.scatter_to_tensor(coeffs);
        for axis in 0..d {
            data = self.contract_axis(&data, &mut shape, axis, &self.axis_eval[axis], m);
        }
        data
    }

    /// Quadrature analysis: grid values -> coefficient vector.
    pub fn to_coeffs(&self, grid: &[T]) -> Result<Vec<T>, SpectralError> {
        if grid.len() != self.grid_len() {
            return Err(SpectralError::GridMismatch {
                expected: self.grid_len(),
                got: grid.len(),
            });
        }
        let d = self.dimension();
        let n = self.n_per_axis;
        let m = self.domain.quad_points_per_axis;
        let mut shape = vec![m; d];
        let mut data = grid.to_vec();
        for axis in 0..d {
            data = self.contract_axis(&data, &mut shape, axis, &self.axis_synth_w[axis], n);
        }
        let mut coeffs = vec![T::zero(); self.count()];
        for (tensor_idx, &pos) in self.tensor_to_sorted.iter().enumerate() {
            coeffs[pos] = data[tensor_idx];
        }
        Ok(coeffs)
    }

    /// Grid values of each component of the gradient.
    pub fn gradient_on_grid(&self, coeffs: &[T]) -> Vec<Vec<T>> {
        let d = self.dimension();
        let n = self.n_per_axis;
        let m = self.domain.quad_points_per_axis;
        let tensor = self.scatter_to_tensor(coeffs);
        (0..d)
            .map(|grad_axis| {
                let mut shape = vec![n; d];
                let mut data = tensor.clone();
                for axis in 0..d {
                    let mat = if axis == grad_axis {
                        &self.axis_deriv[axis]
                    } else {
                        &self.axis_eval[axis]
                    };
                    data = self.contract_axis(&data, &mut shape, axis, mat, m);
                }
                data
            })
            .collect()
    }

    /// Dense synthesis matrix, `(grid_len x count)` row-major; built lazily.
    /// Used for Jacobians of pointwise nonlinear maps.
    pub fn full_eval_matrix(&self) -> &[T] {
        self.full_eval.get_or_init(|| {
            let count = self.count();
            let grid_len = self.grid_len();
            let mut s = vec![T::zero(); grid_len * count];
            let mut unit = vec![T::zero(); count];
            for pos in 0..count {
                unit[pos] = T::one();
                let col = self.to_grid(&unit);
                unit[pos] = T::zero();
                for q in 0..grid_len {
                    s[q * count + pos] = col[q];
                }
            }
            s
        })
    }
}

impl<T> std::fmt::Debug for SpectralBasis<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralBasis")
            .field("id", &format_args!("{:016x}", self.id))
            .field("dimension", &self.modes.first().map_or(0, |m| m.len()))
            .field("count", &self.modes.len())
            .finish()
    }
}

/// A function represented by spectral coefficients on a shared basis.
#[derive(Debug, Clone)]
pub struct Field<T> {
    basis: Arc<SpectralBasis<T>>,
    coeffs: Vec<T>,
}

impl<T: Scalar> Field<T> {
    pub fn from_coeffs(basis: Arc<SpectralBasis<T>>, coeffs: Vec<T>) -> Self {
        assert_eq!(coeffs.len(), basis.count(), "coefficient length != basis count");
        debug_assert!(coeffs.iter().all(|c| c.is_finite()));
        Self { basis, coeffs }
    }

    pub fn zero(basis: Arc<SpectralBasis<T>>) -> Self {
        let n = basis.count();
        Self {
            basis,
            coeffs: vec![T::zero(); n],
        }
    }

    /// Unit coefficient on the `i`-th mode (ascending-eigenvalue order).
    pub fn single_mode(basis: Arc<SpectralBasis<T>>, i: usize, amplitude: T) -> Self {
        let mut f = Self::zero(basis);
        f.coeffs[i] = amplitude;
        f
    }

    pub fn from_grid(basis: Arc<SpectralBasis<T>>, grid: &[T]) -> Result<Self, SpectralError> {
        let coeffs = basis.to_coeffs(grid)?;
        Ok(Self { basis, coeffs })
    }

    pub fn basis(&self) -> &Arc<SpectralBasis<T>> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn to_grid(&self) -> Vec<T> {
        self.basis.to_grid(&self.coeffs)
    }

    /// `P_n`: keep the first `n` coefficients, zero the rest.
    pub fn project(&self, n: usize) -> Result<Field<T>, SpectralError> {
        if n > self.basis.count() {
            return Err(SpectralError::ProjectionOutOfRange {
                n,
                count: self.basis.count(),
            });
        }
        let mut coeffs = self.coeffs.clone();
        for c in coeffs.iter_mut().skip(n) {
            *c = T::zero();
        }
        Ok(Field {
            basis: self.basis.clone(),
            coeffs,
        })
    }

    /// `Q_n = I - P_n`: the complementary high-mode part.
    pub fn project_complement(&self, n: usize) -> Result<Field<T>, SpectralError> {
        if n > self.basis.count() {
            return Err(SpectralError::ProjectionOutOfRange {
                n,
                count: self.basis.count(),
            });
        }
        let mut coeffs = self.coeffs.clone();
        for c in coeffs.iter_mut().take(n) {
            *c = T::zero();
        }
        Ok(Field {
            basis: self.basis.clone(),
            coeffs,
        })
    }

    /// `(sum_i lambda_i^s a_i^2)^(1/2)`; `s` may be negative.
    pub fn fractional_norm(&self, s: T) -> T {
        let two = cast::<T>(2.0);
        let mut acc = T::zero();
        if s == T::zero() {
            for &a in &self.coeffs {
                acc += a * a;
            }
        } else if s == T::one() {
            for (&a, &l) in self.coeffs.iter().zip(&self.basis.eigenvalues) {
                acc += l * a * a;
            }
        } else if s == two {
            for (&a, &l) in self.coeffs.iter().zip(&self.basis.eigenvalues) {
                acc += l * l * a * a;
            }
        } else {
            for (&a, &l) in self.coeffs.iter().zip(&self.basis.eigenvalues) {
                acc += l.powf(s) * a * a;
            }
        }
        acc.sqrt()
    }

    /// Quadrature approximation of the L^q norm on the oversampled grid.
    pub fn lq_norm(&self, q: T) -> T {
        assert!(q >= T::one(), "lq_norm requires q >= 1");
        let grid = self.to_grid();
        let w = self.basis.quad_weight();
        let mut acc = T::zero();
        for &v in &grid {
            acc += pow_abs(v, q);
        }
        (w * acc).powf(T::one() / q)
    }

    /// L2 inner product (coefficient dot product; exact at truncation).
    pub fn l2_dot(&self, other: &Field<T>) -> T {
        debug_assert_eq!(self.basis.id(), other.basis.id());
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| a * b)
            .sum()
    }

    pub fn add(&self, other: &Field<T>) -> Field<T> {
        debug_assert_eq!(self.basis.id(), other.basis.id());
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| a + b)
            .collect();
        Field {
            basis: self.basis.clone(),
            coeffs,
        }
    }

    pub fn sub(&self, other: &Field<T>) -> Field<T> {
        debug_assert_eq!(self.basis.id(), other.basis.id());
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| a - b)
            .collect();
        Field {
            basis: self.basis.clone(),
            coeffs,
        }
    }

    pub fn scale(&self, factor: T) -> Field<T> {
        Field {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|&a| a * factor).collect(),
        }
    }
}

/// Portable snapshot of a [`Field`]: coefficients as decimal strings at full
/// (round-trip) precision.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldSnapshot {
    pub basis_id: String,
    pub dimension: usize,
    pub lengths: Vec<f64>,
    pub modes: Vec<Vec<usize>>,
    pub coefficients: Vec<String>,
}

impl FieldSnapshot {
    pub fn of<T: Scalar>(field: &Field<T>) -> Self {
        let basis = field.basis();
        Self {
            basis_id: format!("{:016x}", basis.id()),
            dimension: basis.dimension(),
            lengths: basis.domain().lengths().iter().map(|l| l.as_f64()).collect(),
            modes: basis.modes().to_vec(),
            coefficients: field.coeffs().iter().map(|c| format!("{:?}", c.as_f64())).collect(),
        }
    }

    pub fn restore<T: Scalar>(
        &self,
        basis: Arc<SpectralBasis<T>>,
    ) -> Result<Field<T>, SpectralError> {
        if format!("{:016x}", basis.id()) != self.basis_id
            || self.coefficients.len() != basis.count()
        {
            return Err(SpectralError::BasisMismatch);
        }
        let coeffs = self
            .coefficients
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map(cast::<T>)
                    .map_err(|_| SpectralError::InvalidDomain(format!("bad coefficient {s:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Field::from_coeffs(basis, coeffs))
    }
}
