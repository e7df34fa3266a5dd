//! Seeded random field and initial-data samplers.
//!
//! Mode coefficients are independent `amplitude * lambda_i^(-decay) * N(0,1)`
//! draws, so the decay rate controls the smoothness of the sampled fields.
//! Sampling always happens in f64 and is converted afterwards, which keeps the
//! draws identical across scalar types for one seed.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::scalar::{cast, Scalar};
use crate::solver::State;
use crate::spectral::{Field, SpectralBasis};

/// Field sampler with amplitude and spectral decay.
#[derive(Debug, Clone, Copy)]
pub struct FieldSampler<T> {
    pub amplitude: T,
    pub decay: T,
}

impl<T: Scalar> FieldSampler<T> {
    pub fn sample(&self, basis: &Arc<SpectralBasis<T>>, rng: &mut impl Rng) -> Field<T> {
        let coeffs = basis
            .eigenvalues()
            .iter()
            .map(|&l| {
                let z: f64 = rng.sample(StandardNormal);
                self.amplitude * l.powf(-self.decay) * cast::<T>(z)
            })
            .collect();
        Field::from_coeffs(basis.clone(), coeffs)
    }
}

/// Sample a state `(u, u_t)` and rescale it to the prescribed H-norm.
pub fn sample_state_with_h_norm<T: Scalar>(
    basis: &Arc<SpectralBasis<T>>,
    rng: &mut impl Rng,
    decay: T,
    target_h_norm: T,
) -> State<T> {
    let sampler = FieldSampler {
        amplitude: T::one(),
        decay,
    };
    let u = sampler.sample(basis, rng);
    let v = sampler.sample(basis, rng);
    let raw = State::new(u, v, T::zero());
    let norm = raw.h_norm();
    let scale = if norm > T::zero() {
        target_h_norm / norm
    } else {
        T::zero()
    };
    State::new(raw.u.scale(scale), raw.v.scale(scale), T::zero())
}
