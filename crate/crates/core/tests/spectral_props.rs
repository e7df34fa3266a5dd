//! Property tests for the spectral layer: Parseval, Poincare, projection
//! contraction, transform round-trips.

use std::sync::Arc;

use attractor_lab_core::spectral::{DomainSpec, Field, SpectralBasis};
use proptest::prelude::*;

fn basis_1d(n: usize, quad: usize) -> Arc<SpectralBasis<f64>> {
    let domain = DomainSpec::new(&[1.0], quad).unwrap();
    SpectralBasis::build(domain, n).unwrap()
}

fn coeff_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-10.0..10.0f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn parseval(coeffs in coeff_vec(8)) {
        let basis = basis_1d(8, 16);
        let f = Field::from_coeffs(basis, coeffs);
        let l2 = f.lq_norm(2.0);
        let spectral = f.fractional_norm(0.0);
        prop_assert!((l2 - spectral).abs() <= 1e-8 * (1.0 + spectral));
    }

    #[test]
    fn poincare(coeffs in coeff_vec(8)) {
        let basis = basis_1d(8, 16);
        let lambda_1 = basis.lambda_1();
        let f = Field::from_coeffs(basis, coeffs);
        let h1 = f.fractional_norm(1.0);
        let l2 = f.fractional_norm(0.0);
        prop_assert!(h1 * h1 >= lambda_1 * l2 * l2 * (1.0 - 1e-12));
    }

    #[test]
    fn projection_contracts(coeffs in coeff_vec(8), n in 0usize..=8) {
        let basis = basis_1d(8, 16);
        let f = Field::from_coeffs(basis, coeffs);
        let p = f.project(n).unwrap();
        for s in [-1.0, 0.0, 1.0, 2.0] {
            prop_assert!(p.fractional_norm(s) <= f.fractional_norm(s) * (1.0 + 1e-12));
        }
        prop_assert!(p.lq_norm(2.0) <= f.lq_norm(2.0) + 1e-8);

        // idempotence and complement
        let pp = p.project(n).unwrap();
        prop_assert_eq!(pp.coeffs(), p.coeffs());
        let q = f.project_complement(n).unwrap();
        let sum = p.add(&q);
        prop_assert_eq!(sum.coeffs(), f.coeffs());
    }

    #[test]
    fn transform_round_trip(coeffs in coeff_vec(8)) {
        let basis = basis_1d(8, 16);
        let f = Field::from_coeffs(basis.clone(), coeffs.clone());
        let back = basis.to_coeffs(&f.to_grid()).unwrap();
        let scale: f64 = 1.0 + coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max);
        for (a, b) in coeffs.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn eigenvalues_match_closed_form(n in 1usize..=12) {
        let basis = basis_1d(n, 24);
        let pi2 = std::f64::consts::PI.powi(2);
        let mut prev = 0.0;
        for (mode, lambda) in basis.modes().iter().zip(basis.eigenvalues()) {
            let want = pi2 * (mode[0] * mode[0]) as f64;
            prop_assert!((lambda - want).abs() < 1e-10 * want);
            prop_assert!(*lambda >= prev);
            prev = *lambda;
        }
    }
}

#[test]
fn round_trip_2d_random() {
    let domain = DomainSpec::new(&[1.0, 2.0], 12).unwrap();
    let basis = SpectralBasis::build(domain, 4).unwrap();
    let coeffs: Vec<f64> = (0..16).map(|i| ((i * 13 + 5) % 17) as f64 / 17.0 - 0.5).collect();
    let f = Field::from_coeffs(basis.clone(), coeffs.clone());
    let back = basis.to_coeffs(&f.to_grid()).unwrap();
    for (a, b) in coeffs.iter().zip(&back) {
        assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn gradient_on_grid_matches_finite_differences() {
    // compare the spectral gradient of a two-mode field against the analytic
    // derivative evaluated on the quadrature grid
    let basis = basis_1d(4, 32);
    let f = Field::from_coeffs(basis.clone(), vec![1.0, 0.0, -0.5, 0.0]);
    let grads = basis.gradient_on_grid(f.coeffs());
    let m = 32;
    let pi = std::f64::consts::PI;
    for q in 0..m {
        let x = (q + 1) as f64 / (m + 1) as f64;
        let sqrt2 = 2.0f64.sqrt();
        let want = sqrt2 * pi * (pi * x).cos() - 0.5 * sqrt2 * 3.0 * pi * (3.0 * pi * x).cos();
        assert!((grads[0][q] - want).abs() < 1e-10, "x = {x}");
    }
}
