//! Model-family properties: monotonicity, primitive consistency against a
//! quadrature oracle, the two-sided (1.4)/(1.5) bounds, region partition.

use attractor_lab_core::model::{
    exponent_k, region_classify, validate_assumptions, DampingSpec, ModelSpec, MonotoneTable,
    NonlinearitySpec, Region,
};
use attractor_lab_core::spectral::{DomainSpec, Field, SpectralBasis};
use proptest::prelude::*;

/// Composite Simpson quadrature, the independent oracle for primitives.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = if n.is_multiple_of(2) { n } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

fn damping_strategy() -> impl Strategy<Value = DampingSpec<f64>> {
    prop_oneof![
        (1.05..5.0f64).prop_map(|m| DampingSpec::power(m).unwrap()),
        ((1.05..5.0f64), (0.0..2.0f64))
            .prop_map(|(m, g)| DampingSpec::power_plus_linear(m, g).unwrap()),
        (0.05..3.0f64).prop_map(|g| DampingSpec::linear(g).unwrap()),
    ]
}

fn nonlinearity_strategy() -> impl Strategy<Value = NonlinearitySpec<f64>> {
    prop_oneof![
        (2.0..5.0f64).prop_map(|p| NonlinearitySpec::power(p).unwrap()),
        ((2.0..5.0f64), (0.0..2.0f64))
            .prop_map(|(p, l)| NonlinearitySpec::power_minus_linear(p, l).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn damping_strictly_increasing(g in damping_strategy(), s in -50.0..50.0f64, gap in 1e-6..10.0f64) {
        prop_assert!(g.eval(s) < g.eval(s + gap));
    }

    #[test]
    fn primitive_consistency_g(g in damping_strategy(), s in -8.0..8.0f64) {
        let oracle = simpson(|x| g.eval(x), 0.0, s, 2000);
        prop_assert!((g.eval_primitive(s) - oracle).abs() <= 1e-8 * (1.0 + oracle.abs()));
        prop_assert!(g.eval_primitive(s) >= -1e-12);
    }

    #[test]
    fn primitive_consistency_f(f in nonlinearity_strategy(), s in -8.0..8.0f64) {
        let oracle = simpson(|x| f.eval(x), 0.0, s, 2000);
        prop_assert!((f.eval_big_f(s) - oracle).abs() <= 1e-8 * (1.0 + oracle.abs()));
    }

    #[test]
    fn derivative_consistency(g in damping_strategy(), f in nonlinearity_strategy(), s in -8.0..8.0f64) {
        let h = 1e-6 * (1.0 + s.abs());
        let gp = (g.eval(s + h) - g.eval(s - h)) / (2.0 * h);
        prop_assert!((g.eval_prime(s) - gp).abs() <= 1e-4 * (1.0 + gp.abs()));
        let fp = (f.eval(s + h) - f.eval(s - h)) / (2.0 * h);
        prop_assert!((f.eval_prime(s) - fp).abs() <= 1e-4 * (1.0 + fp.abs()));
    }

    /// Exactly one region tag, reproduced by an independent predicate chain.
    #[test]
    fn region_partition(m in -1.0..7.0f64, p in -1.0..7.0f64) {
        let got = region_classify(m, p);
        let in_plot = m > 1.0 && m <= 5.0 && (1.0..=5.0).contains(&p);
        let want = if !in_plot {
            Region::Invalid
        } else if p <= 3.0 {
            Region::I
        } else if p <= 6.0 * m / (m + 1.0) {
            Region::II
        } else if p <= 3.0 * m {
            Region::III
        } else {
            Region::Uncovered
        };
        prop_assert_eq!(got, want);
    }

    #[test]
    fn truncation_bounded_and_lipschitz(f in nonlinearity_strategy(), n in 1usize..5, s in -100.0..100.0f64) {
        let fn_ = f.truncate(n);
        let level = n as f64;
        let sup = f.eval(level).abs().max(f.eval(-level).abs());
        prop_assert!(fn_.eval(s).abs() <= sup + 1e-12);
        // plateau outside the window
        if s.abs() >= level {
            prop_assert_eq!(fn_.eval(s), f.eval(level.copysign(s)));
        }
    }
}

#[test]
fn exponent_k_monotone_pieces() {
    // k rises to 3 at m = 5/3 then falls as 5/m
    let ks: Vec<f64> = [1.1, 1.3, 5.0 / 3.0, 2.0, 3.0, 5.0]
        .iter()
        .map(|&m| exponent_k(m).unwrap())
        .collect();
    assert!(ks[0] < ks[1] && ks[1] < ks[2]);
    assert!(ks[2] > ks[3] && ks[3] > ks[4] && ks[4] > ks[5]);
    assert!((ks[2] - 3.0).abs() < 1e-12);
}

#[test]
fn table_backed_damping_validates() {
    let xs: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.25).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| x.powi(3) + 0.3 * x).collect();
    let g = DampingSpec::from_table(xs, ys, 3.0).unwrap();
    assert!((g.eval(1.0) - 1.3).abs() < 1e-10);

    let domain = DomainSpec::new(&[1.0], 8).unwrap();
    let basis = SpectralBasis::build(domain, 4).unwrap();
    let model = ModelSpec::new(g, NonlinearitySpec::power(3.0).unwrap(), Field::zero(basis.clone()));
    let report = validate_assumptions(&model, basis.lambda_1());
    assert!(report.passes("g_monotone"));
    assert!(report.passes("G1"));
}

#[test]
fn non_monotone_table_rejected() {
    let xs = vec![-1.0, 0.0, 1.0];
    let ys = vec![-1.0, 0.5, 0.2];
    assert!(DampingSpec::from_table(xs, ys, 2.0).is_err());
    assert!(MonotoneTable::new(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
}

/// The (1.4) and (1.5) bounds hold with the report's witnessed constants on a
/// fresh dense grid (not the validator's own grid).
#[test]
fn witnessed_bounds_hold_on_fresh_grid() {
    let domain = DomainSpec::new(&[1.0], 8).unwrap();
    let basis = SpectralBasis::build(domain, 4).unwrap();
    let lambda_1 = basis.lambda_1();
    for f in [
        NonlinearitySpec::power(3.0).unwrap(),
        NonlinearitySpec::power_minus_linear(3.0, 0.5).unwrap(),
        NonlinearitySpec::power(5.0).unwrap(),
    ] {
        let model = ModelSpec::new(
            DampingSpec::power(5.0 / 3.0).unwrap(),
            f,
            Field::zero(basis.clone()),
        );
        let report = validate_assumptions(&model, lambda_1);
        let f2 = report.check("F2").unwrap();
        let lambda = f2.constant("lambda").unwrap();
        let c = f2.constant("C").unwrap();
        let f = &model.nonlinearity;
        let omega = f.omega;
        let k_omega = f.k_omega;
        for i in -3000..=3000 {
            let s = i as f64 * 0.3;
            assert!(
                f.eval(s) * s >= -lambda * s * s - c - 1e-9 * (1.0 + s * s),
                "(1.4a) at {s}"
            );
            assert!(
                f.eval_big_f(s) >= -lambda / 2.0 * s * s - c - 1e-9 * (1.0 + s * s),
                "(1.4b) at {s}"
            );
            let lhs = f.eval(s) * s - f.eval_big_f(s);
            assert!(
                lhs >= -omega * s.powi(6) - k_omega * s * s - 1e-9 * (1.0 + s.powi(6)),
                "(1.5) at {s}"
            );
        }
    }
}

#[test]
fn g2_margins_reported() {
    let domain = DomainSpec::new(&[1.0], 8).unwrap();
    let basis = SpectralBasis::build(domain, 4).unwrap();
    let model = ModelSpec::new(
        DampingSpec::power_plus_linear(3.0, 0.5).unwrap(),
        NonlinearitySpec::power(3.0).unwrap(),
        Field::zero(basis.clone()),
    );
    let report = validate_assumptions(&model, basis.lambda_1());
    let g2 = report.check("G2").unwrap();
    assert!(g2.pass);
    assert!(g2.constant("c").unwrap() > 0.0);
    assert!(g2.margin_at_edge > 0.0);
}

/// Pinned (c1, c2, c3) witnesses are verified rather than re-searched.
#[test]
fn pinned_g1_witnesses_are_checked() {
    let domain = DomainSpec::new(&[1.0], 8).unwrap();
    let basis = SpectralBasis::build(domain, 4).unwrap();
    let mut g = DampingSpec::power(3.0).unwrap();
    g.g1_constants = Some([1.0, 0.0, 2.0]);
    let model = ModelSpec::new(g, NonlinearitySpec::power(3.0).unwrap(), Field::zero(basis.clone()));
    let report = validate_assumptions(&model, basis.lambda_1());
    let g1 = report.check("G1").unwrap();
    assert!(g1.pass);
    assert_eq!(g1.constant("c1").unwrap(), 1.0);
    assert_eq!(g1.constant("c3").unwrap(), 2.0);

    // witnesses that are actually wrong must fail
    let mut bad = DampingSpec::power(3.0).unwrap();
    bad.g1_constants = Some([5.0, 0.0, 2.0]); // lower bound 5 s^3 > s^3
    let model = ModelSpec::new(bad, NonlinearitySpec::power(3.0).unwrap(), Field::zero(basis.clone()));
    let report = validate_assumptions(&model, basis.lambda_1());
    assert!(!report.check("G1").unwrap().pass);
}
