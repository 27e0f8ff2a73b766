//! Invariant states: positivity, rotation invariance, decomposition and the
//! weighted GNS norm against the trace form.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use qdisk::algebra::AlgebraElement;
use qdisk::random;
use qdisk::states::{decompose_from_projections, GnsVector, InvariantState, Space, WeightedSpace};
use qdisk::CoefficientSequence;

fn seq(text: &str) -> CoefficientSequence {
    CoefficientSequence::parse(text).unwrap()
}

fn states() -> Vec<InvariantState> {
    vec![
        InvariantState::at_infinity(),
        InvariantState::pure(0),
        InvariantState::pure(3),
        InvariantState::new(0.3, seq("2^(-(k+1))")).unwrap(),
        decompose_from_projections(&seq("2^(-(k+2))")).unwrap(),
    ]
}

#[test]
fn states_are_positive() {
    let mut rng = random::rng(21);
    for state in states() {
        for _ in 0..100 {
            let a = random::element(&mut rng, 3, 5);
            let value = state.evaluate(&a.adjoint().multiply(&a)).unwrap();
            assert!(value.re >= -1e-12 && value.im.abs() <= 1e-12, "{value}");
        }
    }
}

#[test]
fn states_are_rotation_invariant() {
    let mut rng = random::rng(22);
    for state in states() {
        for _ in 0..50 {
            let a = random::element(&mut rng, 3, 5);
            let theta = rng.gen_range(0.0..2.0 * PI);
            let d = state.evaluate(&a.rotate(theta)).unwrap() - state.evaluate(&a).unwrap();
            assert!(d.norm() <= 1e-12);
        }
    }
}

#[test]
fn decomposition_inverts_the_projection_values() {
    for (lambda_inf, w) in [(0.0, "2^(-(k+1))"), (0.4, "ind(k==2)"), (0.75, "(k+1)^(-2)")] {
        let state = InvariantState::new(lambda_inf, seq(w)).unwrap();
        let back = decompose_from_projections(&state.omega()).unwrap();
        assert!((back.lambda_inf() - lambda_inf).abs() <= 1e-9);
        for k in 0..30 {
            assert!((back.weights().eval(k) - state.weights().eval(k)).norm() <= 1e-9);
        }
    }
}

#[test]
fn weighted_norm_matches_trace_form() {
    let w = seq("2^(-(k+1))");
    let space = Space::Weighted(WeightedSpace::new(w.clone()).unwrap());
    let size = 80;
    let mut rng = random::rng(23);
    for _ in 0..30 {
        let f = random::element(&mut rng, 3, 6);
        let norm = GnsVector::from_element(&space, &f).unwrap().norm().unwrap();
        // Σ_k w(k) ‖f E_k‖² over columns whose image fits in the truncation
        let m = f.to_matrix(size);
        let trace: f64 = (0..size - f.band())
            .map(|k| w.eval(k as i64).re * m.column(k).iter().map(Complex64::norm_sqr).sum::<f64>())
            .sum();
        assert!((norm * norm - trace).abs() <= 1e-8 * trace.max(1e-300), "{norm} vs {}", trace.sqrt());
    }
}

#[test]
fn boundary_values_of_the_circle_state() {
    let tau = InvariantState::at_infinity();
    let u = AlgebraElement::shift();
    assert_eq!(tau.evaluate(&u.adjoint().multiply(&u)).unwrap(), Complex64::new(1.0, 0.0));
    assert_eq!(tau.evaluate(&AlgebraElement::projection(0)).unwrap(), Complex64::new(0.0, 0.0));
}
