//! Property-based invariants over randomized inputs.

use bottdeg_core::approx::fourier::{cubic_pointwise, FourierState};
use bottdeg_core::clifford::{cl_mul, matrix_rep, CliffordElement};
use bottdeg_core::euclid::{dist, dist_one_sided, polar_unitary, LinearMap, Subspace};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

fn clifford_strategy(n: usize) -> impl Strategy<Value = CliffordElement> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_map(move |coeffs| {
        let mut e = CliffordElement::zero(n);
        for (mask, (re, im)) in coeffs.into_iter().enumerate() {
            e.set_coeff(mask, Complex64::new(re, im));
        }
        e
    })
}

fn matrix_strategy(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    proptest::collection::vec(-1.0f64..1.0, n * n)
        .prop_map(move |data| DMatrix::from_row_slice(n, n, &data))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_matches_matrix_representation(
        a in clifford_strategy(3),
        b in clifford_strategy(3),
    ) {
        let lhs = matrix_rep(&cl_mul(&a, &b).unwrap()).unwrap();
        let rhs = matrix_rep(&a).unwrap() * matrix_rep(&b).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn adjoint_is_an_involution(a in clifford_strategy(4)) {
        let twice = a.adjoint().adjoint();
        prop_assert!((&twice - &a).coeff_sup() < 1e-14);
    }

    #[test]
    fn polar_unitary_is_idempotent(m in matrix_strategy(4)) {
        let l = LinearMap::new(m);
        prop_assume!(l.sigma_min() > 1e-3);
        let u = polar_unitary(&l).unwrap();
        let uu = polar_unitary(&u).unwrap();
        prop_assert!((uu.matrix() - u.matrix()).norm() < 1e-10);
    }

    #[test]
    fn dist_is_symmetric_and_bounded(
        m1 in matrix_strategy(4),
        m2 in matrix_strategy(4),
        d1 in 1usize..4,
        d2 in 1usize..4,
    ) {
        let q1 = m1.qr().q();
        let q2 = m2.qr().q();
        let v1 = Subspace::new(q1.columns(0, d1).clone_owned()).unwrap();
        let v2 = Subspace::new(q2.columns(0, d2).clone_owned()).unwrap();
        let d = dist(&v1, &v2).unwrap();
        prop_assert!((d - dist(&v2, &v1).unwrap()).abs() < 1e-13);
        prop_assert!(d <= dist_one_sided(&v1, &v2).unwrap() + 1e-13);
        prop_assert!(d <= dist_one_sided(&v2, &v1).unwrap() + 1e-13);
        prop_assert!((0.0..=2.0f64.sqrt() + 1e-12).contains(&d));
    }

    #[test]
    fn cube_preserves_reality_and_translation_commutes(
        coeffs in proptest::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 3),
        shift in 0.0f64..2.0,
    ) {
        let mut a = FourierState::zeros(2.0, 1, 3);
        a.set_coeff(0, Complex64::new(coeffs[0].0, 0.0));
        for (k, &(re, im)) in coeffs.iter().enumerate().skip(1) {
            a.set_coeff(k as i64, Complex64::new(re, im));
            a.set_coeff(-(k as i64), Complex64::new(re, -im));
        }
        let cube = cubic_pointwise(&a);
        prop_assert!(cube.is_real(1e-12));
        // translation commutes with the pointwise cube
        let route1 = cubic_pointwise(&a.translate(shift));
        let route2 = cube.translate(shift);
        for k in -9i64..=9 {
            prop_assert!((route1.coeff(k) - route2.coeff(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn one_sided_distance_detects_containment(m in matrix_strategy(5), d in 2usize..5) {
        let q = m.qr().q();
        prop_assume!(q.column(0).norm() > 0.9);
        let big = Subspace::new(q.columns(0, d).clone_owned()).unwrap();
        let small = Subspace::new(q.columns(0, 1).clone_owned()).unwrap();
        prop_assert!(dist_one_sided(&big, &small).unwrap() < 1e-10);
    }
}

#[test]
fn functional_calculus_norm_equals_spectral_radius() {
    // ‖x·e₀ + C(v)‖ = ρ through the identity function
    let p = bottdeg_core::clifford::SpectralPoint::new(1.2, DVector::from_row_slice(&[0.3, -0.4]));
    let s = bottdeg_core::clifford::functional_calculus(|t| Complex64::new(t, 0.0), &p);
    let norm = bottdeg_core::clifford::cl_norm(&s).unwrap();
    assert!((norm - p.rho()).abs() < 1e-12);
}
