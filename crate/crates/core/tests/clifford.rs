//! Clifford algebra checks: the abstract product against the spinor matrix
//! representation, and the explicit functional calculus against matrix
//! eigendecomposition.

use bottdeg_core::clifford::*;
use nalgebra::{Complex, DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn z(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_element(n: usize, rng: &mut ChaCha8Rng) -> CliffordElement {
    let mut e = CliffordElement::zero(n);
    for mask in 0..(1usize << n) {
        e.set_coeff(mask, z(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    }
    e
}

/// f(S) for Hermitian S via eigendecomposition; the independent oracle for
/// the functional calculus.
fn matrix_function(
    s: &DMatrix<Complex64>,
    f: impl Fn(f64) -> Complex64,
) -> DMatrix<Complex64> {
    let eig = s.clone().symmetric_eigen();
    let dim = s.nrows();
    let mut diag = DMatrix::<Complex64>::zeros(dim, dim);
    for (i, lambda) in eig.eigenvalues.iter().enumerate() {
        diag[(i, i)] = f(*lambda);
    }
    &eig.eigenvectors * diag * eig.eigenvectors.adjoint()
}

#[test]
fn generator_squares_to_one() {
    let e1 = CliffordElement::generator(3, 1).unwrap();
    let sq = cl_mul(&e1, &e1).unwrap();
    assert!((&sq - &CliffordElement::one(3)).coeff_sup() < 1e-15);
}

#[test]
fn distinct_generators_anticommute() {
    let n = 5;
    for i in 1..=n {
        for j in 1..=n {
            let ei = CliffordElement::generator(n, i).unwrap();
            let ej = CliffordElement::generator(n, j).unwrap();
            let anti = &cl_mul(&ei, &ej).unwrap() + &cl_mul(&ej, &ei).unwrap();
            let expected = if i == j {
                &CliffordElement::one(n) * z(2.0, 0.0)
            } else {
                CliffordElement::zero(n)
            };
            assert!((&anti - &expected).coeff_sup() == 0.0, "i={i} j={j}");
        }
    }
}

#[test]
fn e1_e2_product_and_order() {
    let e1 = CliffordElement::generator(2, 1).unwrap();
    let e2 = CliffordElement::generator(2, 2).unwrap();
    let e12 = cl_mul(&e1, &e2).unwrap();
    assert_eq!(e12.coeff(0b11), z(1.0, 0.0));
    let e21 = cl_mul(&e2, &e1).unwrap();
    assert_eq!(e21.coeff(0b11), z(-1.0, 0.0));
}

#[test]
fn positive_convention_annihilates_idempotent_pair() {
    // (1 + e1)(1 − e1) = 1 − e1² = 0
    let one = CliffordElement::one(1);
    let e1 = CliffordElement::generator(1, 1).unwrap();
    let product = cl_mul(&(&one + &e1), &(&one - &e1)).unwrap();
    assert!(product.coeff_sup() < 1e-15);
}

#[test]
fn rank_mismatch_rejected() {
    let a = CliffordElement::one(2);
    let b = CliffordElement::one(3);
    assert!(matches!(
        cl_mul(&a, &b),
        Err(CliffordError::RankMismatch { .. })
    ));
}

#[test]
fn associativity_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..30 {
        let a = random_element(4, &mut rng);
        let b = random_element(4, &mut rng);
        let c = random_element(4, &mut rng);
        let left = cl_mul(&cl_mul(&a, &b).unwrap(), &c).unwrap();
        let right = cl_mul(&a, &cl_mul(&b, &c).unwrap()).unwrap();
        assert!((&left - &right).coeff_sup() < 1e-10);
    }
}

#[test]
fn grading_is_multiplicative() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..20 {
        let a = random_element(4, &mut rng);
        let b = random_element(4, &mut rng);
        for (odd_a, odd_b) in [(false, false), (true, true), (false, true), (true, false)] {
            let pa = a.graded_part(odd_a);
            let pb = b.graded_part(odd_b);
            let prod = cl_mul(&pa, &pb).unwrap();
            // even·even and odd·odd land even; mixed lands odd
            let expect_odd = odd_a != odd_b;
            assert!(prod.graded_part(!expect_odd).coeff_sup() < 1e-12);
        }
    }
}

#[test]
fn extension_of_swap_flips_bivector() {
    let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let phi = extend_isometry(&swap).unwrap();
    let e1 = CliffordElement::generator(2, 1).unwrap();
    let img = phi.apply(&e1).unwrap();
    assert_eq!(img.coeff(0b10), z(1.0, 0.0));
    // e12 ↦ e2·e1 = −e12
    let e12 = cl_mul(&e1, &CliffordElement::generator(2, 2).unwrap()).unwrap();
    let img12 = phi.apply(&e12).unwrap();
    assert_eq!(img12.coeff(0b11), z(-1.0, 0.0));
}

#[test]
fn extension_of_rotation_preserves_squares() {
    let t: f64 = 0.7;
    let rot = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
    let phi = extend_isometry(&rot).unwrap();
    let e1 = CliffordElement::generator(2, 1).unwrap();
    let img = phi.apply(&e1).unwrap();
    let sq = cl_mul(&img, &img).unwrap();
    assert!((&sq - &CliffordElement::one(2)).coeff_sup() < 1e-14);
    // identity extension is the identity morphism
    let id = extend_isometry(&DMatrix::<f64>::identity(3, 3)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random_element(3, &mut rng);
    assert!((&id.apply(&a).unwrap() - &a).coeff_sup() < 1e-15);
}

#[test]
fn extension_preserves_involution_and_grading() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let g = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0f64..1.0));
    let q = g.qr().q();
    let phi = extend_isometry(&q).unwrap();
    for _ in 0..10 {
        let a = random_element(3, &mut rng);
        let lhs = phi.apply(&a.adjoint()).unwrap();
        let rhs = phi.apply(&a).unwrap().adjoint();
        assert!((&lhs - &rhs).coeff_sup() < 1e-12);
        let odd_img = phi.apply(&a.graded_part(true)).unwrap();
        assert!(odd_img.graded_part(false).coeff_sup() < 1e-12);
    }
}

#[test]
fn non_isometry_rejected() {
    let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
    assert!(matches!(
        extend_isometry(&m),
        Err(CliffordError::NotIsometry { .. })
    ));
}

#[test]
fn functional_calculus_identity_function() {
    let p = SpectralPoint::new(0.5, DVector::from_row_slice(&[1.0, -2.0]));
    let out = functional_calculus(|t| z(t, 0.0), &p);
    assert_eq!(out.rank(), 3);
    assert!((out.coeff(0b001) - z(0.5, 0.0)).norm() < 1e-14);
    assert!((out.coeff(0b010) - z(1.0, 0.0)).norm() < 1e-14);
    assert!((out.coeff(0b100) - z(-2.0, 0.0)).norm() < 1e-14);
    assert!(out.coeff(0).norm() < 1e-14);
}

#[test]
fn functional_calculus_square_is_scalar() {
    let p = SpectralPoint::new(-0.3, DVector::from_row_slice(&[0.4, 1.1]));
    let rho2 = p.rho() * p.rho();
    let out = functional_calculus(|t| z(t * t, 0.0), &p);
    assert!((out.coeff(0) - z(rho2, 0.0)).norm() < 1e-13);
    for mask in 1..8 {
        assert!(out.coeff(mask).norm() < 1e-13);
    }
}

#[test]
fn functional_calculus_odd_gaussian_frozen_value() {
    // f(t) = t·exp(−t²) at (1, (1,0)): ρ = √2, f odd, so the result is
    // e^{−2}·(e₀ + e₁) exactly.
    let p = SpectralPoint::new(1.0, DVector::from_row_slice(&[1.0, 0.0]));
    let out = functional_calculus(|t| z(t * (-t * t).exp(), 0.0), &p);
    let expected = (-2.0f64).exp();
    assert!((out.coeff(0b001) - z(expected, 0.0)).norm() < 1e-14);
    assert!((out.coeff(0b010) - z(expected, 0.0)).norm() < 1e-14);
    assert!(out.coeff(0).norm() < 1e-15);
    assert!(out.coeff(0b100).norm() < 1e-15);
}

#[test]
fn functional_calculus_at_origin() {
    let p = SpectralPoint::new(0.0, DVector::zeros(2));
    let out = functional_calculus(|t| z((-t * t).exp(), 0.0), &p);
    assert!((out.coeff(0) - z(1.0, 0.0)).norm() < 1e-15);
    assert_eq!(out.rank(), 3);
}

#[test]
fn functional_calculus_matches_matrix_eigendecomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..60 {
        let dim = rng.gen_range(1..=3usize);
        let v = DVector::from_fn(dim, |_, _| rng.gen_range(-2.0..2.0));
        let p = SpectralPoint::new(rng.gen_range(-2.0..2.0), v);
        let coeffs: [Complex64; 4] = core::array::from_fn(|_| {
            z(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let f = move |t: f64| {
            (coeffs[0] + coeffs[1] * t + coeffs[2] * t * t + coeffs[3] * t * t * t)
                * (-0.5 * t * t).exp()
        };
        let abstract_result = functional_calculus(f, &p);

        // independent route: matrix representation of s, then f via eigen
        let s = {
            let mut e = CliffordElement::zero(p.v.len() + 1);
            e.set_coeff(1, z(p.x, 0.0));
            for i in 0..p.v.len() {
                e.set_coeff(1 << (i + 1), z(p.v[i], 0.0));
            }
            e
        };
        let s_mat = matrix_rep(&s).unwrap();
        let expected = matrix_function(&s_mat, f);
        let got = matrix_rep(&abstract_result).unwrap();
        assert!(
            (&got - &expected).norm() < 1e-10,
            "functional calculus disagrees with eigendecomposition"
        );
    }
}

#[test]
fn functional_calculus_is_multiplicative_in_f() {
    let mut rng = ChaCha8Rng::seed_from_u64(59);
    for _ in 0..40 {
        let dim = rng.gen_range(1..=3usize);
        let v = DVector::from_fn(dim, |_, _| rng.gen_range(-1.5..1.5));
        let p = SpectralPoint::new(rng.gen_range(-1.5..1.5), v);
        let a: [f64; 3] = core::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let b: [f64; 3] = core::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let f = move |t: f64| z(a[0] + a[1] * t + a[2] * t * t, 0.0);
        let g = move |t: f64| z(b[0] + b[1] * t + b[2] * t * t, 0.0);
        let fg = move |t: f64| f(t) * g(t);
        let lhs = functional_calculus(fg, &p);
        let rhs = cl_mul(&functional_calculus(f, &p), &functional_calculus(g, &p)).unwrap();
        assert!((&lhs - &rhs).coeff_sup() < 1e-9);
    }
}

#[test]
fn matrix_rep_of_unit_and_generator() {
    let one = CliffordElement::one(3);
    let m = matrix_rep(&one).unwrap();
    assert!((m.clone() - DMatrix::<Complex<f64>>::identity(4, 4)).norm() < 1e-15);

    let e1 = CliffordElement::generator(3, 1).unwrap();
    let g = matrix_rep(&e1).unwrap();
    assert!((&g - &g.adjoint()).norm() < 1e-15, "self-adjoint generator");
    assert!(
        (&g * &g - DMatrix::<Complex<f64>>::identity(4, 4)).norm() < 1e-15,
        "involution"
    );
}

#[test]
fn matrix_rep_is_multiplicative() {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for _ in 0..50 {
        let a = random_element(5, &mut rng);
        let b = random_element(5, &mut rng);
        let lhs = matrix_rep(&cl_mul(&a, &b).unwrap()).unwrap();
        let rhs = matrix_rep(&a).unwrap() * matrix_rep(&b).unwrap();
        assert!((lhs - rhs).norm() < 1e-10);
    }
}

#[test]
fn matrix_rep_respects_involution() {
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    for _ in 0..20 {
        let a = random_element(4, &mut rng);
        let lhs = matrix_rep(&a.adjoint()).unwrap();
        let rhs = matrix_rep(&a).unwrap().adjoint();
        assert!((lhs - rhs).norm() < 1e-12);
    }
}

#[test]
fn cl_norm_values() {
    assert!((cl_norm(&CliffordElement::one(2)).unwrap() - 1.0).abs() < 1e-14);

    // (e1 + e2)² = 2·1, so the norm is √2
    let e1 = CliffordElement::generator(2, 1).unwrap();
    let e2 = CliffordElement::generator(2, 2).unwrap();
    let sum = &e1 + &e2;
    assert!((cl_norm(&sum).unwrap() - 2.0f64.sqrt()).abs() < 1e-13);

    // ‖x·e₀ + C(v)‖ = ρ
    let p = SpectralPoint::new(0.8, DVector::from_row_slice(&[-1.0, 2.0]));
    let s = functional_calculus(|t| z(t, 0.0), &p);
    assert!((cl_norm(&s).unwrap() - p.rho()).abs() < 1e-13);
}

#[test]
fn cl_norm_satisfies_cstar_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(83);
    for _ in 0..20 {
        let a = random_element(4, &mut rng);
        let astar_a = cl_mul(&a.adjoint(), &a).unwrap();
        let lhs = cl_norm(&astar_a).unwrap();
        let rhs = cl_norm(&a).unwrap().powi(2);
        assert!((lhs - rhs).abs() < 1e-9 * rhs.max(1.0));
    }
}

#[test]
fn rank_caps_enforced() {
    assert!(matches!(
        matrix_rep(&CliffordElement::zero(15)),
        Err(CliffordError::RankTooLarge { .. })
    ));
    let a = CliffordElement::one(14);
    assert!(matrix_rep(&a).is_ok());
}

#[test]
fn shift_generators_reindexes() {
    let e1 = CliffordElement::generator(2, 1).unwrap();
    let shifted = e1.shift_generators(1).unwrap();
    assert_eq!(shifted.rank(), 3);
    assert_eq!(shifted.coeff(0b010), z(1.0, 0.0));
    assert_eq!(shifted.coeff(0b001), z(0.0, 0.0));
}
