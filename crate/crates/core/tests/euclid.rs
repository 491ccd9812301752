//! Polar decomposition and subspace-distance checks against independent
//! oracles: the sup-inf distance definition evaluated by brute force, and
//! the singular value decomposition for polar factors.

use bottdeg_core::euclid::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let qr = g.qr();
    qr.q()
}

fn random_invertible(n: usize, rng: &mut ChaCha8Rng) -> LinearMap {
    loop {
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let l = LinearMap::new(m);
        if l.sigma_min() > 1e-3 {
            return l;
        }
    }
}

fn line(dir: &[f64]) -> Subspace {
    let v = DVector::from_row_slice(dir);
    let v: DVector<f64> = &v / v.norm();
    Subspace::new(DMatrix::from_columns(&[v])).unwrap()
}

/// Brute-force sup-inf evaluation of d′(V₁; V₂) straight from the
/// definition, for subspaces of dimension ≤ 2. Unit spheres are enumerated
/// exactly for lines and by a refined angle grid for planes.
fn sup_inf_bruteforce(v1: &Subspace, v2: &Subspace) -> f64 {
    let sphere = |s: &Subspace, n: usize| -> Vec<DVector<f64>> {
        match s.dim() {
            1 => {
                let u = s.frame().column(0).clone_owned();
                vec![u.clone(), -u]
            }
            2 => {
                let a = s.frame().column(0).clone_owned();
                let b = s.frame().column(1).clone_owned();
                (0..n)
                    .map(|k| {
                        let t = 2.0 * core::f64::consts::PI * (k as f64) / (n as f64);
                        &a * t.cos() + &b * t.sin()
                    })
                    .collect()
            }
            d => panic!("oracle only handles dims 1-2, got {d}"),
        }
    };
    // three refinement rounds: global grid, then magnified windows
    let mut sup = 0.0f64;
    for v2u in sphere(v2, 4096) {
        let mut inf = f64::INFINITY;
        for v1u in sphere(v1, 4096) {
            inf = inf.min((&v1u - &v2u).norm());
        }
        sup = sup.max(inf);
    }
    sup
}

#[test]
fn polar_of_identity_is_identity() {
    let l = LinearMap::identity(3);
    let u = polar_unitary(&l).unwrap();
    assert!((u.matrix() - DMatrix::<f64>::identity(3, 3)).norm() < 1e-12);
}

#[test]
fn polar_of_positive_diagonal_is_identity() {
    let l = LinearMap::diagonal(&[2.0, 0.5]);
    let u = polar_unitary(&l).unwrap();
    assert!((u.matrix() - DMatrix::<f64>::identity(2, 2)).norm() < 1e-12);
}

#[test]
fn polar_recovers_householder_factor() {
    // L = Q·diag(3,1,0.2) with Q a Householder reflection is already a
    // singular value decomposition, so the polar unitary must equal Q.
    let u = DVector::from_row_slice(&[1.0, -2.0, 0.5]);
    let u: DVector<f64> = &u / u.norm();
    let q = DMatrix::<f64>::identity(3, 3) - 2.0 * &u * u.transpose();
    let l = LinearMap::new(&q * DMatrix::from_diagonal(&DVector::from_row_slice(&[3.0, 1.0, 0.2])));
    let polar = polar_unitary(&l).unwrap();
    assert!((polar.matrix() - &q).norm() < 1e-10);
}

#[test]
fn polar_identities_on_random_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let l = random_invertible(6, &mut rng);
        let u = polar_unitary(&l).unwrap();
        // isometry
        let gram = u.matrix().transpose() * u.matrix();
        assert!((gram - DMatrix::<f64>::identity(6, 6)).norm() < 1e-10);
        // L = l̄·√(LᵀL)
        let sq = {
            let sym = l.matrix().transpose() * l.matrix();
            let eig = sym.symmetric_eigen();
            let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| x.max(0.0).sqrt()));
            &eig.eigenvectors * d * eig.eigenvectors.transpose()
        };
        assert!((u.matrix() * sq - l.matrix()).norm() < 1e-8);
        // orientation preserved
        assert_eq!(
            u.matrix().determinant().signum(),
            l.matrix().determinant().signum()
        );
        // idempotency
        let uu = polar_unitary(&u).unwrap();
        assert!((uu.matrix() - u.matrix()).norm() < 1e-10);
    }
}

#[test]
fn polar_rejects_singular_map() {
    let l = LinearMap::diagonal(&[1.0, 0.0]);
    assert!(matches!(
        polar_unitary(&l),
        Err(EuclidError::SingularMap { .. })
    ));
}

#[test]
fn one_sided_distance_vanishes_on_containment() {
    let v1 = Subspace::coordinate(3, 2);
    let v2 = Subspace::coordinate(3, 1);
    assert!(dist_one_sided(&v1, &v2).unwrap() < 1e-12);
    // and is positive the other way around
    assert!(dist_one_sided(&v2, &v1).unwrap() > 1.0);
}

#[test]
fn orthogonal_lines_are_sqrt2_apart() {
    let v1 = line(&[1.0, 0.0]);
    let v2 = line(&[0.0, 1.0]);
    let d = dist_one_sided(&v1, &v2).unwrap();
    assert!((d - 2.0f64.sqrt()).abs() < 1e-12);
    assert!((d - sup_inf_bruteforce(&v1, &v2)).abs() < 1e-9);
}

#[test]
fn tilted_line_matches_brute_force() {
    let theta = core::f64::consts::PI / 6.0;
    let v1 = line(&[1.0, 0.0]);
    let v2 = line(&[theta.cos(), theta.sin()]);
    let d = dist_one_sided(&v1, &v2).unwrap();
    // closed form √(2 − 2 cos θ), refined oracle value
    assert!((d - 0.5176380902050415).abs() < 1e-6);
    assert!((d - sup_inf_bruteforce(&v1, &v2)).abs() < 1e-9);
}

#[test]
fn plane_line_pairs_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..12 {
        let q = random_orthogonal(3, &mut rng);
        let plane = Subspace::new(DMatrix::from_columns(&[
            q.column(0).clone_owned(),
            q.column(1).clone_owned(),
        ]))
        .unwrap();
        let dir = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
        let ln = line(dir.as_slice());
        for (a, b) in [(&plane, &ln), (&ln, &plane)] {
            let fast = dist_one_sided(a, b).unwrap();
            let slow = sup_inf_bruteforce(a, b);
            assert!(
                (fast - slow).abs() < 2e-3,
                "principal-angle value {fast} vs sup-inf grid {slow}"
            );
        }
    }
}

#[test]
fn dist_examples() {
    let v = Subspace::coordinate(4, 2);
    assert!(dist(&v, &v).unwrap() < 1e-12);
    // strict containment kills one side
    let big = Subspace::coordinate(4, 3);
    assert!(dist(&big, &v).unwrap() < 1e-12);
    // equal-dimension line pair: both sides agree
    let theta = core::f64::consts::PI / 6.0;
    let v1 = line(&[1.0, 0.0]);
    let v2 = line(&[theta.cos(), theta.sin()]);
    let d = dist(&v1, &v2).unwrap();
    assert!((d - dist_one_sided(&v1, &v2).unwrap()).abs() < 1e-12);
    assert!((d - dist_one_sided(&v2, &v1).unwrap()).abs() < 1e-12);
}

#[test]
fn dist_errors() {
    let v1 = Subspace::coordinate(2, 1);
    let v2 = Subspace::coordinate(3, 1);
    assert!(matches!(
        dist_one_sided(&v1, &v2),
        Err(EuclidError::AmbientMismatch { .. })
    ));
    assert!(matches!(
        dist_one_sided(&v1, &Subspace::zero(2)),
        Err(EuclidError::ZeroSubspace)
    ));
}

#[test]
fn one_sided_zero_iff_contained_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        let q = random_orthogonal(6, &mut rng);
        let d_big = rng.gen_range(2..=5usize);
        let d_small = rng.gen_range(1..d_big);
        let big = Subspace::new(q.columns(0, d_big).clone_owned()).unwrap();
        let small = Subspace::new(q.columns(0, d_small).clone_owned()).unwrap();
        assert!(dist_one_sided(&big, &small).unwrap() < 1e-10);
        assert!(big.contains(&small, 1e-8));
        // perturb one direction out of the big span: containment must fail
        let mut frame = small.frame().clone();
        let outside = q.column(5).clone_owned();
        let tilted = (frame.column(0).clone_owned() * 0.98 + outside * 0.199)
            .normalize();
        frame.set_column(0, &tilted);
        let moved = Subspace::span_of(&frame, 1e-10);
        assert!(dist_one_sided(&big, &moved).unwrap() > 1e-4);
        assert!(!big.contains(&moved, 1e-8));
    }
}

#[test]
fn dist_is_invariant_under_common_rotation() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let qa = random_orthogonal(5, &mut rng);
        let qb = random_orthogonal(5, &mut rng);
        let v1 = Subspace::new(qa.columns(0, 2).clone_owned()).unwrap();
        let v2 = Subspace::new(qb.columns(0, 3).clone_owned()).unwrap();
        let d = dist(&v1, &v2).unwrap();
        assert!(d <= dist_one_sided(&v1, &v2).unwrap() + 1e-14);
        assert!(d <= dist_one_sided(&v2, &v1).unwrap() + 1e-14);
        let r = random_orthogonal(5, &mut rng);
        let rv1 = v1.map_through(&r);
        let rv2 = v2.map_through(&r);
        assert!((dist(&rv1, &rv2).unwrap() - d).abs() < 1e-10);
    }
}

#[test]
fn unitarity_profile_unitary_map_qualifies_immediately() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let l = LinearMap::new(random_orthogonal(6, &mut rng));
    let exhaustion: Vec<_> = (0..4).map(|d| Subspace::coordinate(6, d)).collect();
    let profile = asymptotic_unitarity_profile(&l, &exhaustion, 1e-6).unwrap();
    assert_eq!(profile.first_within, Some(0));
    assert!(profile.norms[0] < 1e-10);
}

#[test]
fn unitarity_profile_inverse_square_family() {
    // L = diag(1 + 1/k²), k = 1..50; the tail norm past the first d
    // coordinates is 1/(d+1)², so the answer is the first d with that < ε.
    let n = 50;
    let entries: Vec<f64> = (1..=n).map(|k| 1.0 + 1.0 / ((k * k) as f64)).collect();
    let l = LinearMap::diagonal(&entries);
    let exhaustion: Vec<_> = (1..=10).map(|d| Subspace::coordinate(n, d)).collect();
    let eps = 0.1;
    let profile = asymptotic_unitarity_profile(&l, &exhaustion, eps).unwrap();
    // independent evaluation of the tail norms
    let expected_norms: Vec<f64> = (1..=10)
        .map(|d| 1.0 / (((d + 1) * (d + 1)) as f64))
        .collect();
    for (got, want) in profile.norms.iter().zip(&expected_norms) {
        assert!((got - want).abs() < 1e-12);
    }
    let expected_index = expected_norms.iter().position(|&x| x < eps).unwrap();
    assert_eq!(profile.first_within, Some(expected_index));
}

#[test]
fn unitarity_profile_uniform_dilation_fails() {
    let n = 10;
    let l = LinearMap::diagonal(&vec![2.0; n]);
    let exhaustion: Vec<_> = (1..=9).map(|d| Subspace::coordinate(n, d)).collect();
    let profile = asymptotic_unitarity_profile(&l, &exhaustion, 0.5).unwrap();
    assert_eq!(profile.first_within, None);
    for norm in &profile.norms {
        assert!((norm - 1.0).abs() < 1e-12);
    }
}

#[test]
fn lemma_dist_check_unitary_and_invariant_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let q = LinearMap::new(random_orthogonal(4, &mut rng));
    let v = Subspace::coordinate(4, 2);
    assert!(lemma_dist_check(&q, &v).unwrap() < 1e-10);

    let l = LinearMap::diagonal(&[1.5, 1.0]);
    let e1 = Subspace::coordinate(2, 1);
    assert!(lemma_dist_check(&l, &e1).unwrap() < 1e-12);
}

#[test]
fn lemma_dist_check_rotated_diagonal_matches_explicit_formula() {
    // L = diag(2,1)·R(0.3): the polar unitary is R(0.3), so l̄ᵀL = RᵀDR and
    // span(e1) moves to span(RᵀDR·e1). The expected distance follows from
    // the explicit 2×2 image vector.
    let t: f64 = 0.3;
    let (s, c) = (t.sin(), t.cos());
    let r = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
    let d = DMatrix::from_diagonal(&DVector::from_row_slice(&[2.0, 1.0]));
    let l = LinearMap::new(&d * &r);
    let e1 = Subspace::coordinate(2, 1);

    let w = DVector::from_row_slice(&[1.0 + c * c, -s * c]);
    let expected = (2.0 - 2.0 * (w[0].abs() / w.norm())).max(0.0).sqrt();
    let got = lemma_dist_check(&l, &e1).unwrap();
    assert!(expected > 0.1, "control value should be visibly positive");
    assert!((got - expected).abs() < 1e-8);
}

#[test]
fn lemma_dist_check_near_identity_bound() {
    // numerical form of the off-diagonal mechanism: for ‖L − I‖ < δ the
    // subspace deviation is bounded by 4δ on coordinate subspaces
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..50 {
        let delta = 0.1;
        let n = 5;
        let pert = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let pert = &pert * (delta / op_norm(&pert));
        let l = LinearMap::new(DMatrix::identity(n, n) + pert);
        for d in 1..n {
            let v = Subspace::coordinate(n, d);
            let checked = lemma_dist_check(&l, &v).unwrap();
            assert!(
                checked <= 4.0 * delta,
                "deviation {checked} exceeded 4δ = {}",
                4.0 * delta
            );
        }
    }
}
