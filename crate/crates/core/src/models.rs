//! Named map instances and homotopy families
//!
//! The cubic and square planar maps, the cyclic cubic maps on ℝˡ, the
//! windowed shift truncations, diagonal stage families for the
//! commutativity experiments, and the standard two-leg homotopies that
//! deform a cubic-shift map to its linear reference (first shrinking the
//! linear term, then trading the cubes for the shift).

use alloc::{boxed::Box, vec::Vec};
use nalgebra::{DMatrix, DVector};

use crate::approx::{block_dim, cyclic_cube_eval, cyclic_cube_jacobian, ApproximationStage};
use crate::approx::fourier::SobolevChart;
use crate::approx::ShiftAction;
use crate::bott::ProperNonlinearMap;
use crate::degree::HomotopyFamily;
use crate::euclid::{LinearMap, Subspace};

/// The planar cubic-shift map (a, b) ↦ (a + b³, b + a³).
pub fn cubic2() -> ProperNonlinearMap {
    ProperNonlinearMap::new(2, 2, LinearMap::identity(2), |v| {
        DVector::from_row_slice(&[v[0] + v[1] * v[1] * v[1], v[1] + v[0] * v[0] * v[0]])
    })
    .with_jacobian(|v| {
        DMatrix::from_row_slice(2, 2, &[1.0, 3.0 * v[1] * v[1], 3.0 * v[0] * v[0], 1.0])
    })
}

/// The planar square-shift map (a, b) ↦ (a + b², b + a²); the even exponent
/// collapses the degree to zero.
pub fn square2() -> ProperNonlinearMap {
    ProperNonlinearMap::new(2, 2, LinearMap::identity(2), |v| {
        DVector::from_row_slice(&[v[0] + v[1] * v[1], v[1] + v[0] * v[0]])
    })
    .with_jacobian(|v| DMatrix::from_row_slice(2, 2, &[1.0, 2.0 * v[1], 2.0 * v[0], 1.0]))
}

/// The cyclic cubic map on ℝˡ: (a₁, …, a_l) ↦ (a₁ + a_l³, a₂ + a₁³, …).
pub fn cyclic(l: usize) -> ProperNonlinearMap {
    assert!(l >= 1);
    ProperNonlinearMap::new(l, l, LinearMap::identity(l), move |v| {
        DVector::from_fn(l, |i, _| {
            let p = v[(i + l - 1) % l];
            v[i] + p * p * p
        })
    })
    .with_jacobian(move |v| {
        let mut j = DMatrix::identity(l, l);
        for i in 0..l {
            let prev = (i + l - 1) % l;
            j[(i, prev)] += 3.0 * v[prev] * v[prev];
        }
        j
    })
}

/// The cyclic coordinate permutation on ℝˡ: (a₁, …, a_l) ↦ (a_l, a₁, …);
/// determinant (−1)^{l−1}.
pub fn cyclic_permutation(l: usize) -> LinearMap {
    let mut m = DMatrix::zeros(l, l);
    for i in 0..l {
        m[(i, (i + l - 1) % l)] = 1.0;
    }
    LinearMap::new(m)
}

/// The block swap (a, b) ↦ (b, a) on ℝ² — the involution reference of the
/// planar cubic map.
pub fn swap2() -> LinearMap {
    cyclic_permutation(2)
}

/// The straight-line homotopy F_t = l + t·c from F down to its linear part.
/// For the planar cubic map this family grows extra zeros of size
/// ~t^{−1/2}, which is exactly what the admissibility scan must detect.
pub fn straight_line_homotopy(map: ProperNonlinearMap) -> HomotopyFamily {
    let dim = map.dim_source();
    let reference = map.linear_part().clone();
    let l = reference.clone();
    HomotopyFamily::new(dim, reference, move |t, x| {
        let c = map.nonlinear_part(x);
        l.apply(x) + c * t
    })
}

/// The two-leg homotopy from a map F = id + c to a linear reference R:
/// the upper leg shrinks the identity term (t·x + c(x)), the lower leg
/// trades the nonlinearity for the reference ((2u)·c(x) + (1−2u)·R(x)).
/// Continuous, with F at u = 1 and R at u = 0.
pub fn two_leg_homotopy(
    dim: usize,
    c: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    reference: LinearMap,
) -> HomotopyFamily {
    let r = reference.clone();
    HomotopyFamily::new(dim, reference, move |u, x| {
        if u >= 0.5 {
            let t = 2.0 * u - 1.0;
            x * t + c(x)
        } else {
            c(x) * (2.0 * u) + r.apply(x) * (1.0 - 2.0 * u)
        }
    })
}

/// The involution-target homotopy of the planar cubic map: down to the pure
/// cube map, then across to the swap.
pub fn cubic2_involution_homotopy() -> HomotopyFamily {
    two_leg_homotopy(
        2,
        |v| DVector::from_row_slice(&[v[1] * v[1] * v[1], v[0] * v[0] * v[0]]),
        swap2(),
    )
}

/// The shift-target homotopy of the cyclic cubic map on ℝˡ.
pub fn cyclic_shift_homotopy(l: usize) -> HomotopyFamily {
    two_leg_homotopy(
        l,
        move |v| {
            DVector::from_fn(l, |i, _| {
                let p = v[(i + l - 1) % l];
                p * p * p
            })
        },
        cyclic_permutation(l),
    )
}

/// Coordinate-prefix stages of a diagonal linear map: stage i is the span
/// of the first `dims[i]` axes, with the truncated diagonal as its map.
/// The substrate of the commutativity-decay experiments.
pub fn diagonal_coordinate_stages(
    entries: &[f64],
    dims: &[usize],
    r: f64,
    s: f64,
) -> Vec<ApproximationStage> {
    let n = entries.len();
    dims.iter()
        .enumerate()
        .map(|(i, &d)| {
            assert!(d <= n);
            let sub = Subspace::coordinate(n, d);
            let map = ProperNonlinearMap::from_linear(LinearMap::diagonal(&entries[..d]));
            ApproximationStage {
                index: i,
                source: sub.clone(),
                target: sub,
                map,
                r,
                s,
            }
        })
        .collect()
}

/// Windowed truncations of the doubly infinite cubic shift: stage l acts on
/// the centered window of 2l+1 coordinates by the cyclic cubic map (the
/// wrap term standing in for the coordinate that left the window). Returns
/// the stages together with the ambient coordinate-shift action.
pub fn window_shift_stages(window_halfwidths: &[usize]) -> (Vec<ApproximationStage>, ShiftAction) {
    let l_max = *window_halfwidths.iter().max().expect("nonempty windows");
    let ambient = 2 * l_max + 3;
    let mid = ambient / 2;
    let stages = window_halfwidths
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let dim = 2 * l + 1;
            let mut frame = DMatrix::zeros(ambient, dim);
            for k in 0..dim {
                frame[(mid - l + k, k)] = 1.0;
            }
            let sub = Subspace::new(frame).expect("window frame orthonormal");
            ApproximationStage {
                index: i,
                source: sub.clone(),
                target: sub,
                map: cyclic(dim),
                r: 2.0,
                s: 1.0,
            }
        })
        .collect();
    (stages, ShiftAction::window_shift(ambient))
}

/// The cyclic cubic map of one Sobolev stage (blocks of bandlimited real
/// functions, frequencies ≤ `freq`), in the stage's Sobolev-orthonormal
/// coordinates.
pub fn sobolev_stage_map(blocks: usize, order: i32, freq: usize) -> ProperNonlinearMap {
    let dim = blocks * block_dim(freq);
    let c1 = SobolevChart::new(1.0, order, freq);
    let c2 = c1.clone();
    let c3 = c1.clone();
    let c4 = c1.clone();
    ProperNonlinearMap::new(dim, dim, LinearMap::identity(dim), move |v| {
        cyclic_cube_eval(&c1, &c2, blocks, v)
    })
    .with_jacobian(move |v| cyclic_cube_jacobian(&c3, &c4, blocks, v))
}

/// The block-shift reference of a Sobolev stage (the involution for two
/// blocks).
pub fn sobolev_stage_reference(blocks: usize, freq: usize) -> LinearMap {
    ShiftAction::cyclic_blocks(blocks, block_dim(freq)).generator
}

/// The two-leg homotopy from a Sobolev stage map to its block-shift
/// reference.
pub fn sobolev_stage_homotopy(blocks: usize, order: i32, freq: usize) -> HomotopyFamily {
    let dim = blocks * block_dim(freq);
    let map = sobolev_stage_map(blocks, order, freq);
    let c = move |v: &DVector<f64>| map.nonlinear_part(v);
    two_leg_homotopy(dim, c, sobolev_stage_reference(blocks, freq))
}

/// Radius of the pure-harmonic stationary shell of the stage homotopy: the
/// upper leg t·v + c(v) has zero circles at coordinate radius
/// √2·√(4t/3)·‖cos 2πk·‖_W, largest at k = freq, t = 1. Degree
/// certificates over the stage must either keep the ball inside this shell
/// or strictly beyond every shell.
pub fn sobolev_spurious_shell(blocks: usize, order: i32, freq: usize) -> f64 {
    let chart = SobolevChart::new(1.0, order, freq);
    let mut coords = DVector::zeros(chart.dim());
    coords[2 * freq - 1] = 1.0; // unit-W cos mode at the top frequency
    let state = chart.to_state(&coords);
    // amplitude of the unit-W cos mode, then the fixed-point amplitude
    let amplitude = 2.0 * state.coeff(freq as i64).norm();
    let fixed_amp = num_traits::Float::sqrt(4.0f64 / 3.0);
    let block_norm = fixed_amp / amplitude;
    num_traits::Float::sqrt(blocks as f64) * block_norm
}

/// Degree problems for the window stages of the cyclic model: the stage on
/// ℝˡ has degree (−1)^{l−1}, so the sequence alternates instead of
/// stabilizing.
pub fn cyclic_stage_problems(
    ls: &[usize],
    radius: f64,
    cfg: crate::degree::NewtonConfig,
) -> Vec<(
    usize,
    Box<dyn FnOnce() -> Result<crate::degree::DegreeCertificate, crate::degree::DegreeError>>,
)> {
    ls.iter()
        .map(|&l| {
            let cfg = cfg.clone();
            let engine: Box<
                dyn FnOnce() -> Result<crate::degree::DegreeCertificate, crate::degree::DegreeError>,
            > = Box::new(move || {
                let map = cyclic(l);
                let y = DVector::zeros(l);
                crate::degree::degree_root_count(&map, radius, &y, &cfg)
            });
            (l, engine)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_permutation_parity() {
        for l in 2..=6 {
            let det = cyclic_permutation(l).matrix().determinant();
            let expected = if l % 2 == 1 { 1.0 } else { -1.0 };
            assert!((det - expected).abs() < 1e-12, "l = {l}");
        }
    }

    #[test]
    fn cubic2_jacobian_matches_finite_differences() {
        let map = cubic2();
        let v = DVector::from_row_slice(&[0.7, -1.2]);
        let exact = map.jacobian(&v);
        let fd = {
            let plain = ProperNonlinearMap::new(2, 2, LinearMap::identity(2), |v| {
                DVector::from_row_slice(&[
                    v[0] + v[1] * v[1] * v[1],
                    v[1] + v[0] * v[0] * v[0],
                ])
            });
            plain.jacobian(&v)
        };
        assert!((exact - fd).norm() < 1e-6);
    }

    #[test]
    fn two_leg_homotopy_endpoints() {
        let family = cubic2_involution_homotopy();
        let x = DVector::from_row_slice(&[0.4, -0.9]);
        let top = family.at(1.0, &x);
        let cubic = cubic2().eval(&x);
        assert!((top - cubic).norm() < 1e-14);
        let bottom = family.at(0.0, &x);
        assert!((bottom - DVector::from_row_slice(&[-0.9, 0.4])).norm() < 1e-14);
    }
}
