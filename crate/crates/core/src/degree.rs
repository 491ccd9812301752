//! Brouwer degree of proper maps on balls, with certificates
//!
//! Three independent engines compute the degree of F on a ball around a
//! target y:
//!
//! * signed root counting — Newton iteration from a seed lattice, each root
//!   verified regular, degree = Σ sign(det DF);
//! * a 2-D winding oracle — adaptive angle accumulation of F along the
//!   boundary circle;
//! * homotopy transfer — an admissible homotopy to a linear reference,
//!   degree = sign(det reference).
//!
//! Every certificate carries the evidence justifying the integer: the root
//! list with residuals and Jacobian signs, the winding samples and total
//! turn, or the positive boundary margin over the homotopy grid. Where two
//! engines apply they are expected to agree; disagreement is a bug in the
//! caller's setup, not something to average over.

use alloc::{boxed::Box, vec::Vec};
use nalgebra::DVector;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bott::{sample_unit_ball, ProperNonlinearMap};
use crate::euclid::{EuclidError, LinearMap};

/// Errors of the degree engines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DegreeError {
    /// A (homotopy-)boundary sample came too close to the target value.
    #[error("boundary hit at t={t:?}, ‖F_t(x) − y‖ = {value_norm:.3e}")]
    BoundaryHit {
        /// Homotopy parameter of the offending sample, when applicable.
        t: Option<f64>,
        /// The offending boundary point.
        location: Vec<f64>,
        /// The achieved norm.
        value_norm: f64,
    },
    /// A root's Jacobian determinant is below the regularity threshold.
    #[error("irregular root at {location:?} with |det J| = {jac_det:.3e}")]
    IrregularRoot {
        /// The offending root.
        location: Vec<f64>,
        /// Its Jacobian determinant.
        jac_det: f64,
    },
    /// Newton converged to a root inside the ambiguous boundary shell.
    #[error("root found on the boundary shell at {location:?}")]
    SeedExhaustion {
        /// The offending root.
        location: Vec<f64>,
    },
    /// The winding refinement hit its evaluation cap.
    #[error("winding refinement limit: {evaluations} evaluations")]
    RefinementLimit {
        /// Evaluations spent.
        evaluations: usize,
    },
    /// The accumulated turn is not close to an integer multiple of 2π.
    #[error("accumulated turn {turn:.6} not an integer multiple of 2π")]
    NonIntegerWinding {
        /// The turn in units of 2π.
        turn: f64,
    },
    /// Root counting is capped in dimension.
    #[error("dimension {dim} above root-count cap {max}")]
    DimensionLimit {
        /// Requested dimension.
        dim: usize,
        /// Cap.
        max: usize,
    },
    /// The homotopy endpoint does not match the declared reference.
    #[error("family(0,·) deviates from the reference by {deviation:.3e}")]
    ReferenceMismatch {
        /// Worst sampled deviation.
        deviation: f64,
    },
    /// Propagated linear-algebra failure.
    #[error(transparent)]
    Singular(#[from] EuclidError),
}

/// Which engine produced a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeMethod {
    /// Signed root counting.
    RootCount,
    /// 2-D winding number.
    Winding2D,
    /// Homotopy transfer to a linear reference.
    HomotopyLinear,
}

/// One verified root with its sign data.
#[derive(Debug, Clone, PartialEq)]
pub struct RootRecord {
    /// Location of the root.
    pub location: DVector<f64>,
    /// sign(det DF) ∈ {−1, +1}.
    pub sign: i8,
    /// ‖F(x) − y‖ at the root.
    pub residual: f64,
    /// det DF at the root.
    pub jac_det: f64,
}

/// Method-specific evidence attached to a degree integer.
#[derive(Debug, Clone, PartialEq)]
pub enum DegreeEvidence {
    /// Root counting evidence.
    RootCount {
        /// The verified, deduplicated roots.
        roots: Vec<RootRecord>,
        /// min ‖F(x) − y‖ over the sampled boundary sphere.
        boundary_margin: f64,
        /// Seed lattice density per axis.
        seeds_per_axis: usize,
        /// Number of lattice seeds inside the ball.
        seeds_used: usize,
        /// Sard-style perturbation applied to y, if any.
        target_perturbation: Option<DVector<f64>>,
    },
    /// Winding evidence.
    Winding {
        /// Boundary evaluations used.
        boundary_samples: usize,
        /// Total accumulated turn (radians).
        total_turn: f64,
        /// min ‖F(x) − y‖ over the boundary.
        boundary_margin: f64,
    },
    /// Homotopy evidence.
    Homotopy {
        /// min over the (t, boundary) grid of ‖F_t(x) − y‖.
        margin: f64,
        /// Where the margin was attained: (t, boundary point).
        margin_at: (f64, DVector<f64>),
        /// Homotopy grid size in t.
        t_samples: usize,
        /// Boundary samples per t.
        boundary_samples: usize,
        /// det of the linear reference.
        reference_det: f64,
    },
}

/// An integer degree together with the evidence justifying it.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeCertificate {
    /// The degree.
    pub degree: i64,
    /// Which engine produced it.
    pub method: DegreeMethod,
    /// Ball radius used.
    pub ball_radius: f64,
    /// Target point y.
    pub target: DVector<f64>,
    /// Method-specific evidence.
    pub evidence: DegreeEvidence,
}

/// Newton/lattice configuration for root counting.
#[derive(Debug, Clone)]
pub struct NewtonConfig {
    /// Lattice points per axis within the bounding cube.
    pub seeds_per_axis: usize,
    /// Maximum Newton iterations per seed.
    pub max_iter: usize,
    /// Step-length convergence threshold.
    pub step_tol: f64,
    /// Residual acceptance threshold.
    pub residual_tol: f64,
    /// Distance under which two roots are identified.
    pub dedup_tol: f64,
    /// |det DF| below this is an irregular root.
    pub regularity_tol: f64,
    /// Relative width of the ambiguous boundary shell.
    pub boundary_shell: f64,
    /// Boundary margin below which the ball is rejected.
    pub margin_min: f64,
    /// Boundary samples for the margin scan.
    pub boundary_samples: usize,
    /// Dimension cap for lattice seeding.
    pub max_dim: usize,
    /// RNG seed (boundary scan and Sard perturbations).
    pub seed: u64,
    /// Attempts at re-randomizing y after an irregular root.
    pub perturb_attempts: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            seeds_per_axis: 9,
            max_iter: 60,
            step_tol: 1e-12,
            residual_tol: 1e-9,
            dedup_tol: 1e-6,
            regularity_tol: 1e-8,
            boundary_shell: 1e-3,
            margin_min: 1e-6,
            boundary_samples: 400,
            max_dim: 8,
            seed: 0,
            perturb_attempts: 3,
        }
    }
}

fn boundary_points(
    dim: usize,
    radius: f64,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<DVector<f64>> {
    let mut pts = Vec::with_capacity(count + 2 * dim);
    for i in 0..dim {
        let mut e = DVector::zeros(dim);
        e[i] = radius;
        pts.push(e.clone());
        e[i] = -radius;
        pts.push(e);
    }
    if dim == 2 {
        // deterministic angle grid; hits the symmetry directions exactly
        for i in 0..count {
            let theta = 2.0 * core::f64::consts::PI * (i as f64) / (count as f64);
            pts.push(DVector::from_row_slice(&[
                radius * Float::cos(theta),
                radius * Float::sin(theta),
            ]));
        }
        return pts;
    }
    for _ in 0..count {
        let v = sample_unit_ball(dim, rng);
        let n = v.norm();
        if n > 0.0 {
            pts.push(v * (radius / n));
        }
    }
    pts
}

fn boundary_margin(
    map: &ProperNonlinearMap,
    radius: f64,
    y: &DVector<f64>,
    cfg: &NewtonConfig,
) -> (f64, DVector<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x5eed));
    let mut min_norm = f64::INFINITY;
    let mut min_at = DVector::zeros(map.dim_source());
    for x in boundary_points(map.dim_source(), radius, cfg.boundary_samples, &mut rng) {
        let norm = (map.eval(&x) - y).norm();
        if norm < min_norm {
            min_norm = norm;
            min_at = x;
        }
    }
    (min_norm, min_at)
}

fn newton_from_seed(
    map: &ProperNonlinearMap,
    y: &DVector<f64>,
    seed_point: &DVector<f64>,
    radius: f64,
    cfg: &NewtonConfig,
) -> Option<DVector<f64>> {
    let mut x = seed_point.clone();
    for _ in 0..cfg.max_iter {
        let f = map.eval(&x) - y;
        let j = map.jacobian(&x);
        let lu = j.lu();
        let step = lu.solve(&f)?;
        x -= &step;
        if x.norm() > 4.0 * radius {
            return None; // escaped far outside the ball
        }
        if step.norm() < cfg.step_tol {
            return Some(x);
        }
    }
    // accept slow convergence if the residual is already tight
    if (map.eval(&x) - y).norm() < cfg.residual_tol {
        Some(x)
    } else {
        None
    }
}

fn root_count_once(
    map: &ProperNonlinearMap,
    ball_radius: f64,
    y: &DVector<f64>,
    cfg: &NewtonConfig,
) -> Result<(Vec<RootRecord>, usize), DegreeError> {
    let dim = map.dim_source();
    // lattice seeds inside the ball
    let mut seeds = Vec::new();
    let k = cfg.seeds_per_axis;
    let mut idx = alloc::vec![0usize; dim];
    loop {
        let p = DVector::from_fn(dim, |i, _| {
            -ball_radius + 2.0 * ball_radius * (idx[i] as f64 + 0.5) / (k as f64)
        });
        if p.norm() <= ball_radius {
            seeds.push(p);
        }
        // odometer
        let mut carry = dim;
        for i in (0..dim).rev() {
            idx[i] += 1;
            if idx[i] < k {
                carry = i;
                break;
            }
            idx[i] = 0;
        }
        if carry == dim {
            break;
        }
    }
    let seeds_used = seeds.len();

    let mut roots: Vec<RootRecord> = Vec::new();
    for seed_point in &seeds {
        let Some(x) = newton_from_seed(map, y, seed_point, ball_radius, cfg) else {
            continue;
        };
        let norm = x.norm();
        if norm > ball_radius * (1.0 + cfg.boundary_shell) {
            continue; // outside the ball: not ours
        }
        if norm > ball_radius * (1.0 - cfg.boundary_shell) {
            return Err(DegreeError::SeedExhaustion {
                location: x.iter().cloned().collect(),
            });
        }
        let residual = (map.eval(&x) - y).norm();
        if residual > cfg.residual_tol {
            continue;
        }
        if roots
            .iter()
            .any(|r| (&r.location - &x).norm() < cfg.dedup_tol * (1.0 + norm))
        {
            continue;
        }
        let jac_det = map.jacobian(&x).determinant();
        if jac_det.abs() <= cfg.regularity_tol {
            return Err(DegreeError::IrregularRoot {
                location: x.iter().cloned().collect(),
                jac_det,
            });
        }
        roots.push(RootRecord {
            location: x,
            sign: if jac_det > 0.0 { 1 } else { -1 },
            residual,
            jac_det,
        });
    }
    Ok((roots, seeds_used))
}

/// Degree by signed root counting: Newton from a lattice of seeds, roots
/// deduplicated and verified regular, degree = Σ sign(det DF).
///
/// When an irregular root is met the target is re-randomized within 1e-3
/// (the degree is locally constant in y off the critical values) and the
/// perturbation is recorded in the certificate.
pub fn degree_root_count(
    map: &ProperNonlinearMap,
    ball_radius: f64,
    y: &DVector<f64>,
    cfg: &NewtonConfig,
) -> Result<DegreeCertificate, DegreeError> {
    let dim = map.dim_source();
    if dim > cfg.max_dim {
        return Err(DegreeError::DimensionLimit {
            dim,
            max: cfg.max_dim,
        });
    }
    let (margin, margin_at) = boundary_margin(map, ball_radius, y, cfg);
    if margin <= cfg.margin_min {
        return Err(DegreeError::BoundaryHit {
            t: None,
            location: margin_at.iter().cloned().collect(),
            value_norm: margin,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0xbad5eed));
    let mut target = y.clone();
    let mut perturbation = None;
    let mut last_err = None;
    for attempt in 0..=cfg.perturb_attempts {
        match root_count_once(map, ball_radius, &target, cfg) {
            Ok((roots, seeds_used)) => {
                let degree = roots.iter().map(|r| r.sign as i64).sum();
                return Ok(DegreeCertificate {
                    degree,
                    method: DegreeMethod::RootCount,
                    ball_radius,
                    target: target.clone(),
                    evidence: DegreeEvidence::RootCount {
                        roots,
                        boundary_margin: margin,
                        seeds_per_axis: cfg.seeds_per_axis,
                        seeds_used,
                        target_perturbation: perturbation.clone(),
                    },
                });
            }
            Err(e @ DegreeError::IrregularRoot { .. }) if attempt < cfg.perturb_attempts => {
                let delta = DVector::from_fn(dim, |_, _| rng.gen_range(-1e-3..1e-3));
                target = y + &delta;
                perturbation = Some(delta);
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("perturbation loop exits through returns"))
}

/// Winding configuration.
#[derive(Debug, Clone)]
pub struct WindingConfig {
    /// Initial uniform boundary samples.
    pub initial_samples: usize,
    /// Evaluation cap for the adaptive refinement.
    pub max_evaluations: usize,
    /// Boundary margin below which the ball is rejected.
    pub margin_min: f64,
}

impl Default for WindingConfig {
    fn default() -> Self {
        Self {
            initial_samples: 64,
            max_evaluations: 1 << 20,
            margin_min: 1e-9,
        }
    }
}

/// Degree in dimension 2 as the winding number of θ ↦ F(boundary(θ)) − y
/// around 0, by adaptive angle accumulation: segments are bisected until
/// consecutive angle steps are below π/2.
pub fn degree_winding_2d(
    map: &ProperNonlinearMap,
    ball_radius: f64,
    y: &DVector<f64>,
    cfg: &WindingConfig,
) -> Result<DegreeCertificate, DegreeError> {
    assert_eq!(map.dim_source(), 2, "winding oracle is 2-D only");
    assert_eq!(map.dim_target(), 2, "winding oracle is 2-D only");
    let tau = 2.0 * core::f64::consts::PI;
    let eval_angle = |theta: f64| -> Result<(f64, f64), DegreeError> {
        let x = DVector::from_row_slice(&[
            ball_radius * Float::cos(theta),
            ball_radius * Float::sin(theta),
        ]);
        let w = map.eval(&x) - y;
        let norm = w.norm();
        if norm < cfg.margin_min {
            return Err(DegreeError::BoundaryHit {
                t: None,
                location: x.iter().cloned().collect(),
                value_norm: norm,
            });
        }
        Ok((Float::atan2(w[1], w[0]), norm))
    };

    let mut evaluations = 0usize;
    let mut margin = f64::INFINITY;
    let mut eval = |theta: f64| -> Result<f64, DegreeError> {
        evaluations += 1;
        if evaluations > cfg.max_evaluations {
            return Err(DegreeError::RefinementLimit { evaluations });
        }
        let (phi, norm) = eval_angle(theta)?;
        margin = margin.min(norm);
        Ok(phi)
    };

    let wrap = |d: f64| -> f64 {
        let mut d = d % tau;
        if d > core::f64::consts::PI {
            d -= tau;
        } else if d < -core::f64::consts::PI {
            d += tau;
        }
        d
    };

    // segment stack: (θa, φa, θb, φb)
    let mut total_turn = 0.0f64;
    let n0 = cfg.initial_samples.max(4);
    let mut stack: Vec<(f64, f64, f64, f64)> = Vec::new();
    let mut first_phi = None;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=n0 {
        let theta = tau * (i as f64) / (n0 as f64);
        let phi = if i == n0 {
            first_phi.expect("first sample recorded")
        } else {
            let p = eval(theta)?;
            if i == 0 {
                first_phi = Some(p);
            }
            p
        };
        if let Some((ta, pa)) = prev {
            stack.push((ta, pa, theta, phi));
        }
        prev = Some((theta, phi));
    }
    while let Some((ta, pa, tb, pb)) = stack.pop() {
        let d = wrap(pb - pa);
        if d.abs() < core::f64::consts::FRAC_PI_2 || (tb - ta) < 1e-12 {
            total_turn += d;
            continue;
        }
        let tm = 0.5 * (ta + tb);
        let pm = eval(tm)?;
        stack.push((ta, pa, tm, pm));
        stack.push((tm, pm, tb, pb));
    }

    let turns = total_turn / tau;
    let degree = libm_round(turns);
    if (turns - degree as f64).abs() > 0.05 {
        return Err(DegreeError::NonIntegerWinding { turn: turns });
    }
    Ok(DegreeCertificate {
        degree,
        method: DegreeMethod::Winding2D,
        ball_radius,
        target: y.clone(),
        evidence: DegreeEvidence::Winding {
            boundary_samples: evaluations,
            total_turn,
            boundary_margin: margin,
        },
    })
}

fn libm_round(x: f64) -> i64 {
    Float::round(x) as i64
}

/// A one-parameter family F_t with F₁ = F and F₀ = a linear reference.
pub struct HomotopyFamily {
    /// Dimension of the (square) problem.
    pub dim: usize,
    /// The family (t, x) ↦ F_t(x).
    pub family: Box<dyn Fn(f64, &DVector<f64>) -> DVector<f64> + Send + Sync>,
    /// The linear endpoint at t = 0.
    pub reference: LinearMap,
}

impl HomotopyFamily {
    /// Builds a family.
    pub fn new(
        dim: usize,
        reference: LinearMap,
        family: impl Fn(f64, &DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            family: Box::new(family),
            reference,
        }
    }

    /// Evaluates F_t(x).
    pub fn at(&self, t: f64, x: &DVector<f64>) -> DVector<f64> {
        (self.family)(t, x)
    }
}

/// Degree by homotopy transfer: verifies that ‖F_t(x) − y‖ stays above
/// `margin_min` over a t × boundary grid, then reads the degree off the
/// reference: sign(det). A `BoundaryHit` certificate carries the offending
/// (t, x).
pub fn degree_homotopy_linear(
    family: &HomotopyFamily,
    ball_radius: f64,
    y: &DVector<f64>,
    t_samples: usize,
    boundary_samples: usize,
    margin_min: f64,
    seed: u64,
) -> Result<DegreeCertificate, DegreeError> {
    let dim = family.dim;
    // endpoint sanity: family(0,·) must be the declared reference
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_dev = 0.0f64;
    for _ in 0..8 {
        let x = sample_unit_ball(dim, &mut rng) * ball_radius;
        let dev = (family.at(0.0, &x) - family.reference.apply(&x)).norm();
        worst_dev = worst_dev.max(dev);
    }
    if worst_dev > 1e-8 * (1.0 + ball_radius) {
        return Err(DegreeError::ReferenceMismatch {
            deviation: worst_dev,
        });
    }

    let boundary = boundary_points(dim, ball_radius, boundary_samples, &mut rng);
    let mut margin = f64::INFINITY;
    let mut margin_at = (0.0, DVector::zeros(dim));
    for ti in 0..=t_samples {
        let t = ti as f64 / t_samples as f64;
        for x in &boundary {
            let norm = (family.at(t, x) - y).norm();
            if norm < margin {
                margin = norm;
                margin_at = (t, x.clone());
            }
        }
    }
    if margin <= margin_min {
        return Err(DegreeError::BoundaryHit {
            t: Some(margin_at.0),
            location: margin_at.1.iter().cloned().collect(),
            value_norm: margin,
        });
    }

    let reference_det = family.reference.matrix().determinant();
    if reference_det == 0.0 {
        return Err(DegreeError::Singular(EuclidError::SingularMap {
            sigma_min: 0.0,
        }));
    }
    Ok(DegreeCertificate {
        degree: if reference_det > 0.0 { 1 } else { -1 },
        method: DegreeMethod::HomotopyLinear,
        ball_radius,
        target: y.clone(),
        evidence: DegreeEvidence::Homotopy {
            margin,
            margin_at,
            t_samples: t_samples + 1,
            boundary_samples: boundary.len(),
            reference_det,
        },
    })
}

/// One stage outcome in a stabilization run.
pub struct StabilizationEntry {
    /// Stage index.
    pub stage_index: usize,
    /// The certificate, or the per-stage failure (recorded, not fatal).
    pub result: Result<DegreeCertificate, DegreeError>,
}

/// Degrees across approximation stages, with the eventual-constancy verdict.
pub struct StabilizationReport {
    /// Per-stage outcomes in input order.
    pub entries: Vec<StabilizationEntry>,
}

impl StabilizationReport {
    /// The successful degrees in stage order.
    pub fn degrees(&self) -> Vec<(usize, i64)> {
        self.entries
            .iter()
            .filter_map(|e| e.result.as_ref().ok().map(|c| (e.stage_index, c.degree)))
            .collect()
    }

    /// Whether the degree sequence is constant over the final half of the
    /// supplied stages (and every stage in that half succeeded).
    pub fn constant_over_final_half(&self) -> Option<i64> {
        let n = self.entries.len();
        if n == 0 {
            return None;
        }
        let start = n / 2;
        let mut value = None;
        for e in &self.entries[start..] {
            match &e.result {
                Ok(c) => match value {
                    None => value = Some(c.degree),
                    Some(v) if v == c.degree => {}
                    Some(_) => return None,
                },
                Err(_) => return None,
            }
        }
        value
    }
}

/// Runs a degree engine per stage and reports whether the integer sequence
/// stabilizes. Engine failures are recorded per stage and do not abort the
/// run.
pub fn degree_stabilization(
    problems: Vec<(
        usize,
        Box<dyn FnOnce() -> Result<DegreeCertificate, DegreeError>>,
    )>,
) -> StabilizationReport {
    let entries = problems
        .into_iter()
        .map(|(stage_index, engine)| StabilizationEntry {
            stage_index,
            result: engine(),
        })
        .collect();
    StabilizationReport { entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_seed_odometer_covers_cube() {
        let map = ProperNonlinearMap::identity(2);
        let cfg = NewtonConfig {
            seeds_per_axis: 3,
            ..NewtonConfig::default()
        };
        let y = DVector::zeros(2);
        let cert = degree_root_count(&map, 1.5, &y, &cfg).unwrap();
        assert_eq!(cert.degree, 1);
        if let DegreeEvidence::RootCount {
            seeds_used, roots, ..
        } = &cert.evidence
        {
            assert!(*seeds_used > 0 && *seeds_used <= 9);
            assert_eq!(roots.len(), 1);
        } else {
            panic!("wrong evidence kind");
        }
    }

    #[test]
    fn winding_of_identity_is_one() {
        let map = ProperNonlinearMap::identity(2);
        let y = DVector::zeros(2);
        let cert = degree_winding_2d(&map, 1.0, &y, &WindingConfig::default()).unwrap();
        assert_eq!(cert.degree, 1);
    }
}
