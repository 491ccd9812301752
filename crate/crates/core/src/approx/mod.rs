//! Constructive finite-dimensional approximation of proper maps
//!
//! The δ-net subspace builder covers the sampled image of the nonlinear
//! part c on a ball by finitely many points, spans their l-preimages, and
//! reports the achieved coverage; `projection_error` then measures
//! sup ‖F(m) − pr∘F(m)‖ on the chosen subspace.
//!
//! [`ApproximationStage`] packages one stage (W′ᵢ, Wᵢ, Fᵢ, rᵢ, sᵢ) of a
//! finite approximation, and `check_fin_appro` produces the four condition
//! profiles of the finite-approximability definition: a density surrogate
//! against the ambient truncation, sampled ball-condition margins, the
//! uniform convergence profile of Fᵢ → F on fixed balls, and the
//! asymptotic-unitarity profile of the stage linear parts.
//!
//! "Compact on bounded sets" is operationalized falsifiably: the greedy net
//! of a sampled image must terminate under a size cap. The greedy rule adds
//! the sample farthest from the current net, a deterministic
//! 2-approximation given the seeded sample order.

pub mod fourier;

use alloc::{vec, vec::Vec};
use nalgebra::{DMatrix, DVector};
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bott::{sample_unit_ball, ProperNonlinearMap};
use crate::euclid::{
    asymptotic_unitarity_profile, op_norm, EuclidError, LinearMap, Subspace, UnitarityProfile,
};
use fourier::{cubic_pointwise, SobolevChart};

/// Errors of the approximation layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ApproxError {
    /// Propagated linear-algebra failure.
    #[error(transparent)]
    Euclid(#[from] EuclidError),
    /// The greedy net exceeded its size cap: no compactness at this scale.
    #[error("net explosion: cap {cap} reached with coverage still {coverage:.3e}")]
    NetExplosion {
        /// The size cap.
        cap: usize,
        /// Worst uncovered distance when the cap was hit.
        coverage: f64,
    },
    /// Stages are not nested.
    #[error("stages not nested: stage {inner} not contained in stage {outer}")]
    NotNested {
        /// Inner stage index.
        inner: usize,
        /// Outer stage index.
        outer: usize,
    },
    /// Exact bandwidth was requested but not representable.
    #[error("bandwidth overflow: cube needs band {needed}, only {available} available")]
    BandwidthOverflow {
        /// Needed band.
        needed: usize,
        /// Available band.
        available: usize,
    },
    /// No radius satisfied the sampled ball condition.
    #[error("ball condition failed at radius {radius}: |F(m)| = {value_norm:.3e} < s = {s}")]
    BallConditionFail {
        /// Radius at which the search gave up.
        radius: f64,
        /// Required lower bound s.
        s: f64,
        /// Offending boundary value norm.
        value_norm: f64,
    },
    /// The overlap W′ᵢ ∩ γ⁻¹(W′ᵢ) is zero.
    #[error("empty overlap between stage {stage} and its shift")]
    EmptyOverlap {
        /// Stage index.
        stage: usize,
    },
}

/// One stage (W′ᵢ, Wᵢ, Fᵢ, rᵢ, sᵢ) of a finite approximation. The map acts
/// in frame coordinates: dim W′ᵢ → dim Wᵢ, with its linear part lᵢ.
pub struct ApproximationStage {
    /// Stage index i.
    pub index: usize,
    /// W′ᵢ as a subspace of the ambient source model.
    pub source: Subspace,
    /// Wᵢ = lᵢ(W′ᵢ) as a subspace of the ambient target model.
    pub target: Subspace,
    /// Fᵢ in frame coordinates.
    pub map: ProperNonlinearMap,
    /// Outer ball radius rᵢ.
    pub r: f64,
    /// Inner ball radius sᵢ (rᵢ ≥ sᵢ).
    pub s: f64,
}

impl ApproximationStage {
    /// Evaluates Fᵢ on an ambient vector of the source model (projecting
    /// onto W′ᵢ first), returning an ambient vector of the target model.
    pub fn eval_ambient(&self, m: &DVector<f64>) -> DVector<f64> {
        let coords = self.source.frame().transpose() * m;
        self.target.frame() * self.map.eval(&coords)
    }

    /// The ambient extension of lᵢ: target_frame·Mᵢ·source_frameᵀ.
    pub fn linear_ambient(&self) -> DMatrix<f64> {
        self.target.frame() * self.map.linear_part().matrix() * self.source.frame().transpose()
    }
}

/// Verifies the containment chain W′ᵢ ⊂ W′ᵢ₊₁.
pub fn check_nested_stages(stages: &[ApproximationStage]) -> Result<(), ApproxError> {
    for w in stages.windows(2) {
        if !w[1].source.contains(&w[0].source, 1e-8) {
            return Err(ApproxError::NotNested {
                inner: w[0].index,
                outer: w[1].index,
            });
        }
    }
    Ok(())
}

/// Seeded ball-sampling specification.
#[derive(Debug, Clone, Copy)]
pub struct BallSampler {
    /// Number of samples.
    pub count: usize,
    /// RNG seed.
    pub seed: u64,
}

impl BallSampler {
    /// Builds a sampler.
    pub fn new(count: usize, seed: u64) -> Self {
        Self { count, seed }
    }

    /// Samples from the radius-r ball of ℝ^dim.
    pub fn sample_ball(&self, dim: usize, radius: f64) -> Vec<DVector<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.count)
            .map(|_| sample_unit_ball(dim, &mut rng) * radius)
            .collect()
    }

    /// Samples from the radius-r sphere of ℝ^dim.
    pub fn sample_sphere(&self, dim: usize, radius: f64) -> Vec<DVector<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.count)
            .map(|_| {
                let v = sample_unit_ball(dim, &mut rng);
                let n = v.norm();
                if n == 0.0 {
                    let mut e = DVector::zeros(dim);
                    e[0] = radius;
                    e
                } else {
                    v * (radius / n)
                }
            })
            .collect()
    }
}

/// Outcome of the δ-net subspace construction.
#[derive(Debug, Clone)]
pub struct NetReport {
    /// W₀′ = span of the l-preimages of the net points.
    pub subspace: Subspace,
    /// The net points in the target model.
    pub net_points: Vec<DVector<f64>>,
    /// max over samples of the distance to the net (≤ δ₀ on success).
    pub coverage_radius: f64,
    /// Number of image samples covered.
    pub samples_used: usize,
    /// The sampler seed, for reproducibility.
    pub seed: u64,
}

/// Builds W₀′ by the covering construction: sample the image of the
/// nonlinear part c on the radius-r ball, cover it greedily by a δ₀-net
/// {wᵢ}, and span the preimages l⁻¹(wᵢ).
///
/// The greedy rule repeatedly adds the sample farthest from the current net
/// until every sample is within δ₀; exceeding `size_cap` signals
/// non-compactness at this scale and errors with `NetExplosion`.
pub fn build_net_subspace(
    map: &ProperNonlinearMap,
    r: f64,
    delta0: f64,
    sampler: &BallSampler,
    size_cap: usize,
) -> Result<NetReport, ApproxError> {
    let samples = sampler.sample_ball(map.dim_source(), r);
    let images: Vec<DVector<f64>> = samples.iter().map(|m| map.nonlinear_part(m)).collect();

    let mut net_indices: Vec<usize> = Vec::new();
    let mut dist_to_net: Vec<f64> = vec![f64::INFINITY; images.len()];
    let mut coverage = f64::INFINITY;
    while !images.is_empty() {
        // farthest point from the current net (first sample when empty)
        let (far_idx, far_dist) = dist_to_net
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bd), (i, &d)| {
                if d > bd {
                    (i, d)
                } else {
                    (bi, bd)
                }
            });
        if far_dist <= delta0 {
            coverage = far_dist;
            break;
        }
        if net_indices.len() >= size_cap {
            return Err(ApproxError::NetExplosion {
                cap: size_cap,
                coverage: far_dist,
            });
        }
        net_indices.push(far_idx);
        let new_point = &images[far_idx];
        for (i, d) in dist_to_net.iter_mut().enumerate() {
            *d = d.min((&images[i] - new_point).norm());
        }
    }
    if !coverage.is_finite() {
        coverage = 0.0;
    }

    let net_points: Vec<DVector<f64>> = net_indices.iter().map(|&i| images[i].clone()).collect();
    let l_inv = map.linear_part().inverse()?;
    let n = map.dim_source();
    let mut spanning = DMatrix::zeros(n, net_points.len());
    for (j, w) in net_points.iter().enumerate() {
        spanning.set_column(j, &l_inv.apply(w));
    }
    let subspace = Subspace::span_of(&spanning, 1e-10);
    Ok(NetReport {
        subspace,
        net_points,
        coverage_radius: coverage,
        samples_used: images.len(),
        seed: sampler.seed,
    })
}

/// Sup of ‖F(m) − pr_{l(W)}(F(m))‖ over explicit ambient points — the
/// projection defect the net construction keeps below δ₀. Monotone
/// non-increasing in W on a fixed point set.
pub fn projection_error_at(
    map: &ProperNonlinearMap,
    w: &Subspace,
    points: &[DVector<f64>],
) -> f64 {
    let proj = if w.dim() == 0 {
        DMatrix::zeros(map.dim_target(), map.dim_target())
    } else {
        w.map_through(map.linear_part().matrix()).projector()
    };
    let mut worst = 0.0f64;
    for m in points {
        let fm = map.eval(m);
        worst = worst.max((&fm - &proj * &fm).norm());
    }
    worst
}

/// Sampled sup of ‖F(m) − pr_{l(W)}(F(m))‖ over m in the radius-r ball of
/// W.
pub fn projection_error(
    map: &ProperNonlinearMap,
    w: &Subspace,
    r: f64,
    sampler: &BallSampler,
) -> f64 {
    let points: Vec<DVector<f64>> = if w.dim() == 0 {
        // D_r ∩ W is the origin
        vec![DVector::zeros(map.dim_source())]
    } else {
        sampler
            .sample_ball(w.dim(), r)
            .into_iter()
            .map(|c| w.frame() * c)
            .collect()
    };
    projection_error_at(map, w, &points)
}

/// Probe configuration for `check_fin_appro`.
#[derive(Debug, Clone, Copy)]
pub struct FinApproProbe {
    /// Samples per ball/sphere.
    pub samples: usize,
    /// RNG seed.
    pub seed: u64,
    /// ε for the ambient asymptotic-unitarity scan.
    pub unitarity_eps: f64,
}

impl Default for FinApproProbe {
    fn default() -> Self {
        Self {
            samples: 200,
            seed: 7,
            unitarity_eps: 1e-6,
        }
    }
}

/// The four condition profiles of finite approximability, plus the strong
/// variant's projection tail.
#[derive(Debug, Clone)]
pub struct FinApproReport {
    /// (1) density surrogate: per stage, max residual of the ambient basis
    /// against W′ᵢ.
    pub density_residuals: Vec<f64>,
    /// (2) sampled ball margins: min ‖Fᵢ(m)‖ − sᵢ over ‖m‖ = rᵢ.
    pub ball_margins: Vec<f64>,
    /// (3) per fixed i₀, the profile sup_{D_{r_{i₀}} ∩ W′_{i₀}}‖F − Fᵢ‖
    /// for i ≥ i₀.
    pub convergence: Vec<Vec<f64>>,
    /// (4b) per fixed i₀, ‖(l − lᵢ)|W′_{i₀}‖ for i ≥ i₀.
    pub linear_deviation: Vec<Vec<f64>>,
    /// (4a) asymptotic-unitarity profile of the ambient l along the stage
    /// exhaustion.
    pub ambient_unitarity: UnitarityProfile,
    /// (4c) worst two-sided norm ratio between ‖lᵢ‖ and ‖l‖.
    pub norm_ratio: f64,
    /// Strong variant: sampled ‖(1 − prᵢ)∘c‖ on the ambient rᵢ-ball.
    pub strong_tail: Vec<f64>,
}

/// Pass thresholds for [`FinApproReport::passes`].
#[derive(Debug, Clone, Copy)]
pub struct FinApproTolerances {
    /// Final-stage density residual must fall below this.
    pub density_final: f64,
    /// Every sampled ball margin must be at least this.
    pub ball_margin_min: f64,
    /// Final column of every convergence profile must fall below this.
    pub convergence_final: f64,
    /// Final column of every linear-deviation profile must fall below this.
    pub linear_final: f64,
    /// Cap on the norm ratio.
    pub norm_ratio_max: f64,
}

impl Default for FinApproTolerances {
    fn default() -> Self {
        Self {
            density_final: 1e-9,
            ball_margin_min: 0.0,
            convergence_final: 1e-9,
            linear_final: 1e-9,
            norm_ratio_max: 10.0,
        }
    }
}

impl FinApproReport {
    /// Whether all four condition profiles meet the thresholds.
    pub fn passes(&self, tol: &FinApproTolerances) -> bool {
        let density_ok = self
            .density_residuals
            .last()
            .is_some_and(|&d| d < tol.density_final);
        let margins_ok = self.ball_margins.iter().all(|&m| m >= tol.ball_margin_min);
        let conv_ok = self
            .convergence
            .iter()
            .all(|profile| profile.last().is_some_and(|&v| v < tol.convergence_final));
        let lin_ok = self
            .linear_deviation
            .iter()
            .all(|profile| profile.last().is_some_and(|&v| v < tol.linear_final));
        density_ok && margins_ok && conv_ok && lin_ok && self.norm_ratio <= tol.norm_ratio_max
    }
}

/// Runs the four finite-approximability condition profiles for nested
/// stages of an ambient map F on the truncation model standing in for H′.
pub fn check_fin_appro(
    stages: &[ApproximationStage],
    ambient: &ProperNonlinearMap,
    probe: &FinApproProbe,
) -> Result<FinApproReport, ApproxError> {
    check_nested_stages(stages)?;
    let n = ambient.dim_source();

    // (1) density of the stage union against the ambient model
    let mut density_residuals = Vec::with_capacity(stages.len());
    for stage in stages {
        let proj = stage.source.projector();
        let mut worst = 0.0f64;
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            worst = worst.max((&e - &proj * &e).norm());
        }
        density_residuals.push(worst);
    }

    // (2) sampled ball-condition margins
    let mut ball_margins = Vec::with_capacity(stages.len());
    for (si, stage) in stages.iter().enumerate() {
        let sampler = BallSampler::new(probe.samples, probe.seed.wrapping_add(si as u64));
        let sphere = sampler.sample_sphere(stage.source.dim(), stage.r);
        let mut min_norm = f64::INFINITY;
        for coords in sphere {
            min_norm = min_norm.min(stage.map.eval(&coords).norm());
        }
        ball_margins.push(min_norm - stage.s);
    }

    // (3) convergence of F_i to F on fixed balls
    let mut convergence = Vec::with_capacity(stages.len());
    // (4b) linear deviations on fixed stages
    let mut linear_deviation = Vec::with_capacity(stages.len());
    for (i0, base) in stages.iter().enumerate() {
        let sampler = BallSampler::new(probe.samples, probe.seed.wrapping_add(1000 + i0 as u64));
        let coords = sampler.sample_ball(base.source.dim(), base.r);
        let points: Vec<DVector<f64>> = coords.iter().map(|c| base.source.frame() * c).collect();
        let mut profile = Vec::new();
        let mut lin_profile = Vec::new();
        for stage in stages.iter().skip(i0) {
            let mut worst = 0.0f64;
            for m in &points {
                let fm = ambient.eval(m);
                let fim = stage.eval_ambient(m);
                worst = worst.max((fm - fim).norm());
            }
            profile.push(worst);
            let deviation =
                (ambient.linear_part().matrix() - stage.linear_ambient()) * base.source.frame();
            lin_profile.push(op_norm(&deviation));
        }
        convergence.push(profile);
        linear_deviation.push(lin_profile);
    }

    // (4a) ambient asymptotic-unitarity along the stage exhaustion
    let exhaustion: Vec<Subspace> = stages.iter().map(|s| s.source.clone()).collect();
    let ambient_unitarity =
        asymptotic_unitarity_profile(ambient.linear_part(), &exhaustion, probe.unitarity_eps)?;

    // (4c) uniform norm bounds
    let ambient_norm = ambient.linear_part().op_norm();
    let mut norm_ratio = 1.0f64;
    for stage in stages {
        let stage_norm = stage.map.linear_part().op_norm();
        if stage_norm > 0.0 && ambient_norm > 0.0 {
            norm_ratio = norm_ratio
                .max(stage_norm / ambient_norm)
                .max(ambient_norm / stage_norm);
        }
    }

    // strong variant tail ‖(1 − pr_i)∘c‖ on ambient r_i-balls
    let mut strong_tail = Vec::with_capacity(stages.len());
    for (si, stage) in stages.iter().enumerate() {
        let sampler = BallSampler::new(probe.samples, probe.seed.wrapping_add(2000 + si as u64));
        let proj = stage.target.projector();
        let mut worst = 0.0f64;
        for m in sampler.sample_ball(n, stage.r) {
            let c = ambient.nonlinear_part(&m);
            worst = worst.max((&c - &proj * &c).norm());
        }
        strong_tail.push(worst);
    }

    Ok(FinApproReport {
        density_residuals,
        ball_margins,
        convergence,
        linear_deviation,
        ambient_unitarity,
        norm_ratio,
        strong_tail,
    })
}

/// An isometric shift action on the ambient model: a finite cyclic block
/// permutation, or a windowed coordinate shift realized as a large cyclic
/// rotation.
#[derive(Debug, Clone)]
pub struct ShiftAction {
    /// The generator as an orthogonal ambient matrix.
    pub generator: LinearMap,
    /// Order of the generator (generator^order = identity).
    pub order: usize,
}

impl ShiftAction {
    /// The ℤ_l action permuting l blocks of size `block_dim` cyclically:
    /// block j ↦ block j+1 (mod l).
    pub fn cyclic_blocks(blocks: usize, block_dim: usize) -> Self {
        let n = blocks * block_dim;
        let mut m = DMatrix::zeros(n, n);
        for j in 0..blocks {
            let jn = (j + 1) % blocks;
            for k in 0..block_dim {
                m[(jn * block_dim + k, j * block_dim + k)] = 1.0;
            }
        }
        Self {
            generator: LinearMap::new(m),
            order: blocks,
        }
    }

    /// The coordinate shift on ℝᴰ (index i ↦ i+1 cyclically), standing in
    /// for the ℤ-shift on a window well inside the ambient model.
    pub fn window_shift(ambient_dim: usize) -> Self {
        Self::cyclic_blocks(ambient_dim, 1)
    }

    /// Applies the generator.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self.generator.apply(v)
    }

    /// Applies the inverse generator.
    pub fn apply_inverse(&self, v: &DVector<f64>) -> DVector<f64> {
        self.generator.matrix().transpose() * v
    }
}

/// Orthonormal frame of the intersection of two subspaces, via the null
/// directions of the stacked frame matrix [F_a | −F_b].
fn intersect(a: &Subspace, b: &Subspace, tol: f64) -> Subspace {
    let n = a.ambient_dim();
    let (da, db) = (a.dim(), b.dim());
    if da == 0 || db == 0 {
        return Subspace::zero(n);
    }
    let mut stacked = DMatrix::zeros(n, da + db);
    stacked.view_mut((0, 0), (n, da)).copy_from(a.frame());
    stacked
        .view_mut((0, da), (n, db))
        .copy_from(&(-b.frame()));
    // null space of the stacked frames via the Gram matrix (the compact SVD
    // would drop null directions of a wide matrix)
    let gram = stacked.transpose() * &stacked;
    let eig = gram.symmetric_eigen();
    let mut members = Vec::new();
    for (i, lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() < tol {
            let col = eig.eigenvectors.column(i);
            let xa = DVector::from_fn(da, |j, _| col[j]);
            members.push(a.frame() * xa);
        }
    }
    if members.is_empty() {
        return Subspace::zero(n);
    }
    let mut spanning = DMatrix::zeros(n, members.len());
    for (j, m) in members.iter().enumerate() {
        spanning.set_column(j, m);
    }
    Subspace::span_of(&spanning, 1e-8)
}

/// Per-stage sampled sup of ‖γ·Fᵢ(m) − Fᵢ(γ·m)‖ over the overlap
/// W′ᵢ ∩ γ⁻¹(W′ᵢ), the finite-stage equivariance defect.
pub fn equivariance_defect(
    stages: &[ApproximationStage],
    action: &ShiftAction,
    sampler: &BallSampler,
) -> Result<Vec<f64>, ApproxError> {
    let mut out = Vec::with_capacity(stages.len());
    for (si, stage) in stages.iter().enumerate() {
        let gamma_inv_w = stage.source.map_through(&action.generator.matrix().transpose());
        let overlap = intersect(&stage.source, &gamma_inv_w, 1e-8);
        if overlap.dim() == 0 {
            return Err(ApproxError::EmptyOverlap { stage: si });
        }
        let mut worst = 0.0f64;
        let sub_sampler = BallSampler::new(sampler.count, sampler.seed.wrapping_add(si as u64));
        for coords in sub_sampler.sample_ball(overlap.dim(), stage.r) {
            let m = overlap.frame() * coords;
            let lhs = action.apply(&stage.eval_ambient(&m));
            let rhs = stage.eval_ambient(&action.apply(&m));
            worst = worst.max((lhs - rhs).norm());
        }
        out.push(worst);
    }
    Ok(out)
}

/// Configuration of the block Sobolev cubic-shift model.
#[derive(Debug, Clone)]
pub struct SobolevModelConfig {
    /// Number of blocks l (the circle is ℝ/lℤ cut into unit arcs).
    pub blocks: usize,
    /// Sobolev order k of the norm.
    pub order: i32,
    /// Increasing stage frequencies n_i.
    pub n_sequence: Vec<usize>,
    /// Ambient truncation frequency standing in for H′; defaults to
    /// max(n_i), so the final stage exhausts the ambient model.
    pub probe_freq: Option<usize>,
    /// Base inner radius s₀; stages use sᵢ = s₀·√2ⁱ.
    pub s_base: f64,
    /// Boundary sampling for the radius search.
    pub sampler: BallSampler,
}

impl Default for SobolevModelConfig {
    fn default() -> Self {
        Self {
            blocks: 2,
            order: 1,
            n_sequence: vec![1, 2, 3],
            probe_freq: None,
            s_base: 2.0,
            sampler: BallSampler::new(300, 11),
        }
    }
}

/// The block Sobolev model: l blocks of bandlimited functions on the unit
/// arc, the cyclic cubic-shift map F(a)ⱼ = aⱼ + pr((a_{j−1})³), and its
/// truncation stages.
pub struct SobolevModel {
    /// Number of blocks.
    pub blocks: usize,
    /// Sobolev order.
    pub order: i32,
    /// Ambient truncation frequency.
    pub probe_freq: usize,
    /// Sobolev-orthonormal chart of one ambient block.
    pub chart: SobolevChart,
    /// The ambient truncation map.
    pub ambient: ProperNonlinearMap,
    /// The nested stages.
    pub stages: Vec<ApproximationStage>,
    /// Stage frequencies.
    pub stage_freqs: Vec<usize>,
}

/// Coordinates of one block within the ambient layout.
pub(crate) fn block_dim(freq: usize) -> usize {
    2 * freq + 1
}

/// The cyclic cubic map on block coordinates: out_j = in_j + pr(cube(in_{j-1})),
/// all blocks truncated to `out_freq`, inputs read at `in_freq`.
pub(crate) fn cyclic_cube_eval(
    chart_in: &SobolevChart,
    chart_out: &SobolevChart,
    blocks: usize,
    v: &DVector<f64>,
) -> DVector<f64> {
    let din = chart_in.dim();
    let dout = chart_out.dim();
    let mut out = DVector::zeros(blocks * dout);
    for j in 0..blocks {
        let prev = (j + blocks - 1) % blocks;
        let a_prev = chart_in.to_state(&v.rows(prev * din, din).clone_owned());
        let a_j = chart_in.to_state(&v.rows(j * din, din).clone_owned());
        let cube = cubic_pointwise(&a_prev).truncate(chart_out.max_freq());
        let lin = a_j.truncate(chart_out.max_freq());
        let mut block = chart_out.to_coords(&lin);
        block += chart_out.to_coords(&cube);
        out.rows_mut(j * dout, dout).copy_from(&block);
    }
    out
}

/// Exact Jacobian of the cyclic cubic map by directional derivatives:
/// d(cube)(a)[ψ] = 3·a²·ψ through exact convolution.
pub(crate) fn cyclic_cube_jacobian(
    chart_in: &SobolevChart,
    chart_out: &SobolevChart,
    blocks: usize,
    v: &DVector<f64>,
) -> DMatrix<f64> {
    let din = chart_in.dim();
    let dout = chart_out.dim();
    let mut jac = DMatrix::zeros(blocks * dout, blocks * din);
    for j in 0..blocks {
        let prev = (j + blocks - 1) % blocks;
        let a_prev = chart_in.to_state(&v.rows(prev * din, din).clone_owned());
        let a_sq = a_prev.mul(&a_prev);
        // identity block: d(in_j)/d(in_j) truncated
        for k in 0..din.min(dout) {
            jac[(j * dout + k, j * din + k)] = 1.0;
        }
        // cube block: columns are 3·a²·ψ_k
        for k in 0..din {
            let mut e = DVector::zeros(din);
            e[k] = 1.0;
            let psi = chart_in.to_state(&e);
            let deriv = a_sq.mul(&psi);
            let mut scaled = fourier::FourierState::zeros(
                deriv.period(),
                deriv.order(),
                deriv.max_freq(),
            );
            for kk in -(deriv.max_freq() as i64)..=(deriv.max_freq() as i64) {
                scaled.set_coeff(kk, deriv.coeff(kk) * 3.0);
            }
            let col = chart_out.to_coords(&scaled.truncate(chart_out.max_freq()));
            for row in 0..dout {
                jac[(j * dout + row, prev * din + k)] += col[row];
            }
        }
    }
    jac
}

/// Builds the ambient map and nested stages of the Sobolev cubic-shift
/// model, searching stage radii so the sampled ball condition holds and the
/// emitted sequence respects r_{i+1} > √2·r_i.
pub fn sobolev_model_stages(cfg: &SobolevModelConfig) -> Result<SobolevModel, ApproxError> {
    assert!(
        cfg.n_sequence.windows(2).all(|w| w[0] < w[1]),
        "stage frequencies must increase"
    );
    let n_max = *cfg.n_sequence.last().expect("nonempty n_sequence");
    let probe_freq = cfg.probe_freq.unwrap_or(n_max).max(n_max);
    let blocks = cfg.blocks;
    let period = 1.0f64;
    let chart = SobolevChart::new(period, cfg.order, probe_freq);
    let ambient_dim = blocks * block_dim(probe_freq);

    let chart_amb = chart.clone();
    let chart_amb2 = chart.clone();
    let ambient = ProperNonlinearMap::new(
        ambient_dim,
        ambient_dim,
        LinearMap::identity(ambient_dim),
        move |v| cyclic_cube_eval(&chart_amb, &chart_amb, blocks, v),
    )
    .with_jacobian(move |v| cyclic_cube_jacobian(&chart_amb2, &chart_amb2, blocks, v));

    let mut stages = Vec::with_capacity(cfg.n_sequence.len());
    let mut prev_r = 0.0f64;
    for (i, &freq) in cfg.n_sequence.iter().enumerate() {
        let d_block = block_dim(freq);
        let dim = blocks * d_block;
        // selection frame: per block, the leading 2n+1 chart coordinates
        let mut frame = DMatrix::zeros(ambient_dim, dim);
        for j in 0..blocks {
            for k in 0..d_block {
                frame[(j * chart.dim() + k, j * d_block + k)] = 1.0;
            }
        }
        let subspace = Subspace::new(frame).expect("selection frame orthonormal");

        let stage_chart = SobolevChart::new(period, cfg.order, freq);
        let sc1 = stage_chart.clone();
        let sc2 = stage_chart.clone();
        let sc3 = stage_chart.clone();
        let sc4 = stage_chart.clone();
        let map = ProperNonlinearMap::new(
            dim,
            dim,
            LinearMap::identity(dim),
            move |v| cyclic_cube_eval(&sc1, &sc2, blocks, v),
        )
        .with_jacobian(move |v| cyclic_cube_jacobian(&sc3, &sc4, blocks, v));

        let s_i = cfg.s_base * Float::powf(2.0f64, 0.5 * i as f64);
        let r_floor = if i == 0 {
            s_i
        } else {
            (prev_r * core::f64::consts::SQRT_2 * 1.0001).max(s_i)
        };
        let mut r_i = None;
        let mut worst_seen = (0.0f64, f64::INFINITY);
        let mut candidate = r_floor;
        for _ in 0..=10 {
            let sampler = BallSampler::new(cfg.sampler.count, cfg.sampler.seed.wrapping_add(i as u64));
            let sphere = sampler.sample_sphere(dim, candidate);
            let mut min_norm = f64::INFINITY;
            for coords in sphere {
                min_norm = min_norm.min(map.eval(&coords).norm());
            }
            if min_norm >= s_i {
                r_i = Some(candidate);
                break;
            }
            worst_seen = (candidate, min_norm);
            candidate *= 2.0;
        }
        let Some(r_i) = r_i else {
            return Err(ApproxError::BallConditionFail {
                radius: worst_seen.0,
                s: s_i,
                value_norm: worst_seen.1,
            });
        };
        prev_r = r_i;
        stages.push(ApproximationStage {
            index: i,
            source: subspace.clone(),
            target: subspace,
            map,
            r: r_i,
            s: s_i,
        });
    }

    Ok(SobolevModel {
        blocks,
        order: cfg.order,
        probe_freq,
        chart,
        ambient,
        stages,
        stage_freqs: cfg.n_sequence.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intersection_of_coordinate_planes() {
        let a = Subspace::coordinate(4, 3);
        let frame = {
            let mut f = DMatrix::zeros(4, 2);
            f[(1, 0)] = 1.0;
            f[(3, 1)] = 1.0;
            f
        };
        let b = Subspace::new(frame).unwrap();
        let cap = intersect(&a, &b, 1e-10);
        assert_eq!(cap.dim(), 1);
        assert!((cap.frame().column(0)[1]).abs() > 0.99);
    }

    #[test]
    fn block_shift_is_orthogonal_with_right_order() {
        let action = ShiftAction::cyclic_blocks(3, 2);
        let m = action.generator.matrix();
        let gram = m.transpose() * m;
        assert!((gram - DMatrix::<f64>::identity(6, 6)).norm() < 1e-14);
        let mut power = DMatrix::<f64>::identity(6, 6);
        for _ in 0..action.order {
            power = m * power;
        }
        assert!((power - DMatrix::<f64>::identity(6, 6)).norm() < 1e-14);
    }
}
