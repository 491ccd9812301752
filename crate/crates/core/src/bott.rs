//! Sampled Bott elements, pullbacks and defect estimators
//!
//! Elements of the window algebras S_r𝔠(D_r) — functions of (x, v) with
//! values in Cl(ℝ ⊕ E) vanishing toward the window boundary — are realized
//! as [`SampledSection`]s on tensor grids with multilinear interpolation.
//! Sup-norms over the continuum are estimated as maxima over grid nodes;
//! every defect is therefore an estimate from below, and sections report a
//! second-difference interpolation tolerance alongside.
//!
//! The Bott element of a map F = l + c is sampled pointwise through the
//! induced Clifford operator C_F = l̄⁻¹ ∘ F, where l̄ is the polar unitary
//! of the linear part:
//!
//! ```text
//! β_F(f)(x, v) = f(x·e₀ + C(C_F(v)))
//! ```
//!
//! and the pullback F*(f ⊗̂ u)(v′) = f ⊗̂ l̄⁻¹(u(F(v′))) acts node-wise by
//! interpolating u at F(v′) and transporting coefficients along the algebra
//! morphism extending l̄⁻¹.

use alloc::{boxed::Box, format, string::String, vec, vec::Vec};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::approx::ApproximationStage;
use crate::clifford::{
    cl_norm, extend_isometry, functional_calculus, CliffordElement, CliffordError, SpectralPoint,
};
use crate::euclid::{op_norm, polar_unitary, EuclidError, LinearMap, Subspace};

/// Errors of the sampled Bott layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BottError {
    /// Propagated linear-algebra failure.
    #[error(transparent)]
    Euclid(#[from] EuclidError),
    /// Propagated Clifford failure.
    #[error(transparent)]
    Clifford(#[from] CliffordError),
    /// An interpolation point left the grid hull.
    #[error("grid coverage: coordinate {coord} on axis {axis} outside [{lo}, {hi}]")]
    GridCoverage {
        /// Offending v-axis.
        axis: usize,
        /// Offending coordinate.
        coord: f64,
        /// Axis lower bound.
        lo: f64,
        /// Axis upper bound.
        hi: f64,
    },
    /// Source and target sections must share spectral nodes.
    #[error("x-axis nodes differ between source and target grids")]
    XAxisMismatch,
    /// Window radii out of order.
    #[error("bad window: r_inner {r_inner} must be < r_outer {r_outer}")]
    BadWindow {
        /// Inner radius.
        r_inner: f64,
        /// Outer radius.
        r_outer: f64,
    },
    /// Stages are not nested.
    #[error("stages not nested: stage {inner} not contained in stage {outer}")]
    NotNested {
        /// Index of the inner stage.
        inner: usize,
        /// Index of the outer stage.
        outer: usize,
    },
    /// Dimension mismatch between map and grid.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        /// Expected dimension.
        expected: usize,
        /// Actual dimension.
        got: usize,
    },
}

/// A proper map F = l + c between Euclidean models, with its linear part,
/// optional Jacobian and optional properness gauge g (increasing, with
/// g(‖F(m)‖) ≥ ‖m‖).
pub struct ProperNonlinearMap {
    dim_source: usize,
    dim_target: usize,
    eval: Box<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>,
    jac: Option<Box<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>>,
    linear_part: LinearMap,
    gauge: Option<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl ProperNonlinearMap {
    /// Builds a map from its evaluation closure and linear part.
    pub fn new(
        dim_source: usize,
        dim_target: usize,
        linear_part: LinearMap,
        eval: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        assert_eq!(linear_part.rows(), dim_target);
        assert_eq!(linear_part.cols(), dim_source);
        Self {
            dim_source,
            dim_target,
            eval: Box::new(eval),
            jac: None,
            linear_part,
            gauge: None,
        }
    }

    /// Attaches an exact Jacobian.
    pub fn with_jacobian(
        mut self,
        jac: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        self.jac = Some(Box::new(jac));
        self
    }

    /// Attaches a properness gauge.
    pub fn with_gauge(mut self, gauge: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.gauge = Some(Box::new(gauge));
        self
    }

    /// The identity map on ℝⁿ.
    pub fn identity(n: usize) -> Self {
        Self::new(n, n, LinearMap::identity(n), |v| v.clone())
            .with_jacobian(move |_| DMatrix::identity(n, n))
            .with_gauge(|t| t)
    }

    /// A purely linear map (c = 0).
    pub fn from_linear(l: LinearMap) -> Self {
        let m = l.matrix().clone();
        let jm = m.clone();
        Self::new(l.cols(), l.rows(), l.clone(), move |v| &m * v).with_jacobian(move |_| jm.clone())
    }

    /// Source dimension.
    pub fn dim_source(&self) -> usize {
        self.dim_source
    }

    /// Target dimension.
    pub fn dim_target(&self) -> usize {
        self.dim_target
    }

    /// The linear part l.
    pub fn linear_part(&self) -> &LinearMap {
        &self.linear_part
    }

    /// Evaluates F(v).
    pub fn eval(&self, v: &DVector<f64>) -> DVector<f64> {
        (self.eval)(v)
    }

    /// The nonlinear part c(v) = F(v) − l·v.
    pub fn nonlinear_part(&self, v: &DVector<f64>) -> DVector<f64> {
        self.eval(v) - self.linear_part.apply(v)
    }

    /// The gauge value g(t), if a gauge was supplied.
    pub fn gauge(&self, t: f64) -> Option<f64> {
        self.gauge.as_ref().map(|g| g(t))
    }

    /// The Jacobian at v: the supplied one, or central finite differences
    /// with step 1e-6·(1 + ‖v‖).
    pub fn jacobian(&self, v: &DVector<f64>) -> DMatrix<f64> {
        if let Some(j) = &self.jac {
            return j(v);
        }
        let h = 1e-6 * (1.0 + v.norm());
        let mut out = DMatrix::zeros(self.dim_target, self.dim_source);
        for k in 0..self.dim_source {
            let mut vp = v.clone();
            let mut vm = v.clone();
            vp[k] += h;
            vm[k] -= h;
            let col = (self.eval(&vp) - self.eval(&vm)) / (2.0 * h);
            out.set_column(k, &col);
        }
        out
    }

    /// Precomposition with a linear isomorphism: v ↦ F(L·v).
    pub fn precompose_linear(self, l: LinearMap) -> Self {
        assert_eq!(l.rows(), self.dim_source);
        let dim_source = l.cols();
        let new_linear = LinearMap::new(self.linear_part.matrix() * l.matrix());
        let lm = l.matrix().clone();
        let lm2 = lm.clone();
        let eval = self.eval;
        let jac = self.jac;
        let mut out = Self {
            dim_source,
            dim_target: self.dim_target,
            eval: Box::new(move |v| eval(&(&lm * v))),
            jac: None,
            linear_part: new_linear,
            gauge: self.gauge,
        };
        if let Some(j) = jac {
            out.jac = Some(Box::new(move |v| j(&(&lm2 * v)) * &lm2));
        }
        out
    }
}

/// The induced Clifford operator C_F(v) = l̄⁻¹(F(v)) as a vector of the
/// source model, ready to be embedded as a degree-one element.
pub fn induced_clifford_operator(
    map: &ProperNonlinearMap,
    v: &DVector<f64>,
) -> Result<DVector<f64>, BottError> {
    let unitary = polar_unitary(map.linear_part())?;
    Ok(unitary.matrix().transpose() * map.eval(v))
}

/// Tensor sampling grid: spectral nodes `x_nodes` times a product grid over
/// the v-axes. Axes are strictly increasing and, for the interpolation
/// tolerance estimate, assumed uniformly spaced.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    x_nodes: Vec<f64>,
    v_axes: Vec<Vec<f64>>,
}

impl TensorGrid {
    /// Builds a grid from explicit nodes.
    pub fn new(x_nodes: Vec<f64>, v_axes: Vec<Vec<f64>>) -> Self {
        assert!(!x_nodes.is_empty());
        assert!(v_axes.iter().all(|a| a.len() >= 2));
        Self { x_nodes, v_axes }
    }

    /// Symmetric uniform grid: `x_count` nodes on [−x_radius, x_radius] and
    /// `v_count` nodes per axis on [−v_radius, v_radius]^dim.
    pub fn uniform(
        x_radius: f64,
        x_count: usize,
        v_radius: f64,
        v_count: usize,
        v_dim: usize,
    ) -> Self {
        let lin = |r: f64, n: usize| -> Vec<f64> {
            (0..n)
                .map(|i| -r + 2.0 * r * (i as f64) / ((n - 1) as f64))
                .collect()
        };
        Self::new(lin(x_radius, x_count), vec![lin(v_radius, v_count); v_dim])
    }

    /// Spectral axis nodes.
    pub fn x_nodes(&self) -> &[f64] {
        &self.x_nodes
    }

    /// Largest |x| of the spectral axis (the window radius).
    pub fn x_radius(&self) -> f64 {
        self.x_nodes.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Number of v-axes.
    pub fn v_dim(&self) -> usize {
        self.v_axes.len()
    }

    /// The nodes of one v-axis.
    pub fn v_axis(&self, k: usize) -> &[f64] {
        &self.v_axes[k]
    }

    /// Nodes per full v-slice.
    pub fn v_node_count(&self) -> usize {
        self.v_axes.iter().map(|a| a.len()).product()
    }

    /// Total node count.
    pub fn node_count(&self) -> usize {
        self.x_nodes.len() * self.v_node_count()
    }

    /// Decodes a flat v-index into the vector of axis coordinates.
    pub fn v_node(&self, mut flat: usize) -> DVector<f64> {
        let mut v = DVector::zeros(self.v_dim());
        for k in (0..self.v_dim()).rev() {
            let len = self.v_axes[k].len();
            v[k] = self.v_axes[k][flat % len];
            flat /= len;
        }
        v
    }

    /// Flat index from per-axis indices (row-major, last axis fastest).
    fn v_flat(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for (k, &i) in idx.iter().enumerate() {
            flat = flat * self.v_axes[k].len() + i;
        }
        flat
    }

    /// The sample point at (x-index, flat v-index).
    pub fn spectral_point(&self, xi: usize, vflat: usize) -> SpectralPoint {
        SpectralPoint::new(self.x_nodes[xi], self.v_node(vflat))
    }

    /// Locates `coord` on axis k: cell index and fraction within the cell.
    fn locate(&self, k: usize, coord: f64) -> Result<(usize, f64), BottError> {
        let axis = &self.v_axes[k];
        let (lo, hi) = (axis[0], axis[axis.len() - 1]);
        if coord < lo - 1e-12 || coord > hi + 1e-12 {
            return Err(BottError::GridCoverage {
                axis: k,
                coord,
                lo,
                hi,
            });
        }
        let coord = coord.clamp(lo, hi);
        let mut a = 0usize;
        let mut b = axis.len() - 1;
        while b - a > 1 {
            let mid = (a + b) / 2;
            if axis[mid] <= coord {
                a = mid;
            } else {
                b = mid;
            }
        }
        let frac = (coord - axis[a]) / (axis[b] - axis[a]);
        Ok((a, frac))
    }
}

/// A Clifford-algebra-valued function sampled on a tensor grid; the finite
/// surrogate for elements of S_r𝔠(D_r).
#[derive(Debug)]
pub struct SampledSection {
    /// Window radius: the function is treated as supported in (−r, r) × D.
    pub r: f64,
    /// The sampling grid.
    pub grid: TensorGrid,
    /// One element per node, x-major then flat v-index.
    pub values: Vec<CliffordElement>,
    /// Optional frame identifying the subspace W′ the v-axes parametrize.
    pub frame: Option<DMatrix<f64>>,
}

impl SampledSection {
    /// Samples `g` on the grid.
    pub fn from_fn(grid: TensorGrid, g: impl Fn(&SpectralPoint) -> CliffordElement) -> Self {
        let mut values = Vec::with_capacity(grid.node_count());
        for xi in 0..grid.x_nodes().len() {
            for vflat in 0..grid.v_node_count() {
                values.push(g(&grid.spectral_point(xi, vflat)));
            }
        }
        Self {
            r: grid.x_radius(),
            grid,
            values,
            frame: None,
        }
    }

    /// The value at (x-index, flat v-index).
    pub fn value(&self, xi: usize, vflat: usize) -> &CliffordElement {
        &self.values[xi * self.grid.v_node_count() + vflat]
    }

    /// Sup over nodes of the C*-norm.
    pub fn sup_norm(&self) -> Result<f64, BottError> {
        let mut sup = 0.0f64;
        for v in &self.values {
            sup = sup.max(cl_norm(v)?);
        }
        Ok(sup)
    }

    /// Sup over nodes of the C*-norm of the difference with `other`
    /// (grids must match node for node).
    pub fn sup_distance(&self, other: &SampledSection) -> Result<f64, BottError> {
        if self.values.len() != other.values.len() {
            return Err(BottError::DimensionMismatch {
                expected: self.values.len(),
                got: other.values.len(),
            });
        }
        let mut sup = 0.0f64;
        for (a, b) in self.values.iter().zip(&other.values) {
            sup = sup.max(cl_norm(&(a - b))?);
        }
        Ok(sup)
    }

    /// Multilinear interpolation over the v-axes at the spectral slice `xi`.
    pub fn interp_at(&self, xi: usize, v: &DVector<f64>) -> Result<CliffordElement, BottError> {
        let d = self.grid.v_dim();
        if v.len() != d {
            return Err(BottError::DimensionMismatch {
                expected: d,
                got: v.len(),
            });
        }
        let mut cells = Vec::with_capacity(d);
        for k in 0..d {
            cells.push(self.grid.locate(k, v[k])?);
        }
        let rank = self.values[0].rank();
        let mut acc = CliffordElement::zero(rank);
        let mut idx = vec![0usize; d];
        for corner in 0..(1usize << d) {
            let mut weight = 1.0;
            for (k, &(cell, frac)) in cells.iter().enumerate() {
                if corner >> k & 1 == 1 {
                    weight *= frac;
                    idx[k] = cell + 1;
                } else {
                    weight *= 1.0 - frac;
                    idx[k] = cell;
                }
            }
            if weight == 0.0 {
                continue;
            }
            let vflat = self.grid.v_flat(&idx);
            acc = &acc + &(self.value(xi, vflat) * Complex64::new(weight, 0.0));
        }
        Ok(acc)
    }

    /// Second-difference estimate of the multilinear interpolation error:
    /// Σ over v-axes of max‖u_{i−1} − 2u_i + u_{i+1}‖/8, evaluated in the
    /// C*-norm. Valid for uniformly spaced axes.
    pub fn interpolation_tolerance(&self) -> Result<f64, BottError> {
        let d = self.grid.v_dim();
        let nv = self.grid.v_node_count();
        let mut total = 0.0f64;
        for k in 0..d {
            let len = self.grid.v_axes[k].len();
            if len < 3 {
                continue;
            }
            let stride: usize = self.grid.v_axes[k + 1..].iter().map(|a| a.len()).product();
            let mut worst = 0.0f64;
            for xi in 0..self.grid.x_nodes().len() {
                for vflat in 0..nv {
                    let i_k = vflat / stride % len;
                    if i_k == 0 || i_k == len - 1 {
                        continue;
                    }
                    let u0 = self.value(xi, vflat - stride);
                    let u1 = self.value(xi, vflat);
                    let u2 = self.value(xi, vflat + stride);
                    let dd = &(&(u0 + u2) - u1) - u1;
                    worst = worst.max(cl_norm(&dd)?);
                }
            }
            total += worst / 8.0;
        }
        Ok(total)
    }
}

/// Samples the induced Bott element β_F(f): at each node (x, v) the value is
/// f(x·e₀ + C(C_F(v))) with C_F = l̄⁻¹ ∘ F.
pub fn bott_element<F>(
    f: F,
    map: &ProperNonlinearMap,
    grid: TensorGrid,
) -> Result<SampledSection, BottError>
where
    F: Fn(f64) -> Complex64,
{
    if grid.v_dim() != map.dim_source() {
        return Err(BottError::DimensionMismatch {
            expected: map.dim_source(),
            got: grid.v_dim(),
        });
    }
    let unitary = polar_unitary(map.linear_part())?;
    let transport = unitary.matrix().transpose();
    let mut values = Vec::with_capacity(grid.node_count());
    for xi in 0..grid.x_nodes().len() {
        for vflat in 0..grid.v_node_count() {
            let p = grid.spectral_point(xi, vflat);
            let cf = &transport * map.eval(&p.v);
            values.push(functional_calculus(&f, &SpectralPoint::new(p.x, cf)));
        }
    }
    Ok(SampledSection {
        r: grid.x_radius(),
        grid,
        values,
        frame: None,
    })
}

/// The pullback F*: sections over the target model to sections over the
/// source model,
///
/// ```text
/// (F*u)(x, v′) = ext(l̄⁻¹)( u(x, F(v′)) )
/// ```
///
/// a node-wise *-homomorphism. The target section is interpolated at F(v′);
/// `GridCoverage` is returned when F(v′) exits the hull of `u`'s grid.
pub fn pullback(
    map: &ProperNonlinearMap,
    u: &SampledSection,
    source_grid: TensorGrid,
) -> Result<SampledSection, BottError> {
    if u.grid.v_dim() != map.dim_target() {
        return Err(BottError::DimensionMismatch {
            expected: map.dim_target(),
            got: u.grid.v_dim(),
        });
    }
    if source_grid.v_dim() != map.dim_source() {
        return Err(BottError::DimensionMismatch {
            expected: map.dim_source(),
            got: source_grid.v_dim(),
        });
    }
    if u.grid.x_nodes().len() != source_grid.x_nodes().len()
        || u.grid
            .x_nodes()
            .iter()
            .zip(source_grid.x_nodes())
            .any(|(a, b)| (a - b).abs() > 1e-12)
    {
        return Err(BottError::XAxisMismatch);
    }
    let unitary = polar_unitary(map.linear_part())?;
    // 1 ⊕ l̄⁻¹ on ℝ ⊕ E, extended to the Clifford morphism
    let mut block = DMatrix::zeros(map.dim_source() + 1, map.dim_target() + 1);
    block[(0, 0)] = 1.0;
    block
        .view_mut((1, 1), (map.dim_source(), map.dim_target()))
        .copy_from(&unitary.matrix().transpose());
    let morphism = extend_isometry(&block)?;

    let mut values = Vec::with_capacity(source_grid.node_count());
    for xi in 0..source_grid.x_nodes().len() {
        for vflat in 0..source_grid.v_node_count() {
            let v_prime = source_grid.v_node(vflat);
            let w = map.eval(&v_prime);
            let interpolated = u.interp_at(xi, &w)?;
            values.push(morphism.apply(&interpolated)?);
        }
    }
    Ok(SampledSection {
        r: source_grid.x_radius(),
        grid: source_grid,
        values,
        frame: None,
    })
}

fn ramp(t: f64, r_inner: f64, r_outer: f64) -> f64 {
    if t <= r_inner {
        1.0
    } else if t >= r_outer {
        0.0
    } else {
        (r_outer - t) / (r_outer - r_inner)
    }
}

/// Multiplies a section by the product cutoff ψ = χ(|x|)·φ(‖v‖): 1 inside
/// `r_inner`, 0 outside `r_outer`, piecewise-linear between. Sup-norm
/// non-increasing.
pub fn window_truncate(
    u: &SampledSection,
    r_inner: f64,
    r_outer: f64,
) -> Result<SampledSection, BottError> {
    if !(r_inner < r_outer) {
        return Err(BottError::BadWindow { r_inner, r_outer });
    }
    let mut values = Vec::with_capacity(u.values.len());
    for xi in 0..u.grid.x_nodes().len() {
        for vflat in 0..u.grid.v_node_count() {
            let p = u.grid.spectral_point(xi, vflat);
            let chi = ramp(p.x.abs(), r_inner, r_outer);
            let phi = ramp(p.v.norm(), r_inner, r_outer);
            values.push(u.value(xi, vflat) * Complex64::new(chi * phi, 0.0));
        }
    }
    Ok(SampledSection {
        r: r_outer.min(u.r),
        grid: u.grid.clone(),
        values,
        frame: u.frame.clone(),
    })
}

/// A suite of real test functions f ∈ C₀(ℝ) used by the defect estimators.
/// The default spans even/odd behavior: exp(−t²), t·exp(−t²), t²·exp(−t²)
/// and compactly supported bumps at two scales.
pub struct TestFunctionSuite {
    entries: Vec<(String, Box<dyn Fn(f64) -> Complex64 + Send + Sync>)>,
}

/// The bump exp(1 − 1/(1 − (t/s)²)) on |t| < s, zero outside.
pub fn bump(t: f64, scale: f64) -> f64 {
    let u = t / scale;
    let w = 1.0 - u * u;
    if w <= 0.0 {
        0.0
    } else {
        Float::exp(1.0 - 1.0 / w)
    }
}

impl TestFunctionSuite {
    /// The default five-function suite.
    pub fn standard() -> Self {
        let mut s = Self {
            entries: Vec::new(),
        };
        s.push("gauss", |t| Complex64::new(Float::exp(-t * t), 0.0));
        s.push("t_gauss", |t| Complex64::new(t * Float::exp(-t * t), 0.0));
        s.push("t2_gauss", |t| {
            Complex64::new(t * t * Float::exp(-t * t), 0.0)
        });
        s.push("bump1", |t| Complex64::new(bump(t, 1.0), 0.0));
        s.push("bump2", |t| Complex64::new(bump(t, 2.0), 0.0));
        s
    }

    /// The first `n` functions of the standard suite.
    pub fn standard_truncated(n: usize) -> Self {
        let mut s = Self::standard();
        s.entries.truncate(n);
        s
    }

    /// Adds a named function.
    pub fn push(&mut self, name: &str, f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) {
        self.entries.push((String::from(name), Box::new(f)));
    }

    /// Iterates (name, function) pairs.
    pub fn iter(
        &self,
    ) -> impl Iterator<Item = (&str, &(dyn Fn(f64) -> Complex64 + Send + Sync))> {
        self.entries.iter().map(|(n, f)| (n.as_str(), f.as_ref()))
    }

    /// Number of functions.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Whether the suite is empty.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Node-sampling specification for the defect estimators: spectral nodes,
/// a deterministic radial sweep along frame directions, and seeded random
/// ball samples.
#[derive(Debug, Clone)]
pub struct DefectProbe {
    /// Spectral axis values.
    pub x_nodes: Vec<f64>,
    /// Radial factors (fractions of `ball_radius`) for the per-direction
    /// sweep.
    pub radial: Vec<f64>,
    /// Number of seeded random ball samples.
    pub random_samples: usize,
    /// Radius of the sampled ball.
    pub ball_radius: f64,
    /// RNG seed (recorded by callers for reproducibility).
    pub seed: u64,
}

impl Default for DefectProbe {
    fn default() -> Self {
        Self {
            x_nodes: vec![0.0, 0.5, -0.5, 1.0, -1.0, 2.0],
            radial: vec![0.125, 0.25, 0.375, 0.5, 0.675, 0.85, 1.0],
            random_samples: 200,
            ball_radius: 2.0,
            seed: 1,
        }
    }
}

pub(crate) fn sample_unit_ball(dim: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    // Box-Muller direction, radius with uniform volume density
    let mut v = DVector::zeros(dim);
    let mut i = 0;
    while i < dim {
        let u1: f64 = rng.gen_range(1e-12..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        let m = Float::sqrt(-2.0 * Float::ln(u1));
        let angle = 2.0 * core::f64::consts::PI * u2;
        v[i] = m * Float::cos(angle);
        i += 1;
        if i < dim {
            v[i] = m * Float::sin(angle);
            i += 1;
        }
    }
    let norm = v.norm();
    if norm == 0.0 {
        return v;
    }
    let radius: f64 = Float::powf(rng.gen_range(0.0f64..1.0), 1.0 / dim as f64);
    v * (radius / norm)
}

/// Sup of ‖f(x·e₀ + C(w₁)) − f(x·e₀ + C(w₂))‖ over the test suite at a
/// single pair of ambient vectors, evaluated exactly in the Clifford
/// algebra over span(w₁, w₂); the C*-norm is invariant under the isometric
/// inclusion into the ambient algebra.
fn spectral_pair_defect(
    suite: &TestFunctionSuite,
    x: f64,
    w1: &DVector<f64>,
    w2: &DVector<f64>,
) -> Result<f64, BottError> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for w in [w1, w2] {
        let mut r = w.clone();
        for b in &basis {
            let coeff = b.dot(&r);
            r -= b * coeff;
        }
        if r.norm() > 1e-13 {
            let norm = r.norm();
            basis.push(r / norm);
        }
    }
    let d = basis.len().max(1);
    let coords = |w: &DVector<f64>| -> DVector<f64> {
        DVector::from_fn(d, |i, _| basis.get(i).map_or(0.0, |b| b.dot(w)))
    };
    let (c1, c2) = (coords(w1), coords(w2));
    let mut worst = 0.0f64;
    for (_, f) in suite.iter() {
        let a = functional_calculus(f, &SpectralPoint::new(x, c1.clone()));
        let b = functional_calculus(f, &SpectralPoint::new(x, c2.clone()));
        worst = worst.max(cl_norm(&(&a - &b))?);
    }
    Ok(worst)
}

fn check_nested(
    stages: &[ApproximationStage],
    inner: usize,
    outer: usize,
) -> Result<(), BottError> {
    if !stages[outer].source.contains(&stages[inner].source, 1e-8) {
        return Err(BottError::NotNested { inner, outer });
    }
    Ok(())
}

/// The ambient action of a stage's induced Clifford operator, extended by
/// the identity off the stage: v ↦ (1 − P)v + Frame·(l̄ᵢᵀ lᵢ)·Frameᵀ v.
fn stage_clifford_action(stage: &ApproximationStage) -> Result<DMatrix<f64>, BottError> {
    let m = stage.map.linear_part();
    let polar = polar_unitary(m)?;
    let a_coord = polar.matrix().transpose() * m.matrix();
    let frame = stage.source.frame();
    let n = stage.source.ambient_dim();
    let p = stage.source.projector();
    Ok(DMatrix::identity(n, n) - &p + frame * a_coord * frame.transpose())
}

/// Estimates the asymptotic-commutativity defect of the Bott family over a
/// nested stage triple (a, b, c): the sampled sup over test functions and
/// nodes of ‖β_ca(f) − β_cb(β_ba(f))‖, each Bott map carrying the induced
/// Clifford operator C_l = l̄ᵢᵀ∘lᵢ of its stage pair.
///
/// Image-side realization: the stage-a and stage-b realizations of f,
/// extended to the common stage c, are the functional calculus at the
/// vectors (1 − P_x)v + C_{l_x}(P_x v) for x = a, b; the defect is the
/// sampled sup of their C*-distance. For unitary stages the vectors
/// coincide and the defect vanishes identically.
pub fn asymptotic_commutativity_defect(
    stages: &[ApproximationStage],
    suite: &TestFunctionSuite,
    triple: (usize, usize, usize),
    probe: &DefectProbe,
) -> Result<f64, BottError> {
    let (a, b, c) = triple;
    assert!(a < b && b < c && c < stages.len(), "triple must be ordered");
    check_nested(stages, a, b)?;
    check_nested(stages, b, c)?;
    let act_a = stage_clifford_action(&stages[a])?;
    let act_b = stage_clifford_action(&stages[b])?;
    let frame_c = stages[c].source.frame();
    let dim_c = stages[c].source.dim();

    let mut rng = ChaCha8Rng::seed_from_u64(probe.seed);
    let mut node_vectors: Vec<DVector<f64>> = Vec::new();
    for j in 0..dim_c {
        let dir = frame_c.column(j).clone_owned();
        for &rho in &probe.radial {
            node_vectors.push(&dir * (rho * probe.ball_radius));
        }
    }
    for _ in 0..probe.random_samples {
        let coords = sample_unit_ball(dim_c, &mut rng) * probe.ball_radius;
        node_vectors.push(frame_c * coords);
    }

    let mut worst = 0.0f64;
    for v in &node_vectors {
        let wa = &act_a * v;
        let wb = &act_b * v;
        for &x in &probe.x_nodes {
            worst = worst.max(spectral_pair_defect(suite, x, &wa, &wb)?);
        }
    }
    Ok(worst)
}

/// Outcome of the projection-diagram estimate: the sampled defect and the
/// asymptotic-unitarity level ε it is to be compared against (the bound of
/// interest being defect ≤ 4ε).
#[derive(Debug, Clone, PartialEq)]
pub struct DiagramDefect {
    /// Sampled sup of the diagram mismatch.
    pub defect: f64,
    /// Measured ‖(l − l̄)| E_a^⊥‖.
    pub epsilon: f64,
    /// Human-readable note on the sampling.
    pub note: String,
}

/// Estimates the defect of the diagram comparing the C_l-Bott extension
/// followed by the polar-unitary projections pr₂₁ against the standard
/// Bott extension after pr₁, over a nested pair E_a ⊂ E_b:
///
/// ```text
/// ‖ (1 ⊗̂ pr₂₁) ∘ β₁ − β₂ ∘ (1 ⊗̂ pr₁) ‖
/// ```
///
/// Node-wise both routes are functional calculus at explicit vectors: they
/// share the pr₁-image of C_l(v_a) and differ by PR₂(C_l(v_ba)) versus
/// v_ba. Returns the sampled sup together with the measured ε.
pub fn projection_diagram_defect(
    l: &LinearMap,
    e_a: &Subspace,
    e_b: &Subspace,
    suite: &TestFunctionSuite,
    probe: &DefectProbe,
) -> Result<DiagramDefect, BottError> {
    if !e_b.contains(e_a, 1e-8) {
        return Err(BottError::NotNested { inner: 0, outer: 1 });
    }
    let unitary = polar_unitary(l)?;
    let a_mat = unitary.matrix().transpose() * l.matrix();

    // complement of E_a inside E_b
    let pa = e_a.projector();
    let n = e_a.ambient_dim();
    let residual = (DMatrix::<f64>::identity(n, n) - &pa) * e_b.frame();
    let e_ba = Subspace::span_of(&residual, 1e-10);

    let bar_a = e_a.map_through(&a_mat);
    let bar_ba = e_ba.map_through(&a_mat);

    // polar unitaries of the orthogonal projections Ē → E, in frames
    let pr_unitary = |from: &Subspace, to: &Subspace| -> Result<DMatrix<f64>, BottError> {
        let m = to.frame().transpose() * from.frame();
        let u = polar_unitary(&LinearMap::new(m))?;
        Ok(to.frame() * u.matrix() * from.frame().transpose())
    };
    let pr1 = pr_unitary(&bar_a, e_a)?;
    let pr2 = pr_unitary(&bar_ba, &e_ba)?;

    // measured asymptotic-unitarity level at E_a
    let complement_a = e_a.orthogonal_complement();
    let epsilon = op_norm(&((l.matrix() - unitary.matrix()) * complement_a.frame()));

    let mut rng = ChaCha8Rng::seed_from_u64(probe.seed);
    let dim_b = e_b.dim();
    let frame_b = e_b.frame();
    let mut worst = 0.0f64;
    let mut sampled = 0usize;
    let mut eval_pair = |v_b: &DVector<f64>| -> Result<(), BottError> {
        let v_a = e_a.project(v_b);
        let v_ba = v_b - &v_a;
        let shared = &pr1 * (&a_mat * &v_a);
        let w1 = &pr2 * (&a_mat * &v_ba) + &shared;
        let w2 = &v_ba + &shared;
        for &x in &probe.x_nodes {
            worst = worst.max(spectral_pair_defect(suite, x, &w1, &w2)?);
        }
        sampled += 1;
        Ok(())
    };
    for j in 0..dim_b {
        let dir = frame_b.column(j).clone_owned();
        for &rho in &probe.radial {
            eval_pair(&(&dir * (rho * probe.ball_radius)))?;
        }
    }
    for _ in 0..probe.random_samples {
        let coords = sample_unit_ball(dim_b, &mut rng) * probe.ball_radius;
        eval_pair(&(frame_b * coords))?;
    }
    Ok(DiagramDefect {
        defect: worst,
        epsilon,
        note: format!(
            "{} ball samples, {} spectral nodes, radius {}",
            sampled,
            probe.x_nodes.len(),
            probe.ball_radius
        ),
    })
}
