//! Subspaces, polar decompositions and the subspace distances
//!
//! A `Subspace` of ℝᴺ is stored as an orthonormal column frame. The distance
//! between two subspaces is
//!
//! ```text
//! d′(V₁; V₂) = sup_{v₂} inf_{v₁} { ‖v₁ − v₂‖ : ‖v₁‖ = ‖v₂‖ = 1 }
//! d(V₁, V₂)  = min { d′(V₁; V₂), d′(V₂; V₁) }
//! ```
//!
//! computed in closed form from principal angles: for a unit v₂ the nearest
//! unit vector of V₁ is the normalized projection, so the inner infimum is
//! √(2 − 2·cos θ(v₂)) and the supremum is attained at the largest principal
//! angle of V₂ against V₁. `d′(V₁; V₂) = 0` iff V₁ contains V₂.
//!
//! `polar_unitary` extracts the isometric factor l̄ of l = l̄·√(lᵀl), and
//! `asymptotic_unitarity_profile` scans an exhaustion for the first subspace
//! whose orthogonal complement sees ‖(l − l̄)‖ < ε.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_traits::Float;

/// Smallest singular value below which a map is treated as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Orthonormality tolerance for frames and isometries.
pub const ORTHO_TOL: f64 = 1e-10;

/// Errors of the linear-algebra substrate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EuclidError {
    /// Smallest singular value fell below [`SINGULAR_TOL`].
    #[error("singular map: smallest singular value {sigma_min:.3e}")]
    SingularMap {
        /// The offending singular value.
        sigma_min: f64,
    },
    /// Two objects live in different ambient spaces.
    #[error("ambient dimension mismatch: {left} vs {right}")]
    AmbientMismatch {
        /// Left ambient dimension.
        left: usize,
        /// Right ambient dimension.
        right: usize,
    },
    /// A nonzero subspace was required.
    #[error("zero subspace not allowed here")]
    ZeroSubspace,
    /// A frame or candidate isometry is not orthonormal.
    #[error("frame not orthonormal: defect {defect:.3e}")]
    NotOrthonormal {
        /// ‖FᵀF − I‖ of the offending frame.
        defect: f64,
    },
    /// A matrix had unexpected shape.
    #[error("shape mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    ShapeMismatch {
        /// Expected row count.
        expected_rows: usize,
        /// Expected column count.
        expected_cols: usize,
        /// Actual row count.
        rows: usize,
        /// Actual column count.
        cols: usize,
    },
}

/// A finite-dimensional linear subspace V ⊂ ℝᴺ, stored as an orthonormal
/// column frame (N × dim V). `dim V = 0` is allowed; the frame then has no
/// columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    frame: DMatrix<f64>,
}

impl Subspace {
    /// Wraps an orthonormal frame. Fails if `frameᵀ·frame` deviates from the
    /// identity by more than [`ORTHO_TOL`].
    pub fn new(frame: DMatrix<f64>) -> Result<Self, EuclidError> {
        let gram = frame.transpose() * &frame;
        let defect = (&gram - DMatrix::<f64>::identity(gram.nrows(), gram.ncols())).norm();
        if defect > ORTHO_TOL {
            return Err(EuclidError::NotOrthonormal { defect });
        }
        Ok(Self { frame })
    }

    /// The zero subspace of ℝᴺ.
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            frame: DMatrix::zeros(ambient_dim, 0),
        }
    }

    /// Span of the first `dim` coordinate axes of ℝᴺ.
    pub fn coordinate(ambient_dim: usize, dim: usize) -> Self {
        let mut frame = DMatrix::zeros(ambient_dim, dim);
        for j in 0..dim {
            frame[(j, j)] = 1.0;
        }
        Self { frame }
    }

    /// Orthonormalizes the columns of `spanning` (rank revealed by column
    /// pivoting at tolerance `rank_tol`) and returns their span.
    pub fn span_of(spanning: &DMatrix<f64>, rank_tol: f64) -> Self {
        let n = spanning.nrows();
        let mut basis: Vec<DVector<f64>> = Vec::new();
        // modified Gram-Schmidt with re-orthogonalization
        for j in 0..spanning.ncols() {
            let mut v = spanning.column(j).clone_owned();
            for _ in 0..2 {
                for b in &basis {
                    let coeff = b.dot(&v);
                    v -= b * coeff;
                }
            }
            let norm = v.norm();
            if norm > rank_tol {
                basis.push(v / norm);
            }
        }
        let mut frame = DMatrix::zeros(n, basis.len());
        for (j, b) in basis.iter().enumerate() {
            frame.set_column(j, b);
        }
        Self { frame }
    }

    /// Ambient dimension N.
    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    /// dim V.
    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    /// The orthonormal frame (N × dim V).
    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// Orthogonal projector V·Vᵀ as an N × N matrix.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.frame * self.frame.transpose()
    }

    /// Projects `v` onto the subspace.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.frame * (self.frame.transpose() * v)
    }

    /// An orthonormal frame of the orthogonal complement.
    pub fn orthogonal_complement(&self) -> Subspace {
        let n = self.ambient_dim();
        let mut residuals = DMatrix::zeros(n, n);
        let proj = self.projector();
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            let r = &e - &proj * &e;
            residuals.set_column(j, &r);
        }
        Subspace::span_of(&residuals, 1e-8)
    }

    /// Whether every frame vector of `other` lies in this span, to `tol`.
    pub fn contains(&self, other: &Subspace, tol: f64) -> bool {
        if self.ambient_dim() != other.ambient_dim() {
            return false;
        }
        let proj = self.projector();
        for j in 0..other.dim() {
            let v = other.frame.column(j).clone_owned();
            if (&v - &proj * &v).norm() > tol {
                return false;
            }
        }
        true
    }

    /// Image of the subspace under `m`, re-orthonormalized.
    pub fn map_through(&self, m: &DMatrix<f64>) -> Subspace {
        Subspace::span_of(&(m * &self.frame), 1e-10)
    }
}

/// A dense real linear map (rows = target dimension, cols = source
/// dimension). Houses l, l_i, l̄ and orthogonal projections.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    matrix: DMatrix<f64>,
}

impl LinearMap {
    /// Wraps a dense matrix.
    pub fn new(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    /// The identity on ℝᴺ.
    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
        }
    }

    /// Diagonal map from the given entries.
    pub fn diagonal(entries: &[f64]) -> Self {
        Self {
            matrix: DMatrix::from_diagonal(&DVector::from_row_slice(entries)),
        }
    }

    /// The underlying matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Applies the map.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }

    /// Target dimension.
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    /// Source dimension.
    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Smallest singular value.
    pub fn sigma_min(&self) -> f64 {
        if self.matrix.is_empty() {
            return 0.0;
        }
        self.matrix
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Operator norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        op_norm(&self.matrix)
    }

    /// Inverse; fails below the singularity threshold.
    pub fn inverse(&self) -> Result<LinearMap, EuclidError> {
        let sigma_min = self.sigma_min();
        if sigma_min <= SINGULAR_TOL {
            return Err(EuclidError::SingularMap { sigma_min });
        }
        let inv = self
            .matrix
            .clone()
            .try_inverse()
            .ok_or(EuclidError::SingularMap { sigma_min })?;
        Ok(LinearMap::new(inv))
    }
}

/// Operator norm of a dense matrix (largest singular value; 0 for empty
/// shapes). Exact at machine precision for finite matrices.
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// The unitary factor l̄ of the polar decomposition L = l̄·√(LᵀL).
///
/// Computed as U·Vᵀ from the singular value decomposition L = U·Σ·Vᵀ, so
/// det l̄ carries the sign of det L. Fails with `SingularMap` when the
/// smallest singular value drops below [`SINGULAR_TOL`].
pub fn polar_unitary(l: &LinearMap) -> Result<LinearMap, EuclidError> {
    let m = l.matrix();
    if m.nrows() != m.ncols() {
        return Err(EuclidError::ShapeMismatch {
            expected_rows: m.nrows(),
            expected_cols: m.nrows(),
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let svd = m.clone().svd(true, true);
    let sigma_min = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(sigma_min > SINGULAR_TOL) {
        return Err(EuclidError::SingularMap { sigma_min });
    }
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    Ok(LinearMap::new(u * v_t))
}

fn check_same_ambient(v1: &Subspace, v2: &Subspace) -> Result<(), EuclidError> {
    if v1.ambient_dim() != v2.ambient_dim() {
        return Err(EuclidError::AmbientMismatch {
            left: v1.ambient_dim(),
            right: v2.ambient_dim(),
        });
    }
    Ok(())
}

/// One-sided deviation d′(V₁; V₂) = sup over unit v₂ ∈ V₂ of the distance to
/// the nearest unit vector of V₁.
///
/// Equals √(2 − 2·cos θ_max) where θ_max is the largest principal angle of
/// V₂ against V₁ (cos θ_max = 0 when V₂ has a direction orthogonal to all of
/// V₁, saturating the value at √2). Zero exactly when V₁ ⊇ V₂.
pub fn dist_one_sided(v1: &Subspace, v2: &Subspace) -> Result<f64, EuclidError> {
    check_same_ambient(v1, v2)?;
    if v1.dim() == 0 || v2.dim() == 0 {
        return Err(EuclidError::ZeroSubspace);
    }
    // sin θ_max is the largest singular value of (1 − P₁)F₂; this form stays
    // accurate near containment where cos θ_max − 1 would cancel.
    let f2 = v2.frame();
    let residual = f2 - v1.frame() * (v1.frame().transpose() * f2);
    let sin_max = op_norm(&residual).clamp(0.0, 1.0);
    let cos_max = Float::sqrt((1.0 - sin_max * sin_max).max(0.0));
    // √(2 − 2cosθ) = sinθ·√(2/(1+cosθ))
    Ok(sin_max * Float::sqrt(2.0 / (1.0 + cos_max)))
}

/// The paper's subspace distance d(V₁, V₂) = min of the two one-sided
/// deviations. Symmetric by construction; not assumed to satisfy the
/// triangle inequality.
pub fn dist(v1: &Subspace, v2: &Subspace) -> Result<f64, EuclidError> {
    let a = dist_one_sided(v1, v2)?;
    let b = dist_one_sided(v2, v1)?;
    Ok(a.min(b))
}

/// Result of scanning an exhaustion for asymptotic unitarity.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitarityProfile {
    /// ‖(l − l̄)| exhaustion[i]^⊥‖ for each i.
    pub norms: Vec<f64>,
    /// Smallest index whose norm is below the requested ε, if any.
    pub first_within: Option<usize>,
}

/// Scans `exhaustion` for the first subspace V with ‖(l − l̄)|V^⊥‖ < `eps`.
///
/// The restriction norm is the largest singular value of (L − l̄)·B where B
/// is an orthonormal frame of the complement. When no index qualifies the
/// profile of achieved norms is still returned with `first_within = None`.
/// The exhaustion is expected to be increasing; this is not re-checked.
pub fn asymptotic_unitarity_profile(
    l: &LinearMap,
    exhaustion: &[Subspace],
    eps: f64,
) -> Result<UnitarityProfile, EuclidError> {
    let unitary = polar_unitary(l)?;
    let defect = l.matrix() - unitary.matrix();
    let mut norms = Vec::with_capacity(exhaustion.len());
    for v in exhaustion {
        if v.ambient_dim() != l.cols() {
            return Err(EuclidError::AmbientMismatch {
                left: v.ambient_dim(),
                right: l.cols(),
            });
        }
        let complement = v.orthogonal_complement();
        norms.push(op_norm(&(&defect * complement.frame())));
    }
    let first_within = norms.iter().position(|&n| n < eps);
    Ok(UnitarityProfile { norms, first_within })
}

/// The deviation d(V, (l̄ᵀ·L)(V)) bounded by ‖(l̄ᵀL − id)‖-off-diagonal
/// blocks; a diagnostic for how far L moves a subspace after removing its
/// unitary part.
pub fn lemma_dist_check(l: &LinearMap, v: &Subspace) -> Result<f64, EuclidError> {
    if v.ambient_dim() != l.cols() {
        return Err(EuclidError::AmbientMismatch {
            left: v.ambient_dim(),
            right: l.cols(),
        });
    }
    if v.dim() == 0 {
        return Err(EuclidError::ZeroSubspace);
    }
    let unitary = polar_unitary(l)?;
    let a = unitary.matrix().transpose() * l.matrix();
    let image = v.map_through(&a);
    dist(v, &image)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_subspace_has_no_columns() {
        let z = Subspace::zero(4);
        assert_eq!(z.dim(), 0);
        assert_eq!(z.ambient_dim(), 4);
        assert_eq!(z.orthogonal_complement().dim(), 4);
    }

    #[test]
    fn non_orthonormal_frame_rejected() {
        let frame = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        assert!(matches!(
            Subspace::new(frame),
            Err(EuclidError::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn op_norm_of_empty_restriction_is_zero() {
        let m = DMatrix::<f64>::zeros(3, 0);
        assert_eq!(op_norm(&m), 0.0);
    }
}
