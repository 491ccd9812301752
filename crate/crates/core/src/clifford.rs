//! Complex Clifford algebras Cl(ℝⁿ) with the positive sign convention
//!
//! Generators satisfy eᵢ² = +1 and eᵢeⱼ = −eⱼeᵢ for i ≠ j. Elements are
//! stored densely over the 2ⁿ subset basis (index = bitmask, bit i−1 set
//! when the generator eᵢ occurs), carrying the natural ℤ₂-grading by |S|
//! mod 2.
//!
//! Two computational routes coexist on purpose: abstract multiplication via
//! the subset sign rule, and a faithful Pauli-style matrix representation of
//! size 2^⌈n/2⌉ used as the oracle backend and as the C*-norm.
//!
//! `functional_calculus` realizes f(x·e₀ + C(v)) explicitly: the element
//! s = x·e₀ + C(v) in Cl(ℝⁿ⁺¹) squares to ρ²·1 with ρ = √(x² + ‖v‖²), so a
//! continuous f acts through its even/odd parts as
//! f_e(ρ)·1 + f_o(ρ)·s/ρ.

use alloc::{vec, vec::Vec};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::Float;

/// Dense coefficient storage is capped at this generator count.
pub const MAX_RANK: usize = 16;

/// Matrix representations are capped at this generator count
/// (2^⌈n/2⌉ = 128 at the cap).
pub const MAX_MATRIX_RANK: usize = 14;

/// Errors of the Clifford layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliffordError {
    /// Operands live over different generator counts.
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch {
        /// Left generator count.
        left: usize,
        /// Right generator count.
        right: usize,
    },
    /// Requested rank exceeds a cap.
    #[error("rank {n} too large (cap {max})")]
    RankTooLarge {
        /// Requested generator count.
        n: usize,
        /// The applicable cap.
        max: usize,
    },
    /// The supplied matrix is not an isometry.
    #[error("not an isometry: ‖UᵀU − I‖ = {defect:.3e}")]
    NotIsometry {
        /// Gram defect of the candidate.
        defect: f64,
    },
    /// Generator index out of range.
    #[error("generator index {index} out of range 1..={n}")]
    BadGenerator {
        /// Offending 1-based index.
        index: usize,
        /// Generator count.
        n: usize,
    },
}

/// An element of Cl(ℝⁿ) as a dense complex coefficient vector over the
/// subset basis.
#[derive(Clone, PartialEq)]
pub struct CliffordElement {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl core::fmt::Debug for CliffordElement {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "CliffordElement(n={}, [", self.n)?;
        let mut first = true;
        for (idx, c) in self.coeffs.iter().enumerate() {
            if c.norm() > 1e-14 {
                if !first {
                    write!(f, " + ")?;
                }
                write!(f, "({:.4}{:+.4}i)e{:b}", c.re, c.im, idx)?;
                first = false;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, "])")
    }
}

/// Sign of e_S·e_T from anticommutation: (−1) to the number of crossings
/// when interleaving the two ascending generator strings. Common generators
/// then cancel with e² = +1 and contribute no further sign.
fn basis_mul_sign(a: usize, b: usize) -> f64 {
    let mut crossings = 0u32;
    let mut bb = b;
    while bb != 0 {
        let t = bb.trailing_zeros() as usize;
        crossings += (a >> (t + 1)).count_ones();
        bb &= bb - 1;
    }
    if crossings % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl CliffordElement {
    /// The zero element of Cl(ℝⁿ).
    pub fn zero(n: usize) -> Self {
        assert!(n <= MAX_RANK, "rank above dense-storage cap");
        Self {
            n,
            coeffs: vec![Complex64::ZERO; 1 << n],
        }
    }

    /// The scalar z·1.
    pub fn scalar(n: usize, z: Complex64) -> Self {
        let mut e = Self::zero(n);
        e.coeffs[0] = z;
        e
    }

    /// The unit 1.
    pub fn one(n: usize) -> Self {
        Self::scalar(n, Complex64::ONE)
    }

    /// The generator eᵢ, 1-based.
    pub fn generator(n: usize, index: usize) -> Result<Self, CliffordError> {
        if index == 0 || index > n {
            return Err(CliffordError::BadGenerator { index, n });
        }
        let mut e = Self::zero(n);
        e.coeffs[1 << (index - 1)] = Complex64::ONE;
        Ok(e)
    }

    /// The Clifford operator C(v): the vector v as a degree-one element.
    pub fn embed_vector(v: &DVector<f64>) -> Self {
        let n = v.len();
        let mut e = Self::zero(n);
        for i in 0..n {
            e.coeffs[1 << i] = Complex64::new(v[i], 0.0);
        }
        e
    }

    /// Generator count n.
    pub fn rank(&self) -> usize {
        self.n
    }

    /// Coefficient of the basis term indexed by the subset bitmask.
    pub fn coeff(&self, subset_mask: usize) -> Complex64 {
        self.coeffs[subset_mask]
    }

    /// Sets the coefficient of a subset bitmask in place.
    pub fn set_coeff(&mut self, subset_mask: usize, z: Complex64) {
        self.coeffs[subset_mask] = z;
    }

    /// Iterates (subset bitmask, coefficient) pairs.
    pub fn terms(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.coeffs.iter().enumerate().map(|(i, &c)| (i, c))
    }

    /// Largest coefficient modulus; a cheap test surrogate, not the C*-norm.
    pub fn coeff_sup(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Projection onto the even (|S| ≡ 0) or odd part of the grading.
    pub fn graded_part(&self, odd: bool) -> Self {
        let mut out = Self::zero(self.n);
        for (mask, c) in self.terms() {
            if (mask.count_ones() % 2 == 1) == odd {
                out.coeffs[mask] = c;
            }
        }
        out
    }

    /// The involution a ↦ a*: coefficients conjugate, basis terms reverse
    /// (sign (−1)^{k(k−1)/2} on degree-k terms). Generators are self-adjoint.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.n);
        for (mask, c) in self.terms() {
            let k = mask.count_ones() as usize;
            let sign = if (k * (k.saturating_sub(1)) / 2) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            out.coeffs[mask] = c.conj() * sign;
        }
        out
    }

    /// Re-indexes generators upward by `offset`, embedding Cl(ℝⁿ) into
    /// Cl(ℝ^{n+offset}) with the first `offset` generator slots left free.
    pub fn shift_generators(&self, offset: usize) -> Result<Self, CliffordError> {
        let n_out = self.n + offset;
        if n_out > MAX_RANK {
            return Err(CliffordError::RankTooLarge {
                n: n_out,
                max: MAX_RANK,
            });
        }
        let mut out = Self::zero(n_out);
        for (mask, c) in self.terms() {
            out.coeffs[mask << offset] = c;
        }
        Ok(out)
    }

    fn assert_same_rank(&self, other: &Self) -> Result<(), CliffordError> {
        if self.n != other.n {
            return Err(CliffordError::RankMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }
}

/// The algebra product under eᵢeⱼ = −eⱼeᵢ (i ≠ j), eᵢ² = +1.
pub fn cl_mul(a: &CliffordElement, b: &CliffordElement) -> Result<CliffordElement, CliffordError> {
    a.assert_same_rank(b)?;
    let mut out = CliffordElement::zero(a.n);
    for (ma, ca) in a.terms() {
        if ca == Complex64::ZERO {
            continue;
        }
        for (mb, cb) in b.terms() {
            if cb == Complex64::ZERO {
                continue;
            }
            let sign = basis_mul_sign(ma, mb);
            out.coeffs[ma ^ mb] += ca * cb * sign;
        }
    }
    Ok(out)
}

impl core::ops::Add for &CliffordElement {
    type Output = CliffordElement;
    fn add(self, rhs: &CliffordElement) -> CliffordElement {
        assert_eq!(self.n, rhs.n, "rank mismatch");
        let mut out = self.clone();
        for (m, c) in rhs.terms() {
            out.coeffs[m] += c;
        }
        out
    }
}

impl core::ops::Sub for &CliffordElement {
    type Output = CliffordElement;
    fn sub(self, rhs: &CliffordElement) -> CliffordElement {
        assert_eq!(self.n, rhs.n, "rank mismatch");
        let mut out = self.clone();
        for (m, c) in rhs.terms() {
            out.coeffs[m] -= c;
        }
        out
    }
}

impl core::ops::Mul<Complex64> for &CliffordElement {
    type Output = CliffordElement;
    fn mul(self, rhs: Complex64) -> CliffordElement {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= rhs;
        }
        out
    }
}

impl core::ops::Neg for &CliffordElement {
    type Output = CliffordElement;
    fn neg(self) -> CliffordElement {
        self * Complex64::new(-1.0, 0.0)
    }
}

/// The unique unital algebra morphism extending an isometry U between the
/// underlying Euclidean spaces: e_{s₁}···e_{s_k} ↦ U(e_{s₁})···U(e_{s_k}).
/// Preserves grading and the involution.
pub struct IsometryExtension {
    source_n: usize,
    target_n: usize,
    generator_images: Vec<CliffordElement>,
}

impl IsometryExtension {
    /// Source generator count.
    pub fn source_rank(&self) -> usize {
        self.source_n
    }

    /// Target generator count.
    pub fn target_rank(&self) -> usize {
        self.target_n
    }

    /// Applies the morphism.
    pub fn apply(&self, a: &CliffordElement) -> Result<CliffordElement, CliffordError> {
        if a.rank() != self.source_n {
            return Err(CliffordError::RankMismatch {
                left: a.rank(),
                right: self.source_n,
            });
        }
        let mut out = CliffordElement::zero(self.target_n);
        for (mask, c) in a.terms() {
            if c == Complex64::ZERO {
                continue;
            }
            let mut product = CliffordElement::one(self.target_n);
            let mut bits = mask;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                product = cl_mul(&product, &self.generator_images[i])?;
                bits &= bits - 1;
            }
            out = &out + &(&product * c);
        }
        Ok(out)
    }
}

/// Builds the algebra morphism extending the isometry `u` (target_dim ×
/// source_dim, with uᵀu = I to 1e-10).
pub fn extend_isometry(u: &DMatrix<f64>) -> Result<IsometryExtension, CliffordError> {
    let (target_n, source_n) = (u.nrows(), u.ncols());
    if source_n > MAX_RANK || target_n > MAX_RANK {
        return Err(CliffordError::RankTooLarge {
            n: source_n.max(target_n),
            max: MAX_RANK,
        });
    }
    let gram = u.transpose() * u;
    let defect = (&gram - DMatrix::<f64>::identity(source_n, source_n)).norm();
    if defect > 1e-10 {
        return Err(CliffordError::NotIsometry { defect });
    }
    let generator_images = (0..source_n)
        .map(|j| CliffordElement::embed_vector(&u.column(j).clone_owned()))
        .collect();
    Ok(IsometryExtension {
        source_n,
        target_n,
        generator_images,
    })
}

/// A point (x, v) of the spectral model ℝ × E: the scalar coordinate of the
/// multiplier X and the vector coordinate of the Clifford operator C.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPoint {
    /// Coordinate of the multiplier X on C₀(ℝ).
    pub x: f64,
    /// Vector argument of the Clifford operator.
    pub v: DVector<f64>,
}

impl SpectralPoint {
    /// Builds a point.
    pub fn new(x: f64, v: DVector<f64>) -> Self {
        Self { x, v }
    }

    /// ρ = √(x² + ‖v‖²), the spectral radius of x·e₀ + C(v).
    pub fn rho(&self) -> f64 {
        Float::sqrt(self.x * self.x + self.v.norm_squared())
    }
}

/// Evaluates f(x·e₀ + C(v)) in Cl(ℝⁿ⁺¹), with the adjoined generator e₀ at
/// index 0 for the ℝ factor.
///
/// The element s = x·e₀ + C(v) squares to ρ²·1 with ρ = √(x² + ‖v‖²), so a
/// continuous f acts through its even/odd parts on the two-point spectrum
/// {±ρ}: f_e(ρ)·1 + f_o(ρ)·s/ρ, and f(0)·1 at ρ = 0.
pub fn functional_calculus<F>(f: F, p: &SpectralPoint) -> CliffordElement
where
    F: Fn(f64) -> Complex64,
{
    let n_out = p.v.len() + 1;
    let rho = p.rho();
    if rho == 0.0 {
        return CliffordElement::scalar(n_out, f(0.0));
    }
    let fp = f(rho);
    let fm = f(-rho);
    let even = (fp + fm) * 0.5;
    let odd_over_rho = (fp - fm) * 0.5 / rho;
    let mut out = CliffordElement::scalar(n_out, even);
    out.set_coeff(1, odd_over_rho * p.x);
    for i in 0..p.v.len() {
        out.set_coeff(1 << (i + 1), odd_over_rho * p.v[i]);
    }
    out
}

fn pauli() -> [DMatrix<Complex64>; 3] {
    let z = |re: f64, im: f64| Complex64::new(re, im);
    [
        DMatrix::from_row_slice(2, 2, &[z(0., 0.), z(1., 0.), z(1., 0.), z(0., 0.)]),
        DMatrix::from_row_slice(2, 2, &[z(0., 0.), z(0., -1.), z(0., 1.), z(0., 0.)]),
        DMatrix::from_row_slice(2, 2, &[z(1., 0.), z(0., 0.), z(0., 0.), z(-1., 0.)]),
    ]
}

/// The matrix images of the n generators in the spinor representation:
/// e_{2k−1} = Z^{⊗(k−1)} ⊗ X ⊗ I, e_{2k} = Z^{⊗(k−1)} ⊗ Y ⊗ I, matrices of
/// size 2^⌈n/2⌉. Hermitian involutions that pairwise anticommute.
fn generator_matrices(n: usize) -> Vec<DMatrix<Complex64>> {
    let m = n.div_ceil(2);
    let dim = 1usize << m;
    let [x, y, z] = pauli();
    let eye2 = DMatrix::<Complex64>::identity(2, 2);
    let mut gens = Vec::with_capacity(n);
    for idx in 0..n {
        let k = idx / 2; // slot index
        let mid = if idx % 2 == 0 { &x } else { &y };
        let mut acc = DMatrix::<Complex64>::identity(1, 1);
        for slot in 0..m {
            let factor = if slot < k {
                &z
            } else if slot == k {
                mid
            } else {
                &eye2
            };
            acc = acc.kronecker(factor);
        }
        debug_assert_eq!(acc.nrows(), dim);
        gens.push(acc);
    }
    gens
}

/// A faithful unital *-representation of Cl(ℝⁿ) on ℂ^(2^⌈n/2⌉).
///
/// Multiplicative and involution-preserving; the operator norm of the image
/// realizes the (unique) C*-norm of the algebra.
pub fn matrix_rep(a: &CliffordElement) -> Result<DMatrix<Complex64>, CliffordError> {
    let n = a.rank();
    if n > MAX_MATRIX_RANK {
        return Err(CliffordError::RankTooLarge {
            n,
            max: MAX_MATRIX_RANK,
        });
    }
    let gens = generator_matrices(n);
    let dim = 1usize << n.div_ceil(2);
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    for (mask, c) in a.terms() {
        if c == Complex64::ZERO {
            continue;
        }
        let mut term = DMatrix::<Complex64>::identity(dim, dim);
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            term *= &gens[i];
            bits &= bits - 1;
        }
        out += term * c;
    }
    Ok(out)
}

/// The C*-norm of `a`: the operator norm of its spinor representation.
pub fn cl_norm(a: &CliffordElement) -> Result<f64, CliffordError> {
    let m = matrix_rep(a)?;
    Ok(m.svd(false, false).singular_values.max())
}
