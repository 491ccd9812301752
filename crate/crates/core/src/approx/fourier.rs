//! Fourier states on the circle ℝ/lℤ with Sobolev weights
//!
//! A [`FourierState`] holds complex coefficients a_k for |k| ≤ K of
//! a(s) = Σ a_k e^{2πiks/l}, with the reality constraint a_{−k} = conj(a_k)
//! for real-valued functions. The W^{k,2} norm is fixed concretely as
//!
//! ```text
//! ‖a‖² = Σ_k (1 + (2πk/l)²)^order · |a_k|²
//! ```
//!
//! Pointwise products are exact coefficient convolutions; the pointwise
//! cube of a K-bandlimited state is 3K-bandlimited, which is what makes the
//! tail bounds of the cubic-shift models exactly computable.

use alloc::{vec, vec::Vec};
use nalgebra::DVector;
use num_complex::Complex64;
use num_traits::Float;
use rand_chacha::ChaCha8Rng;

use super::ApproxError;

/// A trigonometric polynomial on ℝ/period·ℤ with Sobolev bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierState {
    period: f64,
    order: i32,
    max_freq: usize,
    /// coefficient of frequency k at index k + max_freq
    coeffs: Vec<Complex64>,
}

impl FourierState {
    /// The zero state with coefficients for |k| ≤ `max_freq`.
    pub fn zeros(period: f64, order: i32, max_freq: usize) -> Self {
        Self {
            period,
            order,
            max_freq,
            coeffs: vec![Complex64::ZERO; 2 * max_freq + 1],
        }
    }

    /// amplitude·cos(2πk s/period).
    pub fn harmonic_cos(period: f64, order: i32, k: usize, amplitude: f64) -> Self {
        let mut s = Self::zeros(period, order, k.max(1));
        if k == 0 {
            s.set_coeff(0, Complex64::new(amplitude, 0.0));
        } else {
            s.set_coeff(k as i64, Complex64::new(amplitude / 2.0, 0.0));
            s.set_coeff(-(k as i64), Complex64::new(amplitude / 2.0, 0.0));
        }
        s
    }

    /// amplitude·sin(2πk s/period).
    pub fn harmonic_sin(period: f64, order: i32, k: usize, amplitude: f64) -> Self {
        let mut s = Self::zeros(period, order, k.max(1));
        if k > 0 {
            s.set_coeff(k as i64, Complex64::new(0.0, -amplitude / 2.0));
            s.set_coeff(-(k as i64), Complex64::new(0.0, amplitude / 2.0));
        }
        s
    }

    /// The circle period l.
    pub fn period(&self) -> f64 {
        self.period
    }

    /// The Sobolev order k of the norm.
    pub fn order(&self) -> i32 {
        self.order
    }

    /// Largest stored frequency K.
    pub fn max_freq(&self) -> usize {
        self.max_freq
    }

    /// Coefficient a_k (zero outside the stored band).
    pub fn coeff(&self, k: i64) -> Complex64 {
        let kk = k + self.max_freq as i64;
        if kk < 0 || kk >= self.coeffs.len() as i64 {
            Complex64::ZERO
        } else {
            self.coeffs[kk as usize]
        }
    }

    /// Sets a_k; k must be within the stored band.
    pub fn set_coeff(&mut self, k: i64, z: Complex64) {
        let idx = (k + self.max_freq as i64) as usize;
        self.coeffs[idx] = z;
    }

    /// The Sobolev weight (1 + (2πk/l)²)^order.
    pub fn weight(&self, k: i64) -> f64 {
        let w = 2.0 * core::f64::consts::PI * (k as f64) / self.period;
        Float::powi(1.0 + w * w, self.order)
    }

    /// The W^{order,2} norm with the module's normalization.
    pub fn w_norm(&self) -> f64 {
        let mut acc = 0.0;
        for k in -(self.max_freq as i64)..=(self.max_freq as i64) {
            acc += self.weight(k) * self.coeff(k).norm_sqr();
        }
        Float::sqrt(acc)
    }

    /// Whether a_{−k} = conj(a_k) to `tol` (real-valued function).
    pub fn is_real(&self, tol: f64) -> bool {
        (0..=self.max_freq as i64)
            .all(|k| (self.coeff(-k) - self.coeff(k).conj()).norm() <= tol)
    }

    /// Pointwise evaluation a(s).
    pub fn eval(&self, s: f64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for k in -(self.max_freq as i64)..=(self.max_freq as i64) {
            let phase = 2.0 * core::f64::consts::PI * (k as f64) * s / self.period;
            acc += self.coeff(k) * Complex64::new(Float::cos(phase), Float::sin(phase));
        }
        acc
    }

    /// The translate u(· + by): coefficients pick up the phase e^{2πik·by/l}.
    /// An exact isometry of every W^{k,2} norm; translating by the period
    /// returns the state.
    pub fn translate(&self, by: f64) -> Self {
        let mut out = self.clone();
        for k in -(self.max_freq as i64)..=(self.max_freq as i64) {
            let phase = 2.0 * core::f64::consts::PI * (k as f64) * by / self.period;
            out.set_coeff(
                k,
                self.coeff(k) * Complex64::new(Float::cos(phase), Float::sin(phase)),
            );
        }
        out
    }

    /// Exact pointwise product by coefficient convolution; the output band
    /// is the sum of the operand bands.
    pub fn mul(&self, other: &Self) -> Self {
        let k_out = self.max_freq + other.max_freq;
        let mut out = Self::zeros(self.period, self.order, k_out);
        for ka in -(self.max_freq as i64)..=(self.max_freq as i64) {
            let ca = self.coeff(ka);
            if ca == Complex64::ZERO {
                continue;
            }
            for kb in -(other.max_freq as i64)..=(other.max_freq as i64) {
                let cb = other.coeff(kb);
                if cb == Complex64::ZERO {
                    continue;
                }
                let idx = (ka + kb + k_out as i64) as usize;
                out.coeffs[idx] += ca * cb;
            }
        }
        out
    }

    /// Restriction to |k| ≤ `k_max` (hard truncation, the orthogonal
    /// projection in every Sobolev norm).
    pub fn truncate(&self, k_max: usize) -> Self {
        let mut out = Self::zeros(self.period, self.order, k_max);
        let reach = k_max.min(self.max_freq) as i64;
        for k in -reach..=reach {
            out.set_coeff(k, self.coeff(k));
        }
        out
    }

    /// W-norm of the tail beyond frequency `beyond`.
    pub fn tail_w_norm(&self, beyond: usize) -> f64 {
        let mut acc = 0.0;
        for k in -(self.max_freq as i64)..=(self.max_freq as i64) {
            if k.unsigned_abs() as usize > beyond {
                acc += self.weight(k) * self.coeff(k).norm_sqr();
            }
        }
        Float::sqrt(acc)
    }

    /// A random real-valued state drawn uniformly from the W-norm ball of
    /// the given radius (gaussian direction in the Sobolev-orthonormal
    /// coordinates, radius by the usual volume rule).
    pub fn random_real_in_ball(
        period: f64,
        order: i32,
        max_freq: usize,
        radius: f64,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let chart = SobolevChart::new(period, order, max_freq);
        let coords = crate::bott::sample_unit_ball(chart.dim(), rng) * radius;
        chart.to_state(&coords)
    }
}

/// Fourier coefficients of the pointwise cube a³, exact: the output carries
/// the full 3K band. `BandwidthOverflow` cannot occur on this path; use
/// [`cubic_truncated`] when a hard output band is wanted.
pub fn cubic_pointwise(a: &FourierState) -> FourierState {
    a.mul(a).mul(a)
}

/// The cube truncated to |k| ≤ `k_out`; errors when exactness would need a
/// larger band than requested on a nonzero tail.
pub fn cubic_truncated(a: &FourierState, k_out: usize) -> Result<FourierState, ApproxError> {
    let cube = cubic_pointwise(a);
    if k_out < 3 * a.max_freq() && cube.tail_w_norm(k_out) > 0.0 {
        return Err(ApproxError::BandwidthOverflow {
            needed: 3 * a.max_freq(),
            available: k_out,
        });
    }
    Ok(cube.truncate(k_out))
}

/// The exact W-norm of the tail of a³ beyond frequency n — the quantity the
/// compactness tail estimate bounds.
pub fn sobolev_tail_bound(a: &FourierState, n: usize) -> f64 {
    cubic_pointwise(a).tail_w_norm(n)
}

/// Result of the empirical tail-frequency selection.
#[derive(Debug, Clone, PartialEq)]
pub struct TailSelection {
    /// The smallest frequency n with sampled tail bound < ε.
    pub n: usize,
    /// The worst sampled tail at that n.
    pub worst_tail: f64,
    /// Samples examined.
    pub samples: usize,
}

/// Empirically selects n(r, ε): the smallest n such that the W-tail of a³
/// beyond n stays below ε over a sample of the radius-r ball.
pub fn select_tail_frequency(
    period: f64,
    order: i32,
    max_freq: usize,
    radius: f64,
    eps: f64,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> TailSelection {
    let states: Vec<FourierState> = (0..samples)
        .map(|_| FourierState::random_real_in_ball(period, order, max_freq, radius, rng))
        .collect();
    let cubes: Vec<FourierState> = states.iter().map(cubic_pointwise).collect();
    for n in 0..=(3 * max_freq) {
        let worst = cubes
            .iter()
            .map(|c| c.tail_w_norm(n))
            .fold(0.0f64, f64::max);
        if worst < eps {
            return TailSelection {
                n,
                worst_tail: worst,
                samples,
            };
        }
    }
    TailSelection {
        n: 3 * max_freq,
        worst_tail: 0.0,
        samples,
    }
}

/// Isometric chart between ℝ^{2K+1} and real-valued states: coordinate 0 is
/// the constant mode, coordinates (2k−1, 2k) the cos/sin modes at frequency
/// k, each normalized to unit W-norm. Euclidean balls in coordinates are
/// exactly W-norm balls of states.
#[derive(Debug, Clone, PartialEq)]
pub struct SobolevChart {
    period: f64,
    order: i32,
    max_freq: usize,
}

impl SobolevChart {
    /// Builds the chart.
    pub fn new(period: f64, order: i32, max_freq: usize) -> Self {
        Self {
            period,
            order,
            max_freq,
        }
    }

    /// Real dimension 2K+1.
    pub fn dim(&self) -> usize {
        2 * self.max_freq + 1
    }

    /// Largest stored frequency.
    pub fn max_freq(&self) -> usize {
        self.max_freq
    }

    fn weight(&self, k: usize) -> f64 {
        let w = 2.0 * core::f64::consts::PI * (k as f64) / self.period;
        Float::powi(1.0 + w * w, self.order)
    }

    /// Coordinates → state.
    pub fn to_state(&self, coords: &DVector<f64>) -> FourierState {
        assert_eq!(coords.len(), self.dim());
        let mut out = FourierState::zeros(self.period, self.order, self.max_freq.max(1));
        out.set_coeff(0, Complex64::new(coords[0], 0.0));
        for k in 1..=self.max_freq {
            let scale = Float::sqrt(2.0 / self.weight(k)) / 2.0;
            let (c, s) = (coords[2 * k - 1], coords[2 * k]);
            out.set_coeff(k as i64, Complex64::new(c * scale, -s * scale));
            out.set_coeff(-(k as i64), Complex64::new(c * scale, s * scale));
        }
        out
    }

    /// State → coordinates (truncating any band beyond the chart).
    pub fn to_coords(&self, state: &FourierState) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        out[0] = state.coeff(0).re;
        for k in 1..=self.max_freq {
            let scale = Float::sqrt(2.0 / self.weight(k)) / 2.0;
            let a = state.coeff(k as i64);
            out[2 * k - 1] = a.re / scale;
            out[2 * k] = -a.im / scale;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn chart_roundtrip_is_isometric() {
        let chart = SobolevChart::new(1.0, 1, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let coords = DVector::from_fn(chart.dim(), |_, _| rng.gen_range(-2.0..2.0));
            let state = chart.to_state(&coords);
            assert!(state.is_real(1e-14));
            assert!((state.w_norm() - coords.norm()).abs() < 1e-12);
            let back = chart.to_coords(&state);
            assert!((back - coords).norm() < 1e-12);
        }
    }

    #[test]
    fn harmonics_evaluate_correctly() {
        let c = FourierState::harmonic_cos(1.0, 1, 2, 1.5);
        let s = FourierState::harmonic_sin(1.0, 1, 3, 0.7);
        for i in 0..8 {
            let t = i as f64 / 8.0;
            let expected_c = 1.5 * (4.0 * core::f64::consts::PI * t).cos();
            let expected_s = 0.7 * (6.0 * core::f64::consts::PI * t).sin();
            assert!((c.eval(t).re - expected_c).abs() < 1e-12);
            assert!(c.eval(t).im.abs() < 1e-12);
            assert!((s.eval(t).re - expected_s).abs() < 1e-12);
        }
    }
}
