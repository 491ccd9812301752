//! JSON and CSV schemas for the library objects.
//!
//! Matrices and frames travel as `{"rows": n, "cols": m, "data": [row-major]}`;
//! Clifford elements as `{"n": n, "terms": [{"subset": [i..], "re": x, "im": y}]}`
//! with 1-based ascending generator subsets; Fourier states as
//! `{"period": l, "order": k, "coeffs": [{"k": i, "re": x, "im": y}]}`.
//! Certificates and reports embed the tool version, the config hash and the
//! seed so identical runs emit byte-identical documents.

use bottdeg_core::clifford::CliffordElement;
use bottdeg_core::degree::{DegreeCertificate, DegreeError, DegreeEvidence, DegreeMethod};
use bottdeg_core::approx::fourier::FourierState;
use nalgebra::DMatrix;
use bottdeg_core::Complex64;
use serde::{Deserialize, Serialize};

/// Dense real matrix payload.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    /// Row count.
    pub rows: usize,
    /// Column count.
    pub cols: usize,
    /// Row-major entries.
    pub data: Vec<f64>,
}

impl MatrixJson {
    /// Converts from a dense matrix.
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(m[(i, j)]);
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    /// Converts into a dense matrix.
    pub fn to_matrix(&self) -> Result<DMatrix<f64>, String> {
        if self.data.len() != self.rows * self.cols {
            return Err(format!(
                "matrix data length {} does not match {}x{}",
                self.data.len(),
                self.rows,
                self.cols
            ));
        }
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &self.data))
    }
}

/// One Clifford basis term.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CliffordTermJson {
    /// Ascending 1-based generator indices.
    pub subset: Vec<usize>,
    /// Real part.
    pub re: f64,
    /// Imaginary part.
    pub im: f64,
}

/// Clifford element payload.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CliffordElementJson {
    /// Generator count.
    pub n: usize,
    /// Nonzero terms in ascending subset order.
    pub terms: Vec<CliffordTermJson>,
}

impl CliffordElementJson {
    /// Converts from an element, dropping zero terms.
    pub fn from_element(e: &CliffordElement) -> Self {
        let mut terms = Vec::new();
        for (mask, c) in e.terms() {
            if c == Complex64::ZERO {
                continue;
            }
            let mut subset = Vec::new();
            let mut bits = mask;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                subset.push(i + 1);
                bits &= bits - 1;
            }
            terms.push(CliffordTermJson {
                subset,
                re: c.re,
                im: c.im,
            });
        }
        Self { n: e.rank(), terms }
    }

    /// Converts into an element.
    pub fn to_element(&self) -> Result<CliffordElement, String> {
        let mut e = CliffordElement::zero(self.n);
        for term in &self.terms {
            let mut mask = 0usize;
            let mut last = 0usize;
            for &i in &term.subset {
                if i == 0 || i > self.n {
                    return Err(format!("generator index {i} out of range 1..={}", self.n));
                }
                if i <= last {
                    return Err("subset indices must be ascending".into());
                }
                last = i;
                mask |= 1 << (i - 1);
            }
            e.set_coeff(mask, Complex64::new(term.re, term.im));
        }
        Ok(e)
    }
}

/// One Fourier coefficient.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FourierCoeffJson {
    /// Frequency.
    pub k: i64,
    /// Real part.
    pub re: f64,
    /// Imaginary part.
    pub im: f64,
}

/// Fourier state payload.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FourierStateJson {
    /// Circle period.
    pub period: f64,
    /// Sobolev order of the norm.
    pub order: i32,
    /// Nonzero coefficients by frequency.
    pub coeffs: Vec<FourierCoeffJson>,
}

impl FourierStateJson {
    /// Converts from a state, dropping zero coefficients.
    pub fn from_state(s: &FourierState) -> Self {
        let mut coeffs = Vec::new();
        for k in -(s.max_freq() as i64)..=(s.max_freq() as i64) {
            let c = s.coeff(k);
            if c != Complex64::ZERO {
                coeffs.push(FourierCoeffJson {
                    k,
                    re: c.re,
                    im: c.im,
                });
            }
        }
        Self {
            period: s.period(),
            order: s.order(),
            coeffs,
        }
    }

    /// Converts into a state.
    pub fn to_state(&self) -> FourierState {
        let max_freq = self
            .coeffs
            .iter()
            .map(|c| c.k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
            .max(1);
        let mut s = FourierState::zeros(self.period, self.order, max_freq);
        for c in &self.coeffs {
            s.set_coeff(c.k, Complex64::new(c.re, c.im));
        }
        s
    }
}

/// A root entry of a root-count certificate.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RootJson {
    /// Root location.
    pub x: Vec<f64>,
    /// sign(det DF).
    pub sign: i8,
    /// ‖F(x) − y‖ at the root.
    pub residual: f64,
    /// det DF at the root.
    pub det: f64,
}

/// Method-specific evidence payload.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvidenceJson {
    /// Root counting.
    RootCount {
        /// Verified roots.
        roots: Vec<RootJson>,
        /// Sampled boundary margin.
        boundary_margin: f64,
        /// Seed lattice density.
        seeds_per_axis: usize,
        /// Seeds inside the ball.
        seeds_used: usize,
        /// Sard perturbation of the target, if any.
        #[serde(skip_serializing_if = "Option::is_none")]
        target_perturbation: Option<Vec<f64>>,
    },
    /// Winding accumulation.
    Winding {
        /// Boundary evaluations.
        boundary_samples: usize,
        /// Accumulated turn (radians).
        total_turn: f64,
        /// Sampled boundary margin.
        boundary_margin: f64,
    },
    /// Homotopy transfer.
    Homotopy {
        /// Minimal margin over the (t, boundary) grid.
        margin: f64,
        /// t at which the margin was attained.
        margin_t: f64,
        /// Boundary point at which the margin was attained.
        margin_x: Vec<f64>,
        /// t-grid size.
        t_samples: usize,
        /// Boundary samples per t.
        boundary_samples: usize,
        /// det of the linear reference.
        reference_det: f64,
    },
}

/// A degree certificate document.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CertificateJson {
    /// Always "ok" for produced certificates.
    pub status: String,
    /// Engine name: root_count | winding | homotopy_linear.
    pub method: String,
    /// The degree.
    pub degree: i64,
    /// Ball radius.
    pub ball_radius: f64,
    /// Target point.
    pub target: Vec<f64>,
    /// Evidence payload.
    pub evidence: EvidenceJson,
    /// Tool version.
    pub version: String,
    /// Hash of the canonical configuration.
    pub config_hash: String,
    /// RNG seed.
    pub seed: u64,
}

/// A rejection document (for inadmissible homotopies and boundary hits).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RejectionJson {
    /// Always "rejected".
    pub status: String,
    /// Error kind, snake_case.
    pub kind: String,
    /// Human-readable description.
    pub detail: String,
    /// Homotopy parameter of the offending sample, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Offending location, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<Vec<f64>>,
    /// Achieved value norm, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_norm: Option<f64>,
    /// Tool version.
    pub version: String,
    /// Hash of the canonical configuration.
    pub config_hash: String,
    /// RNG seed.
    pub seed: u64,
}

/// Renders a produced certificate.
pub fn certificate_json(
    cert: &DegreeCertificate,
    config_hash: &str,
    seed: u64,
) -> CertificateJson {
    let method = match cert.method {
        DegreeMethod::RootCount => "root_count",
        DegreeMethod::Winding2D => "winding",
        DegreeMethod::HomotopyLinear => "homotopy_linear",
    };
    let evidence = match &cert.evidence {
        DegreeEvidence::RootCount {
            roots,
            boundary_margin,
            seeds_per_axis,
            seeds_used,
            target_perturbation,
        } => EvidenceJson::RootCount {
            roots: roots
                .iter()
                .map(|r| RootJson {
                    x: r.location.iter().cloned().collect(),
                    sign: r.sign,
                    residual: r.residual,
                    det: r.jac_det,
                })
                .collect(),
            boundary_margin: *boundary_margin,
            seeds_per_axis: *seeds_per_axis,
            seeds_used: *seeds_used,
            target_perturbation: target_perturbation
                .as_ref()
                .map(|p| p.iter().cloned().collect()),
        },
        DegreeEvidence::Winding {
            boundary_samples,
            total_turn,
            boundary_margin,
        } => EvidenceJson::Winding {
            boundary_samples: *boundary_samples,
            total_turn: *total_turn,
            boundary_margin: *boundary_margin,
        },
        DegreeEvidence::Homotopy {
            margin,
            margin_at,
            t_samples,
            boundary_samples,
            reference_det,
        } => EvidenceJson::Homotopy {
            margin: *margin,
            margin_t: margin_at.0,
            margin_x: margin_at.1.iter().cloned().collect(),
            t_samples: *t_samples,
            boundary_samples: *boundary_samples,
            reference_det: *reference_det,
        },
    };
    CertificateJson {
        status: "ok".into(),
        method: method.into(),
        degree: cert.degree,
        ball_radius: cert.ball_radius,
        target: cert.target.iter().cloned().collect(),
        evidence,
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: config_hash.into(),
        seed,
    }
}

/// Renders a degree-engine rejection.
pub fn rejection_json(err: &DegreeError, config_hash: &str, seed: u64) -> RejectionJson {
    let (kind, t, location, value_norm) = match err {
        DegreeError::BoundaryHit {
            t,
            location,
            value_norm,
        } => (
            "boundary_hit",
            *t,
            Some(location.clone()),
            Some(*value_norm),
        ),
        DegreeError::IrregularRoot { location, jac_det } => {
            ("irregular_root", None, Some(location.clone()), Some(*jac_det))
        }
        DegreeError::SeedExhaustion { location } => {
            ("seed_exhaustion", None, Some(location.clone()), None)
        }
        DegreeError::RefinementLimit { .. } => ("refinement_limit", None, None, None),
        DegreeError::NonIntegerWinding { turn } => ("non_integer_winding", None, None, Some(*turn)),
        DegreeError::DimensionLimit { .. } => ("dimension_limit", None, None, None),
        DegreeError::ReferenceMismatch { deviation } => {
            ("reference_mismatch", None, None, Some(*deviation))
        }
        DegreeError::Singular(_) => ("singular_map", None, None, None),
    };
    RejectionJson {
        status: "rejected".into(),
        kind: kind.into(),
        detail: err.to_string(),
        t,
        location,
        value_norm,
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: config_hash.into(),
        seed,
    }
}
