//! Finite sections of Bergman Toeplitz and defect operators.
//!
//! Matrices are written in the orthonormal basis `e_k = sqrt(k+1) z^k` of `A²`,
//! with `A_{j,k} = ⟨Op e_k, e_j⟩`. Conversion from plain Taylor coefficients
//! happens only at the [`PolynomialVector`] boundary.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, max_abs_entry, max_asymmetry, min_hermitian_eigenvalue, CMatrix, CVector};
use crate::moments::{moment_block, WeightTag};
use crate::symbols::{PolynomialVector, SymbolSpec};

/// Hermitian tolerance accepted on input sections.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues below `-NEGATIVE_SPECTRUM_TOL` indicate a construction error.
pub const NEGATIVE_SPECTRUM_TOL: f64 = 1e-8;
/// Default pseudo-inverse cutoff, relative to the largest eigenvalue.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionTag {
    ToeplitzB,
    ToeplitzBbar,
    DefectB,
    DefectBbar,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSection {
    tag: SectionTag,
    matrix: CMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSectionJson {
    pub tag: SectionTag,
    pub size: usize,
    pub entries: Vec<[f64; 2]>,
}

impl OperatorSection {
    pub fn custom(matrix: CMatrix) -> Self {
        assert!(matrix.is_square(), "operator sections are square");
        Self {
            tag: SectionTag::Custom,
            matrix,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::custom(CMatrix::identity(n, n))
    }

    pub fn tag(&self) -> SectionTag {
        self.tag
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.matrix[(j, k)]
    }

    /// `self - other` as a custom section.
    pub fn difference(&self, other: &OperatorSection) -> OperatorSection {
        Self::custom(&self.matrix - &other.matrix)
    }

    pub fn to_json(&self) -> OperatorSectionJson {
        let n = self.size();
        OperatorSectionJson {
            tag: self.tag,
            size: n,
            entries: (0..n)
                .flat_map(|j| (0..n).map(move |k| (j, k)))
                .map(|(j, k)| [self.matrix[(j, k)].re, self.matrix[(j, k)].im])
                .collect(),
        }
    }
}

fn analytic_coeffs(b: &SymbolSpec, op: &'static str) -> Result<Vec<Complex64>> {
    b.taylor_coeffs().ok_or(Error::UnsupportedVariant {
        op,
        variant: b.variant_name(),
    })
}

/// Section of `T_b` for analytic `b`, i.e. multiplication by `b`:
/// `A_{j,k} = sqrt((k+1)/(j+1)) b_{j-k}` for `0 ≤ j - k ≤ d`.
pub fn toeplitz_analytic(b: &SymbolSpec, n: usize) -> Result<OperatorSection> {
    let coeffs = analytic_coeffs(b, "toeplitz_analytic")?;
    let matrix = CMatrix::from_fn(n, n, |j, k| match j.checked_sub(k) {
        Some(m) if m < coeffs.len() => coeffs[m] * (((k + 1) as f64) / ((j + 1) as f64)).sqrt(),
        _ => Complex64::new(0.0, 0.0),
    });
    Ok(OperatorSection {
        tag: SectionTag::ToeplitzB,
        matrix,
    })
}

/// Section of `T_b̄ = T_b*`, the conjugate transpose of [`toeplitz_analytic`].
pub fn toeplitz_coanalytic(b: &SymbolSpec, n: usize) -> Result<OperatorSection> {
    let t = toeplitz_analytic(b, n)?;
    Ok(OperatorSection {
        tag: SectionTag::ToeplitzBbar,
        matrix: t.matrix.adjoint(),
    })
}

/// Compression of `I - T_b̄ T_b`: `δ_{jk} - ⟨b e_k, b e_j⟩`, taken from the
/// `1 - |b|²` moments so no truncation error enters.
pub fn defect_bbar(b: &SymbolSpec, n: usize) -> Result<OperatorSection> {
    let w = moment_block(b, n, n, WeightTag::OneMinusModBSquared)?;
    let mut matrix = CMatrix::from_fn(n, n, |j, k| w[(j, k)] * (((j + 1) * (k + 1)) as f64).sqrt());
    // diagonal is real by construction; drop rounding noise
    for k in 0..n {
        matrix[(k, k)].im = 0.0;
    }
    Ok(OperatorSection {
        tag: SectionTag::DefectBbar,
        matrix,
    })
}

/// Compression of `I - T_b T_b̄`. `T_b̄` never raises degree, so the product of
/// the two `N × N` sections is already exact.
pub fn defect_b(b: &SymbolSpec, n: usize) -> Result<OperatorSection> {
    let t = analytic_coeffs(b, "defect_b").and_then(|_| toeplitz_analytic(b, n))?;
    let mut matrix = CMatrix::identity(n, n) - &t.matrix * t.matrix.adjoint();
    for k in 0..n {
        matrix[(k, k)].im = 0.0;
    }
    Ok(OperatorSection {
        tag: SectionTag::DefectB,
        matrix,
    })
}

/// Spectral factorization `Q = V Λ V*` of a PSD section, eigenvalues
/// descending and clamped at zero.
#[derive(Debug, Clone)]
pub struct PsdFactorization {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
    tolerance: f64,
}

/// `‖f‖` in the range space `M(Q^{1/2})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeNormResult {
    pub norm: f64,
    /// Distance from the input to the retained eigenspaces.
    pub residual: f64,
    pub in_range: bool,
}

/// Coordinates of `f` against `e_k`: `f_k / sqrt(k+1)`.
pub fn normalized_coordinates(f: &PolynomialVector, n: usize) -> Result<CVector> {
    if f.len() > n {
        return Err(Error::DimensionMismatch {
            module: "operators",
            detail: format!("polynomial of degree {} does not fit a section of size {n}", f.len() - 1),
        });
    }
    Ok(CVector::from_fn(n, |k, _| f.coeff(k) / ((k + 1) as f64).sqrt()))
}

impl PsdFactorization {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn size(&self) -> usize {
        self.eigenvalues.len()
    }

    fn with_diagonal(&self, map: impl Fn(f64) -> f64) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (c, &lambda) in self.eigenvalues.iter().enumerate() {
            let s = map(lambda);
            scaled.column_mut(c).scale_mut(s);
        }
        scaled * v.adjoint()
    }

    /// `V Λ^{1/2} V*`.
    pub fn sqrt_matrix(&self) -> CMatrix {
        self.with_diagonal(f64::sqrt)
    }

    /// `V Λ V*`.
    pub fn reconstruct(&self) -> CMatrix {
        self.with_diagonal(|x| x)
    }

    /// Range-space norm of a coordinate vector (basis `e_k`), without the
    /// in-range check.
    pub fn range_norm_coords(&self, x: &CVector) -> RangeNormResult {
        let cutoff = self.tolerance * self.eigenvalues.first().copied().unwrap_or(0.0);
        let mut norm_sq = 0.0;
        let mut projected = CVector::zeros(x.len());
        for (i, &lambda) in self.eigenvalues.iter().enumerate() {
            if !(lambda > cutoff) || lambda <= 0.0 {
                continue;
            }
            let u = self.eigenvectors.column(i);
            let c = u.dotc(x);
            norm_sq += c.norm_sqr() / lambda;
            projected.axpy(c, &u, Complex64::new(1.0, 0.0));
        }
        let residual = (x - projected).norm();
        RangeNormResult {
            norm: norm_sq.sqrt(),
            residual,
            in_range: residual <= self.tolerance * x.norm(),
        }
    }

    /// `‖f‖_{M(Q^{1/2})} = (f* Q⁺ f)^{1/2}` for a polynomial of degree `< N`.
    pub fn range_norm(&self, f: &PolynomialVector) -> Result<RangeNormResult> {
        let x = normalized_coordinates(f, self.size())?;
        let result = self.range_norm_coords(&x);
        if !result.in_range {
            return Err(Error::NotInRange {
                residual: result.residual,
                threshold: self.tolerance * x.norm(),
            });
        }
        Ok(result)
    }
}

/// Eigendecomposition of a Hermitian PSD section with clamped spectrum.
pub fn psd_sqrt(q: &OperatorSection, tolerance: f64) -> Result<PsdFactorization> {
    let asymmetry = max_asymmetry(&q.matrix);
    if asymmetry > HERMITIAN_TOL {
        return Err(Error::NotHermitian { asymmetry });
    }
    let (mut eigenvalues, eigenvectors) = hermitian_eigen(&q.matrix);
    if let Some(&min) = eigenvalues.last() {
        if min < -NEGATIVE_SPECTRUM_TOL {
            return Err(Error::NegativeSpectrum { min_eigenvalue: min });
        }
    }
    for lambda in &mut eigenvalues {
        *lambda = lambda.max(0.0);
    }
    Ok(PsdFactorization {
        eigenvalues,
        eigenvectors,
        tolerance,
    })
}

pub fn range_norm(q: &OperatorSection, f: &PolynomialVector, tolerance: f64) -> Result<RangeNormResult> {
    psd_sqrt(q, tolerance)?.range_norm(f)
}

pub fn min_eigenvalue(q: &OperatorSection) -> Result<f64> {
    let asymmetry = max_asymmetry(&q.matrix);
    if asymmetry > HERMITIAN_TOL {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok(min_hermitian_eigenvalue(&q.matrix))
}

/// Largest entry of `(Q^{1/2})² - Q`.
pub fn sqrt_reconstruction_error(q: &OperatorSection, factor: &PsdFactorization) -> f64 {
    let root = factor.sqrt_matrix();
    max_abs_entry(&(&root * &root - &q.matrix))
}
