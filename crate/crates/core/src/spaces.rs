//! The weighted space `A_b²`, the operator `S_b g = P((1 - |b|²) g)` and the
//! constructive polynomial approximation in `A(b̄)`.
//!
//! `S_b` maps `A_b²` isometrically onto `A(b̄)`, so approximation errors in
//! `A(b̄)` are measured as `A_b²` distances with the Gram matrix
//! `G_{j,k} = ⟨z^k, z^j⟩_{L_b²}`. Polynomials enter as coefficient vectors of
//! length `M` (the ambient cutoff).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, PivotedCholesky};
use crate::moments::{moment_block, MomentMatrix, QuadratureRule, WeightTag};
use crate::symbols::{PolynomialVector, SymbolSpec};

/// Relative pivot cutoff for Gram factorizations.
pub const DEFAULT_GRAM_TOL: f64 = 1e-12;
/// Extra output rows kept when applying `S_b` with a Blaschke symbol, whose
/// image of a polynomial is a power series.
pub const BLASCHKE_TAIL_ROWS: usize = 32;
/// Magnitude below which coefficients of `S_b h` count as zero.
pub const TAIL_TOL: f64 = 1e-10;
/// Largest `|w|` accepted by [`pointwise_identity_check`].
pub const KERNEL_POINT_RADIUS: f64 = 0.9;

fn dimension_error(detail: String) -> Error {
    Error::DimensionMismatch {
        module: "spaces",
        detail,
    }
}

/// Gram matrix of `1, z, …, z^{M-1}` in `L²((1 - |b|²) dA)` with a cached
/// pivoted Cholesky factorization.
#[derive(Debug, Clone)]
pub struct WeightedGram {
    moments: MomentMatrix,
    factor: PivotedCholesky,
    tolerance: f64,
}

impl WeightedGram {
    pub fn new(b: &SymbolSpec, m: usize, tolerance: f64) -> Result<Self> {
        let moments = crate::moments::weighted_moments(b, m, WeightTag::OneMinusModBSquared)?;
        let factor = PivotedCholesky::new(moments.matrix(), tolerance);
        Ok(Self {
            moments,
            factor,
            tolerance,
        })
    }

    pub fn size(&self) -> usize {
        self.moments.size()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.moments.matrix()
    }

    pub fn moments(&self) -> &MomentMatrix {
        &self.moments
    }

    pub fn factor(&self) -> &PivotedCholesky {
        &self.factor
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    fn coords(&self, f: &PolynomialVector) -> Result<CVector> {
        let m = self.size();
        if f.len() > m {
            return Err(dimension_error(format!(
                "polynomial of degree {} exceeds the Gram size {m}",
                f.len() - 1
            )));
        }
        Ok(CVector::from_vec(f.padded(m)))
    }

    /// `⟨f, g⟩_{L_b²} = g* G f`.
    pub fn inner(&self, f: &PolynomialVector, g: &PolynomialVector) -> Result<Complex64> {
        let (x, y) = (self.coords(f)?, self.coords(g)?);
        Ok(y.dotc(&(self.matrix() * x)))
    }

    /// `‖g‖_{A_b²} = (g* G g)^{1/2}`.
    pub fn norm(&self, g: &PolynomialVector) -> Result<f64> {
        Ok(self.inner(g, g)?.re.max(0.0).sqrt())
    }
}

pub fn gram_ab2(b: &SymbolSpec, m: usize) -> Result<WeightedGram> {
    WeightedGram::new(b, m, DEFAULT_GRAM_TOL)
}

pub fn norm_ab2(g: &PolynomialVector, gram: &WeightedGram) -> Result<f64> {
    gram.norm(g)
}

/// Matrix of `S_b` from coefficients of degree `< cols` to Taylor
/// coefficients: `S_{j,i} = (j+1) ∫ z^i z̄^j (1 - |b|²) dA`.
#[derive(Debug, Clone)]
pub struct SbMatrix {
    matrix: CMatrix,
}

impl SbMatrix {
    /// Extra rows beyond `cols` needed for an exact image: `d` for a
    /// polynomial symbol, a fixed tail for Blaschke products.
    pub fn extra_rows(b: &SymbolSpec) -> usize {
        b.polynomial_degree().unwrap_or(BLASCHKE_TAIL_ROWS)
    }

    pub fn new(b: &SymbolSpec, cols: usize) -> Result<Self> {
        Self::with_rows(b, cols, cols + Self::extra_rows(b))
    }

    pub fn with_rows(b: &SymbolSpec, cols: usize, rows: usize) -> Result<Self> {
        let mut matrix = moment_block(b, rows, cols, WeightTag::OneMinusModBSquared)?;
        for j in 0..rows {
            matrix.row_mut(j).scale_mut((j + 1) as f64);
        }
        Ok(Self { matrix })
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, g: &PolynomialVector) -> Result<PolynomialVector> {
        if g.len() > self.cols() {
            return Err(dimension_error(format!(
                "input of degree {} exceeds S_b width {}",
                g.len() - 1,
                self.cols()
            )));
        }
        let x = CVector::from_vec(g.padded(self.cols()));
        Ok(PolynomialVector::new((&self.matrix * x).iter().copied().collect()))
    }
}

/// `S_b g` as a polynomial of degree `≤ deg g + d` (power series truncated
/// after [`BLASCHKE_TAIL_ROWS`] extra terms for Blaschke symbols).
pub fn apply_sb(b: &SymbolSpec, g: &PolynomialVector) -> Result<PolynomialVector> {
    if g.is_zero() {
        return Ok(PolynomialVector::zero());
    }
    SbMatrix::new(b, g.len())?.apply(g)
}

/// A point of the open unit disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint(Complex64);

impl KernelPoint {
    pub fn new(w: Complex64) -> Result<Self> {
        if !(w.norm() < 1.0) {
            return Err(Error::DomainViolation {
                point: w,
                detail: "kernel points lie in the open unit disk".into(),
            });
        }
        Ok(Self(w))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }
}

/// Bergman kernel `k_w(z) = 1/(1 - w̄ z)²`.
pub fn kernel_eval(w: KernelPoint, z: Complex64) -> Complex64 {
    let d = 1.0 - w.0.conj() * z;
    (d * d).inv()
}

/// Taylor truncation `Σ_{j ≤ degree} (j+1) w̄^j z^j` of `k_w`.
pub fn kernel_truncation(w: KernelPoint, degree: usize) -> PolynomialVector {
    let wc = w.0.conj();
    let mut power = Complex64::new(1.0, 0.0);
    let mut coeffs = Vec::with_capacity(degree + 1);
    for j in 0..=degree {
        coeffs.push(power * (j + 1) as f64);
        power *= wc;
    }
    PolynomialVector::new(coeffs)
}

/// `|(S_b q)(w) - ⟨q, k_w^{(D)}⟩_{L_b²}|` with `D = M + d - 1` (the last row of
/// the `S_b` matrix).
pub fn pointwise_identity_check(
    b: &SymbolSpec,
    q: &PolynomialVector,
    w: KernelPoint,
    m: usize,
) -> Result<f64> {
    let (lhs, rhs) = kernel_identity_sides(b, q, w, m)?;
    Ok((lhs - rhs).norm())
}

/// Both sides `((S_b q)(w), ⟨q, k_w^{(D)}⟩_{L_b²})` of the kernel identity. The
/// right side is integrated pointwise over the disk, independently of the
/// moment algebra behind `S_b`.
pub fn kernel_identity_sides(
    b: &SymbolSpec,
    q: &PolynomialVector,
    w: KernelPoint,
    m: usize,
) -> Result<(Complex64, Complex64)> {
    if w.0.norm() > KERNEL_POINT_RADIUS {
        return Err(Error::DomainViolation {
            point: w.0,
            detail: format!("kernel identity is checked for |w| ≤ {KERNEL_POINT_RADIUS}"),
        });
    }
    if q.len() > m {
        return Err(dimension_error(format!(
            "q has degree {} but M = {m}",
            q.len() - 1
        )));
    }
    let sb = SbMatrix::new(b, m)?;
    let lhs = sb.apply(q)?.eval(w.0);
    let degree = sb.rows() - 1;
    let kernel = kernel_truncation(w, degree);
    let rule = QuadratureRule::default_for(degree + 1);
    let rhs = rule.integrate(|z| q.eval(z) * kernel.eval(z).conj() * (1.0 - b.eval(z).norm_sqr()));
    Ok((lhs, rhs))
}

/// `h = g - P_{M_n} g`, where `P_{M_n}` is the `L_b²`-orthogonal projection onto
/// `span{z^n, …, z^{M-1}}`.
pub fn project_onto_mn_perp(g: &PolynomialVector, n: usize, gram: &WeightedGram) -> Result<PolynomialVector> {
    let m = gram.size();
    let gv = gram.coords(g)?;
    if n > m {
        return Err(dimension_error(format!("n = {n} exceeds M = {m}")));
    }
    if n == 0 {
        return Ok(PolynomialVector::zero());
    }
    if n == m {
        return Ok(g.clone());
    }
    let gmat = gram.matrix();
    let sub = gmat.view((n, n), (m - n, m - n)).into_owned();
    let rhs = gmat.view((n, 0), (m - n, m)) * &gv;
    let chol = PivotedCholesky::new(&sub, gram.tolerance());
    if !chol.is_full_rank() {
        return Err(Error::SingularGram {
            rank: chol.rank(),
            size: m - n,
        });
    }
    let x = chol.solve(&rhs);
    let mut h = gv;
    for i in 0..m - n {
        h[n + i] -= x[i];
    }
    Ok(PolynomialVector::new(h.iter().copied().collect()))
}

/// `max_{n ≤ k < M} |⟨h, z^k⟩_{L_b²}|`.
pub fn orthogonality_residual(h: &PolynomialVector, n: usize, gram: &WeightedGram) -> Result<f64> {
    let gh = gram.matrix() * gram.coords(h)?;
    Ok(gh.iter().skip(n).map(|c| c.norm()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximationStep {
    pub n: usize,
    pub h: PolynomialVector,
    /// `S_b h`.
    pub p: PolynomialVector,
    /// `‖g - h‖_{A_b²} = ‖f - S_b h‖_{A(b̄)}`.
    pub error: f64,
    /// Largest `|p_j|` with `j ≥ n`.
    pub tail_max: f64,
    /// Largest `|p_j|` with `j ≥ M`, where orthogonality was not imposed.
    pub truncation_spill: f64,
    /// Highest index with `|p_j| > TAIL_TOL`.
    pub degree_of_p: Option<usize>,
    /// `max_{n ≤ k < M} |⟨h, z^k⟩_{L_b²}|`.
    pub solve_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximationReport {
    pub symbol: String,
    pub gram_size: usize,
    pub g_degree: Option<usize>,
    pub g: PolynomialVector,
    pub f: PolynomialVector,
    pub steps: Vec<ApproximationStep>,
}

/// For each `n`: project `g` onto `M_n^⊥`, map through `S_b`, and record the
/// approximation error of `f = S_b g`.
pub fn density_approximate(
    b: &SymbolSpec,
    g: &PolynomialVector,
    n_values: &[usize],
    m: usize,
) -> Result<ApproximationReport> {
    if g.len() > m {
        return Err(dimension_error(format!("g has degree {} but M = {m}", g.len() - 1)));
    }
    if let Some(&n) = n_values.iter().find(|&&n| n > m) {
        return Err(dimension_error(format!("n = {n} exceeds M = {m}")));
    }
    let gram = gram_ab2(b, m)?;
    let sb = SbMatrix::new(b, m)?;
    let steps = n_values
        .par_iter()
        .map(|&n| {
            let h = project_onto_mn_perp(g, n, &gram)?;
            let p = sb.apply(&h)?;
            let error = gram.norm(&(g - &h))?;
            let degree_of_p = p.coeffs().iter().rposition(|c| c.norm() > TAIL_TOL);
            Ok(ApproximationStep {
                n,
                tail_max: p.max_abs_from(n),
                truncation_spill: p.max_abs_from(m),
                degree_of_p,
                solve_residual: orthogonality_residual(&h, n, &gram)?,
                h,
                p,
                error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ApproximationReport {
        symbol: b.to_string(),
        gram_size: m,
        g_degree: g.degree(),
        f: sb.apply(g)?,
        g: g.clone(),
        steps,
    })
}

/// Solution of `S_b g = f` over polynomials of degree `< M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preimage {
    pub g: PolynomialVector,
    /// `max_j |(S_b g)_j - f_j|` over all rows of the `S_b` matrix.
    pub residual: f64,
    /// `‖g‖_{A_b²}`, which equals `‖f‖_{A(b̄)}`.
    pub norm: f64,
    pub rank: usize,
}

/// Gram and `S_b` matrix for repeated preimage solves with one symbol.
#[derive(Debug, Clone)]
pub struct SbContext {
    gram: WeightedGram,
    sb: SbMatrix,
}

impl SbContext {
    pub fn new(b: &SymbolSpec, m: usize, tolerance: f64) -> Result<Self> {
        Ok(Self {
            gram: WeightedGram::new(b, m, tolerance)?,
            sb: SbMatrix::new(b, m)?,
        })
    }

    pub fn gram(&self) -> &WeightedGram {
        &self.gram
    }

    pub fn sb(&self) -> &SbMatrix {
        &self.sb
    }

    /// Solves `⟨g, z^j⟩_{L_b²} = ⟨f, z^j⟩_{A²}` for `j < M`, which is `S_b g = f`
    /// read through `⟨S_b g, z^j⟩_{A²} = ⟨g, z^j⟩_{L_b²}`.
    pub fn preimage(&self, f: &PolynomialVector) -> Result<Preimage> {
        if f.len() > self.sb.rows() {
            return Err(dimension_error(format!(
                "f has degree {} but S_b has {} rows",
                f.len() - 1,
                self.sb.rows()
            )));
        }
        let factor = self.gram.factor();
        if factor.rank() < f.len() {
            return Err(Error::IllConditioned {
                rank: factor.rank(),
                needed: f.len(),
            });
        }
        let m = self.gram.size();
        let rhs = CVector::from_fn(m, |j, _| f.coeff(j) / (j + 1) as f64);
        let g = PolynomialVector::new(factor.solve(&rhs).iter().copied().collect());
        let image = self.sb.apply(&g)?;
        let residual = (0..self.sb.rows())
            .map(|j| (image.coeff(j) - f.coeff(j)).norm())
            .fold(0.0, f64::max);
        Ok(Preimage {
            norm: self.gram.norm(&g)?,
            g,
            residual,
            rank: factor.rank(),
        })
    }
}

pub fn sb_preimage(b: &SymbolSpec, f: &PolynomialVector, m: usize, tolerance: f64) -> Result<Preimage> {
    SbContext::new(b, m, tolerance)?.preimage(f)
}
