//! Disk integrals of monomials against the weights `1`, `|b|²` and `1 - |b|²`.
//!
//! All matrices here use the convention `W_{j,k} = ∫_𝔻 z^k z̄^j w dA`, i.e.
//! `W_{j,k} = ⟨z^k, z^j⟩` in `L²(w dA)` with the column index carrying the left
//! argument of the inner product. `dA` is normalized area measure.

mod quadrature;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, CMatrix};
use crate::symbols::SymbolSpec;

pub use quadrature::{gauss_legendre, QuadratureRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightTag {
    Plain,
    ModBSquared,
    OneMinusModBSquared,
}

impl WeightTag {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightTag::Plain => "plain",
            WeightTag::ModBSquared => "mod_b_squared",
            WeightTag::OneMinusModBSquared => "one_minus_mod_b_squared",
        }
    }

    fn value(self, b: &SymbolSpec, z: Complex64) -> f64 {
        match self {
            WeightTag::Plain => 1.0,
            WeightTag::ModBSquared => b.eval(z).norm_sqr(),
            WeightTag::OneMinusModBSquared => 1.0 - b.eval(z).norm_sqr(),
        }
    }
}

impl std::str::FromStr for WeightTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "plain" => Ok(WeightTag::Plain),
            "mod_b_squared" => Ok(WeightTag::ModBSquared),
            "one_minus_mod_b_squared" => Ok(WeightTag::OneMinusModBSquared),
            other => Err(format!("unknown weight {other:?}")),
        }
    }
}

/// Square Hermitian moment matrix for one weight.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix {
    weight: WeightTag,
    entries: CMatrix,
}

impl MomentMatrix {
    pub fn weight(&self) -> WeightTag {
        self.weight
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.entries[(j, k)]
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    /// JSON view: `{"weight_tag", "size", "entries"}` with row-major
    /// `[re, im]` pairs.
    pub fn to_json(&self) -> MomentMatrixJson {
        let n = self.size();
        MomentMatrixJson {
            weight_tag: self.weight,
            size: n,
            entries: (0..n)
                .flat_map(|j| (0..n).map(move |k| (j, k)))
                .map(|(j, k)| [self.entries[(j, k)].re, self.entries[(j, k)].im])
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentMatrixJson {
    pub weight_tag: WeightTag,
    pub size: usize,
    pub entries: Vec<[f64; 2]>,
}

/// `∫_𝔻 z^k z̄^j dA = δ_{jk}/(j+1)`.
pub fn bergman_moment(j: usize, k: usize) -> Complex64 {
    if j == k {
        Complex64::new(1.0 / (j + 1) as f64, 0.0)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// `∫_{r𝔻} z^m z̄^n dA = r^{2m+2}/(m+1)` when `m = n`, else 0.
pub fn disk_monomial_integral(m: usize, n: usize, r: f64) -> Complex64 {
    if m == n {
        Complex64::new(r.powi(2 * m as i32 + 2) / (m + 1) as f64, 0.0)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Exact `rows × cols` block of moments for a constant or polynomial symbol.
pub fn moment_block_exact(
    b: &SymbolSpec,
    rows: usize,
    cols: usize,
    weight: WeightTag,
) -> Result<CMatrix> {
    let h = b.modulus_squared_coeffs()?;
    let terms: Vec<(usize, usize, Complex64)> = h.nonzero().collect();
    let zero = Complex64::new(0.0, 0.0);
    Ok(CMatrix::from_fn(rows, cols, |j, k| {
        let plain = bergman_moment(j, k);
        // ∫ z^{k+m} z̄^{j+n} dA = δ_{k+m, j+n}/(k+m+1)
        let modulus: Complex64 = terms
            .iter()
            .filter(|&&(m, n, _)| k + m == j + n)
            .map(|&(m, _, hmn)| hmn / (k + m + 1) as f64)
            .fold(zero, |acc, v| acc + v);
        match weight {
            WeightTag::Plain => plain,
            WeightTag::ModBSquared => modulus,
            WeightTag::OneMinusModBSquared => plain - modulus,
        }
    }))
}

/// `rows × cols` block of moments by polar quadrature. Any symbol.
pub fn moment_block_quadrature(
    b: &SymbolSpec,
    rows: usize,
    cols: usize,
    weight: WeightTag,
    rule: &QuadratureRule,
) -> Result<CMatrix> {
    let size = rows.max(cols);
    let angular = rule.angular_count;
    if angular < 2 * size {
        return Err(Error::RuleTooCoarse(format!(
            "{angular} angles for {size} monomials (need at least {})",
            2 * size
        )));
    }
    if rule.radial_nodes.len() < size {
        return Err(Error::RuleTooCoarse(format!(
            "{} radial nodes for {size} monomials",
            rule.radial_nodes.len()
        )));
    }
    let angles = rule.angles();
    // Angular means a_p(t) = (1/A) Σ_l w(t e^{iθ_l}) e^{i p θ_l} for
    // p = k - j in [-(rows-1), cols-1], stored at offset p + rows - 1.
    let span = rows + cols - 1;
    let per_node: Vec<Vec<Complex64>> = rule
        .radial_nodes
        .par_iter()
        .map(|&(t, _)| {
            let samples: Vec<f64> = angles.iter().map(|&e| weight.value(b, e * t)).collect();
            (0..span)
                .map(|offset| {
                    let p = offset as i64 - (rows as i64 - 1);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (l, &w) in samples.iter().enumerate() {
                        let idx = (p * l as i64).rem_euclid(angular as i64) as usize;
                        acc += angles[idx] * w;
                    }
                    acc / angular as f64
                })
                .collect()
        })
        .collect();
    let mut out = CMatrix::zeros(rows, cols);
    for (&(t, omega), means) in rule.radial_nodes.iter().zip(&per_node) {
        let powers: Vec<f64> = std::iter::successors(Some(1.0), |&x| Some(x * t))
            .take(rows + cols - 1)
            .collect();
        for k in 0..cols {
            for j in 0..rows {
                out[(j, k)] += means[k + rows - 1 - j] * (omega * powers[j + k]);
            }
        }
    }
    // exact Hermitian form on the overlapping square block
    let square = rows.min(cols);
    for j in 0..square {
        out[(j, j)] = Complex64::new(out[(j, j)].re, 0.0);
        for k in j + 1..square {
            let avg = 0.5 * (out[(j, k)] + out[(k, j)].conj());
            out[(j, k)] = avg;
            out[(k, j)] = avg.conj();
        }
    }
    Ok(out)
}

/// Exact route when the symbol is a polynomial, default quadrature otherwise.
pub fn moment_block(b: &SymbolSpec, rows: usize, cols: usize, weight: WeightTag) -> Result<CMatrix> {
    match b {
        SymbolSpec::Blaschke { .. } => {
            moment_block_quadrature(b, rows, cols, weight, &QuadratureRule::default_for(rows.max(cols)))
        }
        _ => moment_block_exact(b, rows, cols, weight),
    }
}

/// `N × N` moments, exact for constant and polynomial symbols.
pub fn weighted_moments_exact(b: &SymbolSpec, n: usize, weight: WeightTag) -> Result<MomentMatrix> {
    let entries = moment_block_exact(b, n, n, weight)?;
    Ok(MomentMatrix { weight, entries })
}

/// `N × N` moments by polar quadrature, symmetrized to exact Hermitian form.
pub fn weighted_moments_quadrature(
    b: &SymbolSpec,
    n: usize,
    weight: WeightTag,
    rule: &QuadratureRule,
) -> Result<MomentMatrix> {
    let entries = hermitian_part(&moment_block_quadrature(b, n, n, weight, rule)?);
    Ok(MomentMatrix { weight, entries })
}

/// Exact moments when available, quadrature with the default rule otherwise.
pub fn weighted_moments(b: &SymbolSpec, n: usize, weight: WeightTag) -> Result<MomentMatrix> {
    match b {
        SymbolSpec::Blaschke { .. } => {
            weighted_moments_quadrature(b, n, weight, &QuadratureRule::default_for(n))
        }
        _ => weighted_moments_exact(b, n, weight),
    }
}

/// `δ = min_{|z| ≤ r} (1 - |b(z)|²)`. By the maximum principle `|b|` peaks on
/// `|z| = r`, so only that circle is sampled (`grid` points, then refined).
pub fn delta_min(b: &SymbolSpec, r: f64, grid: usize) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::DomainViolation {
            point: Complex64::new(r, 0.0),
            detail: "delta_min needs 0 < r < 1".into(),
        });
    }
    let peak = b.max_mod_squared_on_circle(r, grid);
    Ok(1.0 - peak)
}
