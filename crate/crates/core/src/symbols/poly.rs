use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Dense complex polynomial `Σ c_k z^k`, lowest degree first.
///
/// Trailing exact zeros are stripped on construction, so the zero polynomial
/// is the empty coefficient list and `degree()` is `None` for it.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct PolynomialVector {
    coeffs: Vec<Complex64>,
}

impl PolynomialVector {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// `c z^k`.
    pub fn monomial(k: usize, c: Complex64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// Taylor truncation of `1/(1 - q z)` at the given degree.
    pub fn geometric(q: Complex64, degree: usize) -> Self {
        let mut coeffs = Vec::with_capacity(degree + 1);
        let mut term = Complex64::new(1.0, 0.0);
        for _ in 0..=degree {
            coeffs.push(term);
            term *= q;
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Number of stored coefficients (`degree + 1`, or 0 for the zero polynomial).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `z^k`, zero past the degree.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Coefficients zero-padded (or truncated) to exactly `len` entries.
    pub fn padded(&self, len: usize) -> Vec<Complex64> {
        (0..len).map(|k| self.coeff(k)).collect()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Derivative coefficients.
    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// Norm in the Bergman space: `(Σ |c_k|²/(k+1))^{1/2}`.
    pub fn a2_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.norm_sqr() / (k + 1) as f64)
            .sum::<f64>()
            .sqrt()
    }

    /// Norm in the Hardy space: `(Σ |c_k|²)^{1/2}`.
    pub fn h2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest coefficient modulus at index `from` or above (0 if none).
    pub fn max_abs_from(&self, from: usize) -> f64 {
        self.coeffs
            .iter()
            .skip(from)
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

impl From<Vec<Complex64>> for PolynomialVector {
    fn from(coeffs: Vec<Complex64>) -> Self {
        Self::new(coeffs)
    }
}

impl From<PolynomialVector> for Vec<Complex64> {
    fn from(p: PolynomialVector) -> Self {
        p.coeffs
    }
}

impl Add for &PolynomialVector {
    type Output = PolynomialVector;

    fn add(self, rhs: Self) -> PolynomialVector {
        let len = self.len().max(rhs.len());
        PolynomialVector::new((0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &PolynomialVector {
    type Output = PolynomialVector;

    fn sub(self, rhs: Self) -> PolynomialVector {
        let len = self.len().max(rhs.len());
        PolynomialVector::new((0..len).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &PolynomialVector {
    type Output = PolynomialVector;

    fn mul(self, rhs: Self) -> PolynomialVector {
        if self.is_zero() || rhs.is_zero() {
            return PolynomialVector::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.len() + rhs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        PolynomialVector::new(out)
    }
}

impl fmt::Display for PolynomialVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.coeffs.iter().map(|&c| super::format_complex(c)).collect();
        f.write_str(&parts.join(","))
    }
}
