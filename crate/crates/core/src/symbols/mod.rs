//! Analytic symbols `b` with `‖b‖∞ ≤ 1`.
//!
//! Three families are supported: constants, polynomials, and finite Blaschke
//! products kept in factored form. The text grammar accepted by
//! [`parse_symbol`] is also what [`SymbolSpec`]'s `Display` prints, so a
//! symbol survives a round trip through reports and config files.

mod parse;
mod poly;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use parse::{parse_complex, parse_symbol};
pub use poly::PolynomialVector;

/// Slack allowed on `‖b‖∞ ≤ 1` and on `|unimodular_factor| = 1`.
pub const CONTRACTIVE_SLACK: f64 = 1e-12;

/// Boundary samples used when validating polynomial symbols.
pub const DEFAULT_SUP_GRID: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolSpec {
    Constant(Complex64),
    Polynomial(PolynomialVector),
    /// `unimodular_factor · Π (z - a)/(1 - ā z)` over `zeros`.
    Blaschke {
        zeros: Vec<Complex64>,
        unimodular_factor: Complex64,
    },
}

/// Coefficients `h_{m,n} = b_m conj(b_n)` with `|b(z)|² = Σ h_{m,n} z^m z̄^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianCoeffGrid {
    size: usize,
    entries: Vec<Complex64>,
}

impl HermitianCoeffGrid {
    fn from_coeffs(coeffs: &[Complex64]) -> Self {
        let size = coeffs.len();
        let mut entries = Vec::with_capacity(size * size);
        for m in 0..size {
            for n in 0..size {
                entries.push(coeffs[m] * coeffs[n].conj());
            }
        }
        Self { size, entries }
    }

    /// Number of rows (`degree + 1`); zero for `b ≡ 0`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.entries[m * self.size + n]
    }

    /// Nonzero entries as `(m, n, h_{m,n})`.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.size)
            .flat_map(move |m| (0..self.size).map(move |n| (m, n, self.get(m, n))))
            .filter(|(_, _, h)| *h != Complex64::new(0.0, 0.0))
    }

    /// `Σ h_{m,n} z^m z̄^n`.
    pub fn eval(&self, z: Complex64) -> f64 {
        let zc = z.conj();
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, n, h) in self.nonzero() {
            acc += h * z.powu(m as u32) * zc.powu(n as u32);
        }
        acc.re
    }
}

impl SymbolSpec {
    pub fn constant(c: Complex64) -> Result<Self> {
        Self::Constant(c).validated()
    }

    pub fn polynomial(p: PolynomialVector) -> Result<Self> {
        Self::Polynomial(p).validated()
    }

    pub fn blaschke(zeros: Vec<Complex64>, unimodular_factor: Complex64) -> Result<Self> {
        Self::Blaschke {
            zeros,
            unimodular_factor,
        }
        .validated()
    }

    /// The identity symbol `b(z) = z`.
    pub fn identity() -> Self {
        Self::Polynomial(PolynomialVector::from_real(&[0.0, 1.0]))
    }

    /// Checks the contractivity invariant of the variant.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant(c) => {
                if !(c.re.is_finite() && c.im.is_finite()) {
                    return Err(Error::NotContractive { sup_norm: f64::NAN });
                }
                if c.norm() > 1.0 + CONTRACTIVE_SLACK {
                    return Err(Error::NotContractive { sup_norm: c.norm() });
                }
            }
            Self::Polynomial(p) => {
                if p.coeffs().iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
                    return Err(Error::NotContractive { sup_norm: f64::NAN });
                }
                let sup = self.sup_norm_estimate(DEFAULT_SUP_GRID);
                if sup > 1.0 + CONTRACTIVE_SLACK {
                    return Err(Error::NotContractive { sup_norm: sup });
                }
            }
            Self::Blaschke {
                zeros,
                unimodular_factor,
            } => {
                if zeros.is_empty() {
                    return Err(Error::Parse {
                        input: self.to_string(),
                        reason: "a Blaschke product needs at least one zero".into(),
                    });
                }
                if let Some(a) = zeros.iter().find(|a| !(a.norm() < 1.0)) {
                    return Err(Error::DomainViolation {
                        point: *a,
                        detail: "Blaschke zeros must lie in the open unit disk".into(),
                    });
                }
                if (unimodular_factor.norm() - 1.0).abs() > CONTRACTIVE_SLACK {
                    return Err(Error::NotContractive {
                        sup_norm: unimodular_factor.norm(),
                    });
                }
            }
        }
        Ok(())
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Self::Constant(_) => "constant",
            Self::Polynomial(_) => "polynomial",
            Self::Blaschke { .. } => "blaschke",
        }
    }

    /// Taylor coefficients for constant and polynomial symbols.
    pub fn taylor_coeffs(&self) -> Option<Vec<Complex64>> {
        match self {
            Self::Constant(c) => Some(vec![*c]),
            Self::Polynomial(p) => Some(p.coeffs().to_vec()),
            Self::Blaschke { .. } => None,
        }
    }

    /// Degree `d` for constant (0) and polynomial symbols; `None` for Blaschke.
    pub fn polynomial_degree(&self) -> Option<usize> {
        match self {
            Self::Constant(_) => Some(0),
            Self::Polynomial(p) => Some(p.degree().unwrap_or(0)),
            Self::Blaschke { .. } => None,
        }
    }

    /// `b` as a polynomial, if it is one.
    pub fn as_polynomial(&self) -> Option<PolynomialVector> {
        self.taylor_coeffs().map(PolynomialVector::new)
    }

    /// True for constants of modulus one (within the contractive slack).
    pub fn is_unimodular_constant(&self) -> bool {
        match self {
            Self::Constant(c) => (c.norm() - 1.0).abs() <= CONTRACTIVE_SLACK,
            Self::Polynomial(p) => {
                p.degree().unwrap_or(0) == 0 && (p.coeff(0).norm() - 1.0).abs() <= CONTRACTIVE_SLACK
            }
            Self::Blaschke { .. } => false,
        }
    }

    /// True when `|b| = 1` on the whole circle: Blaschke products and
    /// unimodular multiples of a single monomial `z^m`, `m ≥ 1`.
    pub fn is_inner(&self) -> bool {
        match self {
            Self::Blaschke { .. } => true,
            Self::Polynomial(p) => match p.degree() {
                Some(d) if d >= 1 => {
                    (p.coeff(d).norm() - 1.0).abs() <= CONTRACTIVE_SLACK
                        && p.coeffs()[..d].iter().all(|c| c.norm() == 0.0)
                }
                _ => false,
            },
            Self::Constant(_) => false,
        }
    }

    /// `b(z)` without a domain check.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Self::Constant(c) => *c,
            Self::Polynomial(p) => p.eval(z),
            Self::Blaschke {
                zeros,
                unimodular_factor,
            } => zeros
                .iter()
                .fold(*unimodular_factor, |acc, &a| acc * (z - a) / (1.0 - a.conj() * z)),
        }
    }

    /// `b(z)` for `|z| ≤ 1`.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        if !(z.norm() <= 1.0 + CONTRACTIVE_SLACK) {
            return Err(Error::DomainViolation {
                point: z,
                detail: "symbols are evaluated on the closed unit disk".into(),
            });
        }
        Ok(self.eval(z))
    }

    /// Estimate of `sup_{|z|=1} |b(z)|` from `grid` equispaced boundary samples
    /// (at least 64), refined where a Lipschitz bound says a larger value may
    /// hide between samples. Blaschke products return exactly 1 and constants
    /// return `|c|`.
    pub fn sup_norm_estimate(&self, grid: usize) -> f64 {
        match self {
            Self::Constant(c) => c.norm(),
            Self::Blaschke { .. } => 1.0,
            Self::Polynomial(_) => self.max_mod_squared_on_circle(1.0, grid).sqrt(),
        }
    }

    /// `max_{|z|=r} |b(z)|²`.
    pub(crate) fn max_mod_squared_on_circle(&self, radius: f64, grid: usize) -> f64 {
        let lipschitz = self.mod_squared_angular_lipschitz(radius);
        max_on_circle(
            |theta| self.eval(Complex64::from_polar(radius, theta)).norm_sqr(),
            grid.max(64),
            lipschitz,
        )
    }

    /// Bound on `|d/dθ |b(r e^{iθ})|²|`.
    fn mod_squared_angular_lipschitz(&self, radius: f64) -> f64 {
        match self {
            Self::Constant(_) => 0.0,
            Self::Polynomial(p) => {
                let grid = HermitianCoeffGrid::from_coeffs(p.coeffs());
                grid.nonzero()
                    .map(|(m, n, h)| h.norm() * radius.powi((m + n) as i32) * m.abs_diff(n) as f64)
                    .sum()
            }
            Self::Blaschke { zeros, .. } => {
                // |b'| ≤ Σ (1 - |a|²)/(1 - |a| r)² on |z| = r, and |b| ≤ 1.
                let deriv: f64 = zeros
                    .iter()
                    .map(|a| (1.0 - a.norm_sqr()) / (1.0 - a.norm() * radius).powi(2))
                    .sum();
                2.0 * radius * deriv
            }
        }
    }

    /// Expansion of `|b|²` for constant and polynomial symbols.
    pub fn modulus_squared_coeffs(&self) -> Result<HermitianCoeffGrid> {
        match self.taylor_coeffs() {
            Some(coeffs) => Ok(HermitianCoeffGrid::from_coeffs(&coeffs)),
            None => Err(Error::UnsupportedVariant {
                op: "modulus_squared_coeffs",
                variant: self.variant_name(),
            }),
        }
    }
}

/// Maximum of a `2π`-periodic function from `grid` samples. Intervals whose
/// Lipschitz upper bound exceeds the best value found so far are searched
/// with golden sections.
pub(crate) fn max_on_circle(f: impl Fn(f64) -> f64, grid: usize, lipschitz: f64) -> f64 {
    let step = 2.0 * PI / grid as f64;
    let samples: Vec<f64> = (0..grid).map(|i| f(i as f64 * step)).collect();
    let mut best = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lipschitz == 0.0 {
        return best;
    }
    let mut candidates: Vec<(f64, usize)> = (0..grid)
        .map(|i| {
            let edge = samples[i].max(samples[(i + 1) % grid]);
            (edge + 0.5 * lipschitz * step, i)
        })
        .filter(|(bound, _)| *bound > best)
        .collect();
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
    for (bound, i) in candidates {
        if bound <= best {
            break;
        }
        let lo = i as f64 * step;
        best = best.max(golden_max(&f, lo, lo + step));
    }
    best
}

fn golden_max(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    f1.max(f2)
}

/// `x+yi` with shortest round-trip float formatting.
pub fn format_complex(c: Complex64) -> String {
    if c.im.is_sign_negative() {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

impl fmt::Display for SymbolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "const:{}", format_complex(*c)),
            Self::Polynomial(p) => {
                let coeffs: Vec<String> = if p.is_zero() {
                    vec!["0".to_string()]
                } else {
                    p.coeffs().iter().map(|&c| format_complex(c)).collect()
                };
                write!(f, "poly:{}", coeffs.join(","))
            }
            Self::Blaschke {
                zeros,
                unimodular_factor,
            } => {
                let zeros: Vec<String> = zeros.iter().map(|&a| format_complex(a)).collect();
                write!(f, "blaschke:{}|{}", zeros.join(";"), format_complex(*unimodular_factor))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluate_examples() {
        let b = SymbolSpec::constant(c(0.5, 0.0)).unwrap();
        assert_eq!(b.evaluate(c(0.0, 0.3)).unwrap(), c(0.5, 0.0));

        let b = SymbolSpec::identity();
        assert_eq!(b.evaluate(c(0.2, 0.1)).unwrap(), c(0.2, 0.1));

        let b = SymbolSpec::blaschke(vec![c(0.5, 0.0)], c(1.0, 0.0)).unwrap();
        let v = b.evaluate(c(-0.5, 0.0)).unwrap();
        assert!((v - c(-0.8, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn evaluate_rejects_points_outside_the_disk() {
        let b = SymbolSpec::identity();
        assert!(matches!(
            b.evaluate(c(1.5, 0.0)),
            Err(Error::DomainViolation { .. })
        ));
    }

    #[test]
    fn sup_norm_examples() {
        assert_eq!(SymbolSpec::constant(c(0.9, 0.0)).unwrap().sup_norm_estimate(64), 0.9);
        let bl = SymbolSpec::blaschke(vec![c(0.5, 0.0)], c(1.0, 0.0)).unwrap();
        assert_eq!(bl.sup_norm_estimate(64), 1.0);
        let p = SymbolSpec::polynomial(PolynomialVector::from_real(&[0.5, 0.5])).unwrap();
        assert!((p.sup_norm_estimate(4096) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn refinement_finds_peak_between_samples() {
        // |0.5 + 0.5 z e^{-iφ}| peaks at θ = φ, placed halfway between samples.
        let phi = PI / 64.0 * 0.5;
        let p = PolynomialVector::new(vec![c(0.5, 0.0), Complex64::from_polar(0.5, -phi)]);
        let b = SymbolSpec::Polynomial(p);
        let sup = b.sup_norm_estimate(64);
        assert!((sup - 1.0).abs() < 1e-12, "sup = {sup}");
    }

    #[test]
    fn modulus_squared_examples() {
        let g = SymbolSpec::identity().modulus_squared_coeffs().unwrap();
        assert_eq!(g.get(1, 1), c(1.0, 0.0));
        assert_eq!(g.get(0, 0), c(0.0, 0.0));
        assert_eq!(g.get(0, 1), c(0.0, 0.0));

        let g = SymbolSpec::constant(c(0.3, 0.4)).unwrap().modulus_squared_coeffs().unwrap();
        assert_eq!(g.size(), 1);
        assert!((g.get(0, 0).re - 0.25).abs() < 1e-15);

        let b = SymbolSpec::polynomial(PolynomialVector::from_real(&[0.5, 0.5])).unwrap();
        let g = b.modulus_squared_coeffs().unwrap();
        for m in 0..2 {
            for n in 0..2 {
                assert_eq!(g.get(m, n), c(0.25, 0.0));
            }
        }

        let bl = SymbolSpec::blaschke(vec![c(0.5, 0.0)], c(1.0, 0.0)).unwrap();
        assert!(matches!(
            bl.modulus_squared_coeffs(),
            Err(Error::UnsupportedVariant { .. })
        ));
    }

    #[test]
    fn invalid_blaschke_data_is_rejected() {
        assert!(SymbolSpec::blaschke(vec![c(1.0, 0.0)], c(1.0, 0.0)).is_err());
        assert!(SymbolSpec::blaschke(vec![c(0.2, 0.0)], c(0.5, 0.0)).is_err());
        assert!(SymbolSpec::blaschke(vec![], c(1.0, 0.0)).is_err());
    }

    #[test]
    fn inner_detection() {
        assert!(SymbolSpec::identity().is_inner());
        assert!(!SymbolSpec::polynomial(PolynomialVector::from_real(&[0.5, 0.5]))
            .unwrap()
            .is_inner());
        assert!(SymbolSpec::constant(c(0.0, 1.0)).unwrap().is_unimodular_constant());
    }
}
