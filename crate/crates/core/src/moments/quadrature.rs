use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

/// Tensor-product polar rule on the unit disk for the normalized area
/// measure: a radial rule for `∫₀¹ φ(t) 2t dt` times equispaced angles.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    /// `(t, ω)` pairs; the `2t` Jacobian is folded into `ω`, so `Σ ω = 1`.
    pub radial_nodes: Vec<(f64, f64)>,
    pub angular_count: usize,
}

impl QuadratureRule {
    /// Gauss–Legendre radial rule with `radial` nodes mapped to `[0, 1]`.
    pub fn gauss_legendre(radial: usize, angular_count: usize) -> Self {
        let radial_nodes = gauss_legendre(radial)
            .into_iter()
            .map(|(x, w)| {
                let t = 0.5 * (x + 1.0);
                // ∫₀¹ φ(t) 2t dt = ∫₋₁¹ φ(t(x)) t(x) dx
                (t, w * t)
            })
            .collect();
        Self {
            radial_nodes,
            angular_count,
        }
    }

    /// Default rule for moment blocks up to `size` monomials: at least 64
    /// radial nodes (exact for polynomial integrands of radial degree
    /// `2·size + 61`) and at least 256 angles.
    pub fn default_for(size: usize) -> Self {
        Self::gauss_legendre(64.max(size + 32), (4 * size).max(256))
    }

    /// `∫_𝔻 f dA` with `dA` normalized to total mass one.
    pub fn integrate(&self, f: impl Fn(Complex64) -> Complex64 + Sync) -> Complex64 {
        let angles = self.angles();
        let per_node: Vec<Complex64> = self
            .radial_nodes
            .par_iter()
            .map(|&(t, w)| {
                let ring: Complex64 = angles.iter().map(|&e| f(e * t)).sum();
                ring * (w / self.angular_count as f64)
            })
            .collect();
        per_node.into_iter().sum()
    }

    pub(crate) fn angles(&self) -> Vec<Complex64> {
        (0..self.angular_count)
            .map(|l| Complex64::from_polar(1.0, 2.0 * PI * l as f64 / self.angular_count as f64))
            .collect()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0); n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            deriv = dp;
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                deriv = legendre_with_derivative(n, x).1;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        out[i] = (-x, w);
        out[n - 1 - i] = (x, w);
    }
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
