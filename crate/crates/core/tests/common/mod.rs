//! Reference computations written independently of the library internals:
//! closed-form moments, Toeplitz-product defects, SVD pseudo-inverses and
//! brute-force polar integration.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C;

pub type Mat = DMatrix<C>;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// `∫ z^k z̄^j (1 - |b|²) dA` for polynomial coefficients `b`, expanded term by term.
pub fn moment_one_minus(b: &[C], j: usize, k: usize) -> C {
    let mut v = if j == k { c(1.0 / (j + 1) as f64, 0.0) } else { c(0.0, 0.0) };
    for (m, bm) in b.iter().enumerate() {
        for (n, bn) in b.iter().enumerate() {
            if k + m == j + n {
                v -= bm * bn.conj() / (k + m + 1) as f64;
            }
        }
    }
    v
}

/// `A_b²` Gram `G_{j,k} = ⟨z^k, z^j⟩`.
pub fn gram(b: &[C], m: usize) -> Mat {
    Mat::from_fn(m, m, |j, k| moment_one_minus(b, j, k))
}

/// `T_b` on the first `n` orthonormal monomials `sqrt(k+1) z^k`.
pub fn toeplitz(b: &[C], n: usize) -> Mat {
    Mat::from_fn(n, n, |j, k| {
        if j >= k && j - k < b.len() {
            b[j - k] * (((k + 1) as f64) / ((j + 1) as f64)).sqrt()
        } else {
            c(0.0, 0.0)
        }
    })
}

/// `I - T_b T_b̄` on an `n` section.
pub fn defect_b(b: &[C], n: usize) -> Mat {
    let t = toeplitz(b, n);
    Mat::identity(n, n) - &t * t.adjoint()
}

/// `I - T_b̄ T_b` on an `n` section, read off a section enlarged by `deg b`.
pub fn defect_bbar(b: &[C], n: usize) -> Mat {
    let big = n + b.len().saturating_sub(1);
    let t = toeplitz(b, big);
    let p = t.adjoint() * &t;
    Mat::identity(n, n) - p.view((0, 0), (n, n))
}

/// `x* Q⁺ x` with `x_k = f_k / sqrt(k+1)`, via SVD pseudo-inverse.
pub fn range_norm(q: &Mat, f: &[C]) -> f64 {
    let n = q.nrows();
    assert!(f.len() <= n);
    let x = DMatrix::from_fn(n, 1, |k, _| f.get(k).copied().unwrap_or_default() / ((k + 1) as f64).sqrt());
    let svd = q.clone().svd(true, true);
    let cutoff = 1e-12 * svd.singular_values.max();
    let pinv = svd.pseudo_inverse(cutoff).unwrap();
    (x.adjoint() * pinv * &x)[(0, 0)].re.sqrt()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eig(q: &Mat) -> f64 {
    let h = (q + q.adjoint()) * c(0.5, 0.0);
    h.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `sqrt(g* G g)`.
pub fn gram_norm(g_mat: &Mat, g: &[C]) -> f64 {
    let v = DMatrix::from_fn(g_mat.nrows(), 1, |k, _| g.get(k).copied().unwrap_or_default());
    (v.adjoint() * g_mat * &v)[(0, 0)].re.sqrt()
}

/// Coefficients of `S_b g`: `(S_b g)_j = (j+1) Σ_i W_{j,i} g_i` for `j < rows`.
pub fn apply_sb(b: &[C], g: &[C], rows: usize) -> Vec<C> {
    (0..rows)
        .map(|j| {
            let s: C = g.iter().enumerate().map(|(i, gi)| moment_one_minus(b, j, i) * gi).sum();
            s * (j + 1) as f64
        })
        .collect()
}

/// `Σ |f_k|² / (k+1)`, the squared Bergman norm.
pub fn a2_norm_sq(f: &[C]) -> f64 {
    f.iter().enumerate().map(|(k, v)| v.norm_sqr() / (k + 1) as f64).sum()
}

/// Composite Simpson in the radius (with the `2t` Jacobian) times the
/// trapezoid rule in the angle, over the normalized disk measure.
pub fn brute_disk(f: impl Fn(C) -> C, radial_intervals: usize, angular: usize) -> C {
    assert!(radial_intervals.is_multiple_of(2));
    let h = 1.0 / radial_intervals as f64;
    let mut total = c(0.0, 0.0);
    for i in 1..=radial_intervals {
        let t = i as f64 * h;
        let w = if i == radial_intervals { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        let mut ring = c(0.0, 0.0);
        for l in 0..angular {
            let theta = std::f64::consts::TAU * l as f64 / angular as f64;
            ring += f(C::from_polar(t, theta));
        }
        total += ring * (w * h / 3.0 * 2.0 * t / angular as f64);
    }
    total
}

/// Squared distance from `z^k` to `span{z^{k+1}, …, z^{m-1}}` in the Gram `g`,
/// as the Schur complement `G_kk - G_{k,T} G_{T,T}⁻¹ G_{T,k}`.
pub fn schur_distance(g: &Mat, k: usize) -> f64 {
    let m = g.nrows();
    let tail = m - k - 1;
    let gtt = g.view((k + 1, k + 1), (tail, tail)).into_owned();
    let gtk = g.view((k + 1, k), (tail, 1)).into_owned();
    let gkt = g.view((k, k + 1), (1, tail)).into_owned();
    let sol = gtt.lu().solve(&gtk).unwrap();
    (g[(k, k)] - (gkt * sol)[(0, 0)]).re
}

/// Weighted Gram `∫ z^k z̄^j w dA` for all `j, k < m` in one brute-force pass.
pub fn brute_gram(w: impl Fn(C) -> f64, m: usize, radial_intervals: usize, angular: usize) -> Mat {
    assert!(radial_intervals.is_multiple_of(2));
    let h = 1.0 / radial_intervals as f64;
    let mut out = Mat::zeros(m, m);
    let mut powers = vec![c(0.0, 0.0); m];
    for i in 1..=radial_intervals {
        let t = i as f64 * h;
        let sw = if i == radial_intervals { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        let scale = sw * h / 3.0 * 2.0 * t / angular as f64;
        for l in 0..angular {
            let z = C::from_polar(t, std::f64::consts::TAU * l as f64 / angular as f64);
            let wz = w(z) * scale;
            let mut p = c(1.0, 0.0);
            for slot in powers.iter_mut() {
                *slot = p;
                p *= z;
            }
            for j in 0..m {
                let left = powers[j].conj() * wz;
                for k in 0..m {
                    out[(j, k)] += powers[k] * left;
                }
            }
        }
    }
    out
}

/// `u (z - a) / (1 - ā z)` for a single zero.
pub fn blaschke_factor(a: C, u: C, z: C) -> C {
    u * (z - a) / (1.0 - a.conj() * z)
}
