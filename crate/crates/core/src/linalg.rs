//! Dense Hermitian helpers shared by `operators` and `spaces`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `max |A_{jk} - conj(A_{kj})|`.
pub fn max_asymmetry(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for k in j..n {
            worst = worst.max((a[(j, k)] - a[(k, j)].conj()).norm());
        }
    }
    worst
}

/// `(A + A*)/2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

pub fn max_abs_entry(a: &CMatrix) -> f64 {
    a.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Eigenpairs of a Hermitian matrix, eigenvalues descending.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn min_hermitian_eigenvalue(a: &CMatrix) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(hermitian_part(a))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Cholesky factorization with complete diagonal pivoting of a Jacobi-scaled
/// Hermitian PSD matrix, `S A S = P L L* Pᵀ` with `S = diag(A_ii^{-1/2})`.
///
/// Pivoting stops once the largest remaining scaled diagonal falls to
/// `tolerance` or below; the number of accepted pivots is the rank.
#[derive(Debug, Clone)]
pub struct PivotedCholesky {
    scale: Vec<f64>,
    perm: Vec<usize>,
    factor: CMatrix,
    rank: usize,
}

impl PivotedCholesky {
    pub fn new(a: &CMatrix, tolerance: f64) -> Self {
        let n = a.nrows();
        let scale: Vec<f64> = (0..n)
            .map(|i| {
                let d = a[(i, i)].re;
                if d > 0.0 {
                    d.sqrt().recip()
                } else {
                    0.0
                }
            })
            .collect();
        let mut work = CMatrix::from_fn(n, n, |i, j| a[(i, j)] * (scale[i] * scale[j]));
        let mut perm: Vec<usize> = (0..n).collect();
        let mut rank = 0;
        for k in 0..n {
            let (pivot, pivot_value) = (k..n)
                .map(|i| (i, work[(i, i)].re))
                .fold((k, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot_value > tolerance) {
                break;
            }
            if pivot != k {
                work.swap_rows(k, pivot);
                work.swap_columns(k, pivot);
                perm.swap(k, pivot);
            }
            let d = pivot_value.sqrt();
            work[(k, k)] = Complex64::new(d, 0.0);
            for i in k + 1..n {
                work[(i, k)] /= d;
            }
            for j in k + 1..n {
                let ljk = work[(j, k)].conj();
                for i in k + 1..n {
                    let lik = work[(i, k)];
                    work[(i, j)] -= lik * ljk;
                }
            }
            rank = k + 1;
        }
        let factor = CMatrix::from_fn(n, rank, |i, j| if i >= j { work[(i, j)] } else { ZERO });
        Self {
            scale,
            perm,
            factor,
            rank,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn size(&self) -> usize {
        self.scale.len()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.size()
    }

    /// Solves `A x = y`. When `A` is rank deficient the components along
    /// rejected pivots are set to zero.
    pub fn solve(&self, y: &CVector) -> CVector {
        let n = self.size();
        let r = self.rank;
        let rhs: Vec<Complex64> = (0..n).map(|i| y[self.perm[i]] * self.scale[self.perm[i]]).collect();
        let l = &self.factor;
        let mut w = vec![ZERO; r];
        for i in 0..r {
            let mut acc = rhs[i];
            for k in 0..i {
                acc -= l[(i, k)] * w[k];
            }
            w[i] = acc / l[(i, i)];
        }
        for i in (0..r).rev() {
            let mut acc = w[i];
            for k in i + 1..r {
                acc -= l[(k, i)].conj() * w[k];
            }
            w[i] = acc / l[(i, i)].conj();
        }
        let mut x = CVector::zeros(n);
        for (i, &original) in self.perm.iter().take(r).enumerate() {
            x[original] = w[i] * self.scale[original];
        }
        x
    }
}
