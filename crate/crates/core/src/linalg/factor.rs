//! Pivoted LU and Cholesky factorizations plus the triangular solves used by
//! the Iwasawa and exponential routines.

use super::ComplexMatrix;
use crate::{Error, Result};
use num_complex::Complex64;

/// LU factorization with partial pivoting, `P A = L U`.
pub struct Lu {
    n: usize,
    lu: ComplexMatrix,
    piv: Vec<usize>,
    swaps: usize,
}

impl Lu {
    pub fn factor(a: &ComplexMatrix) -> Result<Lu> {
        let n = a.dim();
        let mut lu = a.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::SingularInput);
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                piv.swap(k, p);
                swaps += 1;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let m = lu[(i, k)] / pivot;
                lu[(i, k)] = m;
                for j in k + 1..n {
                    let s = lu[(k, j)];
                    lu[(i, j)] -= m * s;
                }
            }
        }
        Ok(Lu { n, lu, piv, swaps })
    }

    pub fn det(&self) -> Complex64 {
        let sign = if self.swaps % 2 == 0 { 1.0 } else { -1.0 };
        (0..self.n).fold(Complex64::new(sign, 0.0), |acc, i| acc * self.lu[(i, i)])
    }

    /// Solves `A x = b` for one right-hand side.
    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x: Vec<Complex64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                let m = self.lu[(i, j)];
                let s = x[j];
                x[i] -= m * s;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let m = self.lu[(i, j)];
                let s = x[j];
                x[i] -= m * s;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    /// Solves `A X = B` column by column.
    pub fn solve_mat(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let n = self.n;
        assert_eq!(b.dim(), n);
        let mut out = ComplexMatrix::zeros(n);
        for j in 0..n {
            let col: Vec<Complex64> = (0..n).map(|i| b[(i, j)]).collect();
            let x = self.solve_vec(&col);
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        out
    }

    pub fn inverse(&self) -> ComplexMatrix {
        self.solve_mat(&ComplexMatrix::identity(self.n))
    }
}

/// Inverse through pivoted LU.
pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(Lu::factor(a)?.inverse())
}

/// One-norm condition estimate `||A||_1 * ||A^-1||_1`; infinite when singular.
pub fn condition_1(a: &ComplexMatrix) -> f64 {
    match Lu::factor(a) {
        Ok(lu) => a.one_norm() * lu.inverse().one_norm(),
        Err(_) => f64::INFINITY,
    }
}

/// Cholesky factor `L` (lower triangular, positive diagonal) of a Hermitian
/// positive-definite matrix: `A = L L^H`. Fails on a non-positive pivot.
pub fn cholesky_lower(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.dim();
    let mut l = ComplexMatrix::zeros(n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::SingularInput);
        }
        let dj = d.sqrt();
        l[(j, j)] = Complex64::new(dj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / dj;
        }
    }
    Ok(l)
}

/// Solves `X L = B` with `L` lower triangular (right division by `L`).
pub fn solve_right_lower(l: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let n = l.dim();
    assert_eq!(b.dim(), n);
    let mut x = ComplexMatrix::zeros(n);
    for r in 0..n {
        // row r of X from the last column backwards: B[r][j] = sum_{k>=j} X[r][k] L[k][j]
        for j in (0..n).rev() {
            let mut s = b[(r, j)];
            for k in j + 1..n {
                s -= x[(r, k)] * l[(k, j)];
            }
            x[(r, j)] = s / l[(j, j)];
        }
    }
    x
}

/// Inverse of a lower-triangular matrix, again lower triangular.
pub fn invert_lower(l: &ComplexMatrix) -> ComplexMatrix {
    solve_right_lower(l, &ComplexMatrix::identity(l.dim()))
}
