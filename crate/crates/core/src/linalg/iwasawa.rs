//! Iwasawa decomposition `g = k b` with `k` unitary and `b` lower triangular
//! with strictly positive real diagonal.
//!
//! The factor pair is unique: `g^H g = b^H b` forces `b^H` to be the
//! upper-triangular positive-diagonal Cholesky-type factor of the Gram
//! matrix, which is computed here as a standard Cholesky after reversing
//! both index orders. One refinement pass (re-factoring the computed `k`)
//! keeps `k` unitary to machine precision even when `cond(g)` approaches
//! the sampler's 1e6 rejection threshold, where the plain Gram-matrix
//! method loses half the digits.

use super::factor::{cholesky_lower, condition_1, invert_lower, solve_right_lower};
use super::ComplexMatrix;
use crate::{Error, Result};

/// Result of [`iwasawa`]: `g = k * b`.
#[derive(Clone, Debug)]
pub struct IwasawaPair {
    pub k: ComplexMatrix,
    pub b: ComplexMatrix,
}

/// Group-level factors `g = gplus * gminus^-1` with `gplus` unitary and
/// `gminus` lower triangular positive-diagonal (`gplus = k`, `gminus = b^-1`).
#[derive(Clone, Debug)]
pub struct GroupFactors {
    pub gplus: ComplexMatrix,
    pub gminus: ComplexMatrix,
}

fn cholesky_pass(g: &ComplexMatrix) -> Result<IwasawaPair> {
    let gram = &g.conj_transpose() * g;
    let l = cholesky_lower(&gram.reversed())?;
    // gram = c c^H with c upper triangular positive-diagonal; b = c^H.
    let b = l.reversed().conj_transpose();
    let k = solve_right_lower(&b, g);
    Ok(IwasawaPair { k, b })
}

/// Iwasawa decomposition via Cholesky of the index-reversed Gram matrix,
/// with one refinement pass on the unitary factor.
pub fn iwasawa(g: &ComplexMatrix) -> Result<IwasawaPair> {
    if !g.is_finite() {
        return Err(Error::InvalidParams("matrix has non-finite entries".into()));
    }
    let n = g.dim();
    if condition_1(g) > 0.1 / (n as f64 * f64::EPSILON) {
        return Err(Error::SingularInput);
    }
    let first = cholesky_pass(g)?;
    let second = cholesky_pass(&first.k)?;
    Ok(IwasawaPair {
        k: second.k,
        b: &second.b * &first.b,
    })
}

/// Modified Gram-Schmidt construction of the same decomposition, kept as an
/// independent cross-check route. Columns are orthonormalized from the last
/// one backwards (column `j` of `g` lies in the span of columns `j..n` of
/// `k`), with one re-orthogonalization sweep.
pub fn iwasawa_gram_schmidt(g: &ComplexMatrix) -> Result<IwasawaPair> {
    let n = g.dim();
    let mut k = ComplexMatrix::zeros(n);
    let mut b = ComplexMatrix::zeros(n);
    for j in (0..n).rev() {
        let mut v: Vec<_> = (0..n).map(|r| g[(r, j)]).collect();
        for _sweep in 0..2 {
            for i in j + 1..n {
                let mut r = num_complex::Complex64::new(0.0, 0.0);
                for t in 0..n {
                    r += k[(t, i)].conj() * v[t];
                }
                b[(i, j)] += r;
                for t in 0..n {
                    let q = k[(t, i)];
                    v[t] -= r * q;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= n as f64 * f64::EPSILON * g.frobenius_norm() {
            return Err(Error::SingularInput);
        }
        b[(j, j)] = num_complex::Complex64::new(norm, 0.0);
        for t in 0..n {
            k[(t, j)] = v[t] / norm;
        }
    }
    Ok(IwasawaPair { k, b })
}

/// Splits `g` as `gplus * gminus^-1` over the unitary/triangular pair.
pub fn group_factors(g: &ComplexMatrix) -> Result<GroupFactors> {
    let pair = iwasawa(g)?;
    Ok(GroupFactors {
        gplus: pair.k,
        gminus: invert_lower(&pair.b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample(n: usize, shift: f64) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, |i, j| {
            c(
                ((2 * i + 5 * j) as f64 * 0.71 + shift).sin() + if i == j { 1.8 } else { 0.0 },
                ((i + 3 * j) as f64 * 0.41 + shift).cos(),
            )
        })
    }

    fn check_shape(p: &IwasawaPair, g: &ComplexMatrix, tol: f64) {
        let n = g.dim();
        assert!(p.k.unitarity_residual() < tol, "k not unitary: {}", p.k.unitarity_residual());
        for i in 0..n {
            assert!(p.b[(i, i)].re > 0.0);
            assert!(p.b[(i, i)].im.abs() < tol);
            for j in i + 1..n {
                assert!(p.b[(i, j)].norm() < tol, "b not lower triangular");
            }
        }
        let res = (&p.k * &p.b).distance(g);
        assert!(res < tol * g.frobenius_norm(), "reconstruction {res}");
    }

    #[test]
    fn factors_reconstruct_and_have_the_right_shape() {
        for n in [1usize, 2, 3, 5, 8] {
            let g = sample(n, 0.3);
            let p = iwasawa(&g).unwrap();
            check_shape(&p, &g, crate::tol_lin(n).max(1e-13));
        }
    }

    #[test]
    fn identity_factors_trivially() {
        let id = ComplexMatrix::identity(4);
        let p = iwasawa(&id).unwrap();
        assert!(p.k.distance(&id) < 1e-15);
        assert!(p.b.distance(&id) < 1e-15);
    }

    #[test]
    fn unitary_input_gives_identity_triangular_factor() {
        let g = sample(5, 1.1);
        let k = iwasawa(&g).unwrap().k;
        let p = iwasawa(&k).unwrap();
        assert!(p.b.distance(&ComplexMatrix::identity(5)) < 1e-13);
        assert!(p.k.distance(&k) < 1e-13);
    }

    #[test]
    fn lower_triangular_positive_input_is_pure_b() {
        let n = 4;
        let l = ComplexMatrix::from_fn(n, |i, j| {
            if j < i {
                c(0.3 * (i as f64), -0.1 * (j as f64 + 1.0))
            } else if i == j {
                c(0.5 + i as f64, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let p = iwasawa(&l).unwrap();
        assert!(p.k.distance(&ComplexMatrix::identity(n)) < 1e-13);
        assert!(p.b.distance(&l) < 1e-13);
    }

    #[test]
    fn two_routes_agree() {
        for n in [2usize, 4, 7] {
            let g = sample(n, 2.6);
            let a = iwasawa(&g).unwrap();
            let b = iwasawa_gram_schmidt(&g).unwrap();
            assert!(a.k.distance(&b.k).max(a.b.distance(&b.b)) < 1e-11);
        }
    }

    #[test]
    fn group_factors_recompose() {
        let g = sample(6, 0.9);
        let f = group_factors(&g).unwrap();
        let lu = super::super::factor::Lu::factor(&f.gminus).unwrap();
        let rec = &f.gplus * &lu.inverse();
        assert!(rec.distance(&g) < 1e-12 * g.frobenius_norm());
    }

    #[test]
    fn singular_input_is_rejected() {
        let mut g = sample(4, 0.0);
        for j in 0..4 {
            g[(3, j)] = g[(0, j)];
        }
        assert!(matches!(iwasawa(&g), Err(Error::SingularInput)));
    }
}
