//! Complex Schur decomposition `A = Q T Q^H` (Q unitary, T upper triangular)
//! via Householder reduction to Hessenberg form followed by explicit
//! single-shift QR iterations with Wilkinson shifts.
//!
//! For normal input the triangular factor collapses to a diagonal, which is
//! what the exponential and the spectral-drift checks rely on.

use super::ComplexMatrix;
use crate::{Error, Result};
use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct Schur {
    pub t: ComplexMatrix,
    pub q: ComplexMatrix,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn phase(z: Complex64) -> Complex64 {
    let n = z.norm();
    if n == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        z / n
    }
}

/// Unitary reduction to upper Hessenberg form: `A = Q H Q^H`.
pub fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.dim();
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);
    if n < 3 {
        return (h, q);
    }
    for k in 0..n - 2 {
        let norm_x = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let shift = phase(v[0]) * norm_x;
        v[0] += shift;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // rows k+1..n : H <- (I - 2 v v^H) H
        for col in 0..n {
            let mut dot = ZERO;
            for (t, i) in (k + 1..n).enumerate() {
                dot += v[t].conj() * h[(i, col)];
            }
            let dot = dot * 2.0;
            for (t, i) in (k + 1..n).enumerate() {
                let upd = v[t] * dot;
                h[(i, col)] -= upd;
            }
        }
        // columns k+1..n : H <- H (I - 2 v v^H)
        for row in 0..n {
            let mut dot = ZERO;
            for (t, j) in (k + 1..n).enumerate() {
                dot += h[(row, j)] * v[t];
            }
            let dot = dot * 2.0;
            for (t, j) in (k + 1..n).enumerate() {
                let upd = dot * v[t].conj();
                h[(row, j)] -= upd;
            }
        }
        for row in 0..n {
            let mut dot = ZERO;
            for (t, j) in (k + 1..n).enumerate() {
                dot += q[(row, j)] * v[t];
            }
            let dot = dot * 2.0;
            for (t, j) in (k + 1..n).enumerate() {
                let upd = dot * v[t].conj();
                q[(row, j)] -= upd;
            }
        }
        // the reflection maps the pivot column onto the subdiagonal entry
        // exactly; entries below it are round-off
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

/// Rotation `G = [[c, s], [-conj(s), c]]` with real `c` mapping `(a, b)` to
/// `(r, 0)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, ZERO);
    }
    let an = a.norm();
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let t = an.hypot(bn);
    (an / t, (a / an) * (b.conj() / t))
}

fn rotate_rows(h: &mut ComplexMatrix, i: usize, c: f64, s: Complex64, col_from: usize) {
    let n = h.dim();
    for col in col_from..n {
        let x = h[(i, col)];
        let y = h[(i + 1, col)];
        h[(i, col)] = c * x + s * y;
        h[(i + 1, col)] = -s.conj() * x + c * y;
    }
}

fn rotate_cols(h: &mut ComplexMatrix, i: usize, c: f64, s: Complex64, row_to: usize) {
    for row in 0..=row_to {
        let x = h[(row, i)];
        let y = h[(row, i + 1)];
        h[(row, i)] = c * x + s.conj() * y;
        h[(row, i + 1)] = -s * x + c * y;
    }
}

fn wilkinson_shift(h: &ComplexMatrix, m: usize) -> Complex64 {
    let a = h[(m - 1, m - 1)];
    let b = h[(m - 1, m)];
    let c = h[(m, m - 1)];
    let d = h[(m, m)];
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let l1 = (a + d) * 0.5 + disc;
    let l2 = (a + d) * 0.5 - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn qr_step(h: &mut ComplexMatrix, q: &mut ComplexMatrix, lo: usize, hi: usize, mu: Complex64) {
    let n = h.dim();
    for i in lo..=hi {
        h[(i, i)] -= mu;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for i in lo..hi {
        let (c, s) = givens(h[(i, i)], h[(i + 1, i)]);
        rotate_rows(h, i, c, s, i);
        h[(i + 1, i)] = ZERO;
        rots.push((c, s));
    }
    for (idx, i) in (lo..hi).enumerate() {
        let (c, s) = rots[idx];
        rotate_cols(h, i, c, s, (i + 1).min(n - 1));
        // accumulate Q <- Q G^H
        for row in 0..n {
            let x = q[(row, i)];
            let y = q[(row, i + 1)];
            q[(row, i)] = c * x + s.conj() * y;
            q[(row, i + 1)] = -s * x + c * y;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += mu;
    }
}

/// Schur decomposition; fails with `NoConvergence` if the iteration budget
/// (40 per eigenvalue) is exhausted.
pub fn schur(a: &ComplexMatrix) -> Result<Schur> {
    if !a.is_finite() {
        return Err(Error::InvalidParams("matrix has non-finite entries".into()));
    }
    let n = a.dim();
    let (mut h, mut q) = hessenberg(a);
    let anorm = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let budget = 40 * n + 60;
    let mut total = 0usize;
    let mut stall = 0usize;
    let mut hi = n - 1;
    while hi > 0 {
        let mut lo = hi;
        loop {
            if lo == 0 {
                break;
            }
            let sub = h[(lo, lo - 1)].norm();
            let scale = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let tol = f64::EPSILON * if scale > 0.0 { scale } else { anorm };
            if sub <= tol {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            stall = 0;
            continue;
        }
        total += 1;
        stall += 1;
        if total > budget {
            return Err(Error::NoConvergence { iterations: budget });
        }
        let mu = if stall % 12 == 0 {
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(&h, hi)
        };
        qr_step(&mut h, &mut q, lo, hi, mu);
    }
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok(Schur { t: h, q })
}

/// Eigenvalues with multiplicity (diagonal of the Schur factor).
pub fn spectrum(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let s = schur(a)?;
    Ok((0..a.dim()).map(|i| s.t[(i, i)]).collect())
}

/// Greedy matching distance between two spectra of equal length: the
/// largest gap after pairing each value with its nearest unused partner.
pub fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for &la in a {
        let mut best = f64::INFINITY;
        let mut best_j = usize::MAX;
        for (j, &lb) in b.iter().enumerate() {
            if !used[j] {
                let d = (la - lb).norm();
                if d < best {
                    best = d;
                    best_j = j;
                }
            }
        }
        used[best_j] = true;
        worst = worst.max(best);
    }
    worst
}
