//! Independent oracles for the integration tests: characteristic polynomial
//! by trace recursion, polynomial roots by simultaneous iteration, and a
//! naive dense product. None of these share code with the library's own
//! eigensolver or multiplication paths.

use cmvflow_core::ComplexMatrix;
use num_complex::Complex64;

/// Coefficients `c_1..c_n` of the monic characteristic polynomial
/// `lambda^n + c_1 lambda^(n-1) + ... + c_n`, computed by the
/// Faddeev-LeVerrier trace recursion (matrix products and traces only).
pub fn char_poly(a: &ComplexMatrix) -> Vec<Complex64> {
    let n = a.dim();
    let mut coeffs = Vec::with_capacity(n);
    let mut m = ComplexMatrix::identity(n);
    for k in 1..=n {
        let am = a * &m;
        let c = -am.trace() / (k as f64);
        coeffs.push(c);
        m = am;
        for i in 0..n {
            m[(i, i)] += c;
        }
    }
    coeffs
}

/// All roots of the monic polynomial with the given `c_1..c_n`, by
/// Durand-Kerner simultaneous iteration from staggered starting points.
pub fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    let eval = |z: Complex64| {
        let mut p = Complex64::new(1.0, 0.0);
        for &c in coeffs {
            p = p * z + c;
        }
        p
    };
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|j| seed.powu(j as u32 + 1)).collect();
    for _ in 0..500 {
        let mut biggest = 0.0f64;
        for j in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for i in 0..n {
                if i != j {
                    denom *= z[j] - z[i];
                }
            }
            let delta = eval(z[j]) / denom;
            z[j] -= delta;
            biggest = biggest.max(delta.norm());
        }
        if biggest < 1e-14 {
            break;
        }
    }
    z
}

/// Symmetric Hausdorff distance between two multisets of complex numbers.
pub fn set_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one_way = |p: &[Complex64], q: &[Complex64]| {
        p.iter()
            .map(|x| {
                q.iter()
                    .map(|y| (x - y).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Plain triple-loop dense product, independent of the library operator.
pub fn naive_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let n = a.dim();
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for t in 0..n {
                s += a[(i, t)] * b[(t, j)];
            }
            out[(i, j)] = s;
        }
    }
    out
}
