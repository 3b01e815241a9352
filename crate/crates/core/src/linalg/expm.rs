//! Matrix exponential: unitary diagonalization when the input is normal
//! (the common case here, skew-Hermitian generators and i-times-unitary
//! Lax generators), otherwise scaling-and-squaring with the degree-13
//! diagonal rational approximant.

use super::factor::Lu;
use super::schur::schur;
use super::ComplexMatrix;
use num_complex::Complex64;

const PADE13_THETA: f64 = 5.371920351148152;
const PADE13_B: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn is_normal(x: &ComplexMatrix) -> bool {
    let xh = x.conj_transpose();
    let comm = (&(x * &xh)) - (&(&xh * x));
    let scale = x.frobenius_norm();
    comm.frobenius_norm() <= 1e-12 * scale * scale + 1e-290
}

fn exp_normal(x: &ComplexMatrix) -> Option<ComplexMatrix> {
    let s = schur(x).ok()?;
    let n = x.dim();
    let mut off = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            off += s.t[(i, j)].norm_sqr();
        }
    }
    if off.sqrt() > 1e-10 * x.frobenius_norm() + 1e-290 {
        return None;
    }
    let mut e = ComplexMatrix::zeros(n);
    for i in 0..n {
        e[(i, i)] = s.t[(i, i)].exp();
    }
    Some(&(&s.q * &e) * &s.q.conj_transpose())
}

fn exp_pade(x: &ComplexMatrix) -> ComplexMatrix {
    let n = x.dim();
    let norm = x.one_norm();
    let s = if norm > PADE13_THETA {
        (norm / PADE13_THETA).log2().ceil() as u32
    } else {
        0
    };
    let a = x.scale_re(0.5f64.powi(s as i32));
    let id = ComplexMatrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let b = |k: usize| Complex64::new(PADE13_B[k], 0.0);
    let w1 = &(&a6.scale(b(13)) + &a4.scale(b(11))) + &a2.scale(b(9));
    let w2 = &(&(&a6.scale(b(7)) + &a4.scale(b(5))) + &a2.scale(b(3))) + &id.scale(b(1));
    let u = &a * &(&(&a6 * &w1) + &w2);
    let z1 = &(&a6.scale(b(12)) + &a4.scale(b(10))) + &a2.scale(b(8));
    let v = &(&(&a6 * &z1) + &(&a6.scale(b(6)) + &a4.scale(b(4)))) + &(&a2.scale(b(2)) + &id.scale(b(0)));
    let num = &v + &u;
    let den = &v - &u;
    let mut f = Lu::factor(&den)
        .expect("exponential denominator is nonsingular within the scaling bound")
        .solve_mat(&num);
    for _ in 0..s {
        f = &f * &f;
    }
    f
}

/// `exp(x)`; exact identity for the zero matrix.
pub fn matrix_exp(x: &ComplexMatrix) -> ComplexMatrix {
    if x.max_abs() == 0.0 {
        return ComplexMatrix::identity(x.dim());
    }
    if is_normal(x) {
        if let Some(e) = exp_normal(x) {
            return e;
        }
    }
    exp_pade(x)
}
