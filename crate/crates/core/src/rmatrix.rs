//! r-matrix machinery for the splitting `gl(n, C) = k (+) b`: projections,
//! the associated classical r-matrix `J`, the twisted bracket, the
//! imaginary trace pairing, gradients of invariants, the Sklyanin-type
//! bracket on the group, and the dual-group multiplication.
//!
//! `k` is the skew-Hermitian summand, `b` the lower-triangular summand with
//! real diagonal. A diagonal entry `z` splits as `i Im(z)` into `k` and
//! `Re(z)` into `b`; the strict-triangle variants that skip that split are
//! kept only as diagnostics (they are not projections onto the summands).

use crate::linalg::{iwasawa, matrix_exp, ComplexMatrix};
use crate::{Error, Result};
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Projection onto the skew-Hermitian summand along the triangular one.
pub fn project_k(x: &ComplexMatrix) -> ComplexMatrix {
    let n = x.dim();
    ComplexMatrix::from_fn(n, |i, j| {
        if i == j {
            Complex64::new(0.0, x[(i, i)].im)
        } else if j > i {
            x[(i, j)]
        } else {
            -x[(j, i)].conj()
        }
    })
}

/// Projection onto lower-triangular-with-real-diagonal along `k`.
pub fn project_b(x: &ComplexMatrix) -> ComplexMatrix {
    let n = x.dim();
    ComplexMatrix::from_fn(n, |i, j| {
        if i == j {
            Complex64::new(x[(i, i)].re, 0.0)
        } else if j > i {
            Complex64::new(0.0, 0.0)
        } else {
            x[(i, j)] + x[(j, i)].conj()
        }
    })
}

/// Diagnostic variant of [`project_k`] that drops the diagonal entirely;
/// not a projection onto `k` (it kills `i*I`).
pub fn project_k_strict(x: &ComplexMatrix) -> ComplexMatrix {
    let n = x.dim();
    ComplexMatrix::from_fn(n, |i, j| {
        if i == j {
            Complex64::new(0.0, 0.0)
        } else if j > i {
            x[(i, j)]
        } else {
            -x[(j, i)].conj()
        }
    })
}

/// Complement of [`project_k_strict`]; keeps the full (complex) diagonal,
/// so its range sticks out of `b`.
pub fn project_b_strict(x: &ComplexMatrix) -> ComplexMatrix {
    x - &project_k_strict(x)
}

/// The r-matrix `J = project_k - project_b`, an involution.
pub fn j_map(x: &ComplexMatrix) -> ComplexMatrix {
    &project_k(x) - &project_b(x)
}

/// Twisted bracket `[x, y]_J = ([Jx, y] + [x, Jy]) / 2`.
pub fn j_bracket(x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    (&j_map(x).commutator(y) + &x.commutator(&j_map(y))).scale_re(0.5)
}

/// Nondegenerate invariant pairing `(x, y) = Im tr(x y)`.
pub fn pairing(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    let n = x.dim();
    assert_eq!(n, y.dim());
    let mut t = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            t += x[(i, k)] * y[(k, i)];
        }
    }
    t.im
}

/// Residual of the modified Yang-Baxter identity in the convention
/// `[Jx, Jy] - J([Jx, y] + [x, Jy]) = -[x, y]`, i.e. the Frobenius norm of
/// `[Jx, Jy] - J([Jx, y] + [x, Jy]) + [x, y]`.
pub fn mybe_residual(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    let jx = j_map(x);
    let jy = j_map(y);
    let lhs = jx.commutator(&jy);
    let mid = j_map(&(&jx.commutator(y) + &x.commutator(&jy)));
    (&(&lhs - &mid) + &x.commutator(y)).frobenius_norm()
}

/// Hamiltonian functions on the group (or on pairs).
#[derive(Clone)]
pub enum Hamiltonian {
    /// `H_k(g) = Re tr(g^k) / k`
    TracePower(u32),
    /// `H_k(g1, g2) = Re tr((g1 g2)^k) / k`
    PairTracePower(u32),
    /// Arbitrary smooth real-valued function; gradients are numerical.
    Custom(Arc<dyn Fn(&ComplexMatrix) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Hamiltonian::TracePower(k) => write!(f, "TracePower({k})"),
            Hamiltonian::PairTracePower(k) => write!(f, "PairTracePower({k})"),
            Hamiltonian::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Hamiltonian {
    pub fn custom(f: impl Fn(&ComplexMatrix) -> f64 + Send + Sync + 'static) -> Self {
        Hamiltonian::Custom(Arc::new(f))
    }

    pub fn eval(&self, g: &ComplexMatrix) -> Result<f64> {
        match self {
            Hamiltonian::TracePower(k) => {
                if *k == 0 {
                    return Err(Error::InvalidParams("trace power requires k >= 1".into()));
                }
                Ok(g.pow(*k).trace().re / *k as f64)
            }
            Hamiltonian::PairTracePower(_) => Err(Error::InvalidParams(
                "pair Hamiltonian needs two group arguments".into(),
            )),
            Hamiltonian::Custom(f) => Ok(f(g)),
        }
    }

    pub fn eval_pair(&self, g1: &ComplexMatrix, g2: &ComplexMatrix) -> Result<f64> {
        match self {
            Hamiltonian::PairTracePower(k) => Hamiltonian::TracePower(*k).eval(&(g1 * g2)),
            _ => Err(Error::InvalidParams(
                "single-argument Hamiltonian applied to a pair".into(),
            )),
        }
    }
}

/// Which translation defines the gradient: `Left` pairs against
/// `d/dt phi(exp(tX) g)`, `Right` against `d/dt phi(g exp(tX))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientSide {
    Left,
    Right,
}

/// Both gradients of `H_k(g) = Re tr(g^k)/k` coincide and equal `i g^k`.
pub fn grad_trace_power(g: &ComplexMatrix, k: u32) -> Result<ComplexMatrix> {
    if k == 0 {
        return Err(Error::InvalidParams("trace power requires k >= 1".into()));
    }
    Ok(g.pow(k).times_i())
}

// Dual-basis solve for gradients of arbitrary functions. The real basis of
// gl(n, C) is {E_ij, i E_ij}; the Gram matrix of the pairing in that basis
// is assembled once per n and its LU factorization reused.
struct RealLu {
    m: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl RealLu {
    fn factor(m: usize, mut a: Vec<f64>) -> Option<RealLu> {
        let mut piv: Vec<usize> = (0..m).collect();
        for k in 0..m {
            let mut p = k;
            let mut best = a[k * m + k].abs();
            for i in k + 1..m {
                if a[i * m + k].abs() > best {
                    best = a[i * m + k].abs();
                    p = i;
                }
            }
            if best == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..m {
                    a.swap(k * m + j, p * m + j);
                }
                piv.swap(k, p);
            }
            let pivot = a[k * m + k];
            for i in k + 1..m {
                let f = a[i * m + k] / pivot;
                a[i * m + k] = f;
                for j in k + 1..m {
                    a[i * m + j] -= f * a[k * m + j];
                }
            }
        }
        Some(RealLu { m, lu: a, piv })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 1..m {
            for j in 0..i {
                x[i] -= self.lu[i * m + j] * x[j];
            }
        }
        for i in (0..m).rev() {
            for j in i + 1..m {
                x[i] -= self.lu[i * m + j] * x[j];
            }
            x[i] /= self.lu[i * m + i];
        }
        x
    }
}

struct GramTable {
    n: usize,
    lu: RealLu,
}

fn basis_element(n: usize, a: usize) -> ComplexMatrix {
    let pos = a / 2;
    let (i, j) = (pos / n, pos % n);
    let mut m = ComplexMatrix::zeros(n);
    m[(i, j)] = if a % 2 == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, 1.0)
    };
    m
}

impl GramTable {
    fn build(n: usize) -> Result<GramTable> {
        let m = 2 * n * n;
        let mut gram = vec![0.0f64; m * m];
        // pairing of basis elements: tr(E_ij E_lm) = delta_jl delta_mi, so
        // only transposed index pairs interact
        for a in 0..m {
            let ba = basis_element(n, a);
            for b in a..m {
                let bb = basis_element(n, b);
                let v = pairing(&ba, &bb);
                gram[a * m + b] = v;
                gram[b * m + a] = v;
            }
        }
        // crude condition estimate before factoring: the matrix is a signed
        // permutation here, but keep the guard honest for any basis change
        let norm1 = (0..m)
            .map(|j| (0..m).map(|i| gram[i * m + j].abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let lu = RealLu::factor(m, gram).ok_or(Error::IllConditioned { cond: f64::INFINITY })?;
        let mut inv_norm1: f64 = 0.0;
        let mut e = vec![0.0f64; m];
        for j in 0..m {
            e[j] = 1.0;
            let col = lu.solve(&e);
            e[j] = 0.0;
            inv_norm1 = inv_norm1.max(col.iter().map(|v| v.abs()).sum());
        }
        let cond = norm1 * inv_norm1;
        if cond > 1e8 {
            return Err(Error::IllConditioned { cond });
        }
        Ok(GramTable { n, lu })
    }

    fn solve_matrix(&self, rhs: &[f64]) -> ComplexMatrix {
        let c = self.lu.solve(rhs);
        let n = self.n;
        let mut d = ComplexMatrix::zeros(n);
        for (a, &coef) in c.iter().enumerate() {
            if coef != 0.0 {
                let pos = a / 2;
                let (i, j) = (pos / n, pos % n);
                d[(i, j)] += if a % 2 == 0 {
                    Complex64::new(coef, 0.0)
                } else {
                    Complex64::new(0.0, coef)
                };
            }
        }
        d
    }
}

fn gram_table(n: usize) -> Result<Arc<GramTable>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GramTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("gram cache lock");
    if let Some(t) = map.get(&n) {
        return Ok(t.clone());
    }
    let t = Arc::new(GramTable::build(n)?);
    map.insert(n, t.clone());
    Ok(t)
}

const FD_STEP: f64 = 1e-5;

/// Central-difference directional derivative of `phi` at `g` along `x`.
pub fn directional_derivative(
    phi: &Hamiltonian,
    g: &ComplexMatrix,
    x: &ComplexMatrix,
    side: GradientSide,
) -> Result<f64> {
    let step = x.scale_re(FD_STEP);
    let fwd = matrix_exp(&step);
    let bwd = matrix_exp(&(-&step));
    let (gp, gm) = match side {
        GradientSide::Left => (&fwd * g, &bwd * g),
        GradientSide::Right => (g * &fwd, g * &bwd),
    };
    Ok((phi.eval(&gp)? - phi.eval(&gm)?) / (2.0 * FD_STEP))
}

/// Gradient of `phi` at `g` defined by `(grad, x) = d/dt phi(...)` for every
/// basis direction, recovered through the cached Gram factorization.
pub fn numerical_gradient(
    phi: &Hamiltonian,
    g: &ComplexMatrix,
    side: GradientSide,
) -> Result<ComplexMatrix> {
    let n = g.dim();
    let table = gram_table(n)?;
    let m = 2 * n * n;
    let mut rhs = vec![0.0f64; m];
    for (a, slot) in rhs.iter_mut().enumerate() {
        let x = basis_element(n, a);
        *slot = directional_derivative(phi, g, &x, side)?;
    }
    Ok(table.solve_matrix(&rhs))
}

fn gradient(phi: &Hamiltonian, g: &ComplexMatrix, side: GradientSide) -> Result<ComplexMatrix> {
    match phi {
        Hamiltonian::TracePower(k) => grad_trace_power(g, *k),
        Hamiltonian::Custom(_) => numerical_gradient(phi, g, side),
        Hamiltonian::PairTracePower(_) => Err(Error::InvalidParams(
            "pair Hamiltonian has no single-group gradient".into(),
        )),
    }
}

/// Sklyanin-type bracket
/// `{phi, psi}(g) = (J D'phi, D'psi) - (J Dphi, Dpsi)`
/// with `D` the left and `D'` the right gradient.
pub fn sklyanin_bracket(phi: &Hamiltonian, psi: &Hamiltonian, g: &ComplexMatrix) -> Result<f64> {
    let dpr_phi = gradient(phi, g, GradientSide::Right)?;
    let dpr_psi = gradient(psi, g, GradientSide::Right)?;
    let dl_phi = gradient(phi, g, GradientSide::Left)?;
    let dl_psi = gradient(psi, g, GradientSide::Left)?;
    Ok(pairing(&j_map(&dpr_phi), &dpr_psi) - pairing(&j_map(&dl_phi), &dl_psi))
}

/// Dual-group multiplication `g * h = gplus h gminus^-1`. With `g = k b`
/// this is `k h b`, so no inversion is needed.
pub fn dual_multiply(g: &ComplexMatrix, h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let p = iwasawa(g)?;
    Ok(&(&p.k * h) * &p.b)
}
