//! Seeded random inputs for sweeps and tests. All sampling flows through a
//! counter-based ChaCha12 stream so that a `(seed, trial)` pair pins the
//! input exactly, serial or parallel.

use crate::cmv::VerblunskyCoefficients;
use crate::linalg::{self, ComplexMatrix};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Condition-number ceiling for randomly drawn invertible matrices.
pub const MAX_CONDITION: f64 = 1e6;

/// Stream for one trial of a seeded sweep; `trial` selects an independent
/// substream so trials can run in any order or in parallel.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Standard complex Gaussian (unit variance per entry) via Box-Muller.
pub fn gaussian(rng: &mut ChaCha12Rng) -> Complex64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    let r = (-u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(r * th.cos(), r * th.sin())
}

pub fn gaussian_matrix(rng: &mut ChaCha12Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| gaussian(rng))
}

/// Gaussian-entry matrix, redrawn until its one-norm condition estimate is
/// at most `max_cond`.
pub fn random_invertible(rng: &mut ChaCha12Rng, n: usize, max_cond: f64) -> ComplexMatrix {
    loop {
        let g = gaussian_matrix(rng, n);
        if linalg::condition_1(&g) <= max_cond {
            return g;
        }
    }
}

/// Haar-like unitary: the unitary Iwasawa factor of a Gaussian matrix.
pub fn random_unitary(rng: &mut ChaCha12Rng, n: usize) -> ComplexMatrix {
    let g = random_invertible(rng, n, MAX_CONDITION);
    linalg::iwasawa(&g).expect("condition-screened sample factors").k
}

/// Uniform draw from the disk of radius `rmax`.
pub fn disk_point(rng: &mut ChaCha12Rng, rmax: f64) -> Complex64 {
    let r = rmax * rng.gen::<f64>().sqrt();
    let th = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    Complex64::new(r * th.cos(), r * th.sin())
}

/// `n - 1` Verblunsky coefficients drawn uniformly from the disk of radius
/// `rmax` (strictly inside the unit disk).
pub fn random_alphas(rng: &mut ChaCha12Rng, n: usize, rmax: f64) -> VerblunskyCoefficients {
    assert!(n >= 2 && rmax < 1.0);
    let alphas: Vec<Complex64> = (0..n - 1).map(|_| disk_point(rng, rmax)).collect();
    VerblunskyCoefficients::new(alphas).expect("sampled inside the disk")
}

/// Element of the full matrix Lie algebra (no structure).
pub fn random_lie(rng: &mut ChaCha12Rng, n: usize) -> ComplexMatrix {
    gaussian_matrix(rng, n)
}

/// Skew-Hermitian sample (the `k` summand of the splitting).
pub fn random_skew_hermitian(rng: &mut ChaCha12Rng, n: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n);
    (&g - &g.conj_transpose()).scale_re(0.5)
}

/// Lower-triangular sample with real diagonal (the `b` summand).
pub fn random_lower_real_diag(rng: &mut ChaCha12Rng, n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..i {
            m[(i, j)] = gaussian(rng);
        }
        m[(i, i)] = Complex64::new(gaussian(rng).re, 0.0);
    }
    m
}
