//! Cross-checks of library results against the independent oracles in
//! `common`: eigenvalues against characteristic-polynomial roots, and the
//! assembled CMV product against a naive dense multiply.

mod common;

use cmvflow_core::linalg::spectrum_distance;
use cmvflow_core::{free_cmv, sample, spectrum, ComplexMatrix};
use common::{char_poly, naive_product, poly_roots, set_distance};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn spectrum_of_identity_and_of_a_diagonal_rotation() {
    let eig = spectrum(&ComplexMatrix::identity(3)).unwrap();
    let ones = vec![c(1.0, 0.0); 3];
    assert!(spectrum_distance(&eig, &ones) < 1e-14);

    let mut d = ComplexMatrix::zeros(2);
    d[(0, 0)] = c(0.0, 1.0);
    d[(1, 1)] = c(0.0, -1.0);
    let eig = spectrum(&d).unwrap();
    assert!(spectrum_distance(&eig, &[c(0.0, 1.0), c(0.0, -1.0)]) < 1e-14);
}

#[test]
fn free_cmv_spectrum_matches_the_characteristic_polynomial_roots() {
    let x = free_cmv(4).matrix;

    // The trace recursion gives lambda^4 + 1 (x^4 = -I: the free matrix
    // permutes the basis in a single signed 4-cycle).
    let coeffs = char_poly(&x);
    let expected_coeffs = [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
    for (got, want) in coeffs.iter().zip(expected_coeffs) {
        assert!((got - want).norm() < 1e-14, "characteristic coefficients {coeffs:?}");
    }

    // Roots of lambda^4 + 1: the four primitive eighth roots of unity.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let expected_roots = [c(h, h), c(-h, h), c(-h, -h), c(h, -h)];
    let oracle_roots = poly_roots(&coeffs);
    assert!(
        set_distance(&oracle_roots, &expected_roots) < 1e-12,
        "oracle roots {oracle_roots:?}"
    );

    let eig = spectrum(&x).unwrap();
    assert!(set_distance(&eig, &expected_roots) < 1e-10, "library spectrum {eig:?}");
    for z in &eig {
        assert!((z.norm() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn unitary_spectra_stay_on_the_unit_circle() {
    let mut rng = sample::trial_rng(31, 0);
    for n in [2usize, 4, 6, 9] {
        let u = sample::random_unitary(&mut rng, n);
        let eig = spectrum(&u).unwrap();
        for z in &eig {
            assert!((z.norm() - 1.0).abs() < 1e-10, "n={n} modulus {}", z.norm());
        }
        // The oracle agrees with the library solver on these points too.
        let roots = poly_roots(&char_poly(&u));
        assert!(set_distance(&eig, &roots) < 1e-8, "n={n}");
    }
}

#[test]
fn assembled_cmv_equals_the_naive_factor_product() {
    let mut rng = sample::trial_rng(32, 0);
    let coeffs = sample::random_alphas(&mut rng, 5, 0.95);
    let built = cmvflow_core::build_cmv(&coeffs).unwrap();
    let oracle = naive_product(&built.factors.even, &built.factors.odd);
    assert!(built.matrix.distance(&oracle) < 1e-14);
}
