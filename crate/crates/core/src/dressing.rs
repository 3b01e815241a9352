//! Dressing action of the dual group on unitary matrices and the orbit
//! structure through the free CMV factors: the orbit through the even factor
//! is exactly the torus of even block-diagonal matrices `T^e`, and likewise
//! for the odd factor, with explicit preimages witnessing surjectivity.

use crate::cmv::{self, theta_block};
use crate::linalg::{iwasawa, solve_right_lower, ComplexMatrix, Lu};
use crate::{Error, Result, BOUNDARY_WARNING_MARGIN, ORBIT_MEMBERSHIP_TOL};
use num_complex::Complex64;

/// Which coefficient torus a block-diagonal unitary is tested against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitParity {
    Even,
    Odd,
}

/// Positions of the 2x2 blocks and the fixed scalar entries for a torus of
/// the given parity and dimension.
struct TorusLayout {
    starts: Vec<usize>,
    scalars: Vec<(usize, f64)>,
}

fn torus_layout(n: usize, parity: OrbitParity) -> TorusLayout {
    let mut starts = Vec::new();
    let mut scalars = Vec::new();
    let mut j = match parity {
        OrbitParity::Even => 0,
        OrbitParity::Odd => {
            scalars.push((0, 1.0));
            1
        }
    };
    while j + 1 < n {
        starts.push(j);
        j += 2;
    }
    if j < n {
        scalars.push((n - 1, -1.0));
    }
    TorusLayout { starts, scalars }
}

/// Number of 2x2 blocks in a torus element of the given parity and size
/// (the number of coefficients [`torus_element`] expects).
pub fn block_count(n: usize, parity: OrbitParity) -> usize {
    torus_layout(n, parity).starts.len()
}

/// Base point of the dressing orbit: the even or odd factor of the free CMV
/// matrix (all coefficients zero).
pub fn base_point(n: usize, parity: OrbitParity) -> ComplexMatrix {
    let factors = cmv::free_cmv(n).factors;
    match parity {
        OrbitParity::Even => factors.even,
        OrbitParity::Odd => factors.odd,
    }
}

/// Builds a torus element of the given parity from its block coefficients
/// (one per 2x2 block, ordered by position).
pub fn torus_element(n: usize, parity: OrbitParity, alphas: &[Complex64]) -> Result<ComplexMatrix> {
    let layout = torus_layout(n, parity);
    if alphas.len() != layout.starts.len() {
        return Err(Error::InvalidParams(format!(
            "{:?} torus of dimension {n} has {} blocks, got {} coefficients",
            parity,
            layout.starts.len(),
            alphas.len()
        )));
    }
    let mut m = ComplexMatrix::zeros(n);
    for (&s, &a) in layout.starts.iter().zip(alphas) {
        cmv::place_block(&mut m, s, &theta_block(a)?);
    }
    for &(p, v) in &layout.scalars {
        m[(p, p)] = Complex64::new(v, 0.0);
    }
    Ok(m)
}

/// Dressing transformation `g . x = gplus^-1 x (x^-1 g x)plus` where the
/// subscript is the unitary Iwasawa factor. For unitary `x` the result is
/// unitary again.
pub fn dress(g: &ComplexMatrix, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let xlu = Lu::factor(x)?;
    let m = &xlu.solve_mat(g) * x;
    let kg = iwasawa(g)?.k;
    let km = iwasawa(&m)?.k;
    Ok(Lu::factor(&kg)?.solve_mat(&(x * &km)))
}

/// The same transformation through the triangular factors,
/// `gminus^-1 x (x^-1 g x)minus`; agrees with [`dress`] up to roundoff and
/// serves as a consistency check on both factorizations.
pub fn dress_alt(g: &ComplexMatrix, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let xlu = Lu::factor(x)?;
    let m = &xlu.solve_mat(g) * x;
    let bg = iwasawa(g)?.b;
    let bm = iwasawa(&m)?.b;
    Ok(solve_right_lower(&bm, &(&bg * x)))
}

/// Membership report for a candidate torus element.
#[derive(Clone, Debug)]
pub struct OrbitReport {
    pub parity: OrbitParity,
    pub n: usize,
    /// Largest deviation from the exact block structure.
    pub residual: f64,
    /// Coefficient read off each block's trailing entry, structural or not.
    pub block_alphas: Vec<Complex64>,
    /// Some block sits within [`BOUNDARY_WARNING_MARGIN`] of the unit circle,
    /// where membership is numerically ill-determined.
    pub boundary_warning: bool,
    pub tol: f64,
    pub pass: bool,
    pub reason: Option<String>,
}

/// Checks the block-diagonal torus structure at an explicit tolerance:
/// 2x2 blocks `[[conj(a), r], [r, -a]]` with `|a| < 1`, `r = sqrt(1 - |a|^2)`,
/// the parity-dependent fixed scalars, and zeros elsewhere. The coefficient
/// is read from the trailing block entry and the other three entries are
/// cross-checked against it; the residual is the worst deviation found.
pub fn in_orbit_with_tol(a: &ComplexMatrix, parity: OrbitParity, tol: f64) -> OrbitReport {
    let n = a.dim();
    let layout = torus_layout(n, parity);
    let mut inside = vec![vec![false; n]; n];
    for &s in &layout.starts {
        for di in 0..2 {
            for dj in 0..2 {
                inside[s + di][s + dj] = true;
            }
        }
    }
    for &(p, _) in &layout.scalars {
        inside[p][p] = true;
    }
    let mut residual = 0.0f64;
    let mut reason: Option<String> = None;
    let mut note = |r: f64, what: &dyn Fn() -> String| {
        if r > residual {
            residual = r;
        }
        if r > tol && reason.is_none() {
            reason = Some(what());
        }
    };
    for i in 0..n {
        for j in 0..n {
            if !inside[i][j] {
                let r = a[(i, j)].norm();
                note(r, &|| format!("entry ({i}, {j}) outside the block pattern has modulus {r:.3e}"));
            }
        }
    }
    for &(p, v) in &layout.scalars {
        let r = (a[(p, p)] - Complex64::new(v, 0.0)).norm();
        note(r, &|| format!("scalar entry ({p}, {p}) deviates from {v} by {r:.3e}"));
    }
    let mut block_alphas = Vec::with_capacity(layout.starts.len());
    let mut boundary_warning = false;
    for &s in &layout.starts {
        let alpha = -a[(s + 1, s + 1)];
        block_alphas.push(alpha);
        let modulus = alpha.norm();
        if modulus >= 1.0 {
            boundary_warning = true;
            note(f64::INFINITY, &|| {
                format!("block at {s}: coefficient modulus {modulus} is not inside the unit disk")
            });
            continue;
        }
        let rho = (1.0 - modulus * modulus).sqrt();
        if rho <= BOUNDARY_WARNING_MARGIN {
            boundary_warning = true;
        }
        let dev = (a[(s, s)] - alpha.conj())
            .norm()
            .max((a[(s, s + 1)].re - rho).hypot(a[(s, s + 1)].im))
            .max((a[(s + 1, s)].re - rho).hypot(a[(s + 1, s)].im));
        note(dev, &|| format!("block at {s} deviates from theta form by {dev:.3e}"));
    }
    OrbitReport {
        parity,
        n,
        residual,
        block_alphas,
        boundary_warning,
        tol,
        pass: residual <= tol,
        reason,
    }
}

/// [`in_orbit_with_tol`] at the default membership tolerance.
pub fn in_orbit(a: &ComplexMatrix, parity: OrbitParity) -> OrbitReport {
    in_orbit_with_tol(a, parity, ORBIT_MEMBERSHIP_TOL)
}

fn preimage(target: &ComplexMatrix, parity: OrbitParity) -> Result<ComplexMatrix> {
    let report = in_orbit(target, parity);
    if !report.pass {
        return Err(Error::NotInOrbit {
            parity,
            reason: report
                .reason
                .unwrap_or_else(|| format!("residual {:.3e}", report.residual)),
        });
    }
    let n = target.dim();
    let layout = torus_layout(n, parity);
    let mut g = ComplexMatrix::identity(n);
    for (&s, &alpha) in layout.starts.iter().zip(&report.block_alphas) {
        let rho = (1.0 - alpha.norm_sqr()).sqrt();
        g[(s, s)] = Complex64::new(rho, 0.0);
        g[(s + 1, s)] = -alpha;
    }
    Ok(g)
}

/// Lower-triangular block-diagonal group element whose dressing of the even
/// base point reproduces `target`: blocks `[[rho, 0], [-alpha, 1]]`, scalar
/// positions 1.
pub fn preimage_even(target: &ComplexMatrix) -> Result<ComplexMatrix> {
    preimage(target, OrbitParity::Even)
}

/// Odd-parity counterpart of [`preimage_even`].
pub fn preimage_odd(target: &ComplexMatrix) -> Result<ComplexMatrix> {
    preimage(target, OrbitParity::Odd)
}

/// Joint report for a candidate (even, odd) pair of torus elements.
#[derive(Clone, Debug)]
pub struct LeafReport {
    pub even: OrbitReport,
    pub odd: OrbitReport,
    /// Structural validation of the product, when both memberships hold.
    pub product: Option<cmv::CmvValidation>,
    /// Distance between the given factors and the ones rebuilt from the
    /// coefficients extracted out of the product.
    pub factor_mismatch: f64,
    pub pass: bool,
}

/// Checks that `even` and `odd` lie in their tori, that their product is a
/// CMV matrix, and that extracting its coefficients reproduces the factors.
pub fn leaf_product_check(even: &ComplexMatrix, odd: &ComplexMatrix) -> LeafReport {
    let even_report = in_orbit(even, OrbitParity::Even);
    let odd_report = in_orbit(odd, OrbitParity::Odd);
    let mut product = None;
    let mut factor_mismatch = f64::INFINITY;
    if even_report.pass && odd_report.pass && even.dim() == odd.dim() {
        let m = even * odd;
        let validation = cmv::validate_cmv(&m);
        if validation.pass {
            if let Ok((factors, _)) = cmv::extract_coefficients(&m) {
                factor_mismatch = factors.even.distance(even).max(factors.odd.distance(odd));
            }
        }
        product = Some(validation);
    }
    let n = even.dim();
    let pass = even_report.pass
        && odd_report.pass
        && product.as_ref().map_or(false, |v| v.pass)
        && factor_mismatch <= crate::tol_lin(n);
    LeafReport {
        even: even_report,
        odd: odd_report,
        product,
        factor_mismatch,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use crate::{dual_multiply, free_cmv};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_torus_alphas(
        rng: &mut rand_chacha::ChaCha12Rng,
        n: usize,
        parity: OrbitParity,
    ) -> Vec<Complex64> {
        let count = torus_layout(n, parity).starts.len();
        (0..count).map(|_| sample::disk_point(rng, 0.9)).collect()
    }

    #[test]
    fn base_points_match_free_factors() {
        for n in 2..=7 {
            let f = free_cmv(n).factors;
            assert!(base_point(n, OrbitParity::Even).distance(&f.even) == 0.0);
            assert!(base_point(n, OrbitParity::Odd).distance(&f.odd) == 0.0);
            assert!(in_orbit(&f.even, OrbitParity::Even).pass);
            assert!(in_orbit(&f.odd, OrbitParity::Odd).pass);
            // mismatched parity fails on the leading entry structure
            assert!(!in_orbit(&f.even, OrbitParity::Odd).pass);
        }
    }

    #[test]
    fn odd_torus_in_dimension_two_is_the_single_point() {
        let layout = torus_layout(2, OrbitParity::Odd);
        assert!(layout.starts.is_empty());
        assert_eq!(layout.scalars, vec![(0, 1.0), (1, -1.0)]);
        let x = base_point(2, OrbitParity::Odd);
        assert_eq!(x[(0, 0)], c(1.0, 0.0));
        assert_eq!(x[(1, 1)], c(-1.0, 0.0));
    }

    #[test]
    fn dressing_by_identity_fixes_the_point() {
        let mut rng = sample::trial_rng(20, 0);
        let x = sample::random_unitary(&mut rng, 5);
        let id = ComplexMatrix::identity(5);
        let d = dress(&id, &x).unwrap();
        assert!(d.distance(&x) < 1e-13);
    }

    #[test]
    fn unitary_group_elements_act_trivially() {
        let mut rng = sample::trial_rng(21, 0);
        let g = sample::random_unitary(&mut rng, 4);
        let x = sample::random_unitary(&mut rng, 4);
        let d = dress(&g, &x).unwrap();
        assert!(d.distance(&x) < 1e-12);
    }

    #[test]
    fn two_dressing_expressions_agree_and_preserve_unitarity() {
        let mut rng = sample::trial_rng(22, 0);
        for _ in 0..25 {
            let g = sample::random_invertible(&mut rng, 5, 1e4);
            let x = sample::random_unitary(&mut rng, 5);
            let a = dress(&g, &x).unwrap();
            let b = dress_alt(&g, &x).unwrap();
            assert!(a.distance(&b) < 1e-11, "forms differ by {}", a.distance(&b));
            assert!(a.unitarity_residual() < 1e-12);
        }
    }

    #[test]
    fn dressing_lands_in_the_matching_torus() {
        let mut rng = sample::trial_rng(23, 0);
        for n in 2..=7 {
            for parity in [OrbitParity::Even, OrbitParity::Odd] {
                let x = base_point(n, parity);
                for _ in 0..10 {
                    let g = sample::random_invertible(&mut rng, n, 1e4);
                    let d = dress(&g, &x).unwrap();
                    let report = in_orbit(&d, parity);
                    assert!(
                        report.pass,
                        "n={n} {parity:?}: residual {:.3e} ({:?})",
                        report.residual, report.reason
                    );
                }
            }
        }
    }

    #[test]
    fn preimages_round_trip_seeded_targets() {
        let mut rng = sample::trial_rng(24, 0);
        for n in [4, 5, 6] {
            for parity in [OrbitParity::Even, OrbitParity::Odd] {
                let alphas = random_torus_alphas(&mut rng, n, parity);
                let target = torus_element(n, parity, &alphas).unwrap();
                let g = match parity {
                    OrbitParity::Even => preimage_even(&target).unwrap(),
                    OrbitParity::Odd => preimage_odd(&target).unwrap(),
                };
                let d = dress(&g, &base_point(n, parity)).unwrap();
                assert!(
                    d.distance(&target) < 1e-12,
                    "n={n} {parity:?}: {}",
                    d.distance(&target)
                );
            }
        }
    }

    #[test]
    fn preimage_of_base_point_is_identity() {
        let x = base_point(6, OrbitParity::Even);
        let g = preimage_even(&x).unwrap();
        assert!(g.distance(&ComplexMatrix::identity(6)) == 0.0);
        let y = base_point(5, OrbitParity::Odd);
        assert!(preimage_odd(&y).unwrap().distance(&ComplexMatrix::identity(5)) == 0.0);
    }

    #[test]
    fn preimage_rejects_foreign_matrices() {
        let x = base_point(4, OrbitParity::Even);
        assert!(matches!(
            preimage_odd(&x),
            Err(Error::NotInOrbit {
                parity: OrbitParity::Odd,
                ..
            })
        ));
        let mut rng = sample::trial_rng(25, 0);
        let u = sample::random_unitary(&mut rng, 4);
        assert!(preimage_even(&u).is_err());
    }

    #[test]
    fn membership_near_the_circle_warns() {
        // Any coefficient the assembly margin accepts keeps rho above the
        // warning margin, so a matrix this close to the circle can only
        // arrive from outside (file input); build the block by hand.
        let m = 1.0 - 1e-13;
        let rho = (1.0f64 - m * m).sqrt();
        assert!(rho > 0.0 && rho <= crate::BOUNDARY_WARNING_MARGIN);
        let mut x = torus_element(4, OrbitParity::Even, &[c(0.0, 0.0), c(0.1, 0.2)]).unwrap();
        x[(0, 0)] = c(m, 0.0);
        x[(0, 1)] = c(rho, 0.0);
        x[(1, 0)] = c(rho, 0.0);
        x[(1, 1)] = c(-m, 0.0);
        let report = in_orbit(&x, OrbitParity::Even);
        assert!(report.pass, "{:?}", report.reason);
        assert!(report.boundary_warning);
    }

    #[test]
    fn leaf_product_reconstructs_cmv_factors() {
        let mut rng = sample::trial_rng(26, 0);
        let coeffs = sample::random_alphas(&mut rng, 8, 0.9);
        let built = crate::build_cmv(&coeffs).unwrap();
        let report = leaf_product_check(&built.factors.even, &built.factors.odd);
        assert!(report.pass, "factor mismatch {:.3e}", report.factor_mismatch);
        // free factors multiply to the free CMV matrix
        let free = free_cmv(5);
        let report = leaf_product_check(&free.factors.even, &free.factors.odd);
        assert!(report.pass);
        // two even factors do not form a leaf pair
        let bad = leaf_product_check(&free.factors.even, &free.factors.even);
        assert!(!bad.pass);
        assert!(!bad.odd.pass);
    }

    #[test]
    fn dressing_composes_through_dual_multiplication() {
        // dual multiplication acts contravariantly: dressing by g * h equals
        // dressing by g first, then by h
        let mut rng = sample::trial_rng(27, 0);
        for _ in 0..20 {
            let g = sample::random_invertible(&mut rng, 3, 1e3);
            let h = sample::random_invertible(&mut rng, 3, 1e3);
            let x = sample::random_unitary(&mut rng, 3);
            let joint = dress(&dual_multiply(&g, &h).unwrap(), &x).unwrap();
            let staged = dress(&h, &dress(&g, &x).unwrap()).unwrap();
            assert!(
                joint.distance(&staged) < 1e-10,
                "composition residual {}",
                joint.distance(&staged)
            );
        }
    }
}
