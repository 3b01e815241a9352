//! Lax flows generated by the invariants `H_k(g) = Re tr(g^k) / k`: the
//! single-matrix field, the coupled pair field, its restriction to CMV
//! factor pairs, a classical Runge-Kutta integrator with optional structure
//! reprojection, and the exact solutions by Iwasawa factorization.

use crate::cmv::{build_factors, VerblunskyCoefficients};
use crate::dressing::{in_orbit, torus_element, OrbitParity};
use crate::linalg::{iwasawa, matrix_exp, ComplexMatrix};
use crate::rmatrix::project_k;
use crate::{Error, Result, DISK_MARGIN};
use num_complex::Complex64;

/// A point of the phase space being integrated.
#[derive(Clone, Debug)]
pub enum FlowState {
    /// One group element following the Lax equation.
    Single(ComplexMatrix),
    /// A coupled pair; the product of the two follows the single equation.
    Pair(ComplexMatrix, ComplexMatrix),
    /// Even/odd CMV factors, a special pair constrained to the tori.
    Cmv { even: ComplexMatrix, odd: ComplexMatrix },
}

impl FlowState {
    pub fn dim(&self) -> usize {
        match self {
            FlowState::Single(g) => g.dim(),
            FlowState::Pair(a, _) => a.dim(),
            FlowState::Cmv { even, .. } => even.dim(),
        }
    }

    /// The matrix whose spectrum the flow preserves: the element itself, or
    /// the product of the two components.
    pub fn monodromy(&self) -> ComplexMatrix {
        match self {
            FlowState::Single(g) => g.clone(),
            FlowState::Pair(a, b) => a * b,
            FlowState::Cmv { even, odd } => even * odd,
        }
    }
}

/// Lax field of `H_k`: `g A - A g` with `A = project_k(i g^k)`. At unitary
/// `g` the field is tangent to the unitary group.
pub fn vector_field_hk(g: &ComplexMatrix, k: u32) -> ComplexMatrix {
    assert!(k >= 1, "flow index k must be at least 1");
    let a = project_k(&g.pow(k).times_i());
    &(g * &a) - &(&a * g)
}

/// Coupled field on pairs:
/// `(g1 B - A g1, g2 A - B g2)` with `A = project_k(i (g1 g2)^k)` and
/// `B = project_k(i (g2 g1)^k)`. The product rule then gives the single
/// field of the monodromy `g1 g2`.
pub fn vector_field_pair(
    g1: &ComplexMatrix,
    g2: &ComplexMatrix,
    k: u32,
) -> (ComplexMatrix, ComplexMatrix) {
    assert!(k >= 1, "flow index k must be at least 1");
    let a = project_k(&(g1 * g2).pow(k).times_i());
    let b = project_k(&(g2 * g1).pow(k).times_i());
    (
        &(g1 * &b) - &(&a * g1),
        &(g2 * &a) - &(&b * g2),
    )
}

/// Working tolerance for CMV factor membership during flows; integration
/// samples drift off the tori by integrator error, so this sits well above
/// assembly accuracy.
const FLOW_MEMBERSHIP_TOL: f64 = 1e-6;

/// The pair field restricted to CMV factors, with a membership check.
pub fn vector_field_cmv(
    even: &ComplexMatrix,
    odd: &ComplexMatrix,
    k: u32,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if k == 0 {
        return Err(Error::InvalidParams("flow index k must be at least 1".into()));
    }
    for (m, parity) in [(even, OrbitParity::Even), (odd, OrbitParity::Odd)] {
        let report = crate::dressing::in_orbit_with_tol(m, parity, FLOW_MEMBERSHIP_TOL);
        if !report.pass {
            return Err(Error::NotInOrbit {
                parity,
                reason: report
                    .reason
                    .unwrap_or_else(|| format!("residual {:.3e}", report.residual)),
            });
        }
    }
    Ok(vector_field_pair(even, odd, k))
}

/// Integration parameters. `t_end` may be negative to run the flow
/// backwards; sample times then decrease from zero.
#[derive(Clone, Debug)]
pub struct IntegrateOptions {
    /// Index of the generating invariant `H_k`.
    pub k: u32,
    pub t_end: f64,
    /// Step size, always positive.
    pub h: f64,
    /// Pull each sample back to the constraint set: unitary Iwasawa factor
    /// for single/pair states, exact torus rebuild for CMV factors.
    pub reproject: bool,
    /// Number of conserved quantities H_1..H_jmax recorded per sample.
    pub jmax: u32,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            k: 1,
            t_end: 1.0,
            h: 1e-3,
            reproject: false,
            jmax: 4,
        }
    }
}

/// Recorded samples of one integration run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<FlowState>,
    /// `conserved[i][j-1]` is `H_j` of the monodromy at sample `i`.
    pub conserved: Vec<Vec<f64>>,
    /// Worst unitarity residual over the state components.
    pub unitarity: Vec<f64>,
    /// Torus-membership residual for CMV states, zero otherwise.
    pub structure: Vec<f64>,
    /// Raw per-sample coefficient reads for CMV states (before any
    /// reprojection clamp), interleaved even/odd.
    pub alphas: Option<Vec<Vec<Complex64>>>,
}

/// A step is rejected when a residual grows by more than this over its
/// value at the initial sample (1e3 times the working tolerance).
const REJECT_RESIDUAL: f64 = 1e-3;

/// Reprojection clamp radius: just inside the coefficient disk margin so
/// rebuilt blocks are always constructible.
const CLAMP_RADIUS: f64 = 1.0 - 2.0 * DISK_MARGIN;

fn eval_field(state: &FlowState, k: u32, dir: f64) -> Vec<ComplexMatrix> {
    match state {
        FlowState::Single(g) => vec![vector_field_hk(g, k).scale_re(dir)],
        FlowState::Pair(a, b) | FlowState::Cmv { even: a, odd: b } => {
            let (f1, f2) = vector_field_pair(a, b, k);
            vec![f1.scale_re(dir), f2.scale_re(dir)]
        }
    }
}

fn shifted(state: &FlowState, d: &[ComplexMatrix], s: f64) -> FlowState {
    match state {
        FlowState::Single(g) => FlowState::Single(g + &d[0].scale_re(s)),
        FlowState::Pair(a, b) => {
            FlowState::Pair(a + &d[0].scale_re(s), b + &d[1].scale_re(s))
        }
        FlowState::Cmv { even, odd } => FlowState::Cmv {
            even: even + &d[0].scale_re(s),
            odd: odd + &d[1].scale_re(s),
        },
    }
}

fn rk4_step(state: &FlowState, k: u32, dir: f64, h: f64) -> FlowState {
    let k1 = eval_field(state, k, dir);
    let k2 = eval_field(&shifted(state, &k1, h / 2.0), k, dir);
    let k3 = eval_field(&shifted(state, &k2, h / 2.0), k, dir);
    let k4 = eval_field(&shifted(state, &k3, h), k, dir);
    let combined: Vec<ComplexMatrix> = (0..k1.len())
        .map(|i| &(&k1[i] + &k4[i]) + &(&k2[i] + &k3[i]).scale_re(2.0))
        .collect();
    shifted(state, &combined, h / 6.0)
}

fn clamp_to_disk(a: Complex64) -> Complex64 {
    let m = a.norm();
    if m > CLAMP_RADIUS {
        a * (CLAMP_RADIUS / m)
    } else {
        a
    }
}

fn rebuild_torus(m: &ComplexMatrix, parity: OrbitParity) -> Result<ComplexMatrix> {
    let clamped: Vec<Complex64> = in_orbit(m, parity)
        .block_alphas
        .iter()
        .map(|&a| clamp_to_disk(a))
        .collect();
    torus_element(m.dim(), parity, &clamped)
}

fn reproject(state: &FlowState) -> Result<FlowState> {
    Ok(match state {
        FlowState::Single(g) => FlowState::Single(iwasawa(g)?.k),
        FlowState::Pair(a, b) => FlowState::Pair(iwasawa(a)?.k, iwasawa(b)?.k),
        FlowState::Cmv { even, odd } => FlowState::Cmv {
            even: rebuild_torus(even, OrbitParity::Even)?,
            odd: rebuild_torus(odd, OrbitParity::Odd)?,
        },
    })
}

fn unitarity_of(state: &FlowState) -> f64 {
    match state {
        FlowState::Single(g) => g.unitarity_residual(),
        FlowState::Pair(a, b) | FlowState::Cmv { even: a, odd: b } => {
            a.unitarity_residual().max(b.unitarity_residual())
        }
    }
}

/// Interleaved raw coefficient reads and the joint membership residual of a
/// CMV factor pair.
fn cmv_reads(even: &ComplexMatrix, odd: &ComplexMatrix) -> (f64, Vec<Complex64>) {
    let re = in_orbit(even, OrbitParity::Even);
    let ro = in_orbit(odd, OrbitParity::Odd);
    let total = re.block_alphas.len() + ro.block_alphas.len();
    let alphas = (0..total)
        .map(|i| {
            if i % 2 == 0 {
                re.block_alphas[i / 2]
            } else {
                ro.block_alphas[i / 2]
            }
        })
        .collect();
    (re.residual.max(ro.residual), alphas)
}

fn conserved_values(monodromy: &ComplexMatrix, jmax: u32) -> Vec<f64> {
    let mut values = Vec::with_capacity(jmax as usize);
    let mut p = ComplexMatrix::identity(monodromy.dim());
    for j in 1..=jmax {
        p = &p * monodromy;
        values.push(p.trace().re / j as f64);
    }
    values
}

/// Classical fixed-step 4th-order Runge-Kutta on the appropriate field.
/// Records every accepted step (plus the initial state); the final partial
/// step is shortened to land exactly on `t_end`.
pub fn integrate(state: &FlowState, opts: &IntegrateOptions) -> Result<Trajectory> {
    if opts.k == 0 {
        return Err(Error::InvalidParams("flow index k must be at least 1".into()));
    }
    if !(opts.h > 0.0) || !opts.h.is_finite() {
        return Err(Error::InvalidParams("step size must be positive".into()));
    }
    if !opts.t_end.is_finite() {
        return Err(Error::InvalidParams("t_end must be finite".into()));
    }
    if let FlowState::Cmv { even, odd } = state {
        // fail early instead of integrating garbage factors
        vector_field_cmv(even, odd, opts.k)?;
    }
    let is_cmv = matches!(state, FlowState::Cmv { .. });
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        conserved: Vec::new(),
        unitarity: Vec::new(),
        structure: Vec::new(),
        alphas: if is_cmv { Some(Vec::new()) } else { None },
    };
    let record = |time: f64, s: &FlowState, traj: &mut Trajectory| {
        let unit = unitarity_of(s);
        let structure = if let FlowState::Cmv { even, odd } = s {
            let (residual, alphas) = cmv_reads(even, odd);
            traj.alphas.as_mut().expect("cmv trajectory").push(alphas);
            residual
        } else {
            0.0
        };
        traj.times.push(time);
        traj.states.push(s.clone());
        traj.conserved.push(conserved_values(&s.monodromy(), opts.jmax));
        traj.unitarity.push(unit);
        traj.structure.push(structure);
        (unit, structure)
    };
    let (unit0, struct0) = record(0.0, state, &mut traj);
    if opts.t_end == 0.0 {
        return Ok(traj);
    }
    let dir = opts.t_end.signum();
    let total = opts.t_end.abs();
    let steps = (total / opts.h).ceil() as usize;
    let mut current = state.clone();
    for i in 0..steps {
        let t0 = i as f64 * opts.h;
        let s = (total - t0).min(opts.h);
        if s <= 0.0 {
            break;
        }
        current = rk4_step(&current, opts.k, dir, s);
        if opts.reproject {
            current = reproject(&current)?;
        }
        let time = dir * (t0 + s).min(total);
        let (unit, structure) = record(time, &current, &mut traj);
        let growth = (unit - unit0).max(structure - struct0);
        if growth > REJECT_RESIDUAL {
            return Err(Error::StepRejected {
                time,
                residual: growth,
            });
        }
    }
    Ok(traj)
}

fn require_unitary(g: &ComplexMatrix, what: &str) -> Result<()> {
    let r = g.unitarity_residual();
    if r > 1e-8 {
        return Err(Error::InvalidParams(format!(
            "{what} must be unitary (residual {r:.3e})"
        )));
    }
    Ok(())
}

/// Exact solution of the Lax equation by factorization:
/// `g(t) = u(t)^-1 g0 u(t)` where `u(t)` is the unitary Iwasawa factor of
/// `exp(t i g0^k)`. The generator is normal, so the exponential goes through
/// a spectral decomposition and long times are safe.
pub fn solve_by_factorization(g0: &ComplexMatrix, k: u32, t: f64) -> Result<ComplexMatrix> {
    if k == 0 {
        return Err(Error::InvalidParams("flow index k must be at least 1".into()));
    }
    require_unitary(g0, "initial state")?;
    let u = iwasawa(&matrix_exp(&g0.pow(k).times_i().scale_re(t)))?.k;
    Ok(&(&u.conj_transpose() * g0) * &u)
}

/// Factorization solution of the pair system:
/// `(u(t)^-1 g1 v(t), v(t)^-1 g2 u(t))` with `u, v` the unitary factors of
/// `exp(t i (g1 g2)^k)` and `exp(t i (g2 g1)^k)`. The formula is validated
/// against the integrator rather than quoted; its product reproduces the
/// single-matrix solution of the monodromy exactly.
pub fn solve_pair_by_factorization(
    g1: &ComplexMatrix,
    g2: &ComplexMatrix,
    k: u32,
    t: f64,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if k == 0 {
        return Err(Error::InvalidParams("flow index k must be at least 1".into()));
    }
    require_unitary(g1, "first component")?;
    require_unitary(g2, "second component")?;
    let u = iwasawa(&matrix_exp(&(g1 * g2).pow(k).times_i().scale_re(t)))?.k;
    let v = iwasawa(&matrix_exp(&(g2 * g1).pow(k).times_i().scale_re(t)))?.k;
    Ok((
        &(&u.conj_transpose() * g1) * &v,
        &(&v.conj_transpose() * g2) * &u,
    ))
}

/// Integrates the CMV factor flow with reprojection and returns the
/// coefficient curve. Fails with `DiskExit` the moment a raw coefficient
/// read reaches the disk margin.
pub fn verblunsky_trajectory(
    alpha0: &VerblunskyCoefficients,
    k: u32,
    t_end: f64,
    h: f64,
) -> Result<Vec<(f64, VerblunskyCoefficients)>> {
    let factors = build_factors(alpha0)?;
    let traj = integrate(
        &FlowState::Cmv {
            even: factors.even,
            odd: factors.odd,
        },
        &IntegrateOptions {
            k,
            t_end,
            h,
            reproject: true,
            jmax: 0,
        },
    )?;
    let alphas = traj.alphas.expect("cmv trajectory records coefficients");
    let mut curve = Vec::with_capacity(traj.times.len());
    for (i, raw) in alphas.into_iter().enumerate() {
        let time = traj.times[i];
        for (j, a) in raw.iter().enumerate() {
            let m = a.norm();
            if !m.is_finite() || 1.0 - m <= DISK_MARGIN {
                return Err(Error::DiskExit { time, index: j });
            }
        }
        curve.push((time, VerblunskyCoefficients::new(raw)?));
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmv::free_cmv;
    use crate::linalg::{spectrum, spectrum_distance};
    use crate::rmatrix::{sklyanin_bracket, Hamiltonian};
    use crate::sample;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn field_vanishes_at_identity_and_diagonal_unitaries() {
        for k in 1..=3 {
            assert_eq!(vector_field_hk(&ComplexMatrix::identity(4), k).frobenius_norm(), 0.0);
        }
        let d = ComplexMatrix::from_fn(4, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, 0.7 * i as f64 + 0.3)
            } else {
                c(0.0, 0.0)
            }
        });
        assert_eq!(vector_field_hk(&d, 2).frobenius_norm(), 0.0);
    }

    #[test]
    fn field_is_tangent_to_the_unitary_group() {
        let mut rng = sample::trial_rng(30, 0);
        for _ in 0..10 {
            let g = sample::random_unitary(&mut rng, 5);
            for k in 1..=3 {
                let v = vector_field_hk(&g, k);
                let r = (&(&v * &g.conj_transpose()) + &(&g * &v.conj_transpose()))
                    .frobenius_norm();
                assert!(r < 1e-13, "tangency residual {r}");
            }
        }
    }

    #[test]
    fn pair_field_obeys_the_product_rule() {
        let mut rng = sample::trial_rng(31, 0);
        for _ in 0..10 {
            let g1 = sample::random_unitary(&mut rng, 5);
            let g2 = sample::random_unitary(&mut rng, 5);
            for k in 1..=2 {
                let (f1, f2) = vector_field_pair(&g1, &g2, k);
                let lhs = &(&f1 * &g2) + &(&g1 * &f2);
                let rhs = vector_field_hk(&(&g1 * &g2), k);
                assert!(lhs.distance(&rhs) < 1e-12 * (1.0 + rhs.frobenius_norm()));
            }
        }
    }

    #[test]
    fn cmv_field_at_zero_coefficients_is_the_phase_drift() {
        // at alpha = 0, n = 4, k = 1 the even factor moves at rate i*I and
        // the odd factor is momentarily stationary; the free CMV matrix is
        // not a fixed point of the flow
        let f = free_cmv(4).factors;
        let (fe, fo) = vector_field_cmv(&f.even, &f.odd, 1).unwrap();
        assert!(fe.distance(&ComplexMatrix::identity(4).times_i()) < 1e-14);
        assert!(fo.frobenius_norm() < 1e-14);
        // the product consequently drifts at rate i * odd
        let (e, o) = (&f.even, &f.odd);
        let product_dot = &(&fe * o) + &(e * &fo);
        assert!(product_dot.distance(&o.times_i()) < 1e-14);
    }

    #[test]
    fn cmv_field_matches_the_monodromy_field() {
        let mut rng = sample::trial_rng(32, 0);
        let coeffs = sample::random_alphas(&mut rng, 6, 0.8);
        let f = build_factors(&coeffs).unwrap();
        for k in 1..=2 {
            let (fe, fo) = vector_field_cmv(&f.even, &f.odd, k).unwrap();
            let lhs = &(&fe * &f.odd) + &(&f.even * &fo);
            let rhs = vector_field_hk(&(&f.even * &f.odd), k);
            assert!(lhs.distance(&rhs) < 1e-12);
        }
        assert!(matches!(
            vector_field_cmv(&f.even, &f.odd, 0),
            Err(Error::InvalidParams(_))
        ));
        // a generic unitary is not a torus pair
        let u = sample::random_unitary(&mut rng, 6);
        assert!(matches!(
            vector_field_cmv(&u, &f.odd, 1),
            Err(Error::NotInOrbit { .. })
        ));
    }

    #[test]
    fn flow_matches_half_the_sklyanin_bracket() {
        // along the H_1 flow, d(psi)/dt = {H_1, psi} / 2 in this bracket
        // normalization; psi is linear in the entries so its derivative
        // along the field is an exact read
        let g = free_cmv(4).matrix;
        let v = vector_field_hk(&g, 1);
        let read = |m: &ComplexMatrix| m[(0, 0)].im + 0.7 * m[(1, 2)].re;
        let psi = Hamiltonian::custom(move |m: &ComplexMatrix| m[(0, 0)].im + 0.7 * m[(1, 2)].re);
        let lhs = read(&v);
        let rhs = 0.5 * sklyanin_bracket(&Hamiltonian::TracePower(1), &psi, &g).unwrap();
        assert!(
            (lhs - rhs).abs() < 1e-5 * (1.0 + lhs.abs()),
            "flow reads {lhs}, bracket gives {rhs}"
        );
        assert!(lhs.abs() > 1e-3, "test observable should not be stationary");
    }

    #[test]
    fn identity_is_a_fixed_point_of_integration() {
        let traj = integrate(
            &FlowState::Single(ComplexMatrix::identity(4)),
            &IntegrateOptions {
                k: 2,
                t_end: 0.2,
                h: 1e-2,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(traj.times.len(), 21);
        for s in &traj.states {
            match s {
                FlowState::Single(g) => {
                    assert!(g.distance(&ComplexMatrix::identity(4)) == 0.0)
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn zero_horizon_returns_the_single_initial_sample() {
        let g = free_cmv(3).matrix;
        let traj = integrate(
            &FlowState::Single(g.clone()),
            &IntegrateOptions {
                t_end: 0.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(traj.times, vec![0.0]);
        assert_eq!(traj.conserved[0].len(), 4);
        match &traj.states[0] {
            FlowState::Single(m) => assert!(m.distance(&g) == 0.0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn integration_conserves_invariants_spectrum_and_unitarity() {
        let mut rng = sample::trial_rng(33, 0);
        let coeffs = sample::random_alphas(&mut rng, 5, 0.7);
        let g0 = crate::build_cmv(&coeffs).unwrap().matrix;
        let traj = integrate(
            &FlowState::Single(g0.clone()),
            &IntegrateOptions {
                k: 1,
                t_end: 0.4,
                h: 1e-3,
                ..Default::default()
            },
        )
        .unwrap();
        let last = traj.times.len() - 1;
        for j in 0..4 {
            let drift = (traj.conserved[last][j] - traj.conserved[0][j]).abs();
            assert!(drift < 1e-10, "H_{} drift {drift:.3e}", j + 1);
        }
        assert!(traj.unitarity[last] < 1e-10);
        let s0 = spectrum(&g0).unwrap();
        let st = match &traj.states[last] {
            FlowState::Single(g) => spectrum(g).unwrap(),
            _ => unreachable!(),
        };
        assert!(spectrum_distance(&s0, &st) < 1e-9);
    }

    #[test]
    fn reprojection_keeps_cmv_samples_exactly_on_the_tori() {
        let mut rng = sample::trial_rng(34, 0);
        let coeffs = sample::random_alphas(&mut rng, 4, 0.6);
        let f = build_factors(&coeffs).unwrap();
        let traj = integrate(
            &FlowState::Cmv {
                even: f.even,
                odd: f.odd,
            },
            &IntegrateOptions {
                k: 1,
                t_end: 0.3,
                h: 1e-3,
                reproject: true,
                jmax: 2,
            },
        )
        .unwrap();
        let last = traj.times.len() - 1;
        assert!(traj.structure[last] < 1e-12);
        assert!(traj.unitarity[last] < 1e-12);
        let alphas = traj.alphas.as_ref().unwrap();
        assert_eq!(alphas[0].len(), 3);
        for j in 0..2 {
            let drift = (traj.conserved[last][j] - traj.conserved[0][j]).abs();
            assert!(drift < 1e-10);
        }
    }

    #[test]
    fn factorization_solution_fixed_points_and_time_zero() {
        let g = free_cmv(5).matrix;
        assert!(solve_by_factorization(&g, 1, 0.0).unwrap().distance(&g) < 1e-13);
        let d = ComplexMatrix::from_fn(4, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, 1.1 * i as f64 - 0.4)
            } else {
                c(0.0, 0.0)
            }
        });
        let moved = solve_by_factorization(&d, 2, 2.3).unwrap();
        assert!(moved.distance(&d) < 1e-12, "diagonal unitary should be fixed");
        // non-unitary inputs are rejected
        let mut rng = sample::trial_rng(35, 0);
        let bad = sample::random_invertible(&mut rng, 4, 1e3);
        assert!(matches!(
            solve_by_factorization(&bad, 1, 1.0),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn factorization_solution_matches_the_integrator() {
        let mut rng = sample::trial_rng(36, 0);
        let coeffs = sample::random_alphas(&mut rng, 4, 0.7);
        let g0 = crate::build_cmv(&coeffs).unwrap().matrix;
        let t = 0.5;
        let exact = solve_by_factorization(&g0, 1, t).unwrap();
        let traj = integrate(
            &FlowState::Single(g0),
            &IntegrateOptions {
                k: 1,
                t_end: t,
                h: 1e-4,
                ..Default::default()
            },
        )
        .unwrap();
        let last = match traj.states.last().unwrap() {
            FlowState::Single(g) => g.clone(),
            _ => unreachable!(),
        };
        assert!(
            exact.distance(&last) < 1e-6,
            "cross-method gap {}",
            exact.distance(&last)
        );
    }

    #[test]
    fn pair_solution_is_consistent_with_the_monodromy_solution() {
        let mut rng = sample::trial_rng(37, 0);
        let coeffs = sample::random_alphas(&mut rng, 5, 0.7);
        let f = build_factors(&coeffs).unwrap();
        for t in [0.0, 0.4, 1.7] {
            let (e, o) = solve_pair_by_factorization(&f.even, &f.odd, 1, t).unwrap();
            let single = solve_by_factorization(&(&f.even * &f.odd), 1, t).unwrap();
            assert!(
                (&e * &o).distance(&single) < 1e-10,
                "t = {t}: {}",
                (&e * &o).distance(&single)
            );
        }
    }

    #[test]
    fn verblunsky_curve_from_zero_drifts_as_derived() {
        // the zero coefficient vector is not stationary: the even-block
        // coefficients move at initial speed -i, the odd ones start at rest
        let curve = verblunsky_trajectory(&VerblunskyCoefficients::zeros(4), 1, 0.1, 1e-3).unwrap();
        let (t, terminal) = curve.last().unwrap();
        assert_eq!(*t, 0.1);
        let a = terminal.alphas();
        assert!((a[0] - c(0.0, -0.1)).norm() < 5e-3, "alpha_0(0.1) = {}", a[0]);
        assert!((a[2] - c(0.0, -0.1)).norm() < 5e-3);
        // cross-method: factorization route gives the same coefficients
        let f = build_factors(&VerblunskyCoefficients::zeros(4)).unwrap();
        let (e, o) = solve_pair_by_factorization(&f.even, &f.odd, 1, 0.1).unwrap();
        let (_, reads) = cmv_reads(&e, &o);
        for (x, y) in terminal.alphas().iter().zip(&reads) {
            assert!((x - y).norm() < 1e-6, "coefficient gap {}", (x - y).norm());
        }
    }

    #[test]
    fn verblunsky_curve_reverses() {
        let mut rng = sample::trial_rng(38, 0);
        let start = sample::random_alphas(&mut rng, 4, 0.5);
        let fwd = verblunsky_trajectory(&start, 1, 0.3, 1e-3).unwrap();
        let (_, mid) = fwd.last().unwrap();
        let back = verblunsky_trajectory(mid, 1, -0.3, 1e-3).unwrap();
        let (tb, end) = back.last().unwrap();
        assert_eq!(*tb, -0.3);
        assert!(end.distance(&start) < 1e-7, "reversal gap {}", end.distance(&start));
    }
}
