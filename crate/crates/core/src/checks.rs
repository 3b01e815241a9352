//! Seeded invariant suites: machine-checkable residual sweeps over the
//! structural, Poisson, orbit, and flow guarantees of the library. Each
//! suite reports the worst residual per named check against a fixed
//! threshold; reports aggregate deterministically for a given seed and
//! config, with or without parallel trial execution.

use crate::dressing::{self, OrbitParity};
use crate::flows::{self, FlowState, IntegrateOptions};
use crate::linalg::{iwasawa, iwasawa_gram_schmidt, spectrum, spectrum_distance, ComplexMatrix};
use crate::rmatrix::{
    self, directional_derivative, grad_trace_power, j_bracket, j_map, mybe_residual, pairing,
    project_b, project_k, sklyanin_bracket, GradientSide, Hamiltonian,
};
use crate::{cmv, sample};
use rayon::prelude::*;
use serde::Serialize;

/// Which family of invariants to sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Structure,
    Poisson,
    Orbits,
    Flows,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Structure => "structure",
            Suite::Poisson => "poisson",
            Suite::Orbits => "orbits",
            Suite::Flows => "flows",
            Suite::All => "all",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "structure" => Ok(Suite::Structure),
            "poisson" => Ok(Suite::Poisson),
            "orbits" => Ok(Suite::Orbits),
            "flows" => Ok(Suite::Flows),
            "all" => Ok(Suite::All),
            other => Err(format!(
                "unknown suite '{other}' (expected structure, poisson, orbits, flows, or all)"
            )),
        }
    }
}

/// Sweep parameters; the seed fixes every sample drawn.
#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub n: usize,
    pub seed: u64,
    pub trials: usize,
    pub parallel: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            n: 6,
            seed: 1,
            trials: 50,
            parallel: false,
        }
    }
}

/// Worst observed residual for one named invariant.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckResult {
    fn new(name: &str, residual: f64, threshold: f64) -> Self {
        CheckResult {
            name: name.to_string(),
            residual,
            threshold,
            pass: residual <= threshold,
        }
    }
}

/// Full machine-readable outcome of one suite run.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub n: usize,
    pub seed: u64,
    pub trials: usize,
    pub warnings: Vec<String>,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail") + "\n"
    }
}

/// Runs `per_trial` over every trial index and keeps the entrywise maximum
/// of the returned residual vectors. Trial indices seed independent RNG
/// streams, so the aggregate does not depend on execution order.
fn sweep(cfg: &CheckConfig, width: usize, per_trial: impl Fn(u64) -> Vec<f64> + Sync) -> Vec<f64> {
    let outputs: Vec<Vec<f64>> = if cfg.parallel {
        (0..cfg.trials as u64).into_par_iter().map(&per_trial).collect()
    } else {
        (0..cfg.trials as u64).map(&per_trial).collect()
    };
    let mut worst = vec![0.0f64; width];
    for out in outputs {
        debug_assert_eq!(out.len(), width);
        for (w, r) in worst.iter_mut().zip(out) {
            *w = w.max(r);
        }
    }
    worst
}

fn finish(
    suite: Suite,
    cfg: &CheckConfig,
    names_thresholds: &[(&str, f64)],
    residuals: Vec<f64>,
    mut warnings: Vec<String>,
) -> SuiteReport {
    if cfg.trials == 0 {
        warnings.push("trials = 0: every check passes vacuously".to_string());
    }
    let checks: Vec<CheckResult> = names_thresholds
        .iter()
        .zip(residuals)
        .map(|(&(name, thr), r)| CheckResult::new(name, r, thr))
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    SuiteReport {
        suite: suite.name().to_string(),
        n: cfg.n,
        seed: cfg.seed,
        trials: cfg.trials,
        warnings,
        checks,
        pass,
    }
}

const STRUCTURE_CHECKS: [(&str, f64); 6] = [
    ("cmv_unitarity", 1e-12),
    ("cmv_zero_pattern", 1e-14),
    ("cmv_coefficient_roundtrip", 1e-12),
    ("iwasawa_reconstruction", 1e-11),
    ("iwasawa_unitary_factor", 1e-11),
    ("iwasawa_cross_method", 1e-10),
];

fn structure_suite(cfg: &CheckConfig) -> SuiteReport {
    let n = cfg.n;
    let residuals = sweep(cfg, STRUCTURE_CHECKS.len(), |trial| {
        let mut rng = sample::trial_rng(cfg.seed, trial);
        let coeffs = sample::random_alphas(&mut rng, n, 0.95);
        let built = cmv::build_cmv(&coeffs).expect("sampled coefficients are valid");
        let v = cmv::validate_cmv(&built.matrix);
        let roundtrip = match cmv::extract_coefficients(&built.matrix) {
            Ok((_, back)) => back.distance(&coeffs),
            Err(_) => f64::INFINITY,
        };
        let g = sample::random_invertible(&mut rng, n, 1e6);
        let scale = g.frobenius_norm();
        let (recon, unit_k, cross) = match (iwasawa(&g), iwasawa_gram_schmidt(&g)) {
            (Ok(p), Ok(q)) => (
                (&(&p.k * &p.b) - &g).frobenius_norm() / scale,
                p.k.unitarity_residual(),
                p.k.distance(&q.k).max(p.b.distance(&q.b) / scale),
            ),
            _ => (f64::INFINITY, f64::INFINITY, f64::INFINITY),
        };
        vec![
            v.unitarity,
            v.band.max(v.pattern),
            roundtrip,
            recon,
            unit_k,
            cross,
        ]
    });
    finish(Suite::Structure, cfg, &STRUCTURE_CHECKS, residuals, Vec::new())
}

const POISSON_CHECKS: [(&str, f64); 11] = [
    ("projection_split", 1e-14),
    ("j_involution", 1e-14),
    ("j_skew_symmetry", 1e-12),
    ("isotropy_k", 1e-12),
    ("isotropy_b", 1e-12),
    ("mybe", 1e-12),
    ("jacobi", 1e-12),
    ("invariants_in_involution", 1e-10),
    ("dual_identity", 1e-11),
    ("dual_associativity", 1e-11),
    ("gradient_consistency", 1e-5),
];

fn poisson_suite(cfg: &CheckConfig) -> SuiteReport {
    let n = cfg.n;
    let residuals = sweep(cfg, POISSON_CHECKS.len(), |trial| {
        let mut rng = sample::trial_rng(cfg.seed, trial);
        let x = sample::random_lie(&mut rng, n);
        let y = sample::random_lie(&mut rng, n);
        let z = sample::random_lie(&mut rng, n);
        let (nx, ny, nz) = (x.frobenius_norm(), y.frobenius_norm(), z.frobenius_norm());
        let split = (&(&project_k(&x) + &project_b(&x)) - &x).frobenius_norm() / nx;
        let involution = j_map(&j_map(&x)).distance(&x) / nx;
        let skew = (pairing(&j_map(&x), &y) + pairing(&x, &j_map(&y))).abs() / (nx * ny);
        let iso_k = pairing(&project_k(&x), &project_k(&y)).abs() / (nx * ny);
        let iso_b = pairing(&project_b(&x), &project_b(&y)).abs() / (nx * ny);
        let mybe = mybe_residual(&x, &y) / (nx * ny);
        let jacobi = (&(&j_bracket(&x, &j_bracket(&y, &z)) + &j_bracket(&y, &j_bracket(&z, &x)))
            + &j_bracket(&z, &j_bracket(&x, &y)))
            .frobenius_norm()
            / (nx * ny * nz);
        let u = sample::random_unitary(&mut rng, n);
        let mut involution_h = 0.0f64;
        for j in 1..=3u32 {
            for k in (j + 1)..=3u32 {
                let v = sklyanin_bracket(
                    &Hamiltonian::TracePower(j),
                    &Hamiltonian::TracePower(k),
                    &u,
                )
                .expect("trace powers have analytic gradients");
                involution_h = involution_h.max(v.abs());
            }
        }
        let g = sample::random_invertible(&mut rng, n, 1e4);
        let h = sample::random_invertible(&mut rng, n, 1e4);
        let w = sample::random_invertible(&mut rng, n, 1e4);
        let id = ComplexMatrix::identity(n);
        let dual_id = rmatrix::dual_multiply(&g, &id)
            .map(|m| m.distance(&g) / g.frobenius_norm())
            .unwrap_or(f64::INFINITY);
        let assoc = match (rmatrix::dual_multiply(&g, &h), rmatrix::dual_multiply(&h, &w)) {
            (Ok(gh), Ok(hw)) => {
                match (rmatrix::dual_multiply(&gh, &w), rmatrix::dual_multiply(&g, &hw)) {
                    (Ok(l), Ok(r)) => l.distance(&r) / r.frobenius_norm(),
                    _ => f64::INFINITY,
                }
            }
            _ => f64::INFINITY,
        };
        let grad = grad_trace_power(&u, 2).expect("k >= 1");
        let phi = Hamiltonian::TracePower(2);
        let mut gradient_gap = 0.0f64;
        for _ in 0..3 {
            let dir = sample::random_lie(&mut rng, n);
            for side in [GradientSide::Left, GradientSide::Right] {
                let fd = directional_derivative(&phi, &u, &dir, side)
                    .expect("trace powers evaluate everywhere");
                gradient_gap = gradient_gap.max((pairing(&grad, &dir) - fd).abs() / (1.0 + fd.abs()));
            }
        }
        vec![
            split,
            involution,
            skew,
            iso_k,
            iso_b,
            mybe,
            jacobi,
            involution_h,
            dual_id,
            assoc,
            gradient_gap,
        ]
    });
    finish(Suite::Poisson, cfg, &POISSON_CHECKS, residuals, Vec::new())
}

const ORBIT_CHECKS: [(&str, f64); 6] = [
    ("dress_even_membership", 1e-10),
    ("dress_odd_membership", 1e-10),
    ("dress_forms_agreement", 1e-11),
    ("dress_unitarity", 1e-12),
    ("preimage_roundtrip", 1e-12),
    ("leaf_product", 1e-12),
];

fn orbit_suite(cfg: &CheckConfig) -> SuiteReport {
    let n = cfg.n;
    let residuals = sweep(cfg, ORBIT_CHECKS.len(), |trial| {
        let mut rng = sample::trial_rng(cfg.seed, trial);
        let g = sample::random_invertible(&mut rng, n, 1e6);
        let mut membership = [f64::INFINITY; 2];
        let mut forms = 0.0f64;
        let mut unitarity = 0.0f64;
        let mut preimage_gap = 0.0f64;
        for (slot, parity) in [OrbitParity::Even, OrbitParity::Odd].into_iter().enumerate() {
            let base = dressing::base_point(n, parity);
            if let (Ok(a), Ok(b)) = (dressing::dress(&g, &base), dressing::dress_alt(&g, &base)) {
                membership[slot] = dressing::in_orbit(&a, parity).residual;
                forms = forms.max(a.distance(&b));
                unitarity = unitarity.max(a.unitarity_residual());
            }
            let count = dressing::block_count(n, parity);
            let alphas: Vec<_> = (0..count).map(|_| sample::disk_point(&mut rng, 0.9)).collect();
            if count > 0 {
                let target = dressing::torus_element(n, parity, &alphas)
                    .expect("sampled coefficients are inside the disk");
                let pre = match parity {
                    OrbitParity::Even => dressing::preimage_even(&target),
                    OrbitParity::Odd => dressing::preimage_odd(&target),
                };
                match pre.and_then(|p| dressing::dress(&p, &base)) {
                    Ok(back) => preimage_gap = preimage_gap.max(back.distance(&target)),
                    Err(_) => preimage_gap = f64::INFINITY,
                }
            }
        }
        let coeffs = sample::random_alphas(&mut rng, n, 0.9);
        let factors = cmv::build_factors(&coeffs).expect("sampled coefficients are valid");
        let leaf = dressing::leaf_product_check(&factors.even, &factors.odd);
        let leaf_residual = if leaf.pass { leaf.factor_mismatch } else { f64::INFINITY };
        vec![
            membership[0],
            membership[1],
            forms,
            unitarity,
            preimage_gap,
            leaf_residual,
        ]
    });
    finish(Suite::Orbits, cfg, &ORBIT_CHECKS, residuals, Vec::new())
}

const FLOW_CHECKS: [(&str, f64); 9] = [
    ("monodromy_identity", 1e-12),
    ("cmv_product_rule", 1e-12),
    ("tangency", 1e-13),
    ("conservation_drift", 1e-8),
    ("spectrum_drift", 1e-8),
    ("unitarity_drift", 1e-8),
    ("structure_drift", 1e-8),
    ("cross_method_terminal", 1e-6),
    ("pair_product_consistency", 1e-10),
];

/// Pointwise identities sweep over the trials; the integration checks run
/// once on a seed-derived state (they are orders of magnitude slower than
/// a field evaluation).
fn flow_suite(cfg: &CheckConfig) -> SuiteReport {
    let n = cfg.n;
    let pointwise = sweep(cfg, 3, |trial| {
        let mut rng = sample::trial_rng(cfg.seed, trial);
        let g1 = sample::random_unitary(&mut rng, n);
        let g2 = sample::random_unitary(&mut rng, n);
        let mut monodromy = 0.0f64;
        let mut tangency = 0.0f64;
        for k in 1..=2 {
            let (f1, f2) = flows::vector_field_pair(&g1, &g2, k);
            let lhs = &(&f1 * &g2) + &(&g1 * &f2);
            let rhs = flows::vector_field_hk(&(&g1 * &g2), k);
            monodromy = monodromy.max(lhs.distance(&rhs) / (1.0 + rhs.frobenius_norm()));
            let v = flows::vector_field_hk(&g1, k);
            tangency = tangency.max(
                (&(&v * &g1.conj_transpose()) + &(&g1 * &v.conj_transpose())).frobenius_norm(),
            );
        }
        let coeffs = sample::random_alphas(&mut rng, n, 0.9);
        let f = cmv::build_factors(&coeffs).expect("sampled coefficients are valid");
        let (fe, fo) = flows::vector_field_cmv(&f.even, &f.odd, 1)
            .expect("freshly built factors are on the tori");
        let lhs = &(&fe * &f.odd) + &(&f.even * &fo);
        let rhs = flows::vector_field_hk(&(&f.even * &f.odd), 1);
        let product_rule = lhs.distance(&rhs) / (1.0 + rhs.frobenius_norm());
        vec![monodromy, product_rule, tangency]
    });
    let mut residuals = vec![f64::INFINITY; FLOW_CHECKS.len()];
    residuals[..3].copy_from_slice(&pointwise);
    if cfg.trials == 0 {
        for r in residuals.iter_mut().skip(3) {
            *r = 0.0;
        }
    } else {
        let mut rng = sample::trial_rng(cfg.seed, u64::MAX);
        let coeffs = sample::random_alphas(&mut rng, n, 0.8);
        let factors = cmv::build_factors(&coeffs).expect("sampled coefficients are valid");
        let state = FlowState::Cmv {
            even: factors.even.clone(),
            odd: factors.odd.clone(),
        };
        let opts = IntegrateOptions {
            k: 1,
            t_end: 0.25,
            h: 1e-3,
            reproject: false,
            jmax: 4,
        };
        match flows::integrate(&state, &opts) {
            Ok(traj) => {
                let last = traj.times.len() - 1;
                let mut drift = 0.0f64;
                for j in 0..4 {
                    drift = drift.max((traj.conserved[last][j] - traj.conserved[0][j]).abs());
                }
                residuals[3] = drift;
                let m0 = state.monodromy();
                let mt = traj.states[last].monodromy();
                residuals[4] = match (spectrum(&m0), spectrum(&mt)) {
                    (Ok(s0), Ok(st)) => spectrum_distance(&s0, &st),
                    _ => f64::INFINITY,
                };
                residuals[5] = traj.unitarity[last];
                residuals[6] = traj.structure[last];
            }
            Err(_) => {}
        }
        let g0 = &factors.even * &factors.odd;
        let t = 0.5;
        let exact = flows::solve_by_factorization(&g0, 1, t);
        let rk = flows::integrate(
            &FlowState::Single(g0.clone()),
            &IntegrateOptions {
                k: 1,
                t_end: t,
                h: 1e-3,
                reproject: false,
                jmax: 1,
            },
        );
        residuals[7] = match (exact, rk) {
            (Ok(e), Ok(traj)) => match traj.states.last() {
                Some(FlowState::Single(g)) => e.distance(g),
                _ => f64::INFINITY,
            },
            _ => f64::INFINITY,
        };
        residuals[8] = match (
            flows::solve_pair_by_factorization(&factors.even, &factors.odd, 1, t),
            flows::solve_by_factorization(&g0, 1, t),
        ) {
            (Ok((e, o)), Ok(single)) => (&e * &o).distance(&single),
            _ => f64::INFINITY,
        };
    }
    finish(Suite::Flows, cfg, &FLOW_CHECKS, residuals, Vec::new())
}

/// Runs one suite (or all of them) and aggregates the report.
pub fn run_suite(suite: Suite, cfg: &CheckConfig) -> SuiteReport {
    match suite {
        Suite::Structure => structure_suite(cfg),
        Suite::Poisson => poisson_suite(cfg),
        Suite::Orbits => orbit_suite(cfg),
        Suite::Flows => flow_suite(cfg),
        Suite::All => {
            let mut checks = Vec::new();
            let mut warnings = Vec::new();
            for part in [Suite::Structure, Suite::Poisson, Suite::Orbits, Suite::Flows] {
                let mut report = run_suite(part, cfg);
                for c in &mut report.checks {
                    c.name = format!("{}.{}", report.suite, c.name);
                }
                checks.extend(report.checks);
                for w in report.warnings {
                    if !warnings.contains(&w) {
                        warnings.push(w);
                    }
                }
            }
            let pass = checks.iter().all(|c| c.pass);
            SuiteReport {
                suite: Suite::All.name().to_string(),
                n: cfg.n,
                seed: cfg.seed,
                trials: cfg.trials,
                warnings,
                checks,
                pass,
            }
        }
    }
}
