//! Numerical kernel for finite CMV matrices and their Poisson geometry.
//!
//! The crate builds unitary CMV matrices from Verblunsky coefficients,
//! factors group elements through the Iwasawa decomposition `GL(n, C) = U(n) * B`
//! (`B` lower triangular with positive diagonal), realises the r-matrix
//! bracket attached to that splitting, and drives the associated Lax flows
//! two ways: a classical RK4 integrator and the exact factorization solution.
//! Dressing-orbit routines verify constructively that the orbits through the
//! free CMV factors are exactly the block-diagonal coefficient tori.

pub mod checks;
pub mod cmv;
pub mod dressing;
pub mod flows;
pub mod io;
pub mod linalg;
pub mod rmatrix;
pub mod sample;

pub use checks::{run_suite, CheckConfig, CheckResult, Suite, SuiteReport};
pub use cmv::{
    build_cmv, build_factors, extract_coefficients, free_cmv, theta_block, validate_cmv,
    CmvFactors, CmvMatrix, CmvValidation, ThetaBlock, VerblunskyCoefficients,
};
pub use dressing::{
    base_point, block_count, dress, dress_alt, in_orbit, in_orbit_with_tol, leaf_product_check,
    preimage_even, preimage_odd, torus_element, LeafReport, OrbitParity, OrbitReport,
};
pub use flows::{
    integrate, solve_by_factorization, solve_pair_by_factorization, vector_field_cmv,
    vector_field_hk, vector_field_pair, verblunsky_trajectory, FlowState, IntegrateOptions,
    Trajectory,
};
pub use linalg::{
    group_factors, iwasawa, iwasawa_gram_schmidt, matrix_exp, spectrum, ComplexMatrix,
    GroupFactors, IwasawaPair,
};
pub use rmatrix::{
    dual_multiply, grad_trace_power, j_bracket, j_map, mybe_residual, numerical_gradient, pairing,
    project_b, project_k, sklyanin_bracket, GradientSide, Hamiltonian,
};

/// Working tolerance for linear-algebra residuals at size `n`.
pub fn tol_lin(n: usize) -> f64 {
    128.0 * n as f64 * f64::EPSILON
}

/// Verblunsky coefficients must satisfy `1 - |alpha| > DISK_MARGIN`.
pub const DISK_MARGIN: f64 = 1e-12;

/// Default residual threshold for dressing-orbit membership; dressing an
/// ill-conditioned group element through two Iwasawa factorizations leaves
/// more noise than plain assembly does, so this sits above `tol_lin`.
pub const ORBIT_MEMBERSHIP_TOL: f64 = 1e-10;

/// `1 - |alpha|` below this triggers a near-boundary condition warning.
pub const BOUNDARY_WARNING_MARGIN: f64 = 1e-6;

/// Errors surfaced by the numerical routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input matrix is numerically singular")]
    SingularInput,
    #[error("eigensolver did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("|alpha| = {modulus} violates the open-disk margin 1 - |alpha| > {margin}")]
    OutOfDisk { modulus: f64, margin: f64 },
    #[error("not a CMV matrix: {reason}")]
    NotCmv { reason: String },
    #[error("matrix is not in the {parity:?} orbit: {reason}")]
    NotInOrbit {
        parity: dressing::OrbitParity,
        reason: String,
    },
    #[error("pairing dual-basis system is ill-conditioned (cond ~ {cond:.3e})")]
    IllConditioned { cond: f64 },
    #[error("flow reached the unit-disk boundary at t = {time} (alpha_{index})")]
    DiskExit { time: f64, index: usize },
    #[error("integration step rejected at t = {time}: residual {residual:.3e}")]
    StepRejected { time: f64, residual: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
