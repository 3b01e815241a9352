//! Command-line front end: build and validate CMV matrices, extract
//! coefficients, run coefficient flows, dress group elements through the
//! free base points, and run the seeded invariant suites.
//!
//! Exit codes: 0 success, 1 check failure or i/o failure, 2 usage or input
//! error, 3 numerical failure (disk exit, rejected step, lost convergence).

use clap::{Parser, Subcommand, ValueEnum};
use cmvflow_core::flows::{FlowState, IntegrateOptions, Trajectory};
use cmvflow_core::io;
use cmvflow_core::sample;
use cmvflow_core::{
    base_point, build_cmv, build_factors, dress, extract_coefficients, free_cmv, in_orbit,
    integrate, run_suite, solve_pair_by_factorization, validate_cmv, CheckConfig, ComplexMatrix,
    Error, OrbitParity, Suite, DISK_MARGIN,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cmvflow", version, about = "CMV matrices, dressing orbits and lattice flows")]
struct Cli {
    /// Matrix size for commands that generate their own data.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// PRNG seed; required by every command that draws random samples.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; written atomically. Payload goes to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Table format for flow output (matrices and reports are always JSON).
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Run sweep trials concurrently (aggregation stays deterministic).
    #[arg(long, global = true)]
    parallel: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Rk4,
    Factorization,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Build a CMV matrix from a coefficients file and validate it.
    Build {
        /// Coefficients JSON: {"n": N, "alphas": [[re, im], ...]}.
        #[arg(long)]
        input: PathBuf,
    },
    /// Extract Verblunsky coefficients from a CMV matrix file.
    Factor {
        /// Matrix JSON: {"n": N, "entries": [[[re, im], ...], ...]}.
        #[arg(long)]
        input: PathBuf,
    },
    /// Integrate the coefficient flow of H_k and emit the sample table.
    Flow {
        /// Initial coefficients file; a seeded random draw when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Index of the generating invariant H_k (k >= 1).
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// Flow horizon; negative values run the flow backwards.
        #[arg(long = "t-end", default_value_t = 1.0)]
        t_end: f64,
        /// Step size (must be positive).
        #[arg(long = "step", alias = "h", default_value_t = 1e-3)]
        step: f64,
        #[arg(long, value_enum, default_value_t = Method::Rk4)]
        method: Method,
        /// Pull every sample back onto the coefficient tori.
        #[arg(long)]
        reproject: bool,
    },
    /// Dress a group element through a free base point, or sweep random ones.
    Dress {
        /// Group element file; required unless --random is given.
        #[arg(long)]
        input: Option<PathBuf>,
        /// "even", "odd", or a path to a matrix file.
        #[arg(long, default_value = "even")]
        base: String,
        /// Dress seeded random elements and summarize torus membership.
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Run seeded invariant suites and emit the residual report.
    Check {
        /// all, structure, poisson, orbits, or flows.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Emit the free CMV matrix (all coefficients zero).
    Free,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 1,
        Error::DiskExit { .. }
        | Error::StepRejected { .. }
        | Error::NoConvergence { .. }
        | Error::IllConditioned { .. } => 3,
        _ => 2,
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type CmdResult = Result<u8, Failure>;

/// Writes the payload to `--out` (atomically) or to stdout.
fn emit(out: &Option<PathBuf>, payload: &str) -> Result<(), Failure> {
    match out {
        Some(path) => io::write_atomic(path, payload).map_err(Failure::from),
        None => {
            print!("{payload}");
            Ok(())
        }
    }
}

/// Summary lines print only when the payload went to a file, so piped
/// output stays clean.
fn note(out: &Option<PathBuf>, line: &str) {
    if out.is_some() {
        println!("{line}");
    }
}

fn require_seed(seed: Option<u64>) -> Result<u64, Failure> {
    seed.ok_or_else(|| usage("--seed is required for commands that draw random samples"))
}

fn size_of(n: Option<usize>) -> Result<usize, Failure> {
    let n = n.unwrap_or(6);
    if n < 2 {
        return Err(usage("--n must be at least 2"));
    }
    Ok(n)
}

fn cmd_build(input: &PathBuf, out: &Option<PathBuf>) -> CmdResult {
    let coeffs = io::read_coefficients_file(input)?;
    let built = build_cmv(&coeffs)?;
    let v = validate_cmv(&built.matrix);
    emit(out, &io::matrix_to_json(&built.matrix))?;
    note(
        out,
        &format!(
            "built n={} CMV matrix: unitarity {:.3e}, worst residual {:.3e}, {}",
            v.n,
            v.unitarity,
            v.residual(),
            if v.pass { "pass" } else { "FAIL" }
        ),
    );
    Ok(if v.pass { 0 } else { 1 })
}

fn cmd_factor(input: &PathBuf, out: &Option<PathBuf>) -> CmdResult {
    let m = io::read_matrix_file(input)?;
    let (_, coeffs) = extract_coefficients(&m)?;
    emit(out, &io::coefficients_to_json(&coeffs))?;
    let worst = coeffs.alphas().iter().map(|a| a.norm()).fold(0.0f64, f64::max);
    note(
        out,
        &format!("extracted {} coefficients, largest modulus {:.6}", coeffs.n() - 1, worst),
    );
    Ok(0)
}

/// Grid times matching the integrator's sampling: 0, then i*step capped at
/// the horizon, signed by the flow direction.
fn sample_times(t_end: f64, step: f64) -> Vec<f64> {
    let dir = t_end.signum();
    let total = t_end.abs();
    let steps = (total / step).ceil() as usize;
    let mut times = vec![0.0];
    for i in 1..=steps {
        let t = (i as f64 * step).min(total);
        if t > *times.last().expect("nonempty") * dir {
            times.push(dir * t);
        }
    }
    times
}

fn conserved_of(m: &ComplexMatrix, jmax: u32) -> Vec<f64> {
    (1..=jmax).map(|j| m.pow(j).trace().re / j as f64).collect()
}

/// Solves the pair flow by factorization on the sample grid and assembles
/// the same table the integrator produces.
fn factorization_trajectory(
    even: &ComplexMatrix,
    odd: &ComplexMatrix,
    k: u32,
    t_end: f64,
    step: f64,
) -> Result<Trajectory, Failure> {
    let n = even.dim();
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        conserved: Vec::new(),
        unitarity: Vec::new(),
        structure: Vec::new(),
        alphas: Some(Vec::new()),
    };
    for t in sample_times(t_end, step) {
        let (e, o) = solve_pair_by_factorization(even, odd, k, t)?;
        let re = in_orbit(&e, OrbitParity::Even);
        let ro = in_orbit(&o, OrbitParity::Odd);
        let mut alphas = Vec::with_capacity(n - 1);
        for j in 0..n - 1 {
            let report = if j % 2 == 0 { &re } else { &ro };
            alphas.push(report.block_alphas[j / 2]);
        }
        traj.times.push(t);
        traj.conserved.push(conserved_of(&(&e * &o), 4));
        traj.unitarity.push(e.unitarity_residual().max(o.unitarity_residual()));
        traj.structure.push(re.residual.max(ro.residual));
        traj.alphas.as_mut().expect("alpha table").push(alphas);
        traj.states.push(FlowState::Pair(e, o));
    }
    Ok(traj)
}

/// The raw coefficient reads must stay inside the disk; the first breach
/// aborts the run the same way the integrator's own curve extraction does.
fn scan_disk(traj: &Trajectory) -> Result<(), Failure> {
    if let Some(rows) = &traj.alphas {
        for (i, row) in rows.iter().enumerate() {
            for (j, a) in row.iter().enumerate() {
                let m = a.norm();
                if !m.is_finite() || 1.0 - m <= DISK_MARGIN {
                    return Err(Error::DiskExit {
                        time: traj.times[i],
                        index: j,
                    }
                    .into());
                }
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_flow(
    input: &Option<PathBuf>,
    k: u32,
    t_end: f64,
    step: f64,
    method: Method,
    reproject: bool,
    n: Option<usize>,
    seed: Option<u64>,
    out: &Option<PathBuf>,
    format: OutputFormat,
) -> CmdResult {
    if k == 0 {
        return Err(usage("--k must be at least 1 (H_0 generates no flow)"));
    }
    if !(step > 0.0) {
        return Err(usage("--step must be positive"));
    }
    let coeffs = match input {
        Some(path) => io::read_coefficients_file(path)?,
        None => {
            let seed = require_seed(seed)?;
            let mut rng = sample::trial_rng(seed, 0);
            sample::random_alphas(&mut rng, size_of(n)?, 0.9)
        }
    };
    let factors = build_factors(&coeffs)?;
    let opts = IntegrateOptions {
        k,
        t_end,
        h: step,
        reproject,
        jmax: 4,
    };
    let state = FlowState::Cmv {
        even: factors.even.clone(),
        odd: factors.odd.clone(),
    };
    let traj = match method {
        Method::Factorization => {
            factorization_trajectory(&factors.even, &factors.odd, k, t_end, step)?
        }
        _ => {
            let traj = integrate(&state, &opts)?;
            scan_disk(&traj)?;
            traj
        }
    };
    if method == Method::Both {
        let (e, o) = solve_pair_by_factorization(&factors.even, &factors.odd, k, t_end)?;
        let last = traj.states.last().expect("at least the initial sample");
        let gap = match last {
            FlowState::Cmv { even, odd } | FlowState::Pair(even, odd) => {
                even.distance(&e).max(odd.distance(&o))
            }
            FlowState::Single(g) => g.distance(&(&e * &o)),
        };
        // Keep stdout clean for the piped payload when no --out is given.
        if out.is_some() {
            println!("terminal discrepancy {gap:.3e}");
        } else {
            eprintln!("terminal discrepancy {gap:.3e}");
        }
    }
    let payload = match format {
        OutputFormat::Csv => io::trajectory_to_csv(&traj, None),
        OutputFormat::Json => io::trajectory_to_json(&traj, None),
    };
    emit(out, &payload)?;
    note(
        out,
        &format!(
            "{} samples to t = {}, worst unitarity {:.3e}, worst structure {:.3e}",
            traj.times.len(),
            traj.times.last().expect("nonempty"),
            traj.unitarity.iter().fold(0.0f64, |a, &b| a.max(b)),
            traj.structure.iter().fold(0.0f64, |a, &b| a.max(b)),
        ),
    );
    Ok(0)
}

enum BaseSpec {
    Builtin(OrbitParity),
    File(ComplexMatrix),
}

fn parse_base(base: &str) -> Result<BaseSpec, Failure> {
    match base {
        "even" => Ok(BaseSpec::Builtin(OrbitParity::Even)),
        "odd" => Ok(BaseSpec::Builtin(OrbitParity::Odd)),
        path => Ok(BaseSpec::File(io::read_matrix_file(&PathBuf::from(path))?)),
    }
}

fn torus_name(parity: OrbitParity) -> &'static str {
    match parity {
        OrbitParity::Even => "T^e",
        OrbitParity::Odd => "T^o",
    }
}

fn cmd_dress(
    input: &Option<PathBuf>,
    base: &str,
    random: bool,
    trials: usize,
    n: Option<usize>,
    seed: Option<u64>,
    out: &Option<PathBuf>,
) -> CmdResult {
    let spec = parse_base(base)?;
    if random {
        let BaseSpec::Builtin(parity) = spec else {
            return Err(usage("--random sweeps need --base even or --base odd"));
        };
        let n = size_of(n)?;
        let seed = require_seed(seed)?;
        let base = base_point(n, parity);
        let mut passed = 0usize;
        let mut worst = 0.0f64;
        if trials == 0 {
            eprintln!("warning: --trials 0, membership sweep passes vacuously");
        }
        for trial in 0..trials as u64 {
            let mut rng = sample::trial_rng(seed, trial);
            let g = sample::random_invertible(&mut rng, n, 1e6);
            let dressed = dress(&g, &base)?;
            let report = in_orbit(&dressed, parity);
            if report.pass {
                passed += 1;
            }
            worst = worst.max(report.residual);
        }
        println!("{passed}/{trials} in {}", torus_name(parity));
        note(out, &format!("worst membership residual {worst:.3e}"));
        if let Some(path) = out {
            let report = format!(
                "{{\"n\": {n}, \"parity\": \"{}\", \"trials\": {trials}, \"passed\": {passed}, \"worst_residual\": {worst:e}}}\n",
                torus_name(parity)
            );
            io::write_atomic(path, &report)?;
        }
        return Ok(if passed == trials { 0 } else { 1 });
    }
    let Some(path) = input else {
        return Err(usage("--input is required unless --random is given"));
    };
    let g = io::read_matrix_file(path)?;
    let (x, parity) = match spec {
        BaseSpec::Builtin(parity) => (base_point(g.dim(), parity), Some(parity)),
        BaseSpec::File(x) => (x, None),
    };
    if x.dim() != g.dim() {
        return Err(usage(format!(
            "size mismatch: element is {}x{0} but base is {1}x{1}",
            g.dim(),
            x.dim()
        )));
    }
    let dressed = dress(&g, &x)?;
    emit(out, &io::matrix_to_json(&dressed))?;
    if let Some(parity) = parity {
        let report = in_orbit(&dressed, parity);
        note(
            out,
            &format!(
                "{} {}: residual {:.3e}",
                if report.pass { "in" } else { "NOT in" },
                torus_name(parity),
                report.residual
            ),
        );
    }
    Ok(0)
}

fn cmd_check(
    suite: &str,
    trials: usize,
    n: Option<usize>,
    seed: Option<u64>,
    parallel: bool,
    out: &Option<PathBuf>,
) -> CmdResult {
    let suite: Suite = suite.parse().map_err(usage)?;
    let cfg = CheckConfig {
        n: size_of(n)?,
        seed: require_seed(seed)?,
        trials,
        parallel,
    };
    let report = run_suite(suite, &cfg);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    emit(out, &report.to_json())?;
    note(
        out,
        &format!("suite {}: {}", report.suite, if report.pass { "pass" } else { "FAIL" }),
    );
    Ok(if report.pass { 0 } else { 1 })
}

fn cmd_free(n: Option<usize>, out: &Option<PathBuf>) -> CmdResult {
    let n = size_of(n)?;
    emit(out, &io::matrix_to_json(&free_cmv(n).matrix))
        .map(|()| 0)
}

fn run(cli: Cli) -> CmdResult {
    match &cli.command {
        Command::Build { input } => cmd_build(input, &cli.out),
        Command::Factor { input } => cmd_factor(input, &cli.out),
        Command::Flow {
            input,
            k,
            t_end,
            step,
            method,
            reproject,
        } => cmd_flow(
            input, *k, *t_end, *step, *method, *reproject, cli.n, cli.seed, &cli.out, cli.format,
        ),
        Command::Dress {
            input,
            base,
            random,
            trials,
        } => cmd_dress(input, base, *random, *trials, cli.n, cli.seed, &cli.out),
        Command::Check { suite, trials } => {
            cmd_check(suite, *trials, cli.n, cli.seed, cli.parallel, &cli.out)
        }
        Command::Free => cmd_free(cli.n, &cli.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
