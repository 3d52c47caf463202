//! Command-line front end: parses a TOML config (flags override it), runs
//! the solve / condition-check / identity-verification / comparison
//! pipelines, and writes deterministic JSON reports plus a plot-ready CSV.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 config error,
//! 3 prescription conditions failed, 4 solver failure.

use clap::{Parser, Subcommand};
use serde::Deserialize;
use starcurv::report;
use starcurv::solver::{self, AdmissibilityPolicy, InitialGuess, LinearSolver};
use starcurv::{
    psi, verify, PsiSpec64, RadialGraph, ScalarField, SolveError, SolverConfig64, SpaceForm,
    SphereGrid64,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "starcurv",
    about = "Prescribed curvature solver for radial graphs over the sphere in curved space forms",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for reports and CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Grid resolution (nodes on the circle for n=1; latitude rings for n=2,
    /// with 2x longitudes).
    #[arg(long, global = true)]
    resolution: Option<usize>,

    /// Curvature order m (1 <= m <= n).
    #[arg(long, global = true)]
    m: Option<usize>,

    /// Ambient curvature sign: -1 (hyperbolic) or 1 (elliptic).
    #[arg(long = "K", global = true, allow_hyphen_values = true)]
    k: Option<i32>,

    /// Prescription expression in rho/theta/phi, e.g.
    /// "pow(cosh(1.2),2)/pow(sinh(rho),2)".
    #[arg(long, global = true)]
    psi: Option<String>,

    /// Seed for the seeded test fields of verify-identities.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Additionally require strict monotonicity of the prescription.
    #[arg(long = "strict-psi", global = true)]
    strict_psi: Option<bool>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the prescribed curvature equation on the annulus.
    Solve,
    /// Check the barrier and monotonicity conditions on the prescription.
    CheckPsi,
    /// Run the identity suite on seeded test graphs.
    VerifyIdentities,
    /// Fit the scaling relation between two solution CSV files.
    Compare {
        first: PathBuf,
        second: PathBuf,
    },
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    k: Option<i32>,
    n: Option<usize>,
    m: Option<usize>,
    r1: Option<f64>,
    r2: Option<f64>,
    resolution: Option<usize>,
    psi: Option<String>,
    out: Option<String>,
    seed: Option<u64>,
    strict_psi: Option<bool>,
    solver: Option<SolverSection>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    max_newton_iters: Option<usize>,
    newton_tol: Option<f64>,
    damping: Option<f64>,
    min_step: Option<f64>,
    continuation_steps: Option<usize>,
    /// "auto" | "direct-dense" | "iterative-krylov"
    linear_solver: Option<String>,
    /// Sphere radius for the initial guess; omitted = annulus midpoint.
    initial_guess: Option<f64>,
    /// "warn" | "reject"
    admissibility_policy: Option<String>,
}

/// Fully merged run configuration (file values overridden by flags).
struct RunConfig {
    form: SpaceForm,
    n: usize,
    m: usize,
    r1: f64,
    r2: f64,
    resolution: usize,
    psi: Option<String>,
    out: PathBuf,
    seed: u64,
    strict_psi: bool,
    solver: SolverConfig64,
}

enum CliError {
    /// exit 2
    Config(String),
    /// exit 3
    Conditions(String),
    /// exit 4
    Solver(String),
    /// exit 1
    Verification(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) => 2,
            CliError::Conditions(_) => 3,
            CliError::Solver(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m)
            | CliError::Conditions(m)
            | CliError::Solver(m)
            | CliError::Verification(m) => m,
        }
    }
}

fn merge_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let file: FileConfig = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let k = cli.k.or(file.k).unwrap_or(-1);
    let form = SpaceForm::from_k(k)
        .ok_or_else(|| CliError::Config(format!("K must be -1 or 1, got {k}")))?;
    let n = file.n.unwrap_or(1);
    if !(n == 1 || n == 2) {
        return Err(CliError::Config(format!("n must be 1 or 2, got {n}")));
    }
    let m = cli.m.or(file.m).unwrap_or(1);
    if !(1 <= m && m <= n) {
        return Err(CliError::Config(format!("need 1 <= m <= n, got m={m}, n={n}")));
    }
    let r1 = file.r1.unwrap_or(0.8);
    let r2 = file.r2.unwrap_or(match form {
        SpaceForm::Hyperbolic => 1.6,
        SpaceForm::Elliptic => 1.4,
    });
    let bound = form.upper_bound::<f64>();
    if !(0.0 < r1 && r1 < r2 && r2 < bound) {
        return Err(CliError::Config(format!(
            "need 0 < R1 < R2 < {bound:.4} for K={k}, got R1={r1}, R2={r2}"
        )));
    }
    let resolution = cli.resolution.or(file.resolution).unwrap_or(64);
    let section = file.solver.unwrap_or_default();
    let mut solver = SolverConfig64 {
        m,
        ..SolverConfig64::default()
    };
    if let Some(x) = section.max_newton_iters {
        solver.max_newton_iters = x;
    }
    if let Some(x) = section.newton_tol {
        solver.newton_tol = x;
    }
    if let Some(x) = section.damping {
        solver.damping = x;
    }
    if let Some(x) = section.min_step {
        solver.min_step = x;
    }
    if let Some(x) = section.continuation_steps {
        solver.continuation_steps = x;
    }
    if let Some(tag) = &section.linear_solver {
        solver.linear_solver = match tag.as_str() {
            "auto" => LinearSolver::Auto,
            "direct-dense" => LinearSolver::DirectDense,
            "iterative-krylov" => LinearSolver::IterativeKrylov,
            other => {
                return Err(CliError::Config(format!(
                    "unknown linear_solver \"{other}\" (auto | direct-dense | iterative-krylov)"
                )))
            }
        };
    }
    if let Some(r0) = section.initial_guess {
        solver.initial_guess = InitialGuess::Sphere(r0);
    }
    if let Some(tag) = &section.admissibility_policy {
        solver.admissibility_policy = match tag.as_str() {
            "warn" => AdmissibilityPolicy::Warn,
            "reject" => AdmissibilityPolicy::Reject,
            other => {
                return Err(CliError::Config(format!(
                    "unknown admissibility_policy \"{other}\" (warn | reject)"
                )))
            }
        };
    }
    Ok(RunConfig {
        form,
        n,
        m,
        r1,
        r2,
        resolution,
        psi: cli.psi.clone().or(file.psi),
        out: cli
            .out
            .clone()
            .or_else(|| file.out.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out")),
        seed: cli.seed.or(file.seed).unwrap_or(0),
        strict_psi: cli.strict_psi.or(file.strict_psi).unwrap_or(false),
        solver,
    })
}

fn build_psi(cfg: &RunConfig) -> Result<PsiSpec64, CliError> {
    match &cfg.psi {
        Some(src) => {
            let expr = starcurv::Expr::parse(src)
                .map_err(|e| CliError::Config(format!("bad psi expression: {e}")))?;
            Ok(PsiSpec64::closed(expr, cfg.r1, cfg.r2, cfg.m, cfg.n, cfg.form))
        }
        // default: the exactly solvable radial prescription at the midpoint
        None => Ok(PsiSpec64::radial_anchor(
            0.5 * (cfg.r1 + cfg.r2),
            cfg.r1,
            cfg.r2,
            cfg.m,
            cfg.n,
            cfg.form,
        )),
    }
}

fn write_out(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, content)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn build_grid(cfg: &RunConfig) -> Result<SphereGrid64, CliError> {
    SphereGrid64::build(cfg.n, cfg.resolution).map_err(|e| CliError::Config(e.to_string()))
}

fn run_solve(cfg: &RunConfig) -> Result<(), CliError> {
    let grid = build_grid(cfg)?;
    let psi_spec = build_psi(cfg)?;
    if cfg.strict_psi {
        let conditions = psi::check_conditions(&psi_spec, &grid, 0);
        if !conditions.strict_monotone {
            return Err(CliError::Conditions(
                "prescription is not strictly monotone (--strict-psi)".to_string(),
            ));
        }
    }
    let (z, report) = solver::continuation_solve(&grid, &psi_spec, &cfg.solver).map_err(|e| {
        match e {
            SolveError::PsiConditionsFailed(msg) => CliError::Conditions(msg),
            other => CliError::Solver(other.to_string()),
        }
    })?;
    let graph = RadialGraph::new(&grid, cfg.form, z).map_err(|e| CliError::Solver(e.to_string()))?;
    let csv = report::solution_csv(&graph, &psi_spec, cfg.m)
        .map_err(|e| CliError::Solver(e.to_string()))?;
    write_out(&cfg.out, "solution.csv", &csv)?;
    write_out(
        &cfg.out,
        "report.json",
        &report::solve_report_json(&report).render(),
    )?;
    println!(
        "solve: converged={} residual_sup={:.3e} iterations={:?} wall_ms={:.1}",
        report.converged, report.residual_sup, report.iterations, report.wall_time_ms
    );
    if report.converged {
        Ok(())
    } else {
        Err(CliError::Solver(format!(
            "solve did not certify (residual_sup={:.3e}, admissible={}, annulus_ok={})",
            report.residual_sup, report.admissible, report.annulus_ok
        )))
    }
}

fn run_check_psi(cfg: &RunConfig) -> Result<(), CliError> {
    let grid = build_grid(cfg)?;
    let psi_spec = build_psi(cfg)?;
    let conditions = psi::check_conditions(&psi_spec, &grid, 0);
    write_out(
        &cfg.out,
        "conditions.json",
        &report::condition_report_json(&conditions).render(),
    )?;
    println!(
        "check-psi: barrier_low={} barrier_high={} monotone={} strict={}",
        conditions.barrier_low_ok,
        conditions.barrier_high_ok,
        conditions.monotone_ok,
        conditions.strict_monotone
    );
    let ok = conditions.all_ok() && (!cfg.strict_psi || conditions.strict_monotone);
    if ok {
        Ok(())
    } else {
        Err(CliError::Conditions(format!(
            "conditions failed (worst margins: low={:.3e}, high={:.3e}, monotone={:.3e})",
            conditions.barrier_low_margin,
            conditions.barrier_high_margin,
            conditions.monotone_margin
        )))
    }
}

fn run_verify_identities(cfg: &RunConfig) -> Result<(), CliError> {
    let suite = verify::identity_suite(cfg.n, cfg.resolution, cfg.m, cfg.form, cfg.seed)
        .map_err(|e| CliError::Solver(e.to_string()))?;
    write_out(
        &cfg.out,
        "identities.json",
        &report::identity_suite_json(&suite).render(),
    )?;
    for check in &suite.checks {
        println!(
            "identity {}: {} (max_error={:.3e}, tol={:.3e})",
            check.name,
            if check.pass { "pass" } else { "FAIL" },
            check.max_error,
            check.tolerance
        );
    }
    if suite.all_pass {
        Ok(())
    } else {
        Err(CliError::Verification(
            "identity suite reported failures".to_string(),
        ))
    }
}

fn run_compare(cfg: &RunConfig, first: &Path, second: &Path) -> Result<(), CliError> {
    let read = |path: &Path| -> Result<report::CsvSolution, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        report::read_solution_csv(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    };
    let a = read(first)?;
    let b = read(second)?;
    if a.n != b.n || a.z.len() != b.z.len() {
        return Err(CliError::Config(
            "solutions live on different grids".to_string(),
        ));
    }
    let grid = SphereGrid64::build(a.n, a.resolution())
        .map_err(|e| CliError::Config(e.to_string()))?;
    let g1 = RadialGraph::new(&grid, cfg.form, ScalarField(a.z))
        .map_err(|e| CliError::Config(e.to_string()))?;
    let g2 = RadialGraph::new(&grid, cfg.form, ScalarField(b.z))
        .map_err(|e| CliError::Config(e.to_string()))?;
    let tolerance = verify::scaling_tolerance(cfg.solver.newton_tol).max(1e-6);
    let fit = verify::fit_scaling_constant(&g1, &g2, tolerance)
        .map_err(|e| CliError::Config(e.to_string()))?;
    write_out(
        &cfg.out,
        "scaling.json",
        &report::scaling_fit_json(&fit).render(),
    )?;
    println!(
        "compare: c={:.12} residual={:.3e} related={} identical={}",
        fit.c, fit.residual, fit.related, fit.identical
    );
    if fit.related {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "solutions are not related by the scaling (residual {:.3e} > tol {:.3e})",
            fit.residual, fit.tolerance
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = merge_config(&cli).and_then(|cfg| match &cli.command {
        Command::Solve => run_solve(&cfg),
        Command::CheckPsi => run_check_psi(&cfg),
        Command::VerifyIdentities => run_verify_identities(&cfg),
        Command::Compare { first, second } => run_compare(&cfg, first, second),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}
