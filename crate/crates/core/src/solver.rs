//! Damped Newton iteration with continuation from an exactly solvable radial
//! prescription, posed in the conformal variable v. The second-order block
//! of the Jacobian is assembled analytically from the negative-ellipticity
//! structure of the linearized operator; the first- and zeroth-order
//! dependence is closed by directional finite differences per stencil entry.

use crate::conformal::{self, ConformalGraph};
use crate::error::{GeomError, SolveError};
use crate::grid::{Mat2, ScalarField, SphereGrid, Vec2};
use crate::linalg::{self, SparseRows};
use crate::psi::{self, PsiSpec};
use crate::scalar::{lit, Real};
use crate::spaceform::SpaceForm;
use crate::symfunc;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearSolver {
    /// Dense LU for coarse problems, Krylov past the size threshold.
    Auto,
    DirectDense,
    IterativeKrylov,
}

/// Unknown-count threshold above which `Auto` switches to Krylov.
pub const DENSE_LIMIT: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmissibilityPolicy {
    /// Record transient losses of admissibility but keep iterating.
    Warn,
    /// Abort the solve when an iterate leaves the cone.
    Reject,
}

#[derive(Debug, Clone)]
pub enum InitialGuess<R> {
    /// Sphere at the annulus midpoint (R₁ + R₂)/2.
    SphereMidpoint,
    Sphere(R),
    Field(Vec<R>),
}

#[derive(Debug, Clone)]
pub struct SolverConfig<R> {
    pub m: usize,
    pub max_newton_iters: usize,
    pub newton_tol: R,
    /// Backtracking factor in (0, 1).
    pub damping: R,
    pub min_step: R,
    pub continuation_steps: usize,
    pub linear_solver: LinearSolver,
    pub initial_guess: InitialGuess<R>,
    pub admissibility_policy: AdmissibilityPolicy,
    /// Require ψ to pass the barrier and monotonicity checks before solving.
    pub require_conditions: bool,
    pub krylov_restart: usize,
    pub krylov_max_outer: usize,
}

impl<R: Real> Default for SolverConfig<R> {
    fn default() -> Self {
        SolverConfig {
            m: 1,
            max_newton_iters: 40,
            newton_tol: lit(1e-11),
            damping: lit(0.5),
            min_step: lit(1e-8),
            continuation_steps: 8,
            linear_solver: LinearSolver::Auto,
            initial_guess: InitialGuess::SphereMidpoint,
            admissibility_policy: AdmissibilityPolicy::Warn,
            require_conditions: true,
            krylov_restart: 60,
            krylov_max_outer: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub converged: bool,
    /// Newton iterations spent in each continuation step.
    pub iterations: Vec<usize>,
    pub residual_sup: f64,
    pub residual_l2: f64,
    pub admissible: bool,
    pub admissibility_warnings: usize,
    pub annulus_ok: bool,
    pub annulus_low_margin: f64,
    pub annulus_high_margin: f64,
    /// Largest eigenvalue of the ellipticity matrix on the final iterate
    /// (negative on admissible solutions).
    pub ellipticity_max: f64,
    /// Wall time of the solve; reported for logging, excluded from the
    /// canonical (byte-deterministic) JSON report.
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone)]
pub struct StepDiagnostics {
    pub residual_before: f64,
    pub residual_after: f64,
    pub step_norm: f64,
    pub line_search_factor: f64,
    pub admissible: bool,
}

/// Pointwise residual Φ(v, ∇'v, ∇'²v) = F_m(a(v)) − ψ̄(u, 2t⁻¹(v)) at one
/// node.
#[allow(clippy::too_many_arguments)]
fn residual_point<R: Real>(
    grid: &SphereGrid<R>,
    form: SpaceForm,
    psi: &PsiSpec<R>,
    m: usize,
    idx: usize,
    val: R,
    grad: Vec2<R>,
    hess: Mat2<R>,
) -> Result<R, GeomError> {
    if !(val > R::zero() && val < R::one()) {
        return Err(GeomError::OutOfRange {
            node: idx,
            value: val.to_f64().unwrap_or(f64::NAN),
        });
    }
    let n = grid.dim();
    let p = conformal::conformal_point(form, n, &grid.e[idx], &grid.e_inv[idx], val, grad, hess, idx)?;
    let s = symfunc::elementary_symmetric(&p.lambda[..n]);
    let rho = lit::<R>(2.0) * form.t_inv(val);
    Ok(s[m] - psi.bar_value(idx, grid.nodes[idx], rho))
}

/// Full residual field of the conformal iterate.
pub fn residual_field<R: Real>(
    grid: &SphereGrid<R>,
    form: SpaceForm,
    psi: &PsiSpec<R>,
    m: usize,
    v: &ScalarField<R>,
) -> Result<ScalarField<R>, GeomError> {
    let (grad, _) = grid.covariant_gradient(v)?;
    let hess = grid.covariant_hessian(v)?;
    let mut out = Vec::with_capacity(grid.node_count());
    for idx in 0..grid.node_count() {
        out.push(residual_point(grid, form, psi, m, idx, v[idx], grad[idx], hess[idx])?);
    }
    Ok(ScalarField(out))
}

/// ∂F_m/∂a as a matrix: identity for m = 1, tr(a)·id − aᵀ for m = 2.
fn fm_matrix_gradient<R: Real>(a: &Mat2<R>, n: usize, m: usize) -> Mat2<R> {
    let mut d = [[R::zero(); 2]; 2];
    match m {
        1 => {
            for i in 0..n {
                d[i][i] = R::one();
            }
        }
        2 => {
            let tr = a[0][0] + a[1][1];
            for i in 0..n {
                for j in 0..n {
                    d[i][j] = -a[j][i];
                    if i == j {
                        d[i][j] = d[i][j] + tr;
                    }
                }
            }
        }
        _ => panic!("fm_matrix_gradient: unsupported m = {m}"),
    }
    d
}

/// Assembles the sparse Jacobian of the residual with respect to the nodal
/// values of v. The ∇'² channel is analytic: ∂Φ/∂∇'_{ij}v =
/// −(v/(qW))·(ĝ⁻¹ ∂F_m/∂a)_{ij}; the value and gradient channels are closed
/// by centered differences of the pointwise residual.
pub fn assemble_jacobian<R: Real>(
    grid: &SphereGrid<R>,
    form: SpaceForm,
    psi: &PsiSpec<R>,
    m: usize,
    v: &ScalarField<R>,
) -> Result<SparseRows<R>, GeomError> {
    let n = grid.dim();
    let count = grid.node_count();
    let (grad_all, _) = grid.covariant_gradient(v)?;
    let hess_all = grid.covariant_hessian(v)?;
    let mut jac = SparseRows::new(count);
    for u in 0..count {
        let val = v[u];
        let grad = grad_all[u];
        let hess = hess_all[u];
        let p = conformal::conformal_point(
            form,
            n,
            &grid.e[u],
            &grid.e_inv[u],
            val,
            grad,
            hess,
            u,
        )?;
        // analytic second-order coefficients
        let d_fm = fm_matrix_gradient(&p.a, n, m);
        let mut g_hat = [[R::zero(); 2]; 2];
        for i in 0..n {
            for j in 0..n {
                g_hat[i][j] = val * val * grid.e[u][i][j] + grad[i] * grad[j];
            }
        }
        let g_hat_inv =
            crate::smallmat::spd_inverse(&g_hat, n, u, crate::geometry::metric_cond_limit::<R>())?;
        let pref = -val / (p.q * p.w);
        let mut coeff = [[R::zero(); 2]; 2];
        for i in 0..n {
            for j in 0..n {
                let mut acc = R::zero();
                for t in 0..n {
                    acc = acc + g_hat_inv[i][t] * d_fm[t][j];
                }
                coeff[i][j] = pref * acc;
            }
        }
        // value channel (includes the ψ̄(u, 2t⁻¹(v)) dependence)
        let eps_v = lit::<R>(1e-7) * (R::one() + val.abs());
        let plus = residual_point(grid, form, psi, m, u, val + eps_v, grad, hess)?;
        let minus = residual_point(grid, form, psi, m, u, val - eps_v, grad, hess)?;
        let d_val = (plus - minus) / (eps_v + eps_v);
        // gradient channel
        let mut d_grad = [R::zero(); 2];
        for i in 0..n {
            let eps_g = lit::<R>(1e-7) * (R::one() + grad[i].abs());
            let mut gp = grad;
            gp[i] = gp[i] + eps_g;
            let mut gm = grad;
            gm[i] = gm[i] - eps_g;
            let plus = residual_point(grid, form, psi, m, u, val, gp, hess)?;
            let minus = residual_point(grid, form, psi, m, u, val, gm, hess)?;
            d_grad[i] = (plus - minus) / (eps_g + eps_g);
        }
        for entry in grid.stencil(u) {
            let mut jval = R::zero();
            if entry.node == u {
                jval = jval + d_val;
            }
            for i in 0..n {
                jval = jval + d_grad[i] * entry.d[i];
            }
            // Christoffel-corrected Hessian weights of this neighbor
            for i in 0..n {
                for j in 0..n {
                    let mut w = entry.dd[i][j];
                    for k in 0..n {
                        w = w - grid.christoffel[u][k][i][j] * entry.d[k];
                    }
                    jval = jval + coeff[i][j] * w;
                }
            }
            jac.add(u, entry.node, jval);
        }
    }
    Ok(jac)
}

fn sup<R: Real>(x: &ScalarField<R>) -> R {
    x.sup_norm()
}

fn l2_rms<R: Real>(x: &ScalarField<R>) -> R {
    let n = lit::<R>(x.len() as f64);
    (x.0.iter().fold(R::zero(), |a, &r| a + r * r) / n).sqrt()
}

fn solve_linear<R: Real>(
    cfg: &SolverConfig<R>,
    jac: &SparseRows<R>,
    rhs: &[R],
) -> Result<Vec<R>, SolveError> {
    let n = rhs.len();
    let use_dense = match cfg.linear_solver {
        LinearSolver::DirectDense => true,
        LinearSolver::IterativeKrylov => false,
        LinearSolver::Auto => n <= DENSE_LIMIT,
    };
    if use_dense {
        let mut dense = jac.to_dense();
        let mut b = rhs.to_vec();
        linalg::lu_solve(&mut dense, &mut b)
            .ok_or_else(|| SolveError::LinearSolveFailed("singular dense factorization".into()))
    } else {
        let tol = lit::<R>(1e-12);
        linalg::gmres(jac, rhs, cfg.krylov_restart, cfg.krylov_max_outer, tol)
            .map(|(x, _)| x)
            .ok_or_else(|| SolveError::LinearSolveFailed("gmres stagnated".into()))
    }
}

/// Guard band beyond the annulus tolerated for transient iterates.
pub fn guard_band<R: Real>(r1: R, r2: R) -> R {
    lit::<R>(0.05) * (r2 - r1)
}

fn check_guard<R: Real>(
    form: SpaceForm,
    v: &ScalarField<R>,
    r1: R,
    r2: R,
) -> Result<(), SolveError> {
    let delta = guard_band(r1, r2);
    let two = lit::<R>(2.0);
    for (node, &vv) in v.0.iter().enumerate() {
        let z = two * form.t_inv(vv);
        if z < r1 - delta || z > r2 + delta {
            return Err(SolveError::LeftAnnulus {
                node,
                value: z.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(())
}

fn admissibility_losses<R: Real>(
    grid: &SphereGrid<R>,
    form: SpaceForm,
    v: &ScalarField<R>,
    m: usize,
) -> Result<usize, GeomError> {
    let cg = ConformalGraph::new(grid, form, v.clone())?;
    let shape = conformal::conformal_shape_operator(&cg)?;
    let n = grid.dim();
    Ok((0..grid.node_count())
        .filter(|&i| !symfunc::in_gamma_cone(&shape.points[i].lambda[..n], m))
        .count())
}

/// One damped Newton step on the conformal iterate.
pub fn newton_step<R: Real>(
    grid: &SphereGrid<R>,
    form: SpaceForm,
    psi: &PsiSpec<R>,
    cfg: &SolverConfig<R>,
    v: &ScalarField<R>,
) -> Result<(ScalarField<R>, StepDiagnostics), SolveError> {
    let m = cfg.m;
    let residual = residual_field(grid, form, psi, m, v)?;
    let res_norm = sup(&residual);
    let jac = assemble_jacobian(grid, form, psi, m, v)?;
    let rhs: Vec<R> = residual.0.iter().map(|&r| -r).collect();
    let delta = solve_linear(cfg, &jac, &rhs)?;
    let mut alpha = R::one();
    loop {
        let trial = ScalarField(
            v.0.iter()
                .zip(&delta)
                .map(|(&x, &d)| x + alpha * d)
                .collect(),
        );
        let trial_ok = trial.0.iter().all(|&x| x > R::zero() && x < R::one());
        if trial_ok {
            if let Ok(trial_res) = residual_field(grid, form, psi, m, &trial) {
                let trial_norm = sup(&trial_res);
                if trial_norm < res_norm * (R::one() - lit::<R>(1e-4) * alpha)
                    || trial_norm <= cfg.newton_tol
                {
                    let step_norm = delta
                        .iter()
                        .fold(R::zero(), |a, &d| a.max((alpha * d).abs()));
                    let admissible = admissibility_losses(grid, form, &trial, m)
                        .map(|c| c == 0)
                        .unwrap_or(false);
                    let diag = StepDiagnostics {
                        residual_before: res_norm.to_f64().unwrap_or(f64::NAN),
                        residual_after: trial_norm.to_f64().unwrap_or(f64::NAN),
                        step_norm: step_norm.to_f64().unwrap_or(f64::NAN),
                        line_search_factor: alpha.to_f64().unwrap_or(f64::NAN),
                        admissible,
                    };
                    return Ok((trial, diag));
                }
            }
        }
        alpha = alpha * cfg.damping;
        if alpha < cfg.min_step {
            return Err(SolveError::LineSearchFailed { step: 0, iter: 0 });
        }
    }
}

fn newton_solve<R: Real>(
    grid: &SphereGrid<R>,
    form: SpaceForm,
    psi: &PsiSpec<R>,
    cfg: &SolverConfig<R>,
    v: &mut ScalarField<R>,
    step: usize,
    warnings: &mut usize,
) -> Result<usize, SolveError> {
    for iter in 0..cfg.max_newton_iters {
        let res = residual_field(grid, form, psi, cfg.m, v)?;
        if sup(&res) <= cfg.newton_tol {
            return Ok(iter);
        }
        let (next, diag) = newton_step(grid, form, psi, cfg, v).map_err(|e| match e {
            SolveError::LineSearchFailed { .. } => SolveError::LineSearchFailed { step, iter },
            other => other,
        })?;
        *v = next;
        check_guard(form, v, psi.r1, psi.r2)?;
        if !diag.admissible {
            *warnings += 1;
            if cfg.admissibility_policy == AdmissibilityPolicy::Reject {
                let count = admissibility_losses(grid, form, v, cfg.m)?;
                return Err(SolveError::LostAdmissibility { m: cfg.m, count });
            }
        }
    }
    let res = residual_field(grid, form, psi, cfg.m, v)?;
    if sup(&res) <= cfg.newton_tol {
        return Ok(cfg.max_newton_iters);
    }
    Err(SolveError::MaxItersExceeded {
        max_iters: cfg.max_newton_iters,
        residual: sup(&res).to_f64().unwrap_or(f64::NAN),
    })
}

/// Continuation solve: homotopy ψ_t = (1 − t)ψ₀ + tψ from the radial anchor
/// ψ₀ with exact solution z ≡ R₀, damped Newton at each step. Returns the
/// radial solution field and the certificate report.
pub fn continuation_solve<R: Real>(
    grid: &SphereGrid<R>,
    psi: &PsiSpec<R>,
    cfg: &SolverConfig<R>,
) -> Result<(ScalarField<R>, SolveReport), SolveError> {
    let start = Instant::now();
    let form = psi.form;
    let half = lit::<R>(0.5);
    let two = lit::<R>(2.0);
    if cfg.require_conditions {
        let report = psi::check_conditions(psi, grid, 0);
        if !report.all_ok() {
            return Err(SolveError::PsiConditionsFailed(format!(
                "barrier_low={} barrier_high={} monotone={} (margins {:.3e}/{:.3e}/{:.3e})",
                report.barrier_low_ok,
                report.barrier_high_ok,
                report.monotone_ok,
                report.barrier_low_margin,
                report.barrier_high_margin,
                report.monotone_margin,
            )));
        }
    }
    let r0 = match &cfg.initial_guess {
        InitialGuess::SphereMidpoint | InitialGuess::Field(_) => (psi.r1 + psi.r2) * half,
        InitialGuess::Sphere(r) => *r,
    };
    let anchor = PsiSpec::radial_anchor(r0, psi.r1, psi.r2, psi.m, psi.n, form);
    let mut v = match &cfg.initial_guess {
        InitialGuess::Field(field) => {
            let z = ScalarField(field.clone());
            let graph = crate::geometry::RadialGraph::new(grid, form, z)?;
            conformal::to_conformal(&graph)?.v
        }
        _ => ScalarField::constant(form.t(r0 * half), grid.node_count()),
    };
    let mut iterations = Vec::with_capacity(cfg.continuation_steps);
    let mut warnings = 0usize;
    for step in 1..=cfg.continuation_steps {
        let t = lit::<R>(step as f64 / cfg.continuation_steps as f64);
        let psi_t = psi.blend_from(&anchor, t);
        let iters = newton_solve(grid, form, &psi_t, cfg, &mut v, step, &mut warnings)?;
        iterations.push(iters);
    }
    // certificates on the final iterate
    let residual = residual_field(grid, form, psi, cfg.m, &v)?;
    let res_sup = sup(&residual);
    let res_l2 = l2_rms(&residual);
    let loss_count = admissibility_losses(grid, form, &v, cfg.m)?;
    let admissible = loss_count == 0;
    let z = v.map(|vv| two * form.t_inv(vv));
    let mut z_min = R::infinity();
    let mut z_max = R::neg_infinity();
    for &zz in &z.0 {
        z_min = z_min.min(zz);
        z_max = z_max.max(zz);
    }
    let annulus_tol = lit::<R>(1e-8);
    let annulus_ok = z_min >= psi.r1 - annulus_tol && z_max <= psi.r2 + annulus_tol;
    let cg = ConformalGraph::new(grid, form, v.clone())?;
    let ellipticity_max = if admissible {
        let spec = conformal::ellipticity_spectrum(&cg, cfg.m)?;
        let n = grid.dim();
        let mut worst = R::neg_infinity();
        for node_spec in spec {
            for &e in node_spec.iter().take(n) {
                worst = worst.max(e);
            }
        }
        worst.to_f64().unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    let converged = res_sup <= cfg.newton_tol && admissible && annulus_ok;
    let report = SolveReport {
        converged,
        iterations,
        residual_sup: res_sup.to_f64().unwrap_or(f64::NAN),
        residual_l2: res_l2.to_f64().unwrap_or(f64::NAN),
        admissible,
        admissibility_warnings: warnings,
        annulus_ok,
        annulus_low_margin: (z_min - psi.r1).to_f64().unwrap_or(f64::NAN),
        annulus_high_margin: (psi.r2 - z_max).to_f64().unwrap_or(f64::NAN),
        ellipticity_max,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok((z, report))
}
