//! Post-hoc verification of computed graphs: the tanh-scaling relation
//! between two solutions of the same prescription, and the boundary-touch
//! interpolation identity at a discrete extremum on the annulus boundary.

use crate::conformal;
use crate::error::GeomError;
use crate::expr::Expr;
use crate::geometry::{self, RadialGraph};
use crate::grid::{ScalarField, SphereGrid};
use crate::psi::{self, PsiSpec};
use crate::scalar::{binomial_u, lit, Real};
use crate::spaceform::SpaceForm;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Result of fitting the scaling constant c in c·t(z₁/2) = t(z₂/2).
#[derive(Debug, Clone)]
pub struct ScalingFit<R> {
    /// Median of the per-node ratios t(z₂/2)/t(z₁/2).
    pub c: R,
    /// sup |c·t(z₁/2) − t(z₂/2)|.
    pub residual: R,
    pub ratio_min: R,
    pub ratio_max: R,
    pub tolerance: R,
    /// The two graphs are related by the scaling within tolerance.
    pub related: bool,
    /// Additionally |c − 1| ≤ tolerance: the graphs coincide.
    pub identical: bool,
}

/// Fits the scaling constant between two graphs on the same grid by the
/// median per-node ratio. Only the hyperbolic case carries the uniqueness
/// statement; the fit itself is computed for either space form (with t = tanh
/// or tan accordingly).
pub fn fit_scaling_constant<'g, R: Real>(
    z1: &RadialGraph<'g, R>,
    z2: &RadialGraph<'g, R>,
    tolerance: R,
) -> Result<ScalingFit<R>, GeomError> {
    if !std::ptr::eq(z1.grid, z2.grid) || z1.form != z2.form || z1.z.len() != z2.z.len() {
        return Err(GeomError::GridMismatch);
    }
    let half = lit::<R>(0.5);
    let count = z1.z.len();
    let mut ratios = Vec::with_capacity(count);
    for i in 0..count {
        let t1 = z1.form.t(z1.z[i] * half);
        let t2 = z2.form.t(z2.z[i] * half);
        ratios.push(t2 / t1);
    }
    let mut sorted = ratios.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let c = if count % 2 == 1 {
        sorted[count / 2]
    } else {
        (sorted[count / 2 - 1] + sorted[count / 2]) * half
    };
    let mut residual = R::zero();
    for i in 0..count {
        let t1 = z1.form.t(z1.z[i] * half);
        let t2 = z2.form.t(z2.z[i] * half);
        residual = residual.max((c * t1 - t2).abs());
    }
    let related = residual <= tolerance;
    Ok(ScalingFit {
        c,
        residual,
        ratio_min: sorted[0],
        ratio_max: sorted[count - 1],
        tolerance,
        related,
        identical: related && (c - R::one()).abs() <= tolerance,
    })
}

/// Default "related" tolerance: 10× the solver residual tolerance.
pub fn scaling_tolerance<R: Real>(newton_tol: R) -> R {
    lit::<R>(10.0) * newton_tol
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundarySide {
    /// Touching the inner radius R₁ at a minimum.
    Inner,
    /// Touching the outer radius R₂ at a maximum.
    Outer,
}

/// Absolute tolerance for `z(u₀)` sitting on the boundary radius.
pub const BOUNDARY_TOL: f64 = 1e-8;
/// Tolerance for the discrete gradient at the extremum.
pub const CRITICAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct BoundaryTouchReport<R> {
    pub node: usize,
    pub mu: R,
    pub s: Vec<R>,
    /// S_m(λ(z(s)))|_{u₀} from the interpolated graph.
    pub direct: Vec<R>,
    /// Σ_p (1−s)^p (μs)^{m−p} C(n−p, m−p) S_p(λ(z))|_{u₀}.
    pub expanded: Vec<R>,
    pub max_discrepancy: R,
    /// S_m stays strictly positive along the interpolation.
    pub positive: bool,
}

/// Checks the interpolation identity at a node u₀ where z touches the
/// boundary radius at a discrete extremum: deforming z(s) = (1−s)z + s·Rb
/// moves the principal curvatures affinely, so S_m expands in the base S_p
/// with weights (1−s)^p (μs)^{m−p}, μ = f'(Rb)/(2f(Rb)).
pub fn boundary_touch_identity<R: Real>(
    graph: &RadialGraph<'_, R>,
    m: usize,
    side: BoundarySide,
    boundary_radius: R,
    u0: usize,
    samples: usize,
) -> Result<BoundaryTouchReport<R>, GeomError> {
    let grid = graph.grid;
    let n = grid.dim();
    let zb = boundary_radius;
    let z0 = graph.z[u0];
    if (z0 - zb).abs() > lit::<R>(BOUNDARY_TOL) {
        return Err(GeomError::NotAtBoundary {
            node: u0,
            value: z0.to_f64().unwrap_or(f64::NAN),
            boundary: match side {
                BoundarySide::Inner => "inner",
                BoundarySide::Outer => "outer",
            },
            target: zb.to_f64().unwrap_or(f64::NAN),
        });
    }
    // extremum check: discrete gradient of z must vanish at u₀, and the
    // boundary must be touched from the correct side
    let (grad, _) = grid.covariant_gradient(&graph.z)?;
    let gn = grid.grad_norm_sq(u0, grad[u0]).sqrt();
    if gn > lit::<R>(CRITICAL_TOL) {
        return Err(GeomError::NotAtMaximum {
            node: u0,
            grad_norm: gn.to_f64().unwrap_or(f64::NAN),
        });
    }
    for (i, &z) in graph.z.0.iter().enumerate() {
        let outside = match side {
            BoundarySide::Outer => z > zb + lit::<R>(BOUNDARY_TOL),
            BoundarySide::Inner => z < zb - lit::<R>(BOUNDARY_TOL),
        };
        if outside {
            return Err(GeomError::NotAtMaximum {
                node: i,
                grad_norm: f64::NAN,
            });
        }
    }
    let mu = graph.form.df(zb) / (lit::<R>(2.0) * graph.form.f(zb));
    // base symmetric functions at u₀
    let base = geometry::compute_shape(graph)?;
    let samples = samples.max(2);
    let mut s_values = Vec::with_capacity(samples);
    let mut direct = Vec::with_capacity(samples);
    let mut expanded = Vec::with_capacity(samples);
    let mut max_disc = R::zero();
    let mut positive = true;
    for k in 0..samples {
        let s = lit::<R>(k as f64 / (samples - 1) as f64);
        let zs = ScalarField(
            graph
                .z
                .0
                .iter()
                .map(|&z| (R::one() - s) * z + s * zb)
                .collect(),
        );
        let interp = RadialGraph::new(grid, graph.form, zs)?;
        let shape = geometry::compute_shape(&interp)?;
        let d = shape.sym[u0][m];
        let mut e = R::zero();
        for p in 0..=m {
            let coeff = lit::<R>(binomial_u(n - p, m - p) as f64);
            e = e
                + (R::one() - s).powi(p as i32)
                    * (mu * s).powi((m - p) as i32)
                    * coeff
                    * base.sym[u0][p];
        }
        max_disc = max_disc.max((d - e).abs());
        if !(d > R::zero()) {
            positive = false;
        }
        s_values.push(s);
        direct.push(d);
        expanded.push(e);
    }
    Ok(BoundaryTouchReport {
        node: u0,
        mu,
        s: s_values,
        direct,
        expanded,
        max_discrepancy: max_disc,
        positive,
    })
}

/// One named check of the identity suite.
#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityCheck {
    fn new(name: &'static str, max_error: f64, tolerance: f64) -> Self {
        IdentityCheck {
            name,
            max_error,
            tolerance,
            pass: max_error.is_finite() && max_error <= tolerance,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IdentitySuite {
    pub checks: Vec<IdentityCheck>,
    pub all_pass: bool,
}

/// Smooth seeded perturbation of a sphere, safe across the poles for n = 2.
pub fn seeded_graph_field<R: Real>(
    grid: &SphereGrid<R>,
    base: R,
    amplitude: f64,
    seed: u64,
) -> ScalarField<R> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: f64 = rng.gen_range(-amplitude..amplitude);
    let b: f64 = rng.gen_range(-amplitude..amplitude);
    let c: f64 = rng.gen_range(-amplitude..amplitude);
    let d: f64 = rng.gen_range(-amplitude..amplitude);
    if grid.dim() == 1 {
        ScalarField::from_fn(grid, |p| {
            let th = p[0].to_f64().unwrap();
            base + lit::<R>(
                a * th.cos() + b * th.sin() + c * (2.0 * th).cos() + d * (2.0 * th).sin(),
            )
        })
    } else {
        ScalarField::from_fn(grid, |p| {
            let th = p[0].to_f64().unwrap();
            let ph = p[1].to_f64().unwrap();
            base + lit::<R>(
                a * th.cos()
                    + b * th.sin() * ph.cos()
                    + c * th.sin() * ph.sin()
                    + d * 0.5 * (3.0 * th.cos().powi(2) - 1.0),
            )
        })
    }
}

/// Runs the whole identity suite on a seeded graph: determinant identity,
/// dual-path principal curvatures, the scaling expansion and inequality, the
/// negativity of the linearization spectrum, the Q-profile (hyperbolic only),
/// and the boundary-touch identity on a constructed touching graph.
pub fn identity_suite(
    n: usize,
    resolution: usize,
    m: usize,
    form: SpaceForm,
    seed: u64,
) -> Result<IdentitySuite, GeomError> {
    let grid = SphereGrid::<f64>::build(n, resolution)?;
    let base_r = match form {
        SpaceForm::Hyperbolic => 1.2,
        SpaceForm::Elliptic => 0.7,
    };
    let z = seeded_graph_field(&grid, base_r, 0.02, seed);
    let graph = RadialGraph::new(&grid, form, z)?;
    let mut checks = Vec::new();

    // determinant identity det g = f^{n-1}(f + |∇'z|²) det e
    {
        let shape = geometry::fundamental_forms(&graph)?;
        let (grad, _) = grid.covariant_gradient(&graph.z)?;
        let mut worst = 0.0f64;
        for i in 0..grid.node_count() {
            let f = form.f(graph.z[i]);
            let det_e = crate::smallmat::det(&grid.e[i], n);
            let det_g = crate::smallmat::det(&shape.g[i], n);
            let expected = f.powi(n as i32 - 1) * (f + grid.grad_norm_sq(i, grad[i])) * det_e;
            worst = worst.max(((det_g - expected) / expected).abs());
        }
        checks.push(IdentityCheck::new("det_identity", worst, 1e-12));
    }

    // dual-path equivalence: intrinsic route vs conformal route curvatures
    {
        let shape = geometry::compute_shape(&graph)?;
        let cg = conformal::to_conformal(&graph)?;
        let cshape = conformal::conformal_shape_operator(&cg)?;
        let mut worst = 0.0f64;
        for i in 0..grid.node_count() {
            for k in 0..n {
                worst = worst.max((shape.lambda[i][k] - cshape.points[i].lambda[k]).abs());
            }
        }
        // the two routes differentiate different variables; they agree to
        // discretization order
        let tol = 100.0 / (resolution as f64).powi(2);
        checks.push(IdentityCheck::new("dual_path_lambda", worst, tol));
    }

    // scaling expansion and inequality, checked via both routes
    {
        let cg = conformal::to_conformal(&graph)?;
        let s = match form {
            SpaceForm::Hyperbolic => 1.25,
            SpaceForm::Elliptic => 0.8,
        };
        let scaled = conformal::scaled_sm(&cg, s, m)?;
        checks.push(IdentityCheck::new(
            "scaling_expansion",
            scaled.max_discrepancy,
            1e-8,
        ));
        checks.push(IdentityCheck::new(
            "scaling_inequality",
            if scaled.inequality_ok { 0.0 } else { 1.0 },
            0.5,
        ));
    }

    // ellipticity: the linearization spectrum is strictly negative
    {
        let cg = conformal::to_conformal(&graph)?;
        let spectrum = conformal::ellipticity_spectrum(&cg, m)?;
        let mut worst = f64::NEG_INFINITY;
        for node_spec in &spectrum {
            for &e in node_spec.iter().take(n) {
                worst = worst.max(e);
            }
        }
        // pass iff the largest eigenvalue is strictly below zero
        checks.push(IdentityCheck::new("ellipticity_negative", worst, -1e-12));
    }

    // Q-profile: the equality-case prescription gives Q ≡ 0, a strictly
    // monotone one gives dQ/ds ≥ 0 (hyperbolic scaling analysis only)
    if form == SpaceForm::Hyperbolic {
        let r0 = 1.2;
        let anchor = PsiSpec::radial_anchor(r0, 0.8, 1.6, m, n, form);
        let v_tilde = form.t(r0 / 2.0);
        let q_eq = psi::q_profile(&anchor, v_tilde, 0, grid.nodes[0], 1.0, 1.3, 16)?;
        let worst_eq = q_eq.q.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        checks.push(IdentityCheck::new("q_profile_equality", worst_eq, 1e-10));

        let strict = PsiSpec::closed(
            Expr::parse(&format!(
                "{:e} * exp(-0.2*rho)/pow(sinh(rho),{m})",
                r0_strict_constant(r0, m)
            ))
            .expect("internal prescription string"),
            0.8,
            1.6,
            m,
            n,
            form,
        );
        let q_st = psi::q_profile(&strict, v_tilde, 0, grid.nodes[0], 1.0, 1.3, 16)?;
        let worst_slope = q_st
            .dq_ds
            .iter()
            .fold(0.0f64, |a, &d| a.max((-d).max(0.0)));
        checks.push(IdentityCheck::new("q_profile_monotone", worst_slope, 1e-8));
    }

    // boundary-touch identity on a constructed graph touching R₂ at a
    // discrete maximum (odd ring count so the equator is a node for n = 2)
    {
        let touch_res = if n == 2 && resolution % 2 == 0 {
            resolution + 1
        } else {
            resolution
        };
        let tgrid = SphereGrid::<f64>::build(n, touch_res)?;
        let r2 = match form {
            SpaceForm::Hyperbolic => 1.6,
            SpaceForm::Elliptic => 1.2,
        };
        let eps = 0.05;
        let (zfield, u0) = if n == 1 {
            (
                ScalarField::from_fn(&tgrid, |p| r2 - eps * (1.0 - p[0].cos())),
                0usize,
            )
        } else {
            let zf = ScalarField::from_fn(&tgrid, |p| {
                r2 - eps * (1.0 - p[0].sin() * p[1].cos())
            });
            // node at (θ = π/2, φ = 0): middle ring, first longitude
            let u0 = (touch_res / 2) * tgrid.n_phi();
            (zf, u0)
        };
        let tgraph = RadialGraph::new(&tgrid, form, zfield)?;
        let report =
            boundary_touch_identity(&tgraph, m, BoundarySide::Outer, r2, u0, 9)?;
        checks.push(IdentityCheck::new(
            "boundary_touch",
            report.max_discrepancy,
            1e-9,
        ));
        checks.push(IdentityCheck::new(
            "boundary_touch_positive",
            if report.positive { 0.0 } else { 1.0 },
            0.5,
        ));
    }

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(IdentitySuite { checks, all_pass })
}

/// C with coth(R)·e^{0.2R} structure so the strict prescription has an exact
/// radial root at r0 when m = 1; for general m the constant only needs to be
/// large enough for the barrier inequalities on [0.8, 1.6].
fn r0_strict_constant(r0: f64, m: usize) -> f64 {
    r0.cosh().powi(m as i32) * (0.2 * r0).exp()
}
