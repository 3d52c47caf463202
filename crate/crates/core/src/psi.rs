//! The prescription function ψ(u, ρ) on the annulus [R₁, R₂], the
//! solvability conditions it must satisfy (barriers at the annulus ends and
//! radial monotonicity of ψ·sinh^m ρ, resp. ψ·tan^m ρ), and the Q(s)
//! monotonicity profile used by the uniqueness argument.

use crate::error::GeomError;
use crate::expr::Expr;
use crate::grid::{SphereGrid, Vec2};
use crate::scalar::{binomial, lit, Real};
use crate::spaceform::SpaceForm;

/// How ψ is supplied.
#[derive(Debug, Clone)]
pub enum PsiKind<R> {
    /// Closed-form expression with its symbolic ρ-derivative.
    Closed { value: Expr, drho: Expr },
    /// Manufactured prescription anchored at a target graph z*(u):
    /// ψ(u, ρ) = p(u)·(s(z*(u))/s(ρ))^m·exp(−ε(ρ − z*(u))), so that
    /// ψ(u, z*(u)) = p(u) and ψ·s^m ρ is strictly decreasing for ε > 0.
    Manufactured { p: Vec<R>, zstar: Vec<R>, eps: R },
    /// Convex combination (1 − t)·a + t·b used by the continuation solver.
    Blend {
        a: Box<PsiKind<R>>,
        b: Box<PsiKind<R>>,
        t: R,
    },
}

/// ψ together with its annulus and curvature-order context.
#[derive(Debug, Clone)]
pub struct PsiSpec<R> {
    pub kind: PsiKind<R>,
    pub r1: R,
    pub r2: R,
    pub m: usize,
    pub n: usize,
    pub form: SpaceForm,
    /// Continue ψ beyond R₂ with the canonical extension
    /// ψ(u, R₂)·(s(R₂)/s(ρ))^m (K = −1) which keeps ψ·s^m ρ constant there.
    pub extend_beyond_r2: bool,
}

impl<R: Real> PsiSpec<R> {
    pub fn closed(
        expr: Expr,
        r1: R,
        r2: R,
        m: usize,
        n: usize,
        form: SpaceForm,
    ) -> Self {
        let drho = expr.diff_rho();
        PsiSpec {
            kind: PsiKind::Closed { value: expr, drho },
            r1,
            r2,
            m,
            n,
            form,
            extend_beyond_r2: true,
        }
    }

    /// The exactly solvable radial prescription ψ₀(ρ) = c^m(R₀)/s^m(ρ),
    /// whose unique solution is the sphere z ≡ R₀ and which sits at the
    /// equality case of the monotonicity condition.
    pub fn radial_anchor(r0: R, r1: R, r2: R, m: usize, n: usize, form: SpaceForm) -> Self {
        let c0 = form.c(r0).to_f64().unwrap();
        let fname = match form {
            SpaceForm::Hyperbolic => "sinh",
            SpaceForm::Elliptic => "sin",
        };
        let src = format!("pow({c0:e}, {m}) / pow({fname}(rho), {m})");
        let expr = Expr::parse(&src).expect("radial anchor expression");
        PsiSpec::closed(expr, r1, r2, m, n, form)
    }

    pub fn manufactured(
        p: Vec<R>,
        zstar: Vec<R>,
        eps: R,
        r1: R,
        r2: R,
        m: usize,
        n: usize,
        form: SpaceForm,
    ) -> Self {
        PsiSpec {
            kind: PsiKind::Manufactured { p, zstar, eps },
            r1,
            r2,
            m,
            n,
            form,
            extend_beyond_r2: true,
        }
    }

    /// (1 − t)·anchor + t·self, sharing this spec's annulus and context.
    pub fn blend_from(&self, anchor: &PsiSpec<R>, t: R) -> PsiSpec<R> {
        PsiSpec {
            kind: PsiKind::Blend {
                a: Box::new(anchor.kind.clone()),
                b: Box::new(self.kind.clone()),
                t,
            },
            ..self.clone()
        }
    }

    /// ψ and ∂ψ/∂ρ at a node, applying the beyond-R₂ extension when enabled.
    pub fn eval(&self, node: usize, coords: Vec2<R>, rho: R) -> (R, R) {
        if self.extend_beyond_r2 && rho > self.r2 {
            let (base, _) = self.eval_raw(node, coords, self.r2);
            let m = lit::<R>(self.m as f64);
            let (value, dlog) = match self.form {
                SpaceForm::Hyperbolic => {
                    let ratio = self.form.s(self.r2) / self.form.s(rho);
                    (base * ratio.powf(m), -m * self.form.c(rho) / self.form.s(rho))
                }
                SpaceForm::Elliptic => {
                    let t2 = self.form.t(self.r2);
                    let t = self.form.t(rho);
                    (
                        base * (t2 / t).powf(m),
                        -m * (R::one() + t * t) / t,
                    )
                }
            };
            return (value, value * dlog);
        }
        self.eval_raw(node, coords, rho)
    }

    fn eval_raw(&self, node: usize, coords: Vec2<R>, rho: R) -> (R, R) {
        eval_kind(&self.kind, self.form, self.m, node, coords, rho)
    }

    pub fn value(&self, node: usize, coords: Vec2<R>, rho: R) -> R {
        self.eval(node, coords, rho).0
    }

    /// ψ̄ = C(n, m)·ψ, the right-hand side of the S_m form of the equation.
    pub fn bar_value(&self, node: usize, coords: Vec2<R>, rho: R) -> R {
        binomial::<R>(self.n, self.m) * self.value(node, coords, rho)
    }
}

fn eval_kind<R: Real>(
    kind: &PsiKind<R>,
    form: SpaceForm,
    m: usize,
    node: usize,
    coords: Vec2<R>,
    rho: R,
) -> (R, R) {
    match kind {
        PsiKind::Closed { value, drho } => (
            value.eval(rho, coords[0], coords[1]),
            drho.eval(rho, coords[0], coords[1]),
        ),
        PsiKind::Manufactured { p, zstar, eps } => {
            let mm = lit::<R>(m as f64);
            let z0 = zstar[node];
            let ratio = form.s(z0) / form.s(rho);
            let value = p[node] * ratio.powf(mm) * (-(*eps) * (rho - z0)).exp();
            let dlog = -mm * form.c(rho) / form.s(rho) - *eps;
            (value, value * dlog)
        }
        PsiKind::Blend { a, b, t } => {
            let (va, da) = eval_kind(a, form, m, node, coords, rho);
            let (vb, db) = eval_kind(b, form, m, node, coords, rho);
            let one_minus = R::one() - *t;
            (one_minus * va + *t * vb, one_minus * da + *t * db)
        }
    }
}

/// Verdicts and worst margins of the solvability conditions.
#[derive(Debug, Clone, Default)]
pub struct ConditionReport {
    pub barrier_low_ok: bool,
    pub barrier_high_ok: bool,
    pub monotone_ok: bool,
    pub strict_monotone: bool,
    /// min over nodes of ψ(u, R₁) − coth^m R₁ (cot^m for K = +1); ≥ 0 is ok.
    pub barrier_low_margin: f64,
    /// min over nodes of coth^m R₂ − ψ(u, R₂); ≥ 0 is ok.
    pub barrier_high_margin: f64,
    /// max over the (node × ρ) lattice of d/dρ[ψ·s^m ρ]; ≤ tol is ok.
    pub monotone_margin: f64,
    pub violating_nodes: Vec<usize>,
}

impl ConditionReport {
    pub fn all_ok(&self) -> bool {
        self.barrier_low_ok && self.barrier_high_ok && self.monotone_ok
    }
}

/// Numerical slack accepted in the non-strict monotonicity inequality.
pub const MONOTONE_TOL: f64 = 1e-10;
/// Margin below which the inequality is not considered strict.
pub const STRICT_THRESHOLD: f64 = 1e-10;

/// Conditions ψ(u, R₁) ≥ coth^m R₁ and ψ(u, R₂) ≤ coth^m R₂ (cot for
/// K = +1), evaluated at every grid node.
pub fn check_barrier_conditions<R: Real>(
    psi: &PsiSpec<R>,
    grid: &SphereGrid<R>,
) -> ConditionReport {
    let m = lit::<R>(psi.m as f64);
    let low_target = psi.form.cot_like(psi.r1).powf(m);
    let high_target = psi.form.cot_like(psi.r2).powf(m);
    let mut low_margin = R::infinity();
    let mut high_margin = R::infinity();
    let mut violating = Vec::new();
    for (node, &coords) in grid.nodes.iter().enumerate() {
        let at_r1 = psi.value(node, coords, psi.r1);
        let at_r2 = psi.value(node, coords, psi.r2);
        let lm = at_r1 - low_target;
        let hm = high_target - at_r2;
        if lm < R::zero() || hm < R::zero() {
            violating.push(node);
        }
        low_margin = low_margin.min(lm);
        high_margin = high_margin.min(hm);
    }
    ConditionReport {
        barrier_low_ok: low_margin >= R::zero(),
        barrier_high_ok: high_margin >= R::zero(),
        barrier_low_margin: low_margin.to_f64().unwrap_or(f64::NAN),
        barrier_high_margin: high_margin.to_f64().unwrap_or(f64::NAN),
        violating_nodes: violating,
        ..ConditionReport::default()
    }
}

/// The monotone quantity d/dρ[ψ(u,ρ)·sinh^m ρ] for K = −1, resp.
/// d/dρ[ψ(u,ρ)·tan^m ρ] for K = +1, at one point.
pub fn monotone_quantity<R: Real>(psi: &PsiSpec<R>, node: usize, coords: Vec2<R>, rho: R) -> R {
    let (value, dvalue) = psi.eval(node, coords, rho);
    let m = lit::<R>(psi.m as f64);
    match psi.form {
        SpaceForm::Hyperbolic => {
            let s = rho.sinh();
            let c = rho.cosh();
            dvalue * s.powf(m) + value * m * s.powf(m - R::one()) * c
        }
        SpaceForm::Elliptic => {
            let t = rho.tan();
            dvalue * t.powf(m) + value * m * t.powf(m - R::one()) * (R::one() + t * t)
        }
    }
}

/// Samples the monotone quantity on a (node × ρ) lattice over [R₁, R₂].
/// `rho_samples = 0` selects the default density, 4× the angular resolution.
pub fn check_monotonicity<R: Real>(
    psi: &PsiSpec<R>,
    grid: &SphereGrid<R>,
    rho_samples: usize,
) -> ConditionReport {
    let samples = if rho_samples == 0 {
        4 * grid.n_theta()
    } else {
        rho_samples
    };
    let mut worst = R::neg_infinity();
    let mut violating = Vec::new();
    let tol = lit::<R>(MONOTONE_TOL);
    for (node, &coords) in grid.nodes.iter().enumerate() {
        let mut node_worst = R::neg_infinity();
        for k in 0..=samples {
            let frac = lit::<R>(k as f64 / samples as f64);
            let rho = psi.r1 + (psi.r2 - psi.r1) * frac;
            node_worst = node_worst.max(monotone_quantity(psi, node, coords, rho));
        }
        if node_worst > tol {
            violating.push(node);
        }
        worst = worst.max(node_worst);
    }
    ConditionReport {
        monotone_ok: worst <= tol,
        strict_monotone: worst < -lit::<R>(STRICT_THRESHOLD),
        monotone_margin: worst.to_f64().unwrap_or(f64::NAN),
        violating_nodes: violating,
        ..ConditionReport::default()
    }
}

/// Barrier and monotonicity checks merged into one report.
pub fn check_conditions<R: Real>(
    psi: &PsiSpec<R>,
    grid: &SphereGrid<R>,
    rho_samples: usize,
) -> ConditionReport {
    let barrier = check_barrier_conditions(psi, grid);
    let mono = check_monotonicity(psi, grid, rho_samples);
    let mut violating = barrier.violating_nodes;
    for v in mono.violating_nodes {
        if !violating.contains(&v) {
            violating.push(v);
        }
    }
    violating.sort_unstable();
    ConditionReport {
        barrier_low_ok: barrier.barrier_low_ok,
        barrier_high_ok: barrier.barrier_high_ok,
        monotone_ok: mono.monotone_ok,
        strict_monotone: mono.strict_monotone,
        barrier_low_margin: barrier.barrier_low_margin,
        barrier_high_margin: barrier.barrier_high_margin,
        monotone_margin: mono.monotone_margin,
        violating_nodes: violating,
    }
}

/// Sampled Q(s) profile at one node (K = −1 only).
#[derive(Debug, Clone)]
pub struct QProfile {
    pub s: Vec<f64>,
    pub q: Vec<f64>,
    /// centered finite-difference dQ/ds at interior samples (aligned with
    /// `s[1..len-1]`)
    pub dq_ds: Vec<f64>,
    pub q_at_one: f64,
}

/// Q(s) = [(1−ṽ²)/(s(1−ṽ²/s²))]^m ψ̄(u, 2 artanh(ṽ/s)) − ψ̄(u, 2 artanh ṽ),
/// the scaled-comparison quantity; Q(1) ≡ 0, and dQ/ds ≥ 0 whenever the
/// monotonicity condition holds.
pub fn q_profile<R: Real>(
    psi: &PsiSpec<R>,
    v_tilde: R,
    node: usize,
    coords: Vec2<R>,
    s_lo: R,
    s_hi: R,
    samples: usize,
) -> Result<QProfile, GeomError> {
    assert_eq!(psi.form, SpaceForm::Hyperbolic, "Q(s) is a K = -1 quantity");
    let q_at = |s: R| -> Result<R, GeomError> {
        let ratio = v_tilde / s;
        if ratio >= R::one() || v_tilde >= R::one() {
            return Err(GeomError::OutOfRange {
                node,
                value: ratio.to_f64().unwrap_or(f64::NAN),
            });
        }
        let m = lit::<R>(psi.m as f64);
        let vt2 = v_tilde * v_tilde;
        let bracket = (R::one() - vt2) / (s * (R::one() - vt2 / (s * s)));
        let rho_scaled = lit::<R>(2.0) * ratio.atanh();
        let rho_base = lit::<R>(2.0) * v_tilde.atanh();
        Ok(bracket.powf(m) * psi.bar_value(node, coords, rho_scaled)
            - psi.bar_value(node, coords, rho_base))
    };
    let mut s_vals = Vec::with_capacity(samples + 1);
    let mut q_vals = Vec::with_capacity(samples + 1);
    for k in 0..=samples {
        let frac = lit::<R>(k as f64 / samples as f64);
        let s = s_lo + (s_hi - s_lo) * frac;
        s_vals.push(s.to_f64().unwrap());
        q_vals.push(q_at(s)?.to_f64().unwrap());
    }
    let mut dq = Vec::with_capacity(samples.saturating_sub(1));
    for k in 1..samples {
        dq.push((q_vals[k + 1] - q_vals[k - 1]) / (s_vals[k + 1] - s_vals[k - 1]));
    }
    let q_at_one = q_at(R::one())?.to_f64().unwrap();
    Ok(QProfile {
        s: s_vals,
        q: q_vals,
        dq_ds: dq,
        q_at_one,
    })
}
