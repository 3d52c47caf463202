//! Conformal-ball change of variables v = t(z/2): Euclidean (hat)
//! fundamental forms of the graph of v in the unit ball, the shape operator
//! reassembled from them, the scaled family sv with its expansion
//! coefficients, and the negative-ellipticity spectrum.

use crate::error::GeomError;
use crate::geometry::{metric_cond_limit, RadialGraph};
use crate::grid::{Mat2, ScalarField, SphereGrid, Vec2};
use crate::linalg;
use crate::scalar::{lit, Real};
use crate::smallmat;
use crate::spaceform::SpaceForm;
use crate::symfunc;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// A starshaped hypersurface in the conformal variable v = t(z/2) ∈ (0, 1).
#[derive(Debug, Clone)]
pub struct ConformalGraph<'g, R> {
    pub grid: &'g SphereGrid<R>,
    pub form: SpaceForm,
    pub v: ScalarField<R>,
}

impl<'g, R: Real> ConformalGraph<'g, R> {
    pub fn new(
        grid: &'g SphereGrid<R>,
        form: SpaceForm,
        v: ScalarField<R>,
    ) -> Result<Self, GeomError> {
        if v.len() != grid.node_count() {
            return Err(GeomError::FieldLengthMismatch {
                got: v.len(),
                expected: grid.node_count(),
            });
        }
        for (node, &value) in v.0.iter().enumerate() {
            if !(value > R::zero() && value < R::one()) {
                return Err(GeomError::OutOfRange {
                    node,
                    value: value.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(ConformalGraph { grid, form, v })
    }

    /// q(v) = 2/(1 + K v²) at a node value.
    pub fn q_of(form: SpaceForm, v: R) -> R {
        lit::<R>(2.0) / (R::one() + form.k::<R>() * v * v)
    }
}

/// Forward transform v = t(z/2).
pub fn to_conformal<'g, R: Real>(
    graph: &RadialGraph<'g, R>,
) -> Result<ConformalGraph<'g, R>, GeomError> {
    let half = lit::<R>(0.5);
    let v = graph.z.map(|z| graph.form.t(z * half));
    ConformalGraph::new(graph.grid, graph.form, v)
}

/// Inverse transform z = 2 t⁻¹(v).
pub fn from_conformal<'g, R: Real>(
    cg: &ConformalGraph<'g, R>,
) -> Result<RadialGraph<'g, R>, GeomError> {
    let two = lit::<R>(2.0);
    let z = cg.v.map(|v| two * cg.form.t_inv(v));
    RadialGraph::new(cg.grid, cg.form, z)
}

/// Pointwise conformal curvature data at one node.
#[derive(Debug, Clone, Copy)]
pub struct ConformalPoint<R> {
    pub q: R,
    pub w: R,
    pub a_hat: Mat2<R>,
    pub a: Mat2<R>,
    /// Principal curvatures of the space-form hypersurface, ascending.
    pub lambda: Vec2<R>,
}

/// Evaluates ĝ, b̂, â and the space-form shape operator
/// a = â/q − K v²/W · id from the value, gradient and covariant Hessian of v
/// at one node.
pub fn conformal_point<R: Real>(
    form: SpaceForm,
    n: usize,
    e: &Mat2<R>,
    e_inv: &Mat2<R>,
    v: R,
    grad: Vec2<R>,
    hess: Mat2<R>,
    node: usize,
) -> Result<ConformalPoint<R>, GeomError> {
    let k = form.k::<R>();
    let two = lit::<R>(2.0);
    let q = two / (R::one() + k * v * v);
    let mut grad_sq = R::zero();
    for i in 0..n {
        for j in 0..n {
            grad_sq = grad_sq + e_inv[i][j] * grad[i] * grad[j];
        }
    }
    let w = (v * v + grad_sq).sqrt();
    let mut g_hat = [[R::zero(); 2]; 2];
    let mut b_hat = [[R::zero(); 2]; 2];
    for i in 0..n {
        for j in 0..n {
            g_hat[i][j] = v * v * e[i][j] + grad[i] * grad[j];
            b_hat[i][j] = (-v * hess[i][j] + two * grad[i] * grad[j] + v * v * e[i][j]) / w;
        }
    }
    let g_hat_inv = smallmat::spd_inverse(&g_hat, n, node, metric_cond_limit::<R>())?;
    let a_hat = smallmat::mat_mul(&g_hat_inv, &b_hat, n);
    let shift = k * v * v / w;
    let mut a = [[R::zero(); 2]; 2];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = a_hat[i][j] / q;
            if i == j {
                a[i][j] = a[i][j] - shift;
            }
        }
    }
    let lambda_hat =
        smallmat::generalized_eigenvalues(&b_hat, &g_hat, n, node, metric_cond_limit::<R>())?;
    let mut lambda = [R::zero(); 2];
    for i in 0..n {
        lambda[i] = lambda_hat[i] / q - shift;
    }
    Ok(ConformalPoint {
        q,
        w,
        a_hat,
        a,
        lambda,
    })
}

/// Per-node conformal shape data for a whole graph.
#[derive(Debug, Clone)]
pub struct ConformalShape<R> {
    pub n: usize,
    pub points: Vec<ConformalPoint<R>>,
    /// (S₀, …, S_n) of the space-form principal curvatures, per node.
    pub sym: Vec<Vec<R>>,
}

/// Assembles â and a = â/q − K v² id/W at every node. The spectrum of `a`
/// matches the spherical-coordinate shape operator of the same hypersurface.
pub fn conformal_shape_operator<R: Real>(
    cg: &ConformalGraph<'_, R>,
) -> Result<ConformalShape<R>, GeomError> {
    let grid = cg.grid;
    let n = grid.dim();
    let (grad, _) = grid.covariant_gradient(&cg.v)?;
    let hess = grid.covariant_hessian(&cg.v)?;
    let mut points = Vec::with_capacity(grid.node_count());
    let mut sym = Vec::with_capacity(grid.node_count());
    for idx in 0..grid.node_count() {
        let p = conformal_point(
            cg.form,
            n,
            &grid.e[idx],
            &grid.e_inv[idx],
            cg.v[idx],
            grad[idx],
            hess[idx],
            idx,
        )?;
        sym.push(symfunc::elementary_symmetric(&p.lambda[..n]));
        points.push(p);
    }
    Ok(ConformalShape { n, points, sym })
}

/// The scale factors A(sv), B(sv) of the scaled family, per node.
#[derive(Debug, Clone)]
pub struct ScaleCoefficients<R> {
    pub s: R,
    pub a: Vec<R>,
    pub b: Vec<R>,
}

/// A(sv) = (1 + K s²v²)/(s(1 + K v²)), B(sv) = K(1 − s²)v²/(s(1 + Kv²)W(v)).
pub fn scale_coefficients<R: Real>(
    cg: &ConformalGraph<'_, R>,
    s: R,
) -> Result<ScaleCoefficients<R>, GeomError> {
    let k = cg.form.k::<R>();
    let (grad, _) = cg.grid.covariant_gradient(&cg.v)?;
    let mut a = Vec::with_capacity(cg.v.len());
    let mut b = Vec::with_capacity(cg.v.len());
    for (node, &v) in cg.v.0.iter().enumerate() {
        let sv = s * v;
        if sv >= R::one() {
            return Err(GeomError::ScaleOutOfRange {
                node,
                value: sv.to_f64().unwrap_or(f64::NAN),
            });
        }
        let w = (v * v + cg.grid.grad_norm_sq(node, grad[node])).sqrt();
        let denom = s * (R::one() + k * v * v);
        a.push((R::one() + k * sv * sv) / denom);
        b.push(k * (R::one() - s * s) * v * v / (denom * w));
    }
    Ok(ScaleCoefficients { s, a, b })
}

static EXPANSION_CACHE: OnceLock<Mutex<HashMap<(usize, usize), Vec<f64>>>> = OnceLock::new();

/// The positive coefficients c(n, m, j), j = 0..m, of the expansion
/// S_m(λ(sv)) = Σ_j c(n,m,j) A^j B^{m−j} S_j(λ(v)) with c(n,m,m) = 1.
///
/// They are determined numerically: S_m(A λ + B·1) is sampled over random λ
/// and the coefficients recovered by a least-squares fit. The closed form
/// C(n−j, m−j) is not assumed (it is confirmed by a test instead).
pub fn expansion_coefficients(n: usize, m: usize) -> Vec<f64> {
    assert!(m >= 1 && m <= n, "need 1 <= m <= n");
    let cache = EXPANSION_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    if let Some(c) = guard.get(&(n, m)) {
        return c.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0ef);
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for _ in 0..(8 * (m + 2)) {
        let lambda: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..2.0)).collect();
        let s = symfunc::elementary_symmetric(&lambda);
        let x: f64 = rng.gen_range(-0.9..0.9);
        let shifted: Vec<f64> = lambda.iter().map(|&l| l + x).collect();
        let s_shifted = symfunc::elementary_symmetric(&shifted);
        let row: Vec<f64> = (0..m).map(|j| x.powi((m - j) as i32) * s[j]).collect();
        rows.push(row);
        rhs.push(s_shifted[m] - s[m]);
    }
    let mut c = linalg::least_squares(&rows, &rhs, m).expect("expansion coefficient fit");
    // fit residual must be at rounding level; the relation is exact
    for (row, &b) in rows.iter().zip(&rhs) {
        let pred: f64 = row.iter().zip(&c).map(|(r, cc)| r * cc).sum();
        assert!(
            (pred - b).abs() <= 1e-8 * (1.0 + b.abs()),
            "expansion fit residual too large"
        );
    }
    c.push(1.0);
    guard.insert((n, m), c.clone());
    c
}

/// Relative tolerance separating the analytic equality case (s = 1, B = 0)
/// from numerical noise in the scaled inequality.
pub const SCALED_EQUALITY_TOL: f64 = 1e-8;

/// Result of evaluating S_m(λ(sv)) along the direct and expansion routes.
#[derive(Debug, Clone)]
pub struct ScaledSm<R> {
    /// S_m(λ(sv)) from the scaled graph itself.
    pub direct: ScalarField<R>,
    /// Σ_j c(n,m,j) A^j B^{m−j} S_j(λ(v)).
    pub expanded: ScalarField<R>,
    pub max_discrepancy: R,
    /// S_m(λ(sv)) ≥ A^m S_m(λ(v)) pointwise (under the scaling sign
    /// conditions).
    pub inequality_ok: bool,
    /// Whether the inequality is an equality everywhere (within tolerance).
    pub equality_case: bool,
    /// The scaled graph sv stays m-admissible.
    pub scaled_admissible: bool,
}

/// Computes S_m(λ(sv)) two independent ways and checks the scaled
/// inequality. Requires the base graph to be m-admissible.
pub fn scaled_sm<R: Real>(
    cg: &ConformalGraph<'_, R>,
    s: R,
    m: usize,
) -> Result<ScaledSm<R>, GeomError> {
    let n = cg.grid.dim();
    let base = conformal_shape_operator(cg)?;
    let bad: Vec<usize> = (0..cg.grid.node_count())
        .filter(|&i| !symfunc::in_gamma_cone(&base.points[i].lambda[..n], m))
        .collect();
    if !bad.is_empty() {
        return Err(GeomError::NotAdmissible { m, nodes: bad });
    }
    let coeffs = scale_coefficients(cg, s)?;
    let scaled = ConformalGraph::new(cg.grid, cg.form, cg.v.map(|v| v * s))?;
    let scaled_shape = conformal_shape_operator(&scaled)?;
    let c: Vec<R> = expansion_coefficients(n, m)
        .into_iter()
        .map(lit::<R>)
        .collect();
    let mut direct = Vec::with_capacity(cg.grid.node_count());
    let mut expanded = Vec::with_capacity(cg.grid.node_count());
    let mut max_disc = R::zero();
    let mut inequality_ok = true;
    let mut equality = true;
    let sign_conditions = match cg.form {
        SpaceForm::Hyperbolic => s >= R::one(),
        SpaceForm::Elliptic => s <= R::one(),
    };
    let eq_tol = lit::<R>(SCALED_EQUALITY_TOL);
    for idx in 0..cg.grid.node_count() {
        let d = scaled_shape.sym[idx][m];
        let (a, b) = (coeffs.a[idx], coeffs.b[idx]);
        let mut e = R::zero();
        for (j, &cj) in c.iter().enumerate() {
            e = e + cj * a.powi(j as i32) * b.powi((m - j) as i32) * base.sym[idx][j];
        }
        max_disc = max_disc.max((d - e).abs());
        if sign_conditions {
            let lower = a.powi(m as i32) * base.sym[idx][m];
            let slack = d - lower;
            if slack < -eq_tol * (R::one() + lower.abs()) {
                inequality_ok = false;
            }
            if slack.abs() > eq_tol * (R::one() + lower.abs()) {
                equality = false;
            }
        }
        direct.push(d);
        expanded.push(e);
    }
    let scaled_admissible = (0..cg.grid.node_count())
        .all(|i| symfunc::in_gamma_cone(&scaled_shape.points[i].lambda[..n], m));
    Ok(ScaledSm {
        direct: ScalarField(direct),
        expanded: ScalarField(expanded),
        max_discrepancy: max_disc,
        inequality_ok: sign_conditions && inequality_ok || !sign_conditions,
        equality_case: equality,
        scaled_admissible,
    })
}

/// Eigenvalues of the linearization matrix ∂F_m/∂∇'_{ij}v in the per-node
/// principal frame: −(v/(qW))·∂S_m/∂λ_i. All strictly negative on
/// m-admissible graphs.
pub fn ellipticity_spectrum<R: Real>(
    cg: &ConformalGraph<'_, R>,
    m: usize,
) -> Result<Vec<Vec2<R>>, GeomError> {
    let n = cg.grid.dim();
    let shape = conformal_shape_operator(cg)?;
    let bad: Vec<usize> = (0..cg.grid.node_count())
        .filter(|&i| !symfunc::in_gamma_cone(&shape.points[i].lambda[..n], m))
        .collect();
    if !bad.is_empty() {
        return Err(GeomError::NotAdmissible { m, nodes: bad });
    }
    let mut out = Vec::with_capacity(cg.grid.node_count());
    for idx in 0..cg.grid.node_count() {
        let p = &shape.points[idx];
        let grad_sm = symfunc::sym_gradient(&p.lambda[..n], m);
        let factor = -cg.v[idx] / (p.q * p.w);
        let mut spec = [R::zero(); 2];
        for i in 0..n {
            spec[i] = factor * grad_sm[i];
        }
        out.push(spec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn random_v_field(grid: &SphereGrid<f64>, base: f64, amp: f64) -> ScalarField<f64> {
        ScalarField::from_fn(grid, |p| {
            base + amp * (p[0].cos() + 0.6 * (2.0 * p[0]).sin() + 0.4 * p[0].sin() * p[1].cos())
        })
    }

    #[test]
    fn transform_closed_forms() {
        let grid = SphereGrid::<f64>::build(1, 16).unwrap();
        let graph = geometry::RadialGraph::sphere(&grid, SpaceForm::Hyperbolic, 1.0).unwrap();
        let cg = to_conformal(&graph).unwrap();
        assert_relative_eq!(cg.v[0], 0.5f64.tanh(), epsilon = 1e-15);
        assert_relative_eq!(cg.v[0], 0.4621172, epsilon = 1e-7);
        let back = from_conformal(&ConformalGraph::new(
            &grid,
            SpaceForm::Hyperbolic,
            ScalarField::constant(0.5, grid.node_count()),
        )
        .unwrap())
        .unwrap();
        assert_relative_eq!(back.z[0], 2.0 * 0.5f64.atanh(), epsilon = 1e-15);
        assert_relative_eq!(back.z[0], 1.0986123, epsilon = 1e-7);
    }

    proptest! {
        #[test]
        fn round_trip_identity(base in 0.6f64..1.8, amp in 0.0f64..0.1) {
            let grid = SphereGrid::<f64>::build(1, 16).unwrap();
            let z = ScalarField::from_fn(&grid, |p| base + amp * p[0].cos());
            let graph = geometry::RadialGraph::new(&grid, SpaceForm::Hyperbolic, z.clone()).unwrap();
            let back = from_conformal(&to_conformal(&graph).unwrap()).unwrap();
            for i in 0..grid.node_count() {
                prop_assert!((back.z[i] - z[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_field_shape_operator() {
        // v ≡ v₀: â = (1/v₀) id, λ = (1 + K v₀²)/(2v₀) − K v₀
        let grid = SphereGrid::<f64>::build(2, 16).unwrap();
        let v0 = 0.5f64.tanh();
        let cg = ConformalGraph::new(
            &grid,
            SpaceForm::Hyperbolic,
            ScalarField::constant(v0, grid.node_count()),
        )
        .unwrap();
        let shape = conformal_shape_operator(&cg).unwrap();
        let coth1 = 1.0 / 1.0f64.tanh();
        for p in &shape.points {
            assert_relative_eq!(p.a_hat[0][0], 1.0 / v0, epsilon = 1e-9);
            assert_relative_eq!(p.lambda[0], coth1, epsilon = 1e-9);
            assert_relative_eq!(p.lambda[1], coth1, epsilon = 1e-9);
        }
        assert_relative_eq!((1.0 + v0 * v0) / (2.0 * v0), 1.3130353, epsilon = 1e-7);
    }

    #[test]
    fn constant_field_elliptic_matches_cot() {
        let grid = SphereGrid::<f64>::build(2, 16).unwrap();
        let v0 = 0.35f64;
        let z0 = 2.0 * v0.atan();
        let cg = ConformalGraph::new(
            &grid,
            SpaceForm::Elliptic,
            ScalarField::constant(v0, grid.node_count()),
        )
        .unwrap();
        let shape = conformal_shape_operator(&cg).unwrap();
        for p in &shape.points {
            assert_relative_eq!(p.lambda[0], 1.0 / z0.tan(), epsilon = 1e-9);
        }
    }

    #[test]
    fn dual_path_eigenvalues_agree() {
        let grid = SphereGrid::<f64>::build(2, 32).unwrap();
        let z = ScalarField::from_fn(&grid, |p| {
            1.1 + 0.05 * (p[0].cos() + 0.5 * p[0].sin() * p[1].cos())
        });
        let graph = geometry::RadialGraph::new(&grid, SpaceForm::Hyperbolic, z).unwrap();
        let spherical = geometry::compute_shape(&graph).unwrap();
        let cg = to_conformal(&graph).unwrap();
        let conf = conformal_shape_operator(&cg).unwrap();
        let mut worst: f64 = 0.0;
        for idx in 0..grid.node_count() {
            for i in 0..2 {
                worst = worst.max((spherical.lambda[idx][i] - conf.points[idx].lambda[i]).abs());
            }
        }
        assert!(worst < 1e-4, "sup discrepancy {worst}");
    }

    #[test]
    fn scale_coefficient_closed_forms() {
        let grid = SphereGrid::<f64>::build(1, 16).unwrap();
        let v0 = 0.5f64.tanh();
        let cg = ConformalGraph::new(
            &grid,
            SpaceForm::Hyperbolic,
            ScalarField::constant(v0, grid.node_count()),
        )
        .unwrap();
        // s = 1: A ≡ 1, B ≡ 0
        let c1 = scale_coefficients(&cg, 1.0).unwrap();
        assert_relative_eq!(c1.a[0], 1.0, epsilon = 1e-14);
        assert!(c1.b[0].abs() < 1e-14);
        // s = 1.2 closed-form values
        let c = scale_coefficients(&cg, 1.2).unwrap();
        assert_relative_eq!(c.a[0], 0.7337686, epsilon = 1e-6);
        assert_relative_eq!(c.b[0], 0.2154536, epsilon = 1e-6);
        // consistency with the scaled-sphere curvature
        let scaled_curv = 1.0 / (2.0 * (1.2 * v0).atanh()).tanh();
        let coth1 = 1.0 / 1.0f64.tanh();
        assert_relative_eq!(c.a[0] * coth1 + c.b[0], scaled_curv, epsilon = 1e-9);
        assert_relative_eq!(c.a[0] * coth1 + c.b[0], 1.1789176, epsilon = 1e-6);
    }

    #[test]
    fn scale_out_of_range_detected() {
        let grid = SphereGrid::<f64>::build(1, 16).unwrap();
        let cg = ConformalGraph::new(
            &grid,
            SpaceForm::Hyperbolic,
            ScalarField::constant(0.6, grid.node_count()),
        )
        .unwrap();
        assert!(matches!(
            scale_coefficients(&cg, 1.8),
            Err(GeomError::ScaleOutOfRange { .. })
        ));
    }

    #[test]
    fn expansion_coefficients_match_binomial_closed_form() {
        // conjectured c(n, m, j) = C(n-j, m-j), confirmed by the fit
        assert_relative_eq!(expansion_coefficients(2, 2)[1], 1.0, epsilon = 1e-9);
        assert_relative_eq!(expansion_coefficients(2, 2)[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(expansion_coefficients(3, 2)[1], 2.0, epsilon = 1e-9);
        assert_relative_eq!(expansion_coefficients(3, 2)[0], 3.0, epsilon = 1e-9);
        assert_relative_eq!(expansion_coefficients(2, 1)[0], 2.0, epsilon = 1e-9);
        assert_relative_eq!(expansion_coefficients(1, 1)[0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn scaled_expansion_identity_on_sphere() {
        let grid = SphereGrid::<f64>::build(2, 16).unwrap();
        let v0 = 0.5f64.tanh();
        let cg = ConformalGraph::new(
            &grid,
            SpaceForm::Hyperbolic,
            ScalarField::constant(v0, grid.node_count()),
        )
        .unwrap();
        let r = scaled_sm(&cg, 1.2, 2).unwrap();
        assert!(r.max_discrepancy < 1e-9, "{}", r.max_discrepancy);
        assert!(r.inequality_ok);
        assert!(r.scaled_admissible);
        // direct S₂ equals the scaled-sphere closed form coth²(2·artanh(1.2v))
        assert_relative_eq!(r.direct[0], 1.1789176f64.powi(2), epsilon = 1e-5);
        assert_relative_eq!(r.direct[0], 1.3898466, epsilon = 1e-5);
    }

    #[test]
    fn s_equal_one_reduces_to_base() {
        let grid = SphereGrid::<f64>::build(2, 16).unwrap();
        let cg =
            ConformalGraph::new(&grid, SpaceForm::Hyperbolic, random_v_field(&grid, 0.5, 0.02))
                .unwrap();
        let base = conformal_shape_operator(&cg).unwrap();
        let r = scaled_sm(&cg, 1.0, 2).unwrap();
        for idx in 0..grid.node_count() {
            assert_relative_eq!(r.direct[idx], base.sym[idx][2], epsilon = 1e-12);
            assert_relative_eq!(r.expanded[idx], base.sym[idx][2], epsilon = 1e-12);
        }
        assert!(r.equality_case);
    }

    #[test]
    fn random_graph_expansion_and_inequality() {
        let grid = SphereGrid::<f64>::build(2, 24).unwrap();
        let cg =
            ConformalGraph::new(&grid, SpaceForm::Hyperbolic, random_v_field(&grid, 0.5, 0.03))
                .unwrap();
        for s in [1.1, 1.5] {
            let r = scaled_sm(&cg, s, 2).unwrap();
            assert!(r.max_discrepancy < 1e-10, "s={s}: {}", r.max_discrepancy);
            assert!(r.inequality_ok);
            assert!(!r.equality_case);
            assert!(r.scaled_admissible);
        }
    }

    #[test]
    fn elliptic_scaling_with_small_s() {
        let grid = SphereGrid::<f64>::build(2, 16).unwrap();
        let cg = ConformalGraph::new(
            &grid,
            SpaceForm::Elliptic,
            random_v_field(&grid, 0.4, 0.02),
        )
        .unwrap();
        for s in [0.7, 0.9] {
            let r = scaled_sm(&cg, s, 2).unwrap();
            assert!(r.max_discrepancy < 1e-10);
            assert!(r.inequality_ok);
            assert!(r.scaled_admissible);
        }
    }

    #[test]
    fn ellipticity_spectrum_closed_forms() {
        let grid = SphereGrid::<f64>::build(2, 16).unwrap();
        let v0 = 0.5f64.tanh();
        let cg = ConformalGraph::new(
            &grid,
            SpaceForm::Hyperbolic,
            ScalarField::constant(v0, grid.node_count()),
        )
        .unwrap();
        // m = 1: spectrum = {−v/(qW)} (double)
        let spec1 = ellipticity_spectrum(&cg, 1).unwrap();
        let q = ConformalGraph::q_of(SpaceForm::Hyperbolic, v0);
        let expect = -v0 / (q * v0);
        assert_relative_eq!(spec1[0][0], expect, epsilon = 1e-10);
        assert_relative_eq!(spec1[0][1], expect, epsilon = 1e-10);
        // m = 2 on a sphere: −(v/(qW))·coth(z₀) (double)
        let spec2 = ellipticity_spectrum(&cg, 2).unwrap();
        let coth1 = 1.0 / 1.0f64.tanh();
        assert_relative_eq!(spec2[0][0], expect * coth1, epsilon = 1e-9);
    }

    #[test]
    fn ellipticity_negative_on_random_admissible_graph() {
        let grid = SphereGrid::<f64>::build(2, 24).unwrap();
        let cg =
            ConformalGraph::new(&grid, SpaceForm::Hyperbolic, random_v_field(&grid, 0.5, 0.03))
                .unwrap();
        let spec = ellipticity_spectrum(&cg, 2).unwrap();
        for node_spec in spec {
            assert!(node_spec[0] < 0.0 && node_spec[1] < 0.0);
        }
    }

    #[test]
    fn chain_rule_relations() {
        // z_i = q v_i and ∇'_{ij}z = q∇'_{ij}v − K q² v v_i v_j, checked by
        // comparing the discrete derivatives of z with those of v.
        let grid = SphereGrid::<f64>::build(1, 512).unwrap();
        let z = ScalarField::from_fn(&grid, |p| 1.1 + 0.08 * p[0].cos());
        let graph = geometry::RadialGraph::new(&grid, SpaceForm::Hyperbolic, z).unwrap();
        let cg = to_conformal(&graph).unwrap();
        let (gz, _) = grid.covariant_gradient(&graph.z).unwrap();
        let hz = grid.covariant_hessian(&graph.z).unwrap();
        let (gv, _) = grid.covariant_gradient(&cg.v).unwrap();
        let hv = grid.covariant_hessian(&cg.v).unwrap();
        let k = -1.0;
        for idx in 0..grid.node_count() {
            let v = cg.v[idx];
            let q = 2.0 / (1.0 + k * v * v);
            assert_relative_eq!(gz[idx][0], q * gv[idx][0], epsilon = 2e-5);
            assert_relative_eq!(
                hz[idx][0][0],
                q * hv[idx][0][0] - k * q * q * v * gv[idx][0] * gv[idx][0],
                epsilon = 2e-5
            );
        }
    }
}
