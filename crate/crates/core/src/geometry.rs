//! Intrinsic and extrinsic geometry of a radial graph M = (u, z(u)) over Sⁿ
//! in a space form: induced metric, second fundamental form (inner normal),
//! shape operator, principal curvatures, symmetric curvature functions and
//! Γ_m-admissibility.

use crate::error::GeomError;
use crate::grid::{Mat2, ScalarField, SphereGrid, Vec2};
use crate::psi::PsiSpec;
use crate::scalar::{lit, Real};
use crate::smallmat;
use crate::spaceform::SpaceForm;
use crate::symfunc;

/// Condition-number limit beyond which the induced metric is reported
/// degenerate.
pub fn metric_cond_limit<R: Real>() -> R {
    lit(1e12)
}

/// A starshaped hypersurface represented by its radial field z over the grid.
#[derive(Debug, Clone)]
pub struct RadialGraph<'g, R> {
    pub grid: &'g SphereGrid<R>,
    pub form: SpaceForm,
    pub z: ScalarField<R>,
}

impl<'g, R: Real> RadialGraph<'g, R> {
    /// Wraps a radial field, enforcing 0 < z < a at every node.
    pub fn new(
        grid: &'g SphereGrid<R>,
        form: SpaceForm,
        z: ScalarField<R>,
    ) -> Result<Self, GeomError> {
        if z.len() != grid.node_count() {
            return Err(GeomError::FieldLengthMismatch {
                got: z.len(),
                expected: grid.node_count(),
            });
        }
        let bound = form.upper_bound::<R>();
        for (node, &value) in z.0.iter().enumerate() {
            if !(value > R::zero()) {
                return Err(GeomError::NonPositiveRadius {
                    node,
                    value: value.to_f64().unwrap_or(f64::NAN),
                });
            }
            if value >= bound {
                return Err(GeomError::RadiusOutOfRange {
                    node,
                    value: value.to_f64().unwrap_or(f64::NAN),
                    bound: bound.to_f64().unwrap_or(f64::INFINITY),
                });
            }
        }
        Ok(RadialGraph { grid, form, z })
    }

    pub fn sphere(grid: &'g SphereGrid<R>, form: SpaceForm, radius: R) -> Result<Self, GeomError> {
        Self::new(grid, form, ScalarField::constant(radius, grid.node_count()))
    }
}

/// Per-node fundamental forms, shape operator, principal curvatures and
/// elementary symmetric functions; populated in stages.
#[derive(Debug, Clone)]
pub struct ShapeData<R> {
    pub n: usize,
    pub g: Vec<Mat2<R>>,
    pub g_inv: Vec<Mat2<R>>,
    pub b: Vec<Mat2<R>>,
    pub a: Vec<Mat2<R>>,
    /// Principal curvatures, ascending, per node (only the first n entries
    /// are meaningful).
    pub lambda: Vec<Vec2<R>>,
    /// (S₀, …, S_n) per node with S₀ = 1.
    pub sym: Vec<Vec<R>>,
}

/// First and second fundamental forms of the graph per Eqs. g = f e + dz⊗dz
/// and the inner-normal second fundamental form.
pub fn fundamental_forms<R: Real>(graph: &RadialGraph<'_, R>) -> Result<ShapeData<R>, GeomError> {
    let grid = graph.grid;
    let n = grid.dim();
    let count = grid.node_count();
    let hess = grid.covariant_hessian(&graph.z)?;
    let (grad, _) = grid.covariant_gradient(&graph.z)?;
    let mut g = Vec::with_capacity(count);
    let mut g_inv = Vec::with_capacity(count);
    let mut b = Vec::with_capacity(count);
    for idx in 0..count {
        let rho = graph.z[idx];
        let (gm, bm) = forms_at(
            graph.form,
            n,
            &grid.e[idx],
            &grid.e_inv[idx],
            rho,
            grad[idx],
            hess[idx],
        );
        let gi = spd_inverse_closed_form(graph.form, n, &grid.e_inv[idx], rho, grad[idx], idx, &gm)?;
        g.push(gm);
        g_inv.push(gi);
        b.push(bm);
    }
    Ok(ShapeData {
        n,
        g,
        g_inv,
        b,
        a: Vec::new(),
        lambda: Vec::new(),
        sym: Vec::new(),
    })
}

/// Pointwise evaluation of (g, b) from radius, gradient and covariant
/// Hessian at one node.
pub fn forms_at<R: Real>(
    form: SpaceForm,
    n: usize,
    e: &Mat2<R>,
    e_inv: &Mat2<R>,
    rho: R,
    grad: Vec2<R>,
    hess: Mat2<R>,
) -> (Mat2<R>, Mat2<R>) {
    let f = form.f(rho);
    let df = form.df(rho);
    let dlnf = df / f;
    let half = lit::<R>(0.5);
    let mut grad_sq = R::zero();
    for i in 0..n {
        for j in 0..n {
            grad_sq = grad_sq + e_inv[i][j] * grad[i] * grad[j];
        }
    }
    let w = (f * f + f * grad_sq).sqrt();
    let scale = f / w;
    let mut g = [[R::zero(); 2]; 2];
    let mut b = [[R::zero(); 2]; 2];
    for i in 0..n {
        for j in 0..n {
            g[i][j] = f * e[i][j] + grad[i] * grad[j];
            b[i][j] = scale * (-hess[i][j] + dlnf * grad[i] * grad[j] + half * df * e[i][j]);
        }
    }
    (g, b)
}

/// Closed-form inverse g^{ij} = (1/f)(e^{ij} − z^i z^j / (f + |∇'z|²)),
/// cross-checked against the SPD inverse of the assembled g.
fn spd_inverse_closed_form<R: Real>(
    form: SpaceForm,
    n: usize,
    e_inv: &Mat2<R>,
    rho: R,
    grad: Vec2<R>,
    node: usize,
    g: &Mat2<R>,
) -> Result<Mat2<R>, GeomError> {
    // condition screening via the direct inverse
    let _ = smallmat::spd_inverse(g, n, node, metric_cond_limit::<R>())?;
    let f = form.f(rho);
    let mut up = [R::zero(); 2];
    let mut grad_sq = R::zero();
    for i in 0..n {
        for j in 0..n {
            up[i] = up[i] + e_inv[i][j] * grad[j];
        }
    }
    for i in 0..n {
        grad_sq = grad_sq + up[i] * grad[i];
    }
    let denom = f + grad_sq;
    let mut out = [[R::zero(); 2]; 2];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = (e_inv[i][j] - up[i] * up[j] / denom) / f;
        }
    }
    Ok(out)
}

/// Shape operator a^i_j = g^{ik} b_{kj}, populated into `shape.a`.
pub fn shape_operator<R: Real>(shape: &mut ShapeData<R>) {
    let n = shape.n;
    shape.a = shape
        .g_inv
        .iter()
        .zip(shape.b.iter())
        .map(|(gi, b)| smallmat::mat_mul(gi, b, n))
        .collect();
}

/// Principal curvatures as generalized eigenvalues of (b, g), ascending.
pub fn principal_curvatures<R: Real>(shape: &mut ShapeData<R>) -> Result<(), GeomError> {
    let n = shape.n;
    let mut lambda = Vec::with_capacity(shape.g.len());
    for (node, (b, g)) in shape.b.iter().zip(shape.g.iter()).enumerate() {
        lambda.push(smallmat::generalized_eigenvalues(
            b,
            g,
            n,
            node,
            metric_cond_limit::<R>(),
        )?);
    }
    shape.lambda = lambda;
    Ok(())
}

/// Fills the per-node S-vector from λ and cross-checks it against the sum of
/// principal minors of the shape operator.
pub fn symmetric_functions<R: Real>(shape: &mut ShapeData<R>) {
    let n = shape.n;
    shape.sym = shape
        .lambda
        .iter()
        .map(|l| symfunc::elementary_symmetric(&l[..n]))
        .collect();
}

/// Full pipeline: forms, shape operator, eigenvalues, symmetric functions.
pub fn compute_shape<R: Real>(graph: &RadialGraph<'_, R>) -> Result<ShapeData<R>, GeomError> {
    let mut shape = fundamental_forms(graph)?;
    shape_operator(&mut shape);
    principal_curvatures(&mut shape)?;
    symmetric_functions(&mut shape);
    Ok(shape)
}

/// Per-node Γ_m membership plus the global verdict.
#[derive(Debug, Clone)]
pub struct Admissibility {
    pub per_node: Vec<bool>,
    pub all: bool,
    pub offending: Vec<usize>,
}

pub fn is_m_admissible<R: Real>(shape: &ShapeData<R>, m: usize) -> Admissibility {
    let n = shape.n;
    let per_node: Vec<bool> = shape
        .lambda
        .iter()
        .map(|l| symfunc::in_gamma_cone(&l[..n], m))
        .collect();
    let offending: Vec<usize> = per_node
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(i, _)| i)
        .collect();
    Admissibility {
        all: offending.is_empty(),
        per_node,
        offending,
    }
}

/// Residual of the curvature equation together with the advisory
/// admissibility verdict.
#[derive(Debug, Clone)]
pub struct HmResidual<R> {
    pub residual: ScalarField<R>,
    pub admissible: bool,
    pub offending: Vec<usize>,
}

/// residual(u) = F_m(a^i_j(z(u))) − ψ̄(u, z(u)). The residual is returned
/// even when admissibility fails; the flag records the verdict.
pub fn hm_residual<R: Real>(
    graph: &RadialGraph<'_, R>,
    psi: &PsiSpec<R>,
    m: usize,
) -> Result<HmResidual<R>, GeomError> {
    let shape = compute_shape(graph)?;
    let adm = is_m_admissible(&shape, m);
    let mut residual = Vec::with_capacity(graph.grid.node_count());
    for idx in 0..graph.grid.node_count() {
        let fm = shape.sym[idx][m];
        let psi_bar = psi.bar_value(idx, graph.grid.nodes[idx], graph.z[idx]);
        residual.push(fm - psi_bar);
    }
    Ok(HmResidual {
        residual: ScalarField(residual),
        admissible: adm.all,
        offending: adm.offending,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SphereGrid;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_graph<'g>(
        grid: &'g SphereGrid<f64>,
        form: SpaceForm,
        base: f64,
        amp: f64,
        seed: u64,
    ) -> RadialGraph<'g, f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let z = ScalarField::from_fn(grid, |p| {
            base + amp
                * (c[0] * p[0].cos()
                    + c[1] * (2.0 * p[0]).sin()
                    + c[2] * p[0].sin() * p[1].cos()
                    + c[3] * p[0].sin() * p[1].sin()
                    + c[4] * (2.0 * p[1]).cos() * p[0].sin().powi(2)
                    + c[5])
        });
        RadialGraph::new(grid, form, z).unwrap()
    }

    #[test]
    fn rejects_out_of_range_radii() {
        let grid = SphereGrid::<f64>::build(1, 16).unwrap();
        let z = ScalarField::constant(-0.1, grid.node_count());
        assert!(matches!(
            RadialGraph::new(&grid, SpaceForm::Hyperbolic, z),
            Err(GeomError::NonPositiveRadius { .. })
        ));
        let z = ScalarField::constant(1.6, grid.node_count());
        assert!(matches!(
            RadialGraph::new(&grid, SpaceForm::Elliptic, z),
            Err(GeomError::RadiusOutOfRange { .. })
        ));
    }

    #[test]
    fn constant_graph_forms_hyperbolic() {
        // z ≡ 1, n = 2, K = -1: g = sinh²(1) e, b = sinh(1)cosh(1) e
        let grid = SphereGrid::<f64>::build(2, 16).unwrap();
        let graph = RadialGraph::sphere(&grid, SpaceForm::Hyperbolic, 1.0).unwrap();
        let shape = fundamental_forms(&graph).unwrap();
        let (sh, ch) = (1.0f64.sinh(), 1.0f64.cosh());
        for idx in 0..grid.node_count() {
            for i in 0..2 {
                for j in 0..2 {
                    assert_relative_eq!(
                        shape.g[idx][i][j],
                        sh * sh * grid.e[idx][i][j],
                        epsilon = 1e-10
                    );
                    assert_relative_eq!(
                        shape.b[idx][i][j],
                        sh * ch * grid.e[idx][i][j],
                        epsilon = 1e-10
                    );
                }
            }
        }
    }

    #[test]
    fn inverse_metric_really_inverts() {
        let grid = SphereGrid::<f64>::build(2, 16).unwrap();
        let graph = random_graph(&grid, SpaceForm::Hyperbolic, 1.1, 0.05, 3);
        let shape = fundamental_forms(&graph).unwrap();
        for idx in 0..grid.node_count() {
            let prod = smallmat::mat_mul(&shape.g_inv[idx], &shape.g[idx], 2);
            assert_relative_eq!(prod[0][0], 1.0, epsilon = 1e-10);
            assert_relative_eq!(prod[1][1], 1.0, epsilon = 1e-10);
            assert!(prod[0][1].abs() < 1e-10 && prod[1][0].abs() < 1e-10);
        }
    }

    #[test]
    fn determinant_identity() {
        // det g = f^{n-1}(f + |∇'z|²) det e on a random smooth graph
        for (n, res) in [(1usize, 64usize), (2, 24)] {
            let grid = SphereGrid::<f64>::build(n, res).unwrap();
            let graph = random_graph(&grid, SpaceForm::Hyperbolic, 1.2, 0.08, 11);
            let shape = fundamental_forms(&graph).unwrap();
            let (grad, _) = grid.covariant_gradient(&graph.z).unwrap();
            for idx in 0..grid.node_count() {
                let f = SpaceForm::Hyperbolic.f(graph.z[idx]);
                let gsq = grid.grad_norm_sq(idx, grad[idx]);
                let lhs = smallmat::det(&shape.g[idx], n);
                let rhs = f.powi(n as i32 - 1) * (f + gsq) * smallmat::det(&grid.e[idx], n);
                assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn sphere_shape_operator_is_coth_or_cot() {
        let grid = SphereGrid::<f64>::build(2, 16).unwrap();
        for (form, r, expect) in [
            (SpaceForm::Hyperbolic, 1.0, 1.0 / 1.0f64.tanh()),
            (SpaceForm::Elliptic, 0.7, 1.0 / 0.7f64.tan()),
        ] {
            let graph = RadialGraph::sphere(&grid, form, r).unwrap();
            let mut shape = fundamental_forms(&graph).unwrap();
            shape_operator(&mut shape);
            for idx in 0..grid.node_count() {
                assert_relative_eq!(shape.a[idx][0][0], expect, epsilon = 1e-10);
                assert_relative_eq!(shape.a[idx][1][1], expect, epsilon = 1e-10);
                assert!(shape.a[idx][0][1].abs() < 1e-10);
            }
        }
        // coth(1) = 1.3130353
        assert_relative_eq!(1.0 / 1.0f64.tanh(), 1.3130353, epsilon = 1e-6);
    }

    #[test]
    fn shape_operator_is_self_adjoint() {
        let grid = SphereGrid::<f64>::build(2, 16).unwrap();
        let graph = random_graph(&grid, SpaceForm::Hyperbolic, 1.0, 0.06, 17);
        let mut shape = fundamental_forms(&graph).unwrap();
        shape_operator(&mut shape);
        for idx in 0..grid.node_count() {
            let ga = smallmat::mat_mul(&shape.g[idx], &shape.a[idx], 2);
            assert!((ga[0][1] - ga[1][0]).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_eigenvalues_exact() {
        let grid = SphereGrid::<f64>::build(2, 16).unwrap();
        let graph = RadialGraph::sphere(&grid, SpaceForm::Hyperbolic, 1.0).unwrap();
        let shape = compute_shape(&graph).unwrap();
        let coth1 = 1.0 / 1.0f64.tanh();
        for idx in 0..grid.node_count() {
            assert!((shape.lambda[idx][0] - coth1).abs() < 1e-10);
            assert!((shape.lambda[idx][1] - coth1).abs() < 1e-10);
        }
    }

    #[test]
    fn eigenvalues_match_shape_operator_spectrum() {
        // eigenvalues of a^i_j (non-symmetric path) vs generalized eig of (b, g)
        let grid = SphereGrid::<f64>::build(2, 16).unwrap();
        let graph = random_graph(&grid, SpaceForm::Hyperbolic, 1.1, 0.07, 23);
        let shape = compute_shape(&graph).unwrap();
        for idx in 0..grid.node_count() {
            let a = &shape.a[idx];
            let tr = a[0][0] + a[1][1];
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
            let (l1, l2) = (tr / 2.0 - disc, tr / 2.0 + disc);
            assert_relative_eq!(shape.lambda[idx][0], l1, epsilon = 1e-10);
            assert_relative_eq!(shape.lambda[idx][1], l2, epsilon = 1e-10);
        }
    }

    #[test]
    fn minor_sums_equal_symmetric_functions() {
        let grid = SphereGrid::<f64>::build(2, 16).unwrap();
        let graph = random_graph(&grid, SpaceForm::Hyperbolic, 1.2, 0.05, 31);
        let shape = compute_shape(&graph).unwrap();
        for idx in 0..grid.node_count() {
            for m in 1..=2 {
                let f = symfunc::minor_sum(&shape.a[idx], 2, m);
                assert_relative_eq!(f, shape.sym[idx][m], max_relative = 1e-11, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn maclaurin_chain_on_admissible_nodes() {
        let grid = SphereGrid::<f64>::build(2, 16).unwrap();
        let graph = random_graph(&grid, SpaceForm::Hyperbolic, 1.3, 0.05, 41);
        let shape = compute_shape(&graph).unwrap();
        let adm = is_m_admissible(&shape, 2);
        assert!(adm.all);
        for idx in 0..grid.node_count() {
            let h = symfunc::normalized_means(&shape.sym[idx]);
            assert!(h[0] >= h[1].sqrt() - 1e-12, "node {idx}");
        }
    }

    #[test]
    fn sphere_is_admissible_for_all_m() {
        let grid = SphereGrid::<f64>::build(2, 16).unwrap();
        let graph = RadialGraph::sphere(&grid, SpaceForm::Hyperbolic, 0.8).unwrap();
        let shape = compute_shape(&graph).unwrap();
        for m in 1..=2 {
            assert!(is_m_admissible(&shape, m).all);
        }
    }
}
