//! Finite-difference discretization of the unit sphere Sⁿ (n = 1, 2) with the
//! round metric e, its Christoffel symbols, and covariant first and second
//! derivatives of scalar fields.
//!
//! For n = 2 the grid is latitude-longitude in polar coordinates (θ, φ) with
//! latitude rings offset by half a step from the poles; derivatives at the
//! rings nearest a pole continue the field across the pole by the antipodal
//! shift φ → φ + π.

use crate::error::GeomError;
use crate::scalar::{lit, Real};

/// Small symmetric matrix with at most 2 meaningful rows/columns.
pub type Mat2<R> = [[R; 2]; 2];
/// Small vector with at most 2 meaningful entries.
pub type Vec2<R> = [R; 2];

/// A scalar field sampled at the grid nodes, stored node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<R>(pub Vec<R>);

impl<R: Real> ScalarField<R> {
    pub fn constant(value: R, len: usize) -> Self {
        ScalarField(vec![value; len])
    }

    pub fn from_fn(grid: &SphereGrid<R>, f: impl Fn(Vec2<R>) -> R) -> Self {
        ScalarField(grid.nodes.iter().map(|&c| f(c)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn map(&self, f: impl Fn(R) -> R) -> Self {
        ScalarField(self.0.iter().map(|&x| f(x)).collect())
    }

    pub fn sup_norm(&self) -> R {
        self.0.iter().fold(R::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl<R> std::ops::Index<usize> for ScalarField<R> {
    type Output = R;
    fn index(&self, i: usize) -> &R {
        &self.0[i]
    }
}

impl<R> std::ops::IndexMut<usize> for ScalarField<R> {
    fn index_mut(&mut self, i: usize) -> &mut R {
        &mut self.0[i]
    }
}

/// Per-neighbor weights of the raw partial-derivative stencils at one node:
/// `d[i]` is the weight of this neighbor in ∂_i, `dd[i][j]` in ∂_{ij}.
#[derive(Debug, Clone, Copy)]
pub struct StencilEntry<R> {
    pub node: usize,
    pub d: Vec2<R>,
    pub dd: Mat2<R>,
}

/// Discretization of Sⁿ carrying the round metric and its Christoffel symbols.
#[derive(Debug, Clone)]
pub struct SphereGrid<R> {
    n: usize,
    n_theta: usize,
    n_phi: usize,
    pub nodes: Vec<Vec2<R>>,
    /// Round metric components e_ij per node.
    pub e: Vec<Mat2<R>>,
    /// Inverse metric components e^ij per node.
    pub e_inv: Vec<Mat2<R>>,
    /// Christoffel symbols Γ'^k_{ij} per node, indexed `[k][i][j]`.
    pub christoffel: Vec<[Mat2<R>; 2]>,
    pub spacing: Vec2<R>,
}

impl<R: Real> SphereGrid<R> {
    /// Builds a grid on Sⁿ with `resolution` nodes per axis (for n = 2 the
    /// longitude axis gets 2 × resolution nodes).
    pub fn build(n: usize, resolution: usize) -> Result<Self, GeomError> {
        if n != 1 && n != 2 {
            return Err(GeomError::UnsupportedDimension(n));
        }
        if resolution < 8 {
            return Err(GeomError::ResolutionTooSmall(resolution));
        }
        let two_pi = lit::<R>(std::f64::consts::TAU);
        let pi = lit::<R>(std::f64::consts::PI);
        match n {
            1 => {
                let h = two_pi / lit(resolution as f64);
                let nodes: Vec<Vec2<R>> = (0..resolution)
                    .map(|i| [h * lit(i as f64), R::zero()])
                    .collect();
                let count = nodes.len();
                let mut e = vec![[[R::zero(); 2]; 2]; count];
                let mut e_inv = vec![[[R::zero(); 2]; 2]; count];
                for k in 0..count {
                    e[k][0][0] = R::one();
                    e_inv[k][0][0] = R::one();
                }
                Ok(SphereGrid {
                    n,
                    n_theta: resolution,
                    n_phi: 1,
                    nodes,
                    e,
                    e_inv,
                    christoffel: vec![[[[R::zero(); 2]; 2]; 2]; count],
                    spacing: [h, R::zero()],
                })
            }
            _ => {
                let n_theta = resolution;
                let n_phi = 2 * resolution;
                let h_theta = pi / lit(n_theta as f64);
                let h_phi = two_pi / lit(n_phi as f64);
                let half = lit::<R>(0.5);
                let mut nodes = Vec::with_capacity(n_theta * n_phi);
                for k in 0..n_theta {
                    let theta = h_theta * (lit::<R>(k as f64) + half);
                    for j in 0..n_phi {
                        nodes.push([theta, h_phi * lit(j as f64)]);
                    }
                }
                let count = nodes.len();
                let mut e = vec![[[R::zero(); 2]; 2]; count];
                let mut e_inv = vec![[[R::zero(); 2]; 2]; count];
                let mut christoffel = vec![[[[R::zero(); 2]; 2]; 2]; count];
                for (idx, node) in nodes.iter().enumerate() {
                    let theta = node[0];
                    let (sin_t, cos_t) = (theta.sin(), theta.cos());
                    e[idx][0][0] = R::one();
                    e[idx][1][1] = sin_t * sin_t;
                    e_inv[idx][0][0] = R::one();
                    e_inv[idx][1][1] = R::one() / (sin_t * sin_t);
                    // Γ^θ_{φφ} = -sinθ cosθ, Γ^φ_{θφ} = Γ^φ_{φθ} = cotθ
                    christoffel[idx][0][1][1] = -sin_t * cos_t;
                    christoffel[idx][1][0][1] = cos_t / sin_t;
                    christoffel[idx][1][1][0] = cos_t / sin_t;
                }
                Ok(SphereGrid {
                    n,
                    n_theta,
                    n_phi,
                    nodes,
                    e,
                    e_inv,
                    christoffel,
                    spacing: [h_theta, h_phi],
                })
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    fn index(&self, k: usize, j: usize) -> usize {
        k * self.n_phi + j
    }

    /// Resolves the (ring, longitude) pair of a possibly out-of-range
    /// stencil offset to an actual node index. Crossing a pole maps to the
    /// same ring at longitude φ + π.
    fn resolve(&self, k: isize, j: isize) -> usize {
        if self.n == 1 {
            let m = self.n_theta as isize;
            return k.rem_euclid(m) as usize;
        }
        let nt = self.n_theta as isize;
        let np = self.n_phi as isize;
        let (k, j) = if k < 0 {
            (-k - 1, j + np / 2)
        } else if k >= nt {
            (2 * nt - k - 1, j + np / 2)
        } else {
            (k, j)
        };
        self.index(k as usize, j.rem_euclid(np) as usize)
    }

    /// Centered second-order stencil of the raw partials ∂_i and ∂_{ij} at
    /// node `idx`, as (neighbor, weight) entries with merged duplicates.
    pub fn stencil(&self, idx: usize) -> Vec<StencilEntry<R>> {
        let mut entries: Vec<StencilEntry<R>> = Vec::with_capacity(9);
        let mut add = |node: usize, axis_d: Option<(usize, R)>, ij: Option<(usize, usize, R)>| {
            let entry = match entries.iter_mut().find(|e| e.node == node) {
                Some(e) => e,
                None => {
                    entries.push(StencilEntry {
                        node,
                        d: [R::zero(); 2],
                        dd: [[R::zero(); 2]; 2],
                    });
                    entries.last_mut().unwrap()
                }
            };
            if let Some((i, w)) = axis_d {
                entry.d[i] = entry.d[i] + w;
            }
            if let Some((i, j, w)) = ij {
                entry.dd[i][j] = entry.dd[i][j] + w;
                if i != j {
                    entry.dd[j][i] = entry.dd[j][i] + w;
                }
            }
        };
        if self.n == 1 {
            let i = idx as isize;
            let h = self.spacing[0];
            let inv2h = lit::<R>(0.5) / h;
            let invh2 = R::one() / (h * h);
            add(self.resolve(i + 1, 0), Some((0, inv2h)), Some((0, 0, invh2)));
            add(self.resolve(i - 1, 0), Some((0, -inv2h)), Some((0, 0, invh2)));
            add(idx, None, Some((0, 0, -(invh2 + invh2))));
            return entries;
        }
        let k = (idx / self.n_phi) as isize;
        let j = (idx % self.n_phi) as isize;
        let (ht, hp) = (self.spacing[0], self.spacing[1]);
        // Fourth-order five-point stencils on both axes. Near the poles the
        // metric raising (e^{φφ} = 1/sin²θ) and the Christoffel corrections
        // (Γ^φ_{θφ} = cotθ) amplify the truncation error by 1/sinθ ~ 1/h on
        // the adjacent rings; a second-order scheme therefore only converges
        // at first order in the sup norm of the shape operator, while the
        // amplified fourth-order remainder stays O(h³).
        let twelfth = R::one() / lit::<R>(12.0);
        // first derivative: (−z₊₂ + 8z₊₁ − 8z₋₁ + z₋₂)/(12h)
        let ct1 = lit::<R>(8.0) * twelfth / ht;
        let ct2 = twelfth / ht;
        let cp1 = lit::<R>(8.0) * twelfth / hp;
        let cp2 = twelfth / hp;
        // second derivative: (−z₊₂ + 16z₊₁ − 30z₀ + 16z₋₁ − z₋₂)/(12h²)
        let dt0 = lit::<R>(30.0) * twelfth / (ht * ht);
        let dt1 = lit::<R>(16.0) * twelfth / (ht * ht);
        let dt2 = twelfth / (ht * ht);
        let dp0 = lit::<R>(30.0) * twelfth / (hp * hp);
        let dp1 = lit::<R>(16.0) * twelfth / (hp * hp);
        let dp2 = twelfth / (hp * hp);
        // axis θ
        add(self.resolve(k + 1, j), Some((0, ct1)), Some((0, 0, dt1)));
        add(self.resolve(k - 1, j), Some((0, -ct1)), Some((0, 0, dt1)));
        add(self.resolve(k + 2, j), Some((0, -ct2)), Some((0, 0, -dt2)));
        add(self.resolve(k - 2, j), Some((0, ct2)), Some((0, 0, -dt2)));
        // axis φ
        add(self.resolve(k, j + 1), Some((1, cp1)), Some((1, 1, dp1)));
        add(self.resolve(k, j - 1), Some((1, -cp1)), Some((1, 1, dp1)));
        add(self.resolve(k, j + 2), Some((1, -cp2)), Some((1, 1, -dp2)));
        add(self.resolve(k, j - 2), Some((1, cp2)), Some((1, 1, -dp2)));
        // center
        add(idx, None, Some((0, 0, -dt0)));
        add(idx, None, Some((1, 1, -dp0)));
        // cross ∂_{θφ}: tensor product of the two first-derivative stencils
        let wt = [(2isize, -ct2), (1, ct1), (-1, -ct1), (-2, ct2)];
        let wp = [(2isize, -cp2), (1, cp1), (-1, -cp1), (-2, cp2)];
        for &(dk, wk) in &wt {
            for &(dj, wj) in &wp {
                add(self.resolve(k + dk, j + dj), None, Some((0, 1, wk * wj)));
            }
        }
        entries
    }

    fn check_field(&self, field: &ScalarField<R>) -> Result<(), GeomError> {
        if field.len() != self.node_count() {
            return Err(GeomError::FieldLengthMismatch {
                got: field.len(),
                expected: self.node_count(),
            });
        }
        Ok(())
    }

    /// Raw partials (∂_i v, ∂_{ij} v) at node `idx` from the stencil.
    pub fn partials_at(&self, idx: usize, field: &ScalarField<R>) -> (Vec2<R>, Mat2<R>) {
        let mut d = [R::zero(); 2];
        let mut dd = [[R::zero(); 2]; 2];
        for entry in self.stencil(idx) {
            let v = field[entry.node];
            for i in 0..self.n {
                d[i] = d[i] + entry.d[i] * v;
                for j in 0..self.n {
                    dd[i][j] = dd[i][j] + entry.dd[i][j] * v;
                }
            }
        }
        (d, dd)
    }

    /// Covariant gradient: returns (v_i, v^i) per node, with v^i = e^{ij} v_j.
    pub fn covariant_gradient(
        &self,
        field: &ScalarField<R>,
    ) -> Result<(Vec<Vec2<R>>, Vec<Vec2<R>>), GeomError> {
        self.check_field(field)?;
        let mut lower = Vec::with_capacity(self.node_count());
        let mut upper = Vec::with_capacity(self.node_count());
        for idx in 0..self.node_count() {
            let (d, _) = self.partials_at(idx, field);
            let mut up = [R::zero(); 2];
            for i in 0..self.n {
                for j in 0..self.n {
                    up[i] = up[i] + self.e_inv[idx][i][j] * d[j];
                }
            }
            lower.push(d);
            upper.push(up);
        }
        Ok((lower, upper))
    }

    /// Covariant Hessian ∇'_{ij}v = ∂_{ij}v − Γ'^k_{ij} ∂_k v, symmetric by
    /// construction.
    pub fn covariant_hessian(&self, field: &ScalarField<R>) -> Result<Vec<Mat2<R>>, GeomError> {
        self.check_field(field)?;
        let mut out = Vec::with_capacity(self.node_count());
        for idx in 0..self.node_count() {
            let (d, dd) = self.partials_at(idx, field);
            out.push(self.correct_hessian(idx, d, dd));
        }
        Ok(out)
    }

    /// Applies the Christoffel correction to raw partials.
    pub fn correct_hessian(&self, idx: usize, d: Vec2<R>, dd: Mat2<R>) -> Mat2<R> {
        let mut h = [[R::zero(); 2]; 2];
        for i in 0..self.n {
            for j in 0..self.n {
                let mut val = dd[i][j];
                for k in 0..self.n {
                    val = val - self.christoffel[idx][k][i][j] * d[k];
                }
                h[i][j] = val;
            }
        }
        // enforce exact symmetry
        if self.n == 2 {
            let half = lit::<R>(0.5);
            let sym = (h[0][1] + h[1][0]) * half;
            h[0][1] = sym;
            h[1][0] = sym;
        }
        h
    }

    /// |∇'v|² = e^{ij} v_i v_j at a node given the lowered gradient.
    pub fn grad_norm_sq(&self, idx: usize, d: Vec2<R>) -> R {
        let mut acc = R::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                acc = acc + self.e_inv[idx][i][j] * d[i] * d[j];
            }
        }
        acc
    }
}
