//! Tiny dense kernels for the per-node n×n (n ≤ 2) matrices: inverses,
//! determinants, Cholesky-reduced generalized eigenvalues.

use crate::error::GeomError;
use crate::grid::{Mat2, Vec2};
use crate::scalar::{lit, Real};

pub fn det<R: Real>(m: &Mat2<R>, n: usize) -> R {
    match n {
        1 => m[0][0],
        _ => m[0][0] * m[1][1] - m[0][1] * m[1][0],
    }
}

pub fn mat_mul<R: Real>(a: &Mat2<R>, b: &Mat2<R>, n: usize) -> Mat2<R> {
    let mut out = [[R::zero(); 2]; 2];
    for i in 0..n {
        for j in 0..n {
            let mut acc = R::zero();
            for k in 0..n {
                acc = acc + a[i][k] * b[k][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn transpose<R: Real>(a: &Mat2<R>, n: usize) -> Mat2<R> {
    let mut out = [[R::zero(); 2]; 2];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = a[j][i];
        }
    }
    out
}

/// Inverse of a symmetric positive definite n×n matrix; errors when the
/// condition number estimate exceeds `cond_limit`.
pub fn spd_inverse<R: Real>(
    m: &Mat2<R>,
    n: usize,
    node: usize,
    cond_limit: R,
) -> Result<Mat2<R>, GeomError> {
    let degenerate = |cond: R| GeomError::DegenerateMetric {
        node,
        cond: cond.to_f64().unwrap_or(f64::NAN),
    };
    if n == 1 {
        if m[0][0] <= R::zero() {
            return Err(degenerate(R::infinity()));
        }
        let mut out = [[R::zero(); 2]; 2];
        out[0][0] = R::one() / m[0][0];
        return Ok(out);
    }
    let d = det(m, 2);
    let (lo, hi) = sym2_eigenvalues(m);
    if lo <= R::zero() || hi / lo > cond_limit {
        return Err(degenerate(if lo <= R::zero() { R::infinity() } else { hi / lo }));
    }
    let mut out = [[R::zero(); 2]; 2];
    out[0][0] = m[1][1] / d;
    out[1][1] = m[0][0] / d;
    out[0][1] = -m[0][1] / d;
    out[1][0] = -m[1][0] / d;
    Ok(out)
}

/// Eigenvalues of a symmetric 2×2 matrix, ascending.
pub fn sym2_eigenvalues<R: Real>(m: &Mat2<R>) -> (R, R) {
    let half = lit::<R>(0.5);
    let mean = (m[0][0] + m[1][1]) * half;
    let d = (m[0][0] - m[1][1]) * half;
    let r = (d * d + m[0][1] * m[1][0]).max(R::zero()).sqrt();
    (mean - r, mean + r)
}

/// Generalized eigenvalues of the pencil (b, g) with g SPD, via the Cholesky
/// reduction g = LLᵀ, M = L⁻¹ b L⁻ᵀ. Ascending order.
pub fn generalized_eigenvalues<R: Real>(
    b: &Mat2<R>,
    g: &Mat2<R>,
    n: usize,
    node: usize,
    cond_limit: R,
) -> Result<Vec2<R>, GeomError> {
    if n == 1 {
        if g[0][0] <= R::zero() {
            return Err(GeomError::DegenerateMetric { node, cond: f64::INFINITY });
        }
        return Ok([b[0][0] / g[0][0], R::zero()]);
    }
    let (lo, hi) = sym2_eigenvalues(g);
    if lo <= R::zero() || hi / lo > cond_limit {
        return Err(GeomError::DegenerateMetric {
            node,
            cond: (hi / lo).to_f64().unwrap_or(f64::INFINITY),
        });
    }
    // g = LLᵀ with L lower triangular
    let l11 = g[0][0].sqrt();
    let l21 = g[1][0] / l11;
    let l22 = (g[1][1] - l21 * l21).sqrt();
    // C = L⁻¹ b, then M = C L⁻ᵀ
    let c11 = b[0][0] / l11;
    let c12 = b[0][1] / l11;
    let c21 = (b[1][0] - l21 * c11) / l22;
    let c22 = (b[1][1] - l21 * c12) / l22;
    let m11 = c11 / l11;
    let m12 = (c12 - l21 * m11) / l22;
    let m21 = c21 / l11;
    let m22 = (c22 - l21 * m21) / l22;
    // M is symmetric up to rounding
    let sym = [[m11, (m12 + m21) * lit::<R>(0.5)], [(m12 + m21) * lit::<R>(0.5), m22]];
    let (a, b2) = sym2_eigenvalues(&sym);
    Ok([a, b2])
}
