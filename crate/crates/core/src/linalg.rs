//! Dense LU with partial pivoting and a restarted GMRES for the Newton
//! linear systems. Kept deliberately small; problem sizes are a few thousand
//! unknowns at most.

use crate::scalar::{lit, Real};

/// Sparse matrix in row-major (index, value) list form.
#[derive(Debug, Clone)]
pub struct SparseRows<R> {
    pub rows: Vec<Vec<(usize, R)>>,
}

impl<R: Real> SparseRows<R> {
    pub fn new(n: usize) -> Self {
        SparseRows {
            rows: vec![Vec::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn add(&mut self, i: usize, j: usize, v: R) {
        match self.rows[i].iter_mut().find(|(c, _)| *c == j) {
            Some((_, x)) => *x = *x + v,
            None => self.rows[i].push((j, v)),
        }
    }

    pub fn matvec(&self, x: &[R], out: &mut [R]) {
        for (i, row) in self.rows.iter().enumerate() {
            let mut acc = R::zero();
            for &(j, v) in row {
                acc = acc + v * x[j];
            }
            out[i] = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<R> {
        (0..self.len())
            .map(|i| {
                self.rows[i]
                    .iter()
                    .find(|(j, _)| *j == i)
                    .map(|&(_, v)| v)
                    .unwrap_or_else(R::zero)
            })
            .collect()
    }

    pub fn to_dense(&self) -> Vec<R> {
        let n = self.len();
        let mut dense = vec![R::zero(); n * n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                dense[i * n + j] = dense[i * n + j] + v;
            }
        }
        dense
    }
}

/// Solves A x = b in place for a dense row-major A. Returns None when a pivot
/// collapses.
pub fn lu_solve<R: Real>(a: &mut [R], b: &mut [R]) -> Option<Vec<R>> {
    let n = b.len();
    assert_eq!(a.len(), n * n);
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[perm[col] * n + col].abs();
        for row in col + 1..n {
            let v = a[perm[row] * n + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if !(best > R::zero()) || !best.is_finite() {
            return None;
        }
        perm.swap(col, pivot);
        let p = perm[col];
        let inv = R::one() / a[p * n + col];
        for row in col + 1..n {
            let r = perm[row];
            let factor = a[r * n + col] * inv;
            if factor != R::zero() {
                a[r * n + col] = factor;
                for k in col + 1..n {
                    a[r * n + k] = a[r * n + k] - factor * a[p * n + k];
                }
            }
        }
    }
    // forward substitution on permuted rhs
    let mut y = vec![R::zero(); n];
    for i in 0..n {
        let mut acc = b[perm[i]];
        for k in 0..i {
            acc = acc - a[perm[i] * n + k] * y[k];
        }
        y[i] = acc;
    }
    // back substitution
    let mut x = vec![R::zero(); n];
    for i in (0..n).rev() {
        let mut acc = y[i];
        for k in i + 1..n {
            acc = acc - a[perm[i] * n + k] * x[k];
        }
        x[i] = acc / a[perm[i] * n + i];
    }
    Some(x)
}

/// Least-squares solve of an overdetermined system via normal equations.
pub fn least_squares<R: Real>(rows: &[Vec<R>], rhs: &[R], unknowns: usize) -> Option<Vec<R>> {
    let mut ata = vec![R::zero(); unknowns * unknowns];
    let mut atb = vec![R::zero(); unknowns];
    for (row, &b) in rows.iter().zip(rhs) {
        for i in 0..unknowns {
            atb[i] = atb[i] + row[i] * b;
            for j in 0..unknowns {
                ata[i * unknowns + j] = ata[i * unknowns + j] + row[i] * row[j];
            }
        }
    }
    lu_solve(&mut ata, &mut atb)
}

/// Restarted GMRES with Jacobi (diagonal) preconditioning.
/// Returns the solution and the final relative residual.
pub fn gmres<R: Real>(
    mat: &SparseRows<R>,
    b: &[R],
    restart: usize,
    max_outer: usize,
    tol: R,
) -> Option<(Vec<R>, R)> {
    let n = b.len();
    let diag = mat.diagonal();
    let precond: Vec<R> = diag
        .iter()
        .map(|&d| {
            if d.abs() > lit(1e-300) {
                R::one() / d
            } else {
                R::one()
            }
        })
        .collect();
    let b_norm = norm(b);
    if !(b_norm > R::zero()) {
        return Some((vec![R::zero(); n], R::zero()));
    }
    let mut x = vec![R::zero(); n];
    let mut tmp = vec![R::zero(); n];
    for _ in 0..max_outer {
        // r = M⁻¹ (b - A x)
        mat.matvec(&x, &mut tmp);
        let mut r: Vec<R> = (0..n).map(|i| (b[i] - tmp[i]) * precond[i]).collect();
        let beta = norm(&r);
        if beta / b_norm <= tol {
            return Some((x, beta / b_norm));
        }
        let m = restart.min(n);
        let mut basis: Vec<Vec<R>> = Vec::with_capacity(m + 1);
        scale(&mut r, R::one() / beta);
        basis.push(r);
        let mut h = vec![vec![R::zero(); m]; m + 1];
        let mut cs = vec![R::zero(); m];
        let mut sn = vec![R::zero(); m];
        let mut g = vec![R::zero(); m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            // w = M⁻¹ A v_k
            mat.matvec(&basis[k], &mut tmp);
            let mut w: Vec<R> = (0..n).map(|i| tmp[i] * precond[i]).collect();
            for j in 0..=k {
                let hjk = dot(&w, &basis[j]);
                h[j][k] = hjk;
                axpy(&mut w, -hjk, &basis[j]);
            }
            let wn = norm(&w);
            h[k + 1][k] = wn;
            // apply previous Givens rotations
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let denom = (h[k][k] * h[k][k] + wn * wn).sqrt();
            if !(denom > R::zero()) {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / denom;
            sn[k] = wn / denom;
            h[k][k] = denom;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            k_used = k + 1;
            if wn > lit(1e-300) {
                scale(&mut w, R::one() / wn);
                basis.push(w);
            } else {
                break;
            }
            if (g[k + 1].abs() / b_norm) <= tol {
                break;
            }
        }
        // solve the small triangular system
        let mut y = vec![R::zero(); k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in i + 1..k_used {
                acc = acc - h[i][j] * y[j];
            }
            y[i] = acc / h[i][i];
        }
        for (j, &yj) in y.iter().enumerate() {
            axpy(&mut x, yj, &basis[j]);
        }
        mat.matvec(&x, &mut tmp);
        let res: Vec<R> = (0..n).map(|i| (b[i] - tmp[i]) * precond[i]).collect();
        if norm(&res) / b_norm <= tol {
            return Some((x, norm(&res) / b_norm));
        }
    }
    mat.matvec(&x, &mut tmp);
    let res: Vec<R> = (0..n).map(|i| b[i] - tmp[i]).collect();
    let rel = norm(&res) / b_norm;
    if rel <= tol * lit(10.0) {
        Some((x, rel))
    } else {
        None
    }
}

fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter().zip(b).fold(R::zero(), |acc, (&x, &y)| acc + x * y)
}

fn norm<R: Real>(a: &[R]) -> R {
    dot(a, a).sqrt()
}

fn scale<R: Real>(a: &mut [R], s: R) {
    for x in a.iter_mut() {
        *x = *x * s;
    }
}

fn axpy<R: Real>(y: &mut [R], alpha: R, x: &[R]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lu_solves_random_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 20;
        let a: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut a_diag = a.clone();
        for i in 0..n {
            a_diag[i * n + i] += 5.0; // diagonally dominant
        }
        let x_true: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                b[i] += a_diag[i * n + j] * x_true[j];
            }
        }
        let x = lu_solve(&mut a_diag.clone(), &mut b.clone()).unwrap();
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn lu_rejects_singular() {
        let mut a = vec![1.0, 2.0, 2.0, 4.0];
        let mut b = vec![1.0, 1.0];
        assert!(lu_solve(&mut a, &mut b).is_none());
    }

    #[test]
    fn gmres_matches_lu() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 60;
        let mut sparse = SparseRows::new(n);
        for i in 0..n {
            sparse.add(i, i, 4.0 + rng.gen_range(0.0..1.0));
            sparse.add(i, (i + 1) % n, -1.0 + rng.gen_range(-0.2..0.2));
            sparse.add(i, (i + n - 1) % n, -1.0 + rng.gen_range(-0.2..0.2));
        }
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (x, rel) = gmres(&sparse, &b, 30, 50, 1e-12).unwrap();
        assert!(rel < 1e-10);
        let mut dense = sparse.to_dense();
        let x_lu = lu_solve(&mut dense, &mut b.clone()).unwrap();
        for i in 0..n {
            assert!((x[i] - x_lu[i]).abs() < 1e-8);
        }
    }
}
