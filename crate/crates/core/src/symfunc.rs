//! Elementary symmetric functions of principal curvatures and their matrix
//! counterparts (principal minor sums).

use crate::grid::Mat2;
use crate::scalar::{binomial, Real};

/// (S₀, …, S_n) for the eigenvalue vector λ, with S₀ = 1, by the direct
/// one-at-a-time recurrence.
pub fn elementary_symmetric<R: Real>(lambda: &[R]) -> Vec<R> {
    let n = lambda.len();
    let mut s = vec![R::zero(); n + 1];
    s[0] = R::one();
    for &l in lambda {
        for m in (1..=n).rev() {
            s[m] = s[m] + l * s[m - 1];
        }
    }
    s
}

/// Normalized mean curvatures H_m = S_m / C(n, m), m = 1..n.
pub fn normalized_means<R: Real>(s: &[R]) -> Vec<R> {
    let n = s.len() - 1;
    (1..=n).map(|m| s[m] / binomial::<R>(n, m)).collect()
}

/// Sum of principal m-minors F_m of an n×n matrix, by explicit enumeration.
pub fn minor_sum<R: Real>(a: &Mat2<R>, n: usize, m: usize) -> R {
    match (n, m) {
        (_, 0) => R::one(),
        (1, 1) => a[0][0],
        (2, 1) => a[0][0] + a[1][1],
        (2, 2) => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        _ => panic!("minor_sum: unsupported (n, m) = ({n}, {m})"),
    }
}

/// ∂S_m/∂λ_i = S_{m-1} of λ with λ_i removed.
pub fn sym_gradient<R: Real>(lambda: &[R], m: usize) -> Vec<R> {
    let n = lambda.len();
    (0..n)
        .map(|i| {
            let rest: Vec<R> = lambda
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &l)| l)
                .collect();
            elementary_symmetric(&rest)[m - 1]
        })
        .collect()
}

/// Γ_m membership: S_j(λ) > 0 for every 1 ≤ j ≤ m.
pub fn in_gamma_cone<R: Real>(lambda: &[R], m: usize) -> bool {
    let s = elementary_symmetric(lambda);
    (1..=m).all(|j| s[j] > R::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn symmetric_functions_of_equal_pair() {
        let c = 1.0f64 / 1.0f64.tanh(); // coth 1
        let s = elementary_symmetric(&[c, c]);
        assert_eq!(s[0], 1.0);
        assert_relative_eq!(s[1], 2.0 * c, epsilon = 1e-14);
        assert_relative_eq!(s[2], 1.7240617, epsilon = 1e-6);
        let h = normalized_means(&s);
        assert_relative_eq!(h[0], c, epsilon = 1e-14);
        assert_relative_eq!(h[1], c * c, epsilon = 1e-14);
    }

    #[test]
    fn zero_vector() {
        let s = elementary_symmetric(&[0.0, 0.0]);
        assert_eq!(s, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn gamma_cone_membership() {
        assert!(in_gamma_cone(&[-1.0, 3.0], 1)); // S1 = 2 > 0
        assert!(!in_gamma_cone(&[-1.0, 3.0], 2)); // S2 = -3 < 0
        assert!(!in_gamma_cone(&[2.0, -0.1], 2));
        assert!(in_gamma_cone(&[0.5, 0.7], 2));
    }

    #[test]
    fn sym_gradient_small_cases() {
        let g = sym_gradient(&[2.0, 5.0], 1);
        assert_eq!(g, vec![1.0, 1.0]);
        let g = sym_gradient(&[2.0, 5.0], 2);
        assert_eq!(g, vec![5.0, 2.0]);
    }

    #[test]
    fn minor_sum_matches_eigen_symmetric_functions() {
        // symmetric matrix: minors equal symmetric functions of eigenvalues
        let a = [[1.3, 0.4], [0.4, 0.8]];
        let (l1, l2) = crate::smallmat::sym2_eigenvalues(&a);
        let s = elementary_symmetric(&[l1, l2]);
        assert_relative_eq!(minor_sum(&a, 2, 1), s[1], epsilon = 1e-12);
        assert_relative_eq!(minor_sum(&a, 2, 2), s[2], epsilon = 1e-12);
    }
}
