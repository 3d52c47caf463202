//! Ambient space forms of constant sectional curvature K = ±1, presented as
//! warped products dρ² + f(ρ)e over the unit sphere with f = sinh²ρ
//! (hyperbolic) or sin²ρ (elliptic).

use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceForm {
    /// K = -1, f(ρ) = sinh²ρ, ρ ∈ (0, ∞)
    Hyperbolic,
    /// K = +1, f(ρ) = sin²ρ, ρ ∈ (0, π/2)
    Elliptic,
}

impl SpaceForm {
    pub fn from_k(k: i32) -> Option<SpaceForm> {
        match k {
            -1 => Some(SpaceForm::Hyperbolic),
            1 => Some(SpaceForm::Elliptic),
            _ => None,
        }
    }

    /// Curvature sign K as a scalar.
    pub fn k<R: Real>(self) -> R {
        match self {
            SpaceForm::Hyperbolic => -R::one(),
            SpaceForm::Elliptic => R::one(),
        }
    }

    pub fn k_int(self) -> i32 {
        match self {
            SpaceForm::Hyperbolic => -1,
            SpaceForm::Elliptic => 1,
        }
    }

    /// Upper bound a of the radial interval (∞ sentinel for K = -1).
    pub fn upper_bound<R: Real>(self) -> R {
        match self {
            SpaceForm::Hyperbolic => R::infinity(),
            SpaceForm::Elliptic => lit(std::f64::consts::FRAC_PI_2),
        }
    }

    /// Warping function f(ρ) = s(ρ)².
    pub fn f<R: Real>(self, rho: R) -> R {
        let s = self.s(rho);
        s * s
    }

    /// df/dρ = 2 s c.
    pub fn df<R: Real>(self, rho: R) -> R {
        let two = lit::<R>(2.0);
        two * self.s(rho) * self.c(rho)
    }

    /// s(ρ) = √f(ρ): sinh or sin.
    pub fn s<R: Real>(self, rho: R) -> R {
        match self {
            SpaceForm::Hyperbolic => rho.sinh(),
            SpaceForm::Elliptic => rho.sin(),
        }
    }

    /// c(ρ) = ds/dρ: cosh or cos.
    pub fn c<R: Real>(self, rho: R) -> R {
        match self {
            SpaceForm::Hyperbolic => rho.cosh(),
            SpaceForm::Elliptic => rho.cos(),
        }
    }

    /// t(ρ) = s/c: tanh or tan. Strictly increasing on (0, a).
    pub fn t<R: Real>(self, rho: R) -> R {
        self.s(rho) / self.c(rho)
    }

    /// Inverse of t: artanh or arctan.
    pub fn t_inv<R: Real>(self, x: R) -> R {
        match self {
            SpaceForm::Hyperbolic => x.atanh(),
            SpaceForm::Elliptic => x.atan(),
        }
    }

    /// c(ρ)/s(ρ): coth or cot, the principal curvature of the sphere z ≡ ρ.
    pub fn cot_like<R: Real>(self, rho: R) -> R {
        self.c(rho) / self.s(rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hyperbolic_profile() {
        let f = SpaceForm::Hyperbolic;
        assert_relative_eq!(f.f::<f64>(1.0), 1.0f64.sinh().powi(2), epsilon = 1e-15);
        assert_eq!(f.f::<f64>(0.0), 0.0);
        assert!(f.df::<f64>(0.5) > 0.0);
        assert_relative_eq!(f.cot_like::<f64>(1.0), 1.0 / 1.0f64.tanh(), epsilon = 1e-15);
    }

    #[test]
    fn elliptic_profile() {
        let f = SpaceForm::Elliptic;
        assert_relative_eq!(f.f::<f64>(0.3), 0.3f64.sin().powi(2), epsilon = 1e-15);
        assert!(f.df::<f64>(0.7) > 0.0);
        assert!(f.upper_bound::<f64>() < 1.6);
    }

    #[test]
    fn t_is_increasing_and_inverts() {
        for form in [SpaceForm::Hyperbolic, SpaceForm::Elliptic] {
            let mut prev = 0.0;
            for i in 1..20 {
                let rho = 0.07 * i as f64;
                let t = form.t::<f64>(rho);
                assert!(t > prev);
                assert_relative_eq!(form.t_inv::<f64>(t), rho, epsilon = 1e-12);
                prev = t;
            }
        }
    }
}
