//! Numerical study of prescribed higher-order mean curvature equations for
//! radial graphs over the unit sphere inside hyperbolic or elliptic space
//! forms.
//!
//! The library discretizes a radial graph z: Sⁿ → (0, ∞) (n = 1, 2) over a
//! structured spherical grid, computes its first and second fundamental
//! forms, principal curvatures and elementary symmetric curvature functions
//! both in the radius variable z and in the conformal variable
//! v = t(z/2) ∈ (0, 1) (t = tanh or tan according to the curvature sign),
//! checks the solvability conditions on a curvature prescription ψ(u, ρ),
//! solves H_m(λ) = ψ by damped Newton continuation, and verifies the
//! scaling structure relating distinct solutions as well as the
//! boundary-touch interpolation identity.
//!
//! All numerical kernels are generic over the scalar type through the
//! [`Real`] trait; `f64` aliases for the main types are exported at the
//! crate root.

pub mod conformal;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod psi;
pub mod report;
pub mod scalar;
pub mod smallmat;
pub mod solver;
pub mod spaceform;
pub mod symfunc;
pub mod verify;

pub use error::{GeomError, ParseError, SolveError};
pub use scalar::Real;
pub use spaceform::SpaceForm;

pub use conformal::{ConformalGraph, ConformalPoint, ConformalShape, ScaleCoefficients, ScaledSm};
pub use expr::Expr;
pub use geometry::{Admissibility, HmResidual, RadialGraph, ShapeData};
pub use grid::{ScalarField, SphereGrid};
pub use psi::{ConditionReport, PsiKind, PsiSpec, QProfile};
pub use report::Json;
pub use solver::{
    AdmissibilityPolicy, InitialGuess, LinearSolver, SolveReport, SolverConfig, StepDiagnostics,
};
pub use verify::{BoundarySide, BoundaryTouchReport, IdentityCheck, IdentitySuite, ScalingFit};

// Concrete double-precision aliases for the main generic types.
pub type SphereGrid64 = grid::SphereGrid<f64>;
pub type ScalarField64 = grid::ScalarField<f64>;
pub type RadialGraph64<'g> = geometry::RadialGraph<'g, f64>;
pub type ShapeData64 = geometry::ShapeData<f64>;
pub type ConformalGraph64<'g> = conformal::ConformalGraph<'g, f64>;
pub type PsiSpec64 = psi::PsiSpec<f64>;
pub type SolverConfig64 = solver::SolverConfig<f64>;
pub type ScalingFit64 = verify::ScalingFit<f64>;

// Single-precision aliases (reduced accuracy; useful for experimentation).
pub type SphereGrid32 = grid::SphereGrid<f32>;
pub type ScalarField32 = grid::ScalarField<f32>;
pub type RadialGraph32<'g> = geometry::RadialGraph<'g, f32>;
pub type PsiSpec32 = psi::PsiSpec<f32>;
pub type SolverConfig32 = solver::SolverConfig<f32>;
