//! Error types shared across the geometry, condition-checking and solver
//! modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("unsupported sphere dimension {0} (only n = 1, 2)")]
    UnsupportedDimension(usize),
    #[error("grid resolution {0} too small (need >= 8)")]
    ResolutionTooSmall(usize),
    #[error("field length {got} does not match node count {expected}")]
    FieldLengthMismatch { got: usize, expected: usize },
    #[error("non-positive radius z = {value} at node {node}")]
    NonPositiveRadius { node: usize, value: f64 },
    #[error("radius z = {value} at node {node} exceeds the ambient bound {bound}")]
    RadiusOutOfRange { node: usize, value: f64, bound: f64 },
    #[error("induced metric is numerically degenerate at node {node} (cond ~ {cond:.3e})")]
    DegenerateMetric { node: usize, cond: f64 },
    #[error("conformal variable v = {value} out of (0, 1) at node {node}")]
    OutOfRange { node: usize, value: f64 },
    #[error("scaled field sv >= 1 at node {node} (sv = {value})")]
    ScaleOutOfRange { node: usize, value: f64 },
    #[error("graph is not {m}-admissible at {} node(s), first offender {}", .nodes.len(), .nodes.first().copied().unwrap_or(0))]
    NotAdmissible { m: usize, nodes: Vec<usize> },
    #[error("graphs live on different grids")]
    GridMismatch,
    #[error("node {node}: z = {value} is not at the {boundary} boundary (target {target})")]
    NotAtBoundary { node: usize, value: f64, boundary: &'static str, target: f64 },
    #[error("node {node} is not a discrete extremum (|grad z| = {grad_norm:.3e})")]
    NotAtMaximum { node: usize, grad_norm: f64 },
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error("line search failed at continuation step {step}, newton iter {iter}")]
    LineSearchFailed { step: usize, iter: usize },
    #[error("newton did not reach tolerance in {max_iters} iterations (residual {residual:.3e})")]
    MaxItersExceeded { max_iters: usize, residual: f64 },
    #[error("iterate left the annulus guard band at node {node} (z = {value})")]
    LeftAnnulus { node: usize, value: f64 },
    #[error("iterate lost {m}-admissibility at {count} node(s) under reject policy")]
    LostAdmissibility { m: usize, count: usize },
    #[error("linear solve failed: {0}")]
    LinearSolveFailed(String),
    #[error("prescription fails the solvability conditions: {0}")]
    PsiConditionsFailed(String),
}

#[derive(Debug, Error)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}
