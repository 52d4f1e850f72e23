use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("point (r = {r}, theta = {theta}) lies outside the disc of radius {r_max}")]
    Domain { r: f64, theta: f64, r_max: f64 },

    #[error("flow integration failed at step {step}/{steps}: implicit solve residual {residual:e}")]
    Integration {
        step: usize,
        steps: usize,
        residual: f64,
    },

    #[error("inversion failed near ({x}, {y}): residual {residual:e} after {iterations} iterations")]
    Inversion {
        x: f64,
        y: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("quadrature did not reach {tol:e} on [{a}, {b}]; refinement trace: {trace:?}")]
    Quadrature {
        a: f64,
        b: f64,
        tol: f64,
        trace: Vec<(f64, f64, f64)>,
    },

    #[error("twist condition violated: dR/dr = {value:e} at (r = {r}, theta = {theta})")]
    TwistCondition { r: f64, theta: f64, value: f64 },

    #[error("generating-function solve failed at (r = {r}, theta = {theta}): {reason}")]
    GeneratingSolve { r: f64, theta: f64, reason: String },

    #[error("inconsistent inputs: {0}")]
    Consistency(String),

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("C1 matching at R = 1 failed (value gap {value_gap:e}, d/dR gap {d1_gap:e}, d/dtheta gap {d2_gap:e}); check the anchor constant and theta0")]
    Anchoring {
        value_gap: f64,
        d1_gap: f64,
        d2_gap: f64,
    },

    #[error("extension stage n = {n} failed: {source}; retry with a larger n for a milder blend")]
    Stage { n: usize, source: Box<Error> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
