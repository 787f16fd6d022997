use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    /// All hypothesis violations found while validating a scenario,
    /// reported together.
    #[error("scenario validation failed:\n{}", .0.join("\n"))]
    Validation(Vec<String>),

    #[error("linear solve failed: {0}")]
    Solve(String),

    #[error("monotonicity certificate failed: {0}")]
    Monotonicity(String),

    #[error("CFL violation: max courant number {courant:.3} > 1 (dt = {dt:.3e})")]
    Cfl { courant: f64, dt: f64 },

    #[error("fixed point did not converge after {iters} iterations (last increment {delta:.3e})")]
    FixedPoint { iters: usize, delta: f64 },

    #[error("quadrature did not converge (error estimate {estimate:.3e} > tol {tol:.3e})")]
    Quadrature { estimate: f64, tol: f64 },

    #[error("invalid argument: {0}")]
    InvalidArg(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
