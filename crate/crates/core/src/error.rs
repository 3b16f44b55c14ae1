use thiserror::Error;

/// Errors raised by the interpolation library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A vector handed to `exp` (or stored as a derivative) is not tangent at its base.
    #[error("vector is not tangent at its base point (residual {residual:.3e})")]
    Tangency { residual: f64 },

    /// Sphere logarithm requested between (numerically) antipodal points.
    #[error("points are antipodal (<q, p> = {inner:.17})")]
    Antipodal { inner: f64 },

    /// A point lies outside the domain of a logarithm map.
    #[error("logarithm domain violation: {0}")]
    Domain(String),

    /// A point does not satisfy the manifold constraint.
    #[error("point violates the manifold constraint (residual {residual:.3e})")]
    NotOnManifold { residual: f64 },

    /// The logs at sample `sample` do not span the sampled derivative along `axis`.
    #[error(
        "logs at sample {sample} do not span derivative on axis {axis} (residual {residual:.3e})"
    )]
    Span {
        sample: usize,
        axis: usize,
        residual: f64,
    },

    /// The sum-zero side constraint collapses onto the row space of the log matrix.
    #[error("sum-zero constraint is degenerate at sample {sample} (s = {s:.3e})")]
    DegenerateConstraint { sample: usize, s: f64 },

    /// The augmented Kriging matrix could not be factorized.
    #[error("augmented correlation matrix is singular (condition estimate {condition:.3e})")]
    Conditioning { condition: f64 },

    /// Barycenter descent ran out of iterations.
    #[error(
        "gradient descent did not converge in {iterations} iterations (|grad| = {grad_norm:.3e})"
    )]
    NonConvergence { iterations: usize, grad_norm: f64 },

    /// Shape or argument mismatch.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
