//! Error type shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("invalid parameters for `{name}`: {reason}")]
    InvalidParams { name: String, reason: String },

    /// The Laplace debiasing path needs an exact second derivative everywhere;
    /// functions flagged non-twice-differentiable (e.g. `abs`) are rejected.
    #[error(
        "`{name}` is not twice differentiable; the closed-form estimator does not \
         apply (for `abs`, use `plug_in_bias_abs` / `plug_in_bias_mc` instead)"
    )]
    NotTwiceDifferentiable { name: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("this noise model carries moments only and cannot be sampled")]
    NoSampler,

    #[error(
        "quadrature did not converge: requested tolerance {requested:.3e}, \
         achieved error estimate {achieved:.3e}"
    )]
    QuadratureNonConvergence { requested: f64, achieved: f64 },

    #[error("polynomial degree {degree} exceeds the supported cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("i/o failure at `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
