use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Closed interval `[lo, hi]` of radii.
pub type RadiusInterval = (f64, f64);

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid interval: lower bound {a} exceeds upper bound {b}")]
    InvalidInterval { a: f64, b: f64 },

    #[error("quadrature did not converge: estimate {estimate}, error {error} after {subdivisions} subdivisions")]
    NonConvergence {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("integrand is not finite at x = {at}")]
    NonFiniteIntegrand { at: f64 },

    /// The fitted tail slope sits inside the borderline band around the
    /// logarithmic case; the caller must decide by other means.
    #[error("inconclusive divergence probe: fitted exponent {exponent} is borderline")]
    InconclusiveProbe {
        exponent: f64,
        probe_sequence: Vec<f64>,
    },

    #[error("invalid dimension {0}: need N >= 2")]
    InvalidDimension(usize),

    #[error("invalid radius {0}: need R > 0")]
    InvalidRadius(f64),

    #[error("radius {rho} outside (0, {radius}]")]
    OutOfDomain { rho: f64, radius: f64 },

    #[error("invalid datum: {0}")]
    InvalidDatum(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("second derivative is singular at r = {r}: m(r) = 0 with p = {p} > 2")]
    DegenerateDerivative { r: f64, p: f64 },

    #[error("datum is not in L^({index}, inf): the Lorentz quasi-norm diverges")]
    DivergentNorm { index: f64 },

    #[error("p -> 1 limit diverges: m(r) > 1 on {intervals:?}")]
    LimitDiverges { intervals: Vec<RadiusInterval> },

    #[error("invalid Lorentz index {0}")]
    InvalidIndex(f64),

    #[error("unsupported exponent p = {0}: only p >= 2 is covered")]
    UnsupportedP(f64),
}
