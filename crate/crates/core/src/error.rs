use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The conditional log-sd is not positive at the queried wave height.
    #[error("conditional model unusable at h = {h}: sigma = {sigma}")]
    ConditionalModel { h: f64, sigma: f64 },

    /// Density is unbounded at the left endpoint of the Weibull support (shape < 1).
    #[error("density diverges at h = {h} (shape {shape} < 1)")]
    DensityDivergence { h: f64, shape: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("degenerate tail: no sample value lies strictly above the {alpha}-quantile {quantile}")]
    DegenerateTail { alpha: f64, quantile: f64 },

    #[error(
        "insufficient tail at direction {direction}: {tail_count} samples above the quantile, \
         {min_tail} required (use at least N = {required_samples})"
    )]
    InsufficientTail {
        direction: usize,
        tail_count: usize,
        min_tail: usize,
        required_samples: u64,
    },

    #[error("geometry error: {0}")]
    Geometry(String),

    /// A polygon failed its convexity checks and cannot be used for containment tests.
    #[error("invalid {kind} polygon: vertices {failing:?} violate other halfplanes")]
    InvalidPolygon { kind: String, failing: Vec<usize> },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("pairing violation at index {index}: {lower} > {upper}")]
    Pairing { index: usize, lower: f64, upper: f64 },
}
