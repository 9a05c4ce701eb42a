use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("ambient basis is not linearly independent (smallest singular value {0:e})")]
    DependentBasis(f64),

    #[error("ambient basis is not closed under ad_W (residual {0:e})")]
    NotClosed(f64),

    #[error("generator is not nilpotent on the span")]
    NotNilpotent,

    #[error("matrix exponential overflow: ||A||_F = {norm} exceeds cap {cap}")]
    ExpOverflow { norm: f64, cap: f64 },

    #[error("singular matrix")]
    Singular,

    #[error("no chain of length >= 2 with bottom element independent of U (GR = {gr})")]
    NoQualifyingChain { gr: f64 },

    #[error("window start L = {l} exceeds k = {k}; the shift leaves the compact family")]
    WindowOutOfRange { l: f64, k: f64 },

    #[error("point outside the UXV chart: m22 = {0}")]
    OutOfChart(f64),

    #[error("no crossing: {0}")]
    NoCrossing(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("quadrature failed to converge on [{a}, {b}]")]
    QuadratureFailed { a: f64, b: f64 },

    #[error("precision exhausted after {depth} partial quotients")]
    PrecisionExhausted { depth: usize, partial: Vec<u64> },

    #[error("no |a_n| >= 1 up to n = {searched} (max |a_n| = {max_abs:e})")]
    NotFound { searched: u64, max_abs: f64 },

    #[error("window check failed at L = {l}: fraction {fraction} < {required}")]
    WindowFail { l: f64, fraction: f64, required: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
