use thiserror::Error;

pub type Result<T> = std::result::Result<T, FracError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FracError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("analytic gradient unavailable for field `{0}`")]
    GradientUnavailable(String),

    #[error("field is not integrable: {0}")]
    NonIntegrable(String),

    #[error("integrand evaluated on the diagonal x = y")]
    DiagonalInput,

    #[error("Monte Carlo budget {got} is below the minimum of {min}")]
    BudgetTooSmall { got: u64, min: u64 },

    #[error("{engine} engine supports n <= {max}, got n = {got}")]
    UnsupportedDimension { engine: &'static str, max: usize, got: usize },

    #[error(
        "deterministic refinement did not converge: relative change {change:.3e} > {tolerance:.1e} at level {level}"
    )]
    NonConvergent { level: usize, change: f64, tolerance: f64 },

    #[error("rank-deficient extrapolation design: {0}")]
    RankDeficient(String),

    #[error("L^p norm of field `{0}` is unknown")]
    UnknownNorm(String),

    #[error("energy is zero; ratio undefined")]
    ZeroEnergy,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl FracError {
    pub(crate) fn params(msg: impl Into<String>) -> Self {
        FracError::InvalidParams(msg.into())
    }

    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            FracError::NonConvergent { .. } => 3,
            FracError::Io(_) => 1,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for FracError {
    fn from(e: std::io::Error) -> Self {
        FracError::Io(e.to_string())
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(FracError::DimensionMismatch { expected, got })
    }
}
