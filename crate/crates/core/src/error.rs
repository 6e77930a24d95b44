use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("alpha must exceed 1 (got {0})")]
    NotOverDamped(f64),

    #[error("time {t} lies outside the R1 phase [0, {t0}]")]
    OutOfPhase { t: f64, t0: f64 },

    #[error("no crossing: ds0 must be positive (got {0})")]
    NoCrossing(f64),

    #[error(
        "scale underflow: xi1*t0*sqrt(k) = {exponent} makes eta^4 unrepresentable; \
         use scaled mode (eta given directly) instead"
    )]
    ScaleUnderflow { exponent: f64 },

    #[error("eta must lie in (0, 1) (got {0})")]
    InvalidScale(f64),

    #[error("radius must stay positive (got {0})")]
    SingularRadius(f64),

    #[error("integration failure at {at}: {reason}")]
    IntegrationFailure { at: f64, reason: String },

    #[error("{name} must lie in {range} (got {value})")]
    InvalidExponent {
        name: &'static str,
        range: &'static str,
        value: f64,
    },

    #[error("point ({0}, {1}) is not on the boundary of K")]
    NotOnBoundary(f64, f64),

    #[error("cartesian reconstruction needs a stiffness k; this run is scale-free")]
    ScaleFreeRun,

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of the numerics (as opposed to rejected input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::ScaleUnderflow { .. }
                | Error::SingularRadius(_)
                | Error::IntegrationFailure { .. }
                | Error::NumericFailure(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn ensure_finite(what: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} must be finite")))
    }
}
