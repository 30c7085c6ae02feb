use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("field is in {found} representation, expected {expected}")]
    Representation {
        expected: &'static str,
        found: &'static str,
    },
    #[error("sobolev index must be a nonnegative number, got {0}")]
    NegativeSobolevIndex(f64),
    #[error("diffusion flow called with Re(t) = {0} < 0")]
    UnstableDiffusion(f64),
    #[error("flow blow-up: {0}")]
    BlowUp(String),
    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("scheme `{name}` is inconsistent: {reason}")]
    InconsistentScheme { name: String, reason: String },
    #[error("invalid scheme pair `{name}`: {reason}")]
    InvalidPair { name: String, reason: String },
    #[error("duplicate name `{0}` in scheme registry")]
    DuplicateName(String),
    #[error("unknown scheme or pair `{0}`")]
    UnknownScheme(String),
    #[error("arity mismatch: scheme has {scheme}, problem has {problem}")]
    ArityMismatch { scheme: usize, problem: usize },
    #[error("parse error in {source_name}: {message}")]
    Parse {
        source_name: String,
        message: String,
    },
    #[error("step size underflow at t = {t}: h = {h} cannot satisfy tol (est = {est})")]
    StepSizeUnderflow { t: f64, h: f64, est: f64 },
    #[error("reference solution failed to reach accuracy {target:e} (best estimate {achieved:e}, h = {h:e})")]
    ReferenceAccuracy { target: f64, achieved: f64, h: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input or configuration).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::UnstableDiffusion(_)
                | Error::BlowUp(_)
                | Error::NonFinite(_)
                | Error::StepSizeUnderflow { .. }
                | Error::ReferenceAccuracy { .. }
        )
    }
}
