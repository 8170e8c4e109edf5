use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid-input: {0}")]
    InvalidInput(String),

    #[error("not-stochastically-ordered: F1({x}) = {f1} exceeds F2({x}) = {f2}")]
    NotStochasticallyOrdered { x: f64, f1: f64, f2: f64 },

    #[error("incompatible-copula: worst violation {worst:.3e} at x = {at}")]
    IncompatibleCopula { worst: f64, at: f64 },

    #[error("unsupported-for-discrete: {0} requires continuous marginals")]
    UnsupportedForDiscrete(&'static str),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("wrong-branch: diagonal touches the identity inside (0,1) at t = {0}")]
    WrongBranch(f64),

    #[error("no-maxent: entropy condition fails")]
    NoMaxent,

    #[error("entropy-undefined: {0}")]
    EntropyUndefined(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Short kebab-case name of the error kind, as printed by the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::NotStochasticallyOrdered { .. } => "not-stochastically-ordered",
            Error::IncompatibleCopula { .. } => "incompatible-copula",
            Error::UnsupportedForDiscrete(_) => "unsupported-for-discrete",
            Error::Unsupported(_) => "unsupported",
            Error::WrongBranch(_) => "wrong-branch",
            Error::NoMaxent => "no-maxent",
            Error::EntropyUndefined(_) => "entropy-undefined",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }

    /// True for failures of a mathematical precondition (as opposed to bad
    /// configuration or I/O).
    pub fn is_precondition(&self) -> bool {
        !matches!(self, Error::Config(_) | Error::Io(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
