use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite evaluation at offset ({du}, {dv})")]
    NonFinite { du: f64, dv: f64 },

    #[error("integration diverged at t = {t}")]
    Divergence { t: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("not in scope: {0}")]
    NotInScope(String),

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("integration error: {0}")]
    Integration(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
