use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text; `line` is 1-based.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A parsed sentence violates a structural invariant.
    #[error("sentence {sentence}: {message}")]
    Validation { sentence: String, message: String },

    /// Invalid or inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Inconsistent data between inputs (dimensions, instance sets, ...).
    #[error("{0}")]
    Data(String),

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    NonFiniteLoss { epoch: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(sentence: &str, message: impl Into<String>) -> Self {
        Error::Validation {
            sentence: sentence.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn data(message: impl Into<String>) -> Self {
        Error::Data(message.into())
    }

    pub(crate) fn config(message: impl Into<String>) -> Self {
        Error::Config(message.into())
    }
}

/// A value together with the non-fatal diagnostics raised while producing it.
#[derive(Debug, Clone)]
pub struct WithWarnings<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

impl<T> WithWarnings<T> {
    pub fn new(value: T, warnings: Vec<String>) -> Self {
        Self { value, warnings }
    }

    /// Logs every warning at `warn` level and returns the value.
    pub fn log(self) -> T {
        for w in &self.warnings {
            log::warn!("{w}");
        }
        self.value
    }
}
