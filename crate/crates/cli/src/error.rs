use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration, arguments or output location.
    #[error("{0}")]
    Validation(String),
    /// A computation failed or a verification check did not pass.
    #[error("{0}")]
    Numeric(String),
    /// The requested problem exceeds a memory guard.
    #[error("{0}")]
    Capacity(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Capacity(_) => 3,
        }
    }

    pub(crate) fn io(what: &str, e: std::io::Error) -> Self {
        CliError::Validation(format!("{what}: {e}"))
    }
}

impl From<qrtebd::Error> for CliError {
    fn from(e: qrtebd::Error) -> Self {
        match e {
            qrtebd::Error::Shape(_) | qrtebd::Error::Input(_) => CliError::Validation(e.to_string()),
            qrtebd::Error::Numeric(_) => CliError::Numeric(e.to_string()),
            qrtebd::Error::Capacity(_) => CliError::Capacity(e.to_string()),
        }
    }
}
