use thiserror::Error;

/// CLI failures, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config values or inputs (exit 1).
    #[error("{0}")]
    Validation(String),
    /// Numeric or simulation failure (exit 2).
    #[error("{0}")]
    Runtime(String),
    /// Reading or writing files (exit 3).
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl From<bellvt::Error> for CliError {
    fn from(e: bellvt::Error) -> Self {
        use bellvt::Error as E;
        let msg = e.to_string();
        match e {
            E::Unnormalized(_)
            | E::EmptySettingPair { .. }
            | E::ZeroNormalization(_)
            | E::SweepPoint { .. }
            | E::ThreadPool(_) => CliError::Runtime(msg),
            _ => CliError::Validation(msg),
        }
    }
}
