use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: fermat_core::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io { .. } => 1,
        }
    }
}

/// Attaches context to core results. Parameter and parse errors count as
/// configuration errors, everything else as numerical failure.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T> Context<T> for fermat_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError> {
        use fermat_core::Error as E;
        self.map_err(|e| match e.root() {
            E::Parse(_) | E::InvalidParameter(_) | E::InvalidModel(_) | E::EpsOutOfRange { .. } => {
                CliError::Config(format!("{}: {e}", what()))
            }
            _ => CliError::Numerical {
                context: what(),
                source: e,
            },
        })
    }
}
