use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] glauber_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("{0} acceptance criteria failed")]
    Failed(usize),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 2 config, 3 size, 4 numeric, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use glauber_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Parameter(_) | E::Parse { .. }) => 2,
            CliError::Core(E::Size { .. }) => 3,
            CliError::Core(E::Numeric { .. }) => 4,
            CliError::Core(_) | CliError::Io { .. } | CliError::Failed(_) => 1,
        }
    }
}
