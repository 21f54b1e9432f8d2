use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Solver(#[from] dicke_core::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// 2 configuration, 3 solver failure, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        use dicke_core::Error as E;
        match self {
            Self::Config(_) => 2,
            Self::Solver(e) => {
                let inner = match e {
                    E::AtPoint { source, .. } => source.as_ref(),
                    other => other,
                };
                match inner {
                    E::InvalidParameter { .. } | E::DimensionOverflow { .. } => 2,
                    _ => 3,
                }
            }
            Self::Io { .. } => 4,
        }
    }
}
