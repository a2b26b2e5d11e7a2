use std::path::PathBuf;

use plateau_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}, line {line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    /// Training produced a non-finite loss or parameter at flow time `t`.
    #[error("training diverged at t = {t}; partial outputs written to {written}")]
    Diverged { t: f64, written: String },
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        LabError::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    /// 2 for numeric divergence, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Diverged { .. } | LabError::Core(CoreError::NonFinite(_)) => 2,
            _ => 1,
        }
    }
}
