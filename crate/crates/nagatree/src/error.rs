use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] nagatree_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{source_name}:{line}: {message}")]
    Format {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    BadFlag(String),
    #[error("{0}")]
    UnknownCommand(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn format(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            source_name: source_name.into(),
            line,
            message: message.into(),
        }
    }

    /// Machine-readable name, e.g. `TriangleViolation` or `IoFailure`.
    pub fn kind(&self) -> String {
        match self {
            Error::Core(e) => {
                let dbg = format!("{e:?}");
                let end = dbg
                    .find(|c: char| !c.is_alphanumeric())
                    .unwrap_or(dbg.len());
                dbg[..end].to_string()
            }
            Error::Io { .. } => "IoFailure".into(),
            Error::Format { .. } => "FormatError".into(),
            Error::Json(_) => "JsonError".into(),
            Error::BadFlag(_) => "BadFlag".into(),
            Error::UnknownCommand(_) => "UnknownCommand".into(),
        }
    }

    /// 3 for a violated internal bound, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(nagatree_core::Error::BoundViolation(_)) => 3,
            _ => 2,
        }
    }
}
