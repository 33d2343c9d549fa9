use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] poisprox_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed trace {}: {message}", path.display())]
    Trace { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Configuration problems are reported with exit code 2, everything
    /// else with 1.
    pub fn is_config(&self) -> bool {
        use poisprox_core::Error as E;
        match self {
            Error::Config(_) => true,
            Error::Core(e) => matches!(
                e,
                E::InvalidArgument(_)
                    | E::InvalidStepSizes { .. }
                    | E::InvalidRelaxation { .. }
                    | E::InvalidPenalty(_)
            ),
            _ => false,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_config() {
            2
        } else {
            1
        }
    }
}
