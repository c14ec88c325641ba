use thiserror::Error;

/// Error type shared by every module of the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("windowing error: {0}")]
    Windowing(String),

    #[error("numerical blowup at step {step}: {message}")]
    Blowup { step: usize, message: String },

    #[error("phase unwrap failure: {0}")]
    PhaseUnwrap(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status for the CLI: 1 for configuration problems,
    /// 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Blowup { .. } | Error::PhaseUnwrap(_) | Error::Windowing(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
