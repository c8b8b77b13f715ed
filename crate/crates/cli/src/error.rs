use neuroarm_core::Error as CoreError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const IO: i32 = 3;
    pub const TRANSPORT: i32 = 4;
    pub const TRAINING: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("training error: {0}")]
    Training(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Io(_) => exit::IO,
            CliError::Transport(_) => exit::TRANSPORT,
            CliError::Training(_) => exit::TRAINING,
            CliError::Core(e) => match e {
                CoreError::Config(_) | CoreError::Size { .. } => exit::CONFIG,
                CoreError::Io(_)
                | CoreError::Csv(_)
                | CoreError::Json(_)
                | CoreError::Load { .. }
                | CoreError::Container(_) => exit::IO,
                CoreError::Transport(_)
                | CoreError::FrameFormat(_)
                | CoreError::Encode { .. }
                | CoreError::Protocol(_) => exit::TRANSPORT,
                CoreError::Diverged { .. }
                | CoreError::Stratification { .. }
                | CoreError::Dimension { .. }
                | CoreError::Empty(_) => exit::TRAINING,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
