use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("window length {len} is not a power of two >= 64")]
    Size { len: usize },

    #[error("cannot encode frame {index}: value {position} is not finite")]
    Encode { index: u64, position: usize },

    #[error("malformed frame: {0}")]
    FrameFormat(String),

    #[error("unknown action byte 0x{0:02x}")]
    Protocol(u8),

    #[error("transport error: {0}")]
    Transport(#[source] io::Error),

    #[error("{path}:{line}: {msg}")]
    Load { path: PathBuf, line: usize, msg: String },

    #[error("class {class} has no windows in the {split} split")]
    Stratification { class: &'static str, split: &'static str },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: String, got: String },

    #[error("training diverged at epoch {epoch} (loss = {loss})")]
    Diverged { epoch: usize, loss: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("container format error: {0}")]
    Container(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(expected: impl ToString, got: impl ToString) -> Self {
        Error::Dimension { expected: expected.to_string(), got: got.to_string() }
    }
}
