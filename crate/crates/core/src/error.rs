use thiserror::Error;

use crate::graph::NodeId;
use crate::mrengine::EngineError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("clique count overflowed 64 bits")]
    Overflow,

    #[error("predicted {predicted} emitted pairs exceeds the configured cap of {cap}")]
    Sizing { predicted: u128, cap: u128 },

    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl Error {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    /// True for errors caused by bad user input rather than a runtime failure.
    pub fn is_argument_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_) | Error::Sizing { .. } | Error::Engine(EngineError::Config(_))
        )
    }
}
