use std::io;

use thiserror::Error;

/// Errors produced by the parser library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed treebank input; `line` is 1-based.
    #[error("line {line}: {message}")]
    Conll { line: usize, message: String },

    /// An operation was called with arguments that violate its contract.
    #[error("usage error: {0}")]
    Usage(String),

    /// A transition was applied in a state where it is not permitted.
    #[error("illegal action {action}: {clause}")]
    IllegalAction { action: String, clause: String },

    /// A serialized model could not be read.
    #[error("model error: {0}")]
    Model(String),

    /// The integrated parser exceeded its step bound.
    #[error("parse did not terminate after {steps} steps (stack {stack:?}, buffer {buffer:?})")]
    StepLimit {
        steps: usize,
        stack: Vec<usize>,
        buffer: Vec<usize>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
