use std::fmt;
use std::io;

use thiserror::Error;

/// 1-based line and column of a byte offset in the decoded document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

impl Position {
    pub(crate) fn at(src: &str, offset: usize) -> Self {
        let offset = offset.min(src.len());
        let before = &src[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(offset, |nl| offset - nl - 1) + 1;
        Position { offset, line, column }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("malformed XML at {position}: {message}")]
    Xml { message: String, position: Position },

    #[error("invalid XML-RPC document at {position}: {message}")]
    Structure { message: String, position: Position },

    #[error("unsupported value type <{tag}> at {position}")]
    UnknownType { tag: String, position: Position },

    #[error("document is not valid UTF-8")]
    Utf8,

    #[error("cannot encode: {0}")]
    Encode(String),
}

impl CodecError {
    pub(crate) fn xml(message: impl Into<String>, position: Position) -> Self {
        CodecError::Xml { message: message.into(), position }
    }

    pub(crate) fn structure(message: impl Into<String>, position: Position) -> Self {
        CodecError::Structure { message: message.into(), position }
    }

    pub fn position(&self) -> Option<Position> {
        match self {
            CodecError::Xml { position, .. }
            | CodecError::Structure { position, .. }
            | CodecError::UnknownType { position, .. } => Some(*position),
            CodecError::Utf8 | CodecError::Encode(_) => None,
        }
    }
}

/// Failure to complete an HTTP exchange. Distinct from an XML-RPC fault, which
/// is a successful exchange carrying an error result.
#[derive(Debug, Error)]
pub enum TransportError {
    #[error("invalid server URL `{0}`")]
    Url(String),

    #[error("cannot connect to {addr}: {source}")]
    Connect { addr: String, source: io::Error },

    #[error("timed out talking to {0}")]
    Timeout(String),

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("HTTP status {code} {reason}")]
    Status { code: u16, reason: String },

    #[error("malformed HTTP response: {0}")]
    Http(String),

    #[error("XML-RPC codec: {0}")]
    Codec(#[from] CodecError),
}
