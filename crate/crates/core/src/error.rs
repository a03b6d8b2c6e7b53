use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error{}: {message}", location(*frame, field))]
    Parse {
        frame: Option<usize>,
        field: String,
        message: String,
    },
    #[error("validation error at frame {frame}: field `{field}`: {message}")]
    Validation {
        frame: usize,
        field: String,
        message: String,
    },
    #[error("quantized symbol {value} overflows the 31-bit magnitude limit at component {component}")]
    Overflow { component: usize, value: f64 },
    #[error("decode error: {0}")]
    Decode(String),
    #[error("container error: {0}")]
    Container(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("image error: {0}")]
    Image(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Validation { .. } => "validation",
            Error::Overflow { .. } => "overflow",
            Error::Decode(_) => "decode",
            Error::Container(_) => "container",
            Error::Dimension(_) => "dimension",
            Error::Degenerate(_) => "degenerate",
            Error::Range(_) => "range",
            Error::Config(_) => "config",
            Error::Image(_) => "image",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn validation(frame: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            frame,
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn parse(frame: Option<usize>, field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            frame,
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn decode(message: impl Into<String>) -> Self {
        Error::Decode(message.into())
    }

    pub(crate) fn container(message: impl Into<String>) -> Self {
        Error::Container(message.into())
    }
}

fn location(frame: Option<usize>, field: &str) -> String {
    match (frame, field.is_empty()) {
        (Some(f), false) => format!(" at frame {f}, field `{field}`"),
        (Some(f), true) => format!(" at frame {f}"),
        (None, false) => format!(" in `{field}`"),
        (None, true) => String::new(),
    }
}
