use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument is NaN/infinite or outside its legal domain.
    #[error("invalid value: {0}")]
    InvalidValue(String),

    /// Zero-area, zero-length or collinear input where a 2D shape is required.
    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    /// A quadrilateral that is not a rectangle within tolerance.
    #[error("not a rectangle: {0}")]
    NotRectangular(String),

    /// A conversion that would have to invent head/tail information.
    #[error("ambiguous conversion: {0}")]
    Ambiguity(String),

    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {message}")]
    Xml { path: String, message: String },

    /// Annotation records failing geometric validation.
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    /// Wraps another error with the file it came from.
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::InFile {
            path: path.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// True for failures caused by the filesystem or image codecs rather
    /// than by the content of the data.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } | Error::Image { .. } => true,
            Error::InFile { source, .. } => source.is_io(),
            _ => false,
        }
    }
}
