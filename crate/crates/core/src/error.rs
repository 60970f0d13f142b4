use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("no storey found: {peaks} density peak(s) detected, at least 2 required")]
    NoStoreyFound { peaks: usize },

    #[error("cannot split door of width {width} into pieces of at most {max_width} with spacing {spacing}")]
    InvalidSplit {
        width: f64,
        max_width: f64,
        spacing: f64,
    },

    #[error("cylinder fit failed: best inlier ratio {inlier_ratio:.3} below 0.5")]
    FitFailed { inlier_ratio: f64 },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("schema version mismatch: found {found}, expected {expected}")]
    SchemaVersionMismatch { found: u32, expected: u32 },

    #[error("invalid model: {0}")]
    Validation(String),

    #[error("invalid scene spec: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
