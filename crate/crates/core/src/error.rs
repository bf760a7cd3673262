use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("sample rate {got} Hz below required minimum {required} Hz")]
    Aliasing { got: f64, required: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no periodicity: confidence {confidence:.3} below threshold {threshold:.3}")]
    NoPeriodicity { confidence: f64, threshold: f64 },

    #[error("non-finite gradient at iteration {iteration} (max |grad| = {max_gradient})")]
    NonFiniteGradient { iteration: usize, max_gradient: f64 },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("png encode: {0}")]
    PngEncode(#[from] png::EncodingError),

    #[error("png decode: {0}")]
    PngDecode(#[from] png::DecodingError),
}

impl Error {
    /// Short stable identifier, used for machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Constraint(_) => "constraint",
            Error::Config(_) => "config",
            Error::Aliasing { .. } => "aliasing",
            Error::InsufficientData(_) => "insufficient_data",
            Error::NoPeriodicity { .. } => "no_periodicity",
            Error::NonFiniteGradient { .. } => "non_finite_gradient",
            Error::Context { source, .. } => source.kind(),
            Error::File { .. } | Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::PngEncode(_) | Error::PngDecode(_) => "png",
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }
}
