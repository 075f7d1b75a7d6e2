use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series has no nonzero leading coefficient and cannot be inverted")]
    SingularSeries,

    #[error("coefficient of v^{k} requested but series is only known up to v^{trunc}")]
    TruncationExceeded { k: i32, trunc: i32 },

    #[error("denominator vanishes near z = {z}")]
    PoleProximity { z: Complex64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("evaluation failed at {context}: {source}")]
    Evaluation {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wrap `self` with a location description.
    pub fn at(self, context: impl Into<String>) -> Self {
        Error::Evaluation {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
