use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),

    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },

    #[error("metric is singular at {point:?} (|det g| = {det:e})")]
    SingularMetric { point: Vec<f64>, det: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("coordinate `{0}` declared by both factors")]
    NameCollision(String),

    #[error("warping function `{name}` is {value} at {point:?}; it must be positive")]
    NonPositiveWarping {
        name: String,
        value: f64,
        point: Vec<f64>,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
