use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A text document could not be parsed. `line` is 1-based.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A binary snapshot could not be decoded.
    #[error("malformed snapshot: {0}")]
    Decode(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("graph has no edges")]
    NoEdges,

    #[error("not a metric: {0}")]
    NotMetric(String),

    #[error("unknown point {0}")]
    UnknownPoint(usize),

    /// The oracle builder drew too many consecutive hierarchies without a padded point.
    #[error("level {level}: {attempts} consecutive draws produced no padded point (seed {seed})")]
    Stalled { level: usize, attempts: usize, seed: u64 },

    /// An internal invariant was violated. Always a bug.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}
