use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of a mathematical function.
    #[error("domain error in {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    /// Geometry or parameter validation failed.
    #[error("invalid configuration: {0}")]
    Invalid(String),

    /// The threshold separation exceeds the service-area length, outside the
    /// regime where the win-probability bound is stated.
    #[error("separation threshold {nu} m exceeds service length {length} m")]
    OutOfRegime { nu: f64, length: f64 },

    #[error("search failed: {0}")]
    Search(String),

    #[error("exhaustive grid of {points} points exceeds the limit of {limit}")]
    GridTooLarge { points: f64, limit: f64 },

    #[error("joint exhaustive search supports at most {max} users, got {got}")]
    TooManyUsers { max: usize, got: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("unknown preset `{name}`; available: {available}")]
    UnknownPreset { name: String, available: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config: {0}")]
    Config(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            function,
            detail: detail.into(),
        }
    }
}
