use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("letter {0} is not in the alphabet")]
    UnknownLetter(u8),

    #[error("oracle is not closed under composition: {left} and {right} are accepted but {left}.{right} is not")]
    NotClosed { left: String, right: String },

    #[error("subsemigroup accepts no word of length <= {bound}; index undefined")]
    EmptySubsemigroup { bound: usize },

    #[error("Rees index is not exact at bound {bound}")]
    ReesNotExact { bound: usize },

    #[error("formula error at column {column}: {message}")]
    Formula { column: usize, message: String },

    #[error("grid has {requested} pixels, above the cap of {cap}")]
    ResourceCap { requested: usize, cap: usize },

    #[error("masks are defined on different grids")]
    GridMismatch,

    #[error("experiment refused: {0}")]
    Refused(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
