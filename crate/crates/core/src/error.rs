use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("i/o error: {0}")]
    Stream(#[from] std::io::Error),

    #[error("malformed embedding header: {0}")]
    MalformedHeader(String),

    #[error("truncated embedding payload at byte {offset}: {detail}")]
    Truncated { offset: u64, detail: String },

    #[error("duplicate token {token:?} at byte {offset}")]
    DuplicateToken { token: String, offset: u64 },

    #[error("line {line}: {detail}")]
    BadLine { line: usize, detail: String },

    #[error("no entries")]
    NoEntries,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("zero-norm vector")]
    ZeroNorm,

    #[error("no seed word found in the embedding table for the {side} side")]
    EmptySeedSide { side: &'static str },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} values, got {got}")]
    TooFew { needed: usize, got: usize },

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("lexicon: {0}")]
    Lexicon(String),

    #[error("metadata: {0}")]
    Metadata(String),

    #[error("story {0} has no scoreable tokens")]
    NothingScored(String),

    #[error("unknown character {0:?}")]
    UnknownCharacter(String),

    #[error("story {0} has no leading female/male pair")]
    MissingLeadingPair(String),

    #[error("uncovered node {0:?} in partition")]
    UncoveredNode(String),

    #[error("empty network")]
    EmptyNetwork,

    #[error("no tokens to count")]
    NoTokens,

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
