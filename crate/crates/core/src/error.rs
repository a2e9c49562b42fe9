use thiserror::Error;

/// Errors produced by the word algebra, the measure, the engine and the oracles.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("no parent of empty word")]
    EmptyWordParent,
    #[error("empty word has no last letter")]
    EmptyWord,
    #[error("invalid word {input:?}: {reason}")]
    ParseWord { input: String, reason: String },
    #[error("invalid rational {0:?}")]
    ParseRational(String),
    #[error("letter index must be at least 1, got {0}")]
    LetterOutOfRange(u64),
    #[error("tail region requires a nonempty word")]
    EmptyTail,
    #[error("tail conditional mean requires k >= 2, got {0}")]
    TailIndex(u64),
    #[error("empty region list")]
    EmptyRegionList,
    #[error("regions {first} and {second} overlap")]
    Overlap { first: String, second: String },
    #[error("n must be at least {min}, got {n}")]
    InvalidN { n: usize, min: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("cap of {cap} exceeded at n = {k}")]
    CapExceeded { k: usize, cap: usize },
    #[error("cap of {cap} explored states exceeded")]
    SearchCapExceeded { cap: usize },
    #[error("set is not of nested-branch form: {0}")]
    Decomposition(String),
    #[error("sample file: {0}")]
    SampleFormat(String),
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
