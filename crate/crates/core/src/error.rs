use thiserror::Error;

/// Errors shared across the crate.
///
/// `Inconsistency` is special: it marks a state that the underlying
/// combinatorial lemmas rule out for genuine fixed-point factors. Hitting it
/// on real data is a falsification candidate, not an input error.
#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet mismatch: {0} vs {1} letters")]
    AlphabetMismatch(usize, usize),

    #[error("letter {letter} out of range for alphabet of {size} letters")]
    LetterOutOfRange { letter: usize, size: usize },

    #[error("range [{index}, {index}+{length}) exceeds word length {len}")]
    OutOfRange {
        index: usize,
        length: usize,
        len: usize,
    },

    #[error("result length {requested} exceeds memory cap of {cap} letters")]
    MemoryCapExceeded { requested: u128, cap: usize },

    #[error("word of length {len} exceeds oracle guard {guard}")]
    OracleSizeExceeded { len: usize, guard: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal inconsistency (falsification candidate): {0}")]
    Inconsistency(String),

    #[error("cannot parse word: {0}")]
    WordParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
