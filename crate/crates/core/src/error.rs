use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("letter index {index} out of range for rank {rank}")]
    LetterOutOfRange { index: usize, rank: usize },
    #[error("word {0} is not freely reduced")]
    NotReduced(String),
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("not an automorphism: {0}")]
    NotAutomorphism(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid labeling: {0}")]
    Labeling(String),
    #[error("invalid marked graph: {0}")]
    Marking(String),
    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
