use thiserror::Error;

use crate::embedding::EmbeddingError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("transcript is not valid UTF-8 (first invalid byte at offset {offset})")]
    InvalidUtf8 { offset: usize },

    #[error("meeting has no phrases left after preprocessing")]
    EmptyMeeting,

    #[error("cannot build a phrase corpus from zero phrases")]
    EmptyCorpus,

    #[error("n-gram {term:?} does not occur in phrase {phrase_id}")]
    TermNotInPhrase { term: String, phrase_id: usize },

    #[error("embeddings: {0}")]
    Embeddings(#[from] EmbeddingError),

    #[error("clustering needs at least one point")]
    NoPoints,

    #[error("similarity matrix is not square: {len} entries for {n} points")]
    NotSquare { n: usize, len: usize },

    #[error("non-finite similarity at ({row}, {col})")]
    NonFiniteSimilarity { row: usize, col: usize },

    #[error("median preference needs at least two points, got {0}")]
    PreferenceUndefined(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("rouge evaluation needs at least one reference")]
    NoReferences,

    #[error("lexicon file: {0}")]
    Lexicons(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
