//! # minuteforge
//!
//! Unsupervised extractive minuting for meeting transcripts.
//!
//! The pipeline splits a transcript into short clause-like phrases, scores
//! each phrase by its mean n-gram TF-IDF ("meaningfulness"), embeds the
//! phrases, clusters them with affinity propagation and finally emits the
//! exemplars of the most meaningful clusters in transcript order.
//!
//! A self-contained ROUGE implementation ([`rouge`]) is included for
//! scoring generated minutes against manual ones.

pub mod affinity;
pub mod embedding;
pub mod error;
pub mod meaningfulness;
pub mod minutes;
pub mod phrases;
pub mod pipeline;
pub mod rouge;
pub mod transcript;

pub use affinity::{cluster, default_preference, ApConfig, ClusterSolution, Preference};
pub use embedding::{
    builtin_embed, load_embeddings, similarity_matrix, EmbeddingError, EmbeddingSet,
    EmbeddingSource, SimilarityMatrix,
};
pub use error::{Error, Result};
pub use meaningfulness::{build_corpus, stfidf, tfidf, MeaningfulnessScore, PhraseCorpus};
pub use minutes::{
    rank_clusters, render, select_minutes, LineOrdering, Minutes, OutputFormat, RankedCluster,
};
pub use phrases::{
    extract_phrases, filter_redundant, split_phrases, write_phrase_list, Lexicons, SyntacticPhrase,
};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineOutput};
pub use rouge::{evaluate, Aggregation, RougeReport, Scores};
pub use transcript::{normalize, parse_transcript, split_sentences, Transcript, Utterance};
