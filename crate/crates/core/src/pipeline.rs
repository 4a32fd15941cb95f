//! End-to-end minuting: transcript in, minutes out.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::affinity::{cluster, ApConfig, ClusterSolution};
use crate::embedding::{
    builtin_embed, load_embeddings, similarity_matrix, EmbeddingSet, DEFAULT_BUILTIN_DIM,
};
use crate::error::{Error, Result};
use crate::meaningfulness::{build_corpus, score_all, MeaningfulnessScore, MAX_NGRAM};
use crate::minutes::{
    rank_clusters, select_minutes_ordered, LineOrdering, Minutes, OutputFormat, RankedCluster,
    DEFAULT_SELECTION_RATIO,
};
use crate::phrases::{extract_phrases, Lexicons, SyntacticPhrase, DEFAULT_MIN_PHRASE_TOKENS};
use crate::transcript::Transcript;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub ratio: f64,
    pub ap: ApConfig,
    pub embeddings_path: Option<PathBuf>,
    pub builtin_dim: usize,
    pub lexicons: Lexicons,
    pub min_phrase_tokens: usize,
    /// Longest n-gram averaged into stfidf: 3 (default) or 1.
    pub stfidf_grams: usize,
    pub output_format: OutputFormat,
    pub ordering: LineOrdering,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            ratio: DEFAULT_SELECTION_RATIO,
            ap: ApConfig::default(),
            embeddings_path: None,
            builtin_dim: DEFAULT_BUILTIN_DIM,
            lexicons: Lexicons::default(),
            min_phrase_tokens: DEFAULT_MIN_PHRASE_TOKENS,
            stfidf_grams: MAX_NGRAM,
            output_format: OutputFormat::Text,
            ordering: LineOrdering::Exemplar,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ratio > 0.0 && self.ratio <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "ratio must be in (0, 1], got {}",
                self.ratio
            )));
        }
        if !matches!(self.stfidf_grams, 1 | 3) {
            return Err(Error::InvalidConfig(format!(
                "stfidf grams must be 1 or 3, got {}",
                self.stfidf_grams
            )));
        }
        if self.builtin_dim == 0 {
            return Err(Error::InvalidConfig(
                "embedding dimension must be positive".into(),
            ));
        }
        if self.min_phrase_tokens == 0 {
            return Err(Error::InvalidConfig(
                "min phrase tokens must be at least 1".into(),
            ));
        }
        self.ap.validate()
    }
}

/// Every intermediate product of one run.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub phrases: Vec<SyntacticPhrase>,
    pub scores: Vec<MeaningfulnessScore>,
    pub embeddings: EmbeddingSet,
    pub solution: ClusterSolution,
    pub ranked: Vec<RankedCluster>,
    pub minutes: Minutes,
}

pub fn run_pipeline(transcript: &Transcript, config: &PipelineConfig) -> Result<PipelineOutput> {
    config.validate()?;

    let phrases = extract_phrases(transcript, &config.lexicons, config.min_phrase_tokens)?;
    log::info!("{}: {} phrases", transcript.meeting_id, phrases.len());

    let corpus = build_corpus(&phrases)?;
    let scores = score_all(&phrases, &corpus, config.stfidf_grams);

    let embeddings = match &config.embeddings_path {
        Some(path) => load_embeddings(path, &phrases)?,
        None => builtin_embed(&phrases, &corpus, config.builtin_dim),
    };

    let similarities = similarity_matrix(&embeddings)?;
    let solution = cluster(&similarities, &config.ap)?;
    log::info!(
        "affinity propagation: {} clusters after {} sweeps (converged: {})",
        solution.exemplars.len(),
        solution.iterations_run,
        solution.converged
    );

    let ranked = rank_clusters(&solution, &scores);
    let minutes = select_minutes_ordered(
        &transcript.meeting_id,
        &ranked,
        config.ratio,
        &phrases,
        config.ordering,
    )?;

    Ok(PipelineOutput {
        phrases,
        scores,
        embeddings,
        solution,
        ranked,
        minutes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transcript::parse_transcript;

    const SMALL: &str = "\
(PERSON1) We need to finish the budget report before friday.
(PERSON2) The budget report depends on the sales numbers from march.
(PERSON1) I will ask organization3 for the sales numbers tomorrow.
(PERSON3) The release of the new dashboard is scheduled for next week.
(PERSON2) We should test the dashboard on the staging server first.
(PERSON3) The staging server was down yesterday, but it is fixed now.
";

    #[test]
    fn small_meeting_runs() {
        let t = parse_transcript(SMALL, "small");
        let out = run_pipeline(&t, &PipelineConfig::default()).unwrap();
        assert!(!out.minutes.lines.is_empty());
        assert_eq!(out.scores.len(), out.phrases.len());
        assert_eq!(out.solution.assignment.len(), out.phrases.len());
        let texts: Vec<String> = out.phrases.iter().map(SyntacticPhrase::text).collect();
        for line in &out.minutes.lines {
            assert!(texts.contains(&line.text));
        }
    }

    #[test]
    fn one_phrase_meeting() {
        let t = parse_transcript("(PERSON1) the budget review is done", "one");
        let out = run_pipeline(&t, &PipelineConfig::default()).unwrap();
        assert_eq!(out.minutes.lines.len(), 1);
        assert_eq!(out.minutes.lines[0].text, "budget review is done");
    }

    #[test]
    fn empty_meeting() {
        let t = parse_transcript("", "empty");
        assert!(matches!(
            run_pipeline(&t, &PipelineConfig::default()),
            Err(Error::EmptyMeeting)
        ));
    }

    #[test]
    fn config_validation() {
        let t = parse_transcript(SMALL, "small");
        for cfg in [
            PipelineConfig {
                ratio: 0.0,
                ..Default::default()
            },
            PipelineConfig {
                stfidf_grams: 2,
                ..Default::default()
            },
            PipelineConfig {
                builtin_dim: 0,
                ..Default::default()
            },
        ] {
            assert!(matches!(
                run_pipeline(&t, &cfg),
                Err(Error::InvalidConfig(_))
            ));
        }
    }
}
