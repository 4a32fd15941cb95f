//! Per-phrase meaningfulness: the mean smoothed TF-IDF of every 1-3-gram
//! occurrence in the phrase, with the phrases of one meeting as documents.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phrases::SyntacticPhrase;

/// Longest n-gram counted in document frequencies.
pub const MAX_NGRAM: usize = 3;

#[derive(Debug, Clone)]
pub struct PhraseCorpus {
    pub doc_count: usize,
    /// Number of phrases containing each n-gram (space-joined tokens).
    pub df: HashMap<String, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeaningfulnessScore {
    pub phrase_id: usize,
    pub stfidf: f64,
    pub ngram_count: usize,
}

/// Contiguous n-gram occurrences of `tokens` for n in `1..=max_n`, scanned
/// by n first, then position.
pub fn ngrams<S: AsRef<str>>(tokens: &[S], max_n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=max_n).flat_map(move |n| {
        tokens.windows(n).map(|w| {
            let mut gram = String::new();
            for (i, t) in w.iter().enumerate() {
                if i > 0 {
                    gram.push(' ');
                }
                gram.push_str(t.as_ref());
            }
            gram
        })
    })
}

pub fn build_corpus(phrases: &[SyntacticPhrase]) -> Result<PhraseCorpus> {
    if phrases.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut df: HashMap<String, usize> = HashMap::new();
    for phrase in phrases {
        let present: HashSet<String> = ngrams(&phrase.tokens, MAX_NGRAM).collect();
        for gram in present {
            *df.entry(gram).or_default() += 1;
        }
    }
    Ok(PhraseCorpus {
        doc_count: phrases.len(),
        df,
    })
}

impl PhraseCorpus {
    /// Smoothed inverse document frequency, `ln((1 + |D|) / (1 + df)) + 1`.
    pub fn idf(&self, term: &str) -> f64 {
        let df = self.df.get(term).copied().unwrap_or(0);
        ((1.0 + self.doc_count as f64) / (1.0 + df as f64)).ln() + 1.0
    }
}

/// Raw count of `term` in the phrase times its smoothed idf.
pub fn tfidf(term: &str, phrase: &SyntacticPhrase, corpus: &PhraseCorpus) -> Result<f64> {
    let n = term.split(' ').count();
    let tf = phrase
        .tokens
        .windows(n)
        .filter(|w| w.join(" ") == term)
        .count();
    if tf == 0 {
        return Err(Error::TermNotInPhrase {
            term: term.to_string(),
            phrase_id: phrase.phrase_id,
        });
    }
    Ok(tf as f64 * corpus.idf(term))
}

/// Mean tf-idf over all n-gram occurrences up to `max_n` tokens long.
pub fn stfidf_with(
    phrase: &SyntacticPhrase,
    corpus: &PhraseCorpus,
    max_n: usize,
) -> MeaningfulnessScore {
    let occurrences: Vec<String> = ngrams(&phrase.tokens, max_n).collect();
    let mut tf: HashMap<&str, usize> = HashMap::new();
    for g in &occurrences {
        *tf.entry(g.as_str()).or_default() += 1;
    }
    let total: f64 = occurrences
        .iter()
        .map(|g| tf[g.as_str()] as f64 * corpus.idf(g))
        .sum();
    let ngram_count = occurrences.len();
    MeaningfulnessScore {
        phrase_id: phrase.phrase_id,
        stfidf: if ngram_count == 0 {
            0.0
        } else {
            total / ngram_count as f64
        },
        ngram_count,
    }
}

pub fn stfidf(phrase: &SyntacticPhrase, corpus: &PhraseCorpus) -> MeaningfulnessScore {
    stfidf_with(phrase, corpus, MAX_NGRAM)
}

pub fn score_all(
    phrases: &[SyntacticPhrase],
    corpus: &PhraseCorpus,
    max_n: usize,
) -> Vec<MeaningfulnessScore> {
    phrases
        .iter()
        .map(|p| stfidf_with(p, corpus, max_n))
        .collect()
}
