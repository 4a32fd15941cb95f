//! Syntactic phrase extraction and redundant-word deletion.
//!
//! Parts of speech are approximated with closed-class word lists plus an
//! `-ly` suffix heuristic for adverbs. All lists live in [`Lexicons`] and
//! can be replaced from a JSON file.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transcript::{normalize, Transcript, BOUNDARY};

pub const DEFAULT_MIN_PHRASE_TOKENS: usize = 3;

/// Tokens a pronoun split needs to have seen since the last boundary.
const SUBJECT_SPLIT_MIN_RUN: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntacticPhrase {
    pub phrase_id: usize,
    pub utterance_index: usize,
    /// Position of the phrase within its utterance.
    pub phrase_index: usize,
    pub tokens: Vec<String>,
    pub raw_tokens: Vec<String>,
}

impl SyntacticPhrase {
    /// Tokens joined by single spaces; this is the text that ends up in the
    /// minutes and the text digested for external embeddings.
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Writes the phrase list handed to external embedding exporters: one
/// `{"phrase_id": …, "text": …}` object per line, in phrase order.
pub fn write_phrase_list<W: Write>(mut out: W, phrases: &[SyntacticPhrase]) -> std::io::Result<()> {
    for p in phrases {
        let line = serde_json::json!({ "phrase_id": p.phrase_id, "text": p.text() });
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lexicons {
    pub interjections: BTreeSet<String>,
    pub subordinating_conjunctions: BTreeSet<String>,
    pub coordinating_conjunctions: BTreeSet<String>,
    pub determiners: BTreeSet<String>,
    pub adverb_list: BTreeSet<String>,
    pub adverb_suffixes: Vec<String>,
    /// Words that end in an adverb suffix but are not adverbs.
    pub protected_words: BTreeSet<String>,
    pub subject_pronouns: BTreeSet<String>,
    /// Treat anonymized `personN` placeholders as subject pronouns.
    pub person_placeholders_are_subjects: bool,
}

fn set(words: &[&str]) -> BTreeSet<String> {
    words.iter().map(|w| w.to_string()).collect()
}

impl Default for Lexicons {
    fn default() -> Self {
        Self {
            interjections: set(&[
                "well", "yeah", "yes", "uh", "um", "uhm", "okay", "ok", "oh", "hmm", "ha", "right",
                "like",
            ]),
            subordinating_conjunctions: set(&[
                "that", "because", "if", "while", "when", "which", "who", "whether", "since",
                "although",
            ]),
            coordinating_conjunctions: set(&["and", "but", "or", "so"]),
            determiners: set(&["the", "a", "an", "this", "these", "those"]),
            adverb_list: set(&[
                "very",
                "really",
                "actually",
                "just",
                "maybe",
                "probably",
                "basically",
                "pretty",
            ]),
            adverb_suffixes: vec!["ly".to_string()],
            protected_words: set(&[
                "family",
                "only",
                "early",
                "july",
                "italy",
                "reply",
                "supply",
                "apply",
                "imply",
                "rely",
                "comply",
                "multiply",
                "assembly",
                "anomaly",
                "ally",
                "rally",
                "daily",
                "weekly",
                "monthly",
                "yearly",
                "quarterly",
                "friendly",
                "lovely",
                "likely",
                "ugly",
                "silly",
                "holy",
                "belly",
                "jelly",
                "bully",
                "fly",
                "butterfly",
                "elderly",
                "costly",
                "timely",
                "lonely",
                "curly",
                "emily",
                "billy",
                "sally",
                "molly",
            ]),
            subject_pronouns: set(&["i", "we", "you", "he", "she", "it", "they"]),
            person_placeholders_are_subjects: true,
        }
    }
}

impl Lexicons {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("lexicons serialize")
    }

    fn is_conjunction(&self, token: &str) -> bool {
        self.coordinating_conjunctions.contains(token)
            || self.subordinating_conjunctions.contains(token)
    }

    fn is_subject(&self, token: &str) -> bool {
        self.subject_pronouns.contains(token)
            || (self.person_placeholders_are_subjects && is_person_placeholder(token))
    }

    fn is_adverb(&self, token: &str) -> bool {
        if self.adverb_list.contains(token) {
            return true;
        }
        token.chars().count() >= 4
            && !self.protected_words.contains(token)
            && self
                .adverb_suffixes
                .iter()
                .any(|s| token.ends_with(s.as_str()))
    }

    /// True for tokens removed by [`filter_redundant`].
    pub fn is_redundant(&self, token: &str) -> bool {
        self.interjections.contains(token)
            || self.subordinating_conjunctions.contains(token)
            || self.determiners.contains(token)
            || self.is_adverb(token)
    }
}

fn is_person_placeholder(token: &str) -> bool {
    token
        .strip_prefix("person")
        .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
}

/// Splits one normalized sentence (already tokenized on whitespace) into
/// raw phrases.
///
/// Boundaries fall at every [`BOUNDARY`] marker, before every conjunction,
/// and before a subject pronoun once the current phrase already holds at
/// least three tokens. Markers and the conjunctions that opened a boundary
/// are dropped.
pub fn split_phrases<S: AsRef<str>>(tokens: &[S], lexicons: &Lexicons) -> Vec<Vec<String>> {
    let mut phrases = Vec::new();
    let mut current: Vec<String> = Vec::new();

    for token in tokens {
        let token = token.as_ref();
        if token == BOUNDARY || lexicons.is_conjunction(token) {
            flush(&mut phrases, &mut current);
            continue;
        }
        if lexicons.is_subject(token) && current.len() >= SUBJECT_SPLIT_MIN_RUN {
            flush(&mut phrases, &mut current);
        }
        current.push(token.to_string());
    }
    flush(&mut phrases, &mut current);
    phrases
}

fn flush(phrases: &mut Vec<Vec<String>>, current: &mut Vec<String>) {
    if !current.is_empty() {
        phrases.push(std::mem::take(current));
    }
}

/// Drops interjections, subordinating conjunctions, determiners and
/// adverbs, keeping the order of what remains.
pub fn filter_redundant<S: AsRef<str>>(raw_tokens: &[S], lexicons: &Lexicons) -> Vec<String> {
    raw_tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| !lexicons.is_redundant(t))
        .map(str::to_string)
        .collect()
}

pub fn extract_phrases(
    transcript: &Transcript,
    lexicons: &Lexicons,
    min_phrase_tokens: usize,
) -> Result<Vec<SyntacticPhrase>> {
    let mut phrases = Vec::new();
    for utterance in &transcript.utterances {
        let mut phrase_index = 0;
        for sentence in &utterance.sentences {
            let normalized = normalize(sentence);
            let tokens: Vec<&str> = normalized.split(' ').filter(|t| !t.is_empty()).collect();
            for raw_tokens in split_phrases(&tokens, lexicons) {
                let tokens = filter_redundant(&raw_tokens, lexicons);
                if tokens.is_empty() || tokens.len() < min_phrase_tokens {
                    continue;
                }
                phrases.push(SyntacticPhrase {
                    phrase_id: phrases.len(),
                    utterance_index: utterance.index,
                    phrase_index,
                    tokens,
                    raw_tokens,
                });
                phrase_index += 1;
            }
        }
    }
    if phrases.is_empty() {
        return Err(Error::EmptyMeeting);
    }
    Ok(phrases)
}
