//! Transcript ingestion.
//!
//! Input is plain text with one utterance per line. A line may open with a
//! speaker placeholder such as `(PERSON3)` or `( organization2 )`; lines
//! without one inherit the previous speaker.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Token emitted by [`normalize`] where clause punctuation used to be.
pub const BOUNDARY: &str = "<BND>";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub index: usize,
    pub speaker: Option<String>,
    pub raw_text: String,
    pub sentences: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub meeting_id: String,
    pub utterances: Vec<Utterance>,
}

impl Transcript {
    /// Writes the transcript back in the line format accepted by
    /// [`parse_transcript`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for u in &self.utterances {
            if let Some(speaker) = &u.speaker {
                out.push('(');
                out.push_str(speaker);
                out.push_str(") ");
            }
            out.push_str(&u.raw_text);
            out.push('\n');
        }
        out
    }
}

fn speaker_tag() -> &'static Regex {
    static TAG: OnceLock<Regex> = OnceLock::new();
    TAG.get_or_init(|| {
        Regex::new(r"(?i)^\(\s*(person|organization)\s*(\d+)\s*\)").expect("static regex")
    })
}

/// Parses raw transcript bytes, rejecting invalid UTF-8 with the offset of
/// the first bad byte.
pub fn parse_transcript_bytes(bytes: &[u8], meeting_id: &str) -> Result<Transcript> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::InvalidUtf8 {
        offset: e.valid_up_to(),
    })?;
    Ok(parse_transcript(text, meeting_id))
}

pub fn parse_transcript(text: &str, meeting_id: &str) -> Transcript {
    let mut utterances = Vec::new();
    let mut speaker: Option<String> = None;

    for line in text.lines() {
        let mut body = line.trim();
        if let Some(caps) = speaker_tag().captures(body) {
            let kind = caps[1].to_ascii_uppercase();
            speaker = Some(format!("{kind}{}", &caps[2]));
            body = body[caps.get(0).unwrap().end()..].trim();
        }
        // A bare tag changes the speaker but carries no text.
        if body.is_empty() {
            continue;
        }
        utterances.push(Utterance {
            index: utterances.len(),
            speaker: speaker.clone(),
            raw_text: body.to_string(),
            sentences: split_sentences(body),
        });
    }

    Transcript {
        meeting_id: meeting_id.to_string(),
        utterances,
    }
}

/// Splits on `.`, `!` or `?` when followed by whitespace or end of text.
/// Segments without any alphanumeric character are dropped.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();

    while let Some((i, c)) = chars.next() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let at_break = match chars.peek() {
            None => true,
            Some((_, next)) => next.is_whitespace(),
        };
        if at_break {
            let end = i + c.len_utf8();
            push_sentence(&mut sentences, &text[start..end]);
            start = end;
        }
    }
    push_sentence(&mut sentences, &text[start..]);
    sentences
}

fn push_sentence(out: &mut Vec<String>, segment: &str) {
    let segment = segment.trim();
    if segment.chars().any(char::is_alphanumeric) {
        out.push(segment.to_string());
    }
}

fn is_dash_or_slash(c: char) -> bool {
    matches!(c, '-' | '\u{2010}'..='\u{2015}' | '\u{2212}' | '/' | '\\')
}

/// Lowercases a sentence and strips punctuation, ASR style.
///
/// `,` `;` `:` become [`BOUNDARY`] so that phrase extraction can still split
/// on them; dashes and slashes become spaces; apostrophes are deleted
/// (`can't` -> `cant`); every other non-alphanumeric character is dropped.
pub fn normalize(sentence: &str) -> String {
    let mut spaced = String::with_capacity(sentence.len() + 8);
    for c in sentence.chars() {
        if c.is_alphanumeric() {
            spaced.extend(c.to_lowercase());
        } else if c.is_whitespace() || is_dash_or_slash(c) {
            spaced.push(' ');
        } else if matches!(c, ',' | ';' | ':') {
            spaced.push(' ');
            spaced.push_str(BOUNDARY);
            spaced.push(' ');
        }
    }
    spaced.split_whitespace().collect::<Vec<_>>().join(" ")
}
