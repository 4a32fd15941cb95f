//! Phrase vectors and the pairwise similarity matrix fed to clustering.
//!
//! Vectors come either from an embeddings interchange file (JSON Lines, one
//! record per phrase, produced by an external sentence encoder) or from a
//! built-in signed feature-hashing embedding over tf-idf weighted n-grams.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::meaningfulness::{ngrams, PhraseCorpus, MAX_NGRAM};
use crate::phrases::SyntacticPhrase;

pub const DEFAULT_BUILTIN_DIM: usize = 256;

#[derive(Debug, Error, PartialEq)]
pub enum EmbeddingError {
    #[error("expected {expected} embedding records, found {found}")]
    CountMismatch { expected: usize, found: usize },

    #[error("phrase {phrase_id}: vector has dimension {found}, expected {expected}")]
    DimensionMismatch {
        phrase_id: usize,
        expected: usize,
        found: usize,
    },

    #[error("phrase {phrase_id}: text digest does not match the local phrase (stale export?)")]
    DigestMismatch { phrase_id: usize },

    #[error("record {position}: expected phrase_id {expected}, found {found}")]
    OutOfOrder {
        position: usize,
        expected: usize,
        found: usize,
    },

    #[error("phrase {phrase_id}: non-finite vector component")]
    NonFinite { phrase_id: usize },

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbeddingSource {
    ExternalFile,
    BuiltinHash,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub dim: usize,
    pub vectors: Vec<Vec<f64>>,
    pub source: EmbeddingSource,
}

/// One line of the interchange file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingRecord {
    pub phrase_id: usize,
    pub sha256: String,
    pub dim: usize,
    pub vector: Vec<f64>,
}

/// Lowercase hex SHA-256 of the UTF-8 phrase text.
pub fn text_digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn is_metadata_line(value: &serde_json::Value) -> bool {
    value
        .as_object()
        .is_some_and(|o| o.contains_key("model") && !o.contains_key("phrase_id"))
}

pub fn load_embeddings(path: &Path, phrases: &[SyntacticPhrase]) -> Result<EmbeddingSet> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(read_embeddings(file, phrases)?)
}

/// Reads and validates interchange records against the local phrases.
///
/// An optional first line `{"model": ...}` is logged and skipped.
pub fn read_embeddings<R: Read>(
    reader: R,
    phrases: &[SyntacticPhrase],
) -> std::result::Result<EmbeddingSet, EmbeddingError> {
    let mut records = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| EmbeddingError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| EmbeddingError::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
        if records.is_empty() && is_metadata_line(&value) {
            log::info!("embeddings model: {}", value["model"]);
            continue;
        }
        let record: EmbeddingRecord =
            serde_json::from_value(value).map_err(|e| EmbeddingError::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
        records.push(record);
    }

    if records.len() != phrases.len() {
        return Err(EmbeddingError::CountMismatch {
            expected: phrases.len(),
            found: records.len(),
        });
    }

    let dim = records.first().map_or(0, |r| r.dim);
    let mut vectors = Vec::with_capacity(records.len());
    for (position, (record, phrase)) in records.into_iter().zip(phrases).enumerate() {
        if record.phrase_id != phrase.phrase_id {
            return Err(EmbeddingError::OutOfOrder {
                position,
                expected: phrase.phrase_id,
                found: record.phrase_id,
            });
        }
        if record.dim != dim || record.vector.len() != dim {
            let found = if record.dim != dim {
                record.dim
            } else {
                record.vector.len()
            };
            return Err(EmbeddingError::DimensionMismatch {
                phrase_id: record.phrase_id,
                expected: dim,
                found,
            });
        }
        if record.vector.iter().any(|x| !x.is_finite()) {
            return Err(EmbeddingError::NonFinite {
                phrase_id: record.phrase_id,
            });
        }
        if record.sha256 != text_digest(&phrase.text()) {
            return Err(EmbeddingError::DigestMismatch {
                phrase_id: record.phrase_id,
            });
        }
        vectors.push(record.vector);
    }

    Ok(EmbeddingSet {
        dim,
        vectors,
        source: EmbeddingSource::ExternalFile,
    })
}

/// Writes vectors in the interchange format, preceded by a model line.
pub fn write_embeddings<W: Write>(
    mut out: W,
    model: &str,
    phrases: &[SyntacticPhrase],
    vectors: &[Vec<f64>],
) -> std::io::Result<()> {
    writeln!(out, "{}", serde_json::json!({ "model": model }))?;
    for (phrase, vector) in phrases.iter().zip(vectors) {
        let record = EmbeddingRecord {
            phrase_id: phrase.phrase_id,
            sha256: text_digest(&phrase.text()),
            dim: vector.len(),
            vector: vector.clone(),
        };
        writeln!(out, "{}", serde_json::to_string(&record)?)?;
    }
    Ok(())
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

/// Bucket and sign of an n-gram in the hashed feature space.
pub fn hash_feature(gram: &str, dim: usize) -> (usize, f64) {
    let h = fnv1a64(gram.as_bytes());
    let bucket = (h % dim as u64) as usize;
    let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
    (bucket, sign)
}

/// Signed hashed n-gram embedding weighted by tf-idf, L2-normalized.
pub fn builtin_embed(
    phrases: &[SyntacticPhrase],
    corpus: &PhraseCorpus,
    dim: usize,
) -> EmbeddingSet {
    assert!(dim > 0, "embedding dimension must be positive");
    let vectors = phrases
        .iter()
        .map(|phrase| {
            let grams: Vec<String> = ngrams(&phrase.tokens, MAX_NGRAM).collect();
            let mut v = vec![0.0; dim];
            for gram in &grams {
                let tf = grams.iter().filter(|g| *g == gram).count() as f64;
                let (bucket, sign) = hash_feature(gram, dim);
                v[bucket] += sign * tf * corpus.idf(gram);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            } else {
                log::warn!(
                    "phrase {} hashes to an all-zero vector; left unnormalized",
                    phrase.phrase_id
                );
            }
            v
        })
        .collect();
    EmbeddingSet {
        dim,
        vectors,
        source: EmbeddingSource::BuiltinHash,
    }
}

/// Dense row-major `n x n` similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::NotSquare { n, len: data.len() });
        }
        Ok(Self { n, data })
    }

    /// Builds `s(i, k) = f(i, k)` for all pairs, diagonal included.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for k in 0..n {
                data.push(f(i, k));
            }
        }
        Self { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.n + k]
    }

    pub fn set(&mut self, i: usize, k: usize, value: f64) {
        self.data[i * self.n + k] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn off_diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n;
        self.data
            .iter()
            .enumerate()
            .filter(move |(idx, _)| idx / n != idx % n)
            .map(|(_, &v)| v)
    }
}

/// Negative squared Euclidean distances. The diagonal is left at zero for
/// the clustering preference.
pub fn similarity_matrix(set: &EmbeddingSet) -> Result<SimilarityMatrix> {
    if let Some(i) = set
        .vectors
        .iter()
        .position(|v| v.iter().any(|x| !x.is_finite()))
    {
        return Err(EmbeddingError::NonFinite { phrase_id: i }.into());
    }
    let n = set.vectors.len();
    let mut m = SimilarityMatrix::from_fn(n, |_, _| 0.0);
    for i in 0..n {
        for k in (i + 1)..n {
            let d2: f64 = set.vectors[i]
                .iter()
                .zip(&set.vectors[k])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            m.set(i, k, -d2);
            m.set(k, i, -d2);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meaningfulness::build_corpus;
    use crate::meaningfulness::tests::phrase;

    fn set_of(vectors: Vec<Vec<f64>>) -> EmbeddingSet {
        EmbeddingSet {
            dim: vectors[0].len(),
            vectors,
            source: EmbeddingSource::ExternalFile,
        }
    }

    fn cosine(a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot / (na * nb)
    }

    #[test]
    fn fnv_reference_values() {
        // Published FNV-1a 64-bit test vectors.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn identical_phrases_have_identical_vectors() {
        let p = vec![
            phrase(0, "ship the release"),
            phrase(1, "ship the release"),
            phrase(2, "budget cut now"),
        ];
        let c = build_corpus(&p).unwrap();
        let e = builtin_embed(&p, &c, DEFAULT_BUILTIN_DIM);
        assert_eq!(e.vectors[0], e.vectors[1]);
        assert!((cosine(&e.vectors[0], &e.vectors[1]) - 1.0).abs() < 1e-12);
        for v in &e.vectors {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-9 || norm == 0.0);
        }
    }

    #[test]
    fn disjoint_buckets_are_orthogonal() {
        let p = vec![phrase(0, "alpha"), phrase(1, "omega")];
        let (ba, _) = hash_feature("alpha", DEFAULT_BUILTIN_DIM);
        let (bo, _) = hash_feature("omega", DEFAULT_BUILTIN_DIM);
        assert_ne!(ba, bo, "fixture words must land in different buckets");
        let c = build_corpus(&p).unwrap();
        let e = builtin_embed(&p, &c, DEFAULT_BUILTIN_DIM);
        assert_eq!(cosine(&e.vectors[0], &e.vectors[1]), 0.0);
    }

    #[test]
    fn similarity_values() {
        let m = similarity_matrix(&set_of(vec![
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
        ]))
        .unwrap();
        assert_eq!(m.get(0, 1), 0.0);
        assert!((m.get(0, 2) + 2.0).abs() < 1e-15);
        assert_eq!(m.get(2, 0), m.get(0, 2));

        let m = similarity_matrix(&set_of(vec![vec![0.3, 0.4]])).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.off_diagonal().count(), 0);

        let bad = set_of(vec![vec![0.0, f64::NAN]]);
        assert!(similarity_matrix(&bad).is_err());
    }

    fn fixture_phrases() -> Vec<SyntacticPhrase> {
        [
            "we ship friday",
            "budget is tight",
            "release notes pending",
            "qa signs off",
            "demo on monday",
        ]
        .iter()
        .enumerate()
        .map(|(i, t)| phrase(i, t))
        .collect()
    }

    fn fixture_file(phrases: &[SyntacticPhrase], dim: usize) -> Vec<u8> {
        let vectors: Vec<Vec<f64>> = (0..phrases.len())
            .map(|i| {
                (0..dim)
                    .map(|j| ((i * dim + j) as f64 * 0.37).sin())
                    .collect()
            })
            .collect();
        let mut buf = Vec::new();
        write_embeddings(&mut buf, "test-model", phrases, &vectors).unwrap();
        buf
    }

    #[test]
    fn interchange_round_trip() {
        let p = fixture_phrases();
        let buf = fixture_file(&p, 512);
        let set = read_embeddings(buf.as_slice(), &p).unwrap();
        assert_eq!(set.dim, 512);
        assert_eq!(set.vectors.len(), 5);
        assert_eq!(set.source, EmbeddingSource::ExternalFile);
    }

    #[test]
    fn stale_digest_names_phrase() {
        let p = fixture_phrases();
        let buf = fixture_file(&p, 8);
        let mut local = p.clone();
        local[3].tokens = vec!["qa".into(), "signs".into(), "later".into()];
        assert_eq!(
            read_embeddings(buf.as_slice(), &local),
            Err(EmbeddingError::DigestMismatch { phrase_id: 3 })
        );
    }

    #[test]
    fn empty_file_is_count_mismatch() {
        let p = vec![phrase(0, "one two three")];
        assert_eq!(
            read_embeddings(&b""[..], &p),
            Err(EmbeddingError::CountMismatch {
                expected: 1,
                found: 0
            })
        );
    }

    #[test]
    fn dimension_mismatch_names_phrase() {
        let p = fixture_phrases();
        let text = String::from_utf8(fixture_file(&p, 4)).unwrap();
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        let mut rec: EmbeddingRecord = serde_json::from_str(&lines[3]).unwrap();
        rec.vector.push(0.5);
        rec.dim = 5;
        lines[3] = serde_json::to_string(&rec).unwrap();
        let err = read_embeddings(lines.join("\n").as_bytes(), &p).unwrap_err();
        assert_eq!(
            err,
            EmbeddingError::DimensionMismatch {
                phrase_id: 2,
                expected: 4,
                found: 5
            }
        );
    }

    #[test]
    fn nan_token_is_malformed() {
        let p = vec![phrase(0, "one two three")];
        let line = format!(
            r#"{{"phrase_id":0,"sha256":"{}","dim":1,"vector":[NaN]}}"#,
            text_digest("one two three")
        );
        assert!(matches!(
            read_embeddings(line.as_bytes(), &p),
            Err(EmbeddingError::Malformed { line: 1, .. })
        ));
    }
}
