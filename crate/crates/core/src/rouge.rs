//! ROUGE-1/2/4, ROUGE-L, ROUGE-W-1.2, ROUGE-S4 and ROUGE-SU4.
//!
//! Texts are lowercased and split on non-alphanumeric runs before scoring.
//! LCS-based metrics work at summary level: the whole token sequence is one
//! unit since punctuation (and with it sentence boundaries) is stripped.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_WLCS_WEIGHT: f64 = 1.2;
pub const DEFAULT_MAX_SKIP: usize = 4;

/// Begin-of-text marker used by ROUGE-SU to fold unigrams into skip-bigrams.
const BEGIN_MARKER: &str = "<s>";

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Scores {
    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f1,
        }
    }

    fn from_overlap(overlap: f64, candidate_total: usize, reference_total: usize) -> Self {
        let ratio = |total: usize| {
            if total == 0 {
                0.0
            } else {
                overlap / total as f64
            }
        };
        Self::from_pr(ratio(candidate_total), ratio(reference_total))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Scores of the reference with the best F1.
    #[default]
    Max,
    /// Arithmetic mean of precision, recall and F1 across references.
    Mean,
}

/// Metric names in report order.
pub const METRICS: [&str; 7] = [
    "rouge-1",
    "rouge-2",
    "rouge-4",
    "rouge-l",
    "rouge-w-1.2",
    "rouge-s4",
    "rouge-su4",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RougeReport {
    #[serde(flatten)]
    pub per_metric: BTreeMap<String, Scores>,
    pub per_reference: Vec<BTreeMap<String, Scores>>,
    pub aggregation: Aggregation,
}

pub fn metric_tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn counts<T: Eq + Hash>(items: impl IntoIterator<Item = T>) -> HashMap<T, usize> {
    let mut m = HashMap::new();
    for item in items {
        *m.entry(item).or_insert(0) += 1;
    }
    m
}

fn clipped_overlap<T: Eq + Hash>(cand: &HashMap<T, usize>, reference: &HashMap<T, usize>) -> usize {
    cand.iter()
        .map(|(k, &c)| c.min(reference.get(k).copied().unwrap_or(0)))
        .sum()
}

fn word_ngrams<S: AsRef<str>>(tokens: &[S], n: usize) -> Vec<Vec<&str>> {
    tokens
        .windows(n)
        .map(|w| w.iter().map(AsRef::as_ref).collect())
        .collect()
}

pub fn rouge_n<S: AsRef<str>>(candidate: &[S], reference: &[S], n: usize) -> Scores {
    assert!(n >= 1, "rouge-n needs n >= 1");
    let c = word_ngrams(candidate, n);
    let r = word_ngrams(reference, n);
    let overlap = clipped_overlap(&counts(c.iter()), &counts(r.iter()));
    Scores::from_overlap(overlap as f64, c.len(), r.len())
}

pub fn lcs_length<S: AsRef<str>>(a: &[S], b: &[S]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x.as_ref() == y.as_ref() {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge_l<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> Scores {
    let lcs = lcs_length(candidate, reference);
    Scores::from_overlap(lcs as f64, candidate.len(), reference.len())
}

/// Weighted LCS score with consecutive-run weighting `f(k) = k^weight`.
///
/// This is the usual dynamic program: a match extends the run length
/// recorded at the diagonal cell, a mismatch resets it.
pub fn weighted_lcs<S: AsRef<str>>(a: &[S], b: &[S], weight: f64) -> f64 {
    let f = |k: f64| k.powf(weight);
    let cols = b.len() + 1;
    let mut score = vec![0.0f64; (a.len() + 1) * cols];
    let mut run = vec![0usize; (a.len() + 1) * cols];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let here = i * cols + j;
            if a[i - 1].as_ref() == b[j - 1].as_ref() {
                let diag = (i - 1) * cols + (j - 1);
                let k = run[diag] as f64;
                score[here] = score[diag] + f(k + 1.0) - f(k);
                run[here] = run[diag] + 1;
            } else {
                let up = score[(i - 1) * cols + j];
                let left = score[i * cols + j - 1];
                score[here] = up.max(left);
                run[here] = 0;
            }
        }
    }
    score[a.len() * cols + b.len()]
}

pub fn rouge_w<S: AsRef<str>>(candidate: &[S], reference: &[S], weight: f64) -> Scores {
    assert!(weight > 1.0, "rouge-w weight must exceed 1");
    let wlcs = weighted_lcs(candidate, reference, weight);
    let side = |len: usize| {
        if len == 0 {
            0.0
        } else {
            (wlcs / (len as f64).powf(weight)).powf(1.0 / weight)
        }
    };
    Scores::from_pr(side(candidate.len()), side(reference.len()))
}

/// Ordered token pairs with at most `max_skip` tokens between them.
pub fn skip_bigrams<S: AsRef<str>>(tokens: &[S], max_skip: usize) -> Vec<(&str, &str)> {
    let mut pairs = Vec::new();
    for i in 0..tokens.len() {
        let last = (i + 1 + max_skip).min(tokens.len().saturating_sub(1));
        for j in (i + 1)..=last {
            pairs.push((tokens[i].as_ref(), tokens[j].as_ref()));
        }
    }
    pairs
}

pub fn rouge_s<S: AsRef<str>>(
    candidate: &[S],
    reference: &[S],
    max_skip: usize,
    with_unigrams: bool,
) -> Scores {
    let prep = |tokens: &[S]| -> Vec<String> {
        let mut v: Vec<String> = Vec::with_capacity(tokens.len() + 1);
        if with_unigrams && !tokens.is_empty() {
            v.push(BEGIN_MARKER.to_string());
        }
        v.extend(tokens.iter().map(|t| t.as_ref().to_string()));
        v
    };
    let c = prep(candidate);
    let r = prep(reference);
    let cp = skip_bigrams(&c, max_skip);
    let rp = skip_bigrams(&r, max_skip);
    let overlap = clipped_overlap(&counts(cp.iter()), &counts(rp.iter()));
    Scores::from_overlap(overlap as f64, cp.len(), rp.len())
}

/// Every metric of [`METRICS`] for one candidate/reference pair.
pub fn score_pair<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> BTreeMap<String, Scores> {
    let values = [
        rouge_n(candidate, reference, 1),
        rouge_n(candidate, reference, 2),
        rouge_n(candidate, reference, 4),
        rouge_l(candidate, reference),
        rouge_w(candidate, reference, DEFAULT_WLCS_WEIGHT),
        rouge_s(candidate, reference, DEFAULT_MAX_SKIP, false),
        rouge_s(candidate, reference, DEFAULT_MAX_SKIP, true),
    ];
    METRICS
        .iter()
        .zip(values)
        .map(|(name, s)| (name.to_string(), s))
        .collect()
}

pub fn evaluate<C: AsRef<str>, R: AsRef<str>>(
    candidate: C,
    references: &[R],
    aggregation: Aggregation,
) -> Result<RougeReport> {
    if references.is_empty() {
        return Err(Error::NoReferences);
    }
    let cand = metric_tokenize(candidate.as_ref());
    let per_reference: Vec<BTreeMap<String, Scores>> = references
        .iter()
        .map(|r| score_pair(&cand, &metric_tokenize(r.as_ref())))
        .collect();

    let per_metric = METRICS
        .iter()
        .map(|&name| {
            let all = per_reference.iter().map(|m| m[name]);
            let agg = match aggregation {
                Aggregation::Max => all
                    .fold(None::<Scores>, |best, s| match best {
                        Some(b) if b.f1 >= s.f1 => Some(b),
                        _ => Some(s),
                    })
                    .unwrap_or_default(),
                Aggregation::Mean => {
                    let k = per_reference.len() as f64;
                    let sum = all.fold(Scores::default(), |acc, s| Scores {
                        precision: acc.precision + s.precision,
                        recall: acc.recall + s.recall,
                        f1: acc.f1 + s.f1,
                    });
                    Scores {
                        precision: sum.precision / k,
                        recall: sum.recall / k,
                        f1: sum.f1 / k,
                    }
                }
            };
            (name.to_string(), agg)
        })
        .collect();

    Ok(RougeReport {
        per_metric,
        per_reference,
        aggregation,
    })
}
