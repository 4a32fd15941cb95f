//! Independent oracles shared by the property and acceptance suites.
//!
//! Nothing here calls into the code paths it is used to check.

#![allow(dead_code)]

use minuteforge::{SimilarityMatrix, SyntacticPhrase};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn phrase(id: usize, tokens: &[&str]) -> SyntacticPhrase {
    let tokens: Vec<String> = tokens.iter().map(|t| t.to_string()).collect();
    SyntacticPhrase {
        phrase_id: id,
        utterance_index: id,
        phrase_index: 0,
        raw_tokens: tokens.clone(),
        tokens,
    }
}

fn contains_slice(haystack: &[String], needle: &[String]) -> bool {
    haystack.windows(needle.len()).any(|w| w == needle)
}

fn count_slice(haystack: &[String], needle: &[String]) -> usize {
    haystack
        .windows(needle.len())
        .filter(|w| *w == needle)
        .count()
}

/// Mean tf-idf over every contiguous 1..=max_n token slice of phrase `idx`,
/// with document frequencies found by scanning all phrases.
pub fn stfidf_oracle(phrases: &[SyntacticPhrase], idx: usize, max_n: usize) -> f64 {
    let doc = &phrases[idx].tokens;
    let d = phrases.len() as f64;
    let mut sum = 0.0;
    let mut count = 0usize;
    for n in 1..=max_n {
        if n > doc.len() {
            break;
        }
        for start in 0..=(doc.len() - n) {
            let gram = &doc[start..start + n];
            let tf = count_slice(doc, gram) as f64;
            let df = phrases
                .iter()
                .filter(|p| contains_slice(&p.tokens, gram))
                .count() as f64;
            sum += tf * (((1.0 + d) / (1.0 + df)).ln() + 1.0);
            count += 1;
        }
    }
    sum / count as f64
}

/// Best net similarity over every non-empty exemplar subset, plus every
/// partition attaining it (within `tol`).
pub struct ApOracle {
    pub best: f64,
    pub partitions: Vec<Vec<Vec<usize>>>,
}

pub fn canonical_partition(assignment: &[usize]) -> Vec<Vec<usize>> {
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, &e) in assignment.iter().enumerate() {
        groups.entry(e).or_default().push(i);
    }
    let mut parts: Vec<Vec<usize>> = groups.into_values().collect();
    parts.sort();
    parts
}

pub fn ap_oracle(s: &[Vec<f64>], preference: f64, tol: f64) -> ApOracle {
    let n = s.len();
    let mut scored: Vec<(f64, Vec<usize>)> = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let members: Vec<usize> = (0..n).filter(|k| mask & (1 << k) != 0).collect();
        let mut total = preference * members.len() as f64;
        let mut assignment = vec![0; n];
        for i in 0..n {
            if mask & (1 << i) != 0 {
                assignment[i] = i;
                continue;
            }
            let (k, v) = members.iter().map(|&k| (k, s[i][k])).fold(
                (usize::MAX, f64::NEG_INFINITY),
                |a, b| if b.1 > a.1 { b } else { a },
            );
            assignment[i] = k;
            total += v;
        }
        scored.push((total, assignment));
    }
    let best = scored.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
    let mut partitions: Vec<Vec<Vec<usize>>> = scored
        .iter()
        .filter(|(v, _)| (v - best).abs() <= tol)
        .map(|(_, a)| canonical_partition(a))
        .collect();
    partitions.sort();
    partitions.dedup();
    ApOracle { best, partitions }
}

pub fn to_matrix(s: &[Vec<f64>]) -> SimilarityMatrix {
    SimilarityMatrix::from_fn(s.len(), |i, k| s[i][k])
}

/// Two well separated 2-D blobs of `n` points in total (each blob non-empty),
/// as negative squared Euclidean similarities.
pub fn two_blob_instance(seed: u64, n: usize) -> Vec<Vec<f64>> {
    assert!(n >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.gen_range(1..n);
    let points: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let (cx, cy) = if i < first { (0.0, 0.0) } else { (10.0, 10.0) };
            (cx + rng.gen_range(-0.5..0.5), cy + rng.gen_range(-0.5..0.5))
        })
        .collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|k| {
                    if i == k {
                        0.0
                    } else {
                        let dx = points[i].0 - points[k].0;
                        let dy = points[i].1 - points[k].1;
                        -(dx * dx + dy * dy)
                    }
                })
                .collect()
        })
        .collect()
}

/// Maximum weight over all common-subsequence alignments, where each run of
/// matches that is consecutive in both sequences weighs `len^weight`.
pub fn wlcs_oracle(a: &[&str], b: &[&str], weight: f64) -> f64 {
    fn walk(
        a: &[&str],
        b: &[&str],
        w: f64,
        prev: Option<(usize, usize)>,
        run: usize,
        acc: f64,
    ) -> f64 {
        let close = |run: usize| if run == 0 { 0.0 } else { (run as f64).powf(w) };
        let mut best = acc + close(run);
        let (si, sj) = prev.map_or((0, 0), |(i, j)| (i + 1, j + 1));
        for i in si..a.len() {
            for j in sj..b.len() {
                if a[i] != b[j] {
                    continue;
                }
                let extends = prev.is_some_and(|(pi, pj)| pi + 1 == i && pj + 1 == j);
                let v = if extends {
                    walk(a, b, w, Some((i, j)), run + 1, acc)
                } else {
                    walk(a, b, w, Some((i, j)), 1, acc + close(run))
                };
                best = best.max(v);
            }
        }
        best
    }
    walk(a, b, weight, None, 0, 0.0)
}

/// Skip-bigram pairs by exhaustive index enumeration.
pub fn skip_pairs<'a>(t: &[&'a str], max_skip: usize) -> Vec<(&'a str, &'a str)> {
    let mut out = Vec::new();
    for i in 0..t.len() {
        for j in (i + 1)..t.len() {
            if j - i - 1 <= max_skip {
                out.push((t[i], t[j]));
            }
        }
    }
    out
}

pub fn fixture_transcript() -> String {
    std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/meeting.txt"
    ))
    .expect("fixture transcript")
}

/// A long synthetic meeting built by cycling fixture lines with varied
/// numeric details, roughly `target_words` words long.
pub fn long_transcript(target_words: usize) -> String {
    let base = fixture_transcript();
    let lines: Vec<&str> = base.lines().collect();
    let mut out = String::new();
    let mut words = 0;
    let mut round = 0;
    while words < target_words {
        for (i, line) in lines.iter().enumerate() {
            let extra = format!(" We noted item {} of batch {}.", i % 37, round);
            out.push_str(line);
            out.push_str(&extra);
            out.push('\n');
            words += line.split_whitespace().count() + extra.split_whitespace().count();
            if words >= target_words {
                break;
            }
        }
        round += 1;
    }
    out
}
