//! Cluster ranking and minute selection.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::affinity::ClusterSolution;
use crate::error::{Error, Result};
use crate::meaningfulness::MeaningfulnessScore;
use crate::phrases::SyntacticPhrase;

pub const DEFAULT_SELECTION_RATIO: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCluster {
    pub exemplar_phrase_id: usize,
    pub member_phrase_ids: Vec<usize>,
    /// Mean stfidf of the members.
    pub meaningfulness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinuteLine {
    pub phrase_id: usize,
    pub text: String,
    pub meaningfulness: f64,
    pub cluster_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minutes {
    pub meeting_id: String,
    pub lines: Vec<MinuteLine>,
    pub selection_ratio: f64,
}

/// Chronological key for the selected clusters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineOrdering {
    /// Position of the exemplar phrase.
    #[default]
    Exemplar,
    /// Position of the earliest member of the cluster.
    EarliestMember,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

/// Groups phrases by exemplar and sorts clusters by descending mean
/// meaningfulness; ties go to the earlier exemplar.
///
/// Point indices of `solution` are positions in `scores`.
pub fn rank_clusters(
    solution: &ClusterSolution,
    scores: &[MeaningfulnessScore],
) -> Vec<RankedCluster> {
    let mut ranked: Vec<RankedCluster> = solution
        .clusters()
        .into_iter()
        .map(|(exemplar, members)| {
            let total: f64 = members.iter().map(|&m| scores[m].stfidf).sum();
            RankedCluster {
                exemplar_phrase_id: scores[exemplar].phrase_id,
                meaningfulness: total / members.len() as f64,
                member_phrase_ids: members.iter().map(|&m| scores[m].phrase_id).collect(),
            }
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.meaningfulness
            .partial_cmp(&a.meaningfulness)
            .unwrap_or(Ordering::Equal)
            .then(a.exemplar_phrase_id.cmp(&b.exemplar_phrase_id))
    });
    ranked
}

/// Number of clusters kept: `ceil(ratio * k)`, at least one.
pub fn selection_count(ratio: f64, k: usize) -> usize {
    // Shave float noise so that e.g. 0.1 * 30 keeps 3, not 4.
    let raw = (ratio * k as f64 - 1e-9).ceil();
    (raw.max(1.0) as usize).min(k.max(1))
}

pub fn select_minutes(
    meeting_id: &str,
    ranked: &[RankedCluster],
    ratio: f64,
    phrases: &[SyntacticPhrase],
) -> Result<Minutes> {
    select_minutes_ordered(meeting_id, ranked, ratio, phrases, LineOrdering::Exemplar)
}

pub fn select_minutes_ordered(
    meeting_id: &str,
    ranked: &[RankedCluster],
    ratio: f64,
    phrases: &[SyntacticPhrase],
    ordering: LineOrdering,
) -> Result<Minutes> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "selection ratio must be in (0, 1], got {ratio}"
        )));
    }
    let take = selection_count(ratio, ranked.len());
    let mut chosen: Vec<&RankedCluster> = ranked.iter().take(take).collect();
    chosen.sort_by_key(|c| match ordering {
        LineOrdering::Exemplar => c.exemplar_phrase_id,
        LineOrdering::EarliestMember => c
            .member_phrase_ids
            .iter()
            .copied()
            .min()
            .unwrap_or(c.exemplar_phrase_id),
    });

    let lines = chosen
        .into_iter()
        .map(|c| {
            let phrase = phrases
                .iter()
                .find(|p| p.phrase_id == c.exemplar_phrase_id)
                .expect("exemplar refers to a known phrase");
            MinuteLine {
                phrase_id: c.exemplar_phrase_id,
                text: phrase.text(),
                meaningfulness: c.meaningfulness,
                cluster_size: c.member_phrase_ids.len(),
            }
        })
        .collect();

    Ok(Minutes {
        meeting_id: meeting_id.to_string(),
        lines,
        selection_ratio: ratio,
    })
}

pub fn render(minutes: &Minutes, format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => minutes
            .lines
            .iter()
            .map(|l| format!("{}\n", l.text))
            .collect(),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&minutes.lines).expect("minutes serialize");
            s.push('\n');
            s
        }
    }
}
