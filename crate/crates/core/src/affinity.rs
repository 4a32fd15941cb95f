//! Affinity propagation clustering.
//!
//! Responsibilities and availabilities are exchanged between all pairs of
//! points until the set of exemplars stays unchanged for a fixed number of
//! sweeps. Defaults: damping 0.9, at most 1000 sweeps, stop after 50
//! stable sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::SimilarityMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_DAMPING: f64 = 0.9;
pub const DEFAULT_MAX_ITERATIONS: usize = 1000;
pub const DEFAULT_CONVERGENCE_ITERATIONS: usize = 50;

/// Scale of the optional tie-breaking jitter.
const JITTER_SCALE: f64 = 1e-12;
/// Relative size of the index-ordered preference ramp.
const TIE_BREAK_SCALE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    /// Median of the off-diagonal similarities.
    Median,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApConfig {
    pub damping: f64,
    pub max_iterations: usize,
    pub convergence_iterations: usize,
    pub preference: Preference,
    /// Seed for similarity jitter; 0 disables it.
    pub noise_seed: u64,
}

impl Default for ApConfig {
    fn default() -> Self {
        Self {
            damping: DEFAULT_DAMPING,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            convergence_iterations: DEFAULT_CONVERGENCE_ITERATIONS,
            preference: Preference::Median,
            noise_seed: 0,
        }
    }
}

impl ApConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.5..1.0).contains(&self.damping) {
            return Err(Error::InvalidConfig(format!(
                "damping must be in [0.5, 1), got {}",
                self.damping
            )));
        }
        if self.convergence_iterations == 0 || self.max_iterations < self.convergence_iterations {
            return Err(Error::InvalidConfig(format!(
                "need max_iterations >= convergence_iterations >= 1, got {} and {}",
                self.max_iterations, self.convergence_iterations
            )));
        }
        if let Preference::Value(p) = self.preference {
            if !p.is_finite() {
                return Err(Error::InvalidConfig("preference must be finite".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSolution {
    /// Sorted point indices acting as cluster centers.
    pub exemplars: Vec<usize>,
    /// Exemplar index of every point.
    pub assignment: Vec<usize>,
    pub iterations_run: usize,
    pub converged: bool,
    /// Sum of `s(i, assignment[i])`, counting the preference for exemplars.
    pub net_similarity: f64,
    /// Preference actually used on the diagonal.
    pub preference: f64,
}

impl ClusterSolution {
    /// Members of each cluster, in exemplar order.
    pub fn clusters(&self) -> Vec<(usize, Vec<usize>)> {
        self.exemplars
            .iter()
            .map(|&e| {
                let members = (0..self.assignment.len())
                    .filter(|&i| self.assignment[i] == e)
                    .collect();
                (e, members)
            })
            .collect()
    }
}

/// Median of the off-diagonal entries; the mean of the two middle values
/// when their count is even.
pub fn default_preference(similarities: &SimilarityMatrix) -> Result<f64> {
    let n = similarities.len();
    if n < 2 {
        return Err(Error::PreferenceUndefined(n));
    }
    let mut values: Vec<f64> = similarities.off_diagonal().collect();
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Ok(if values.len().is_multiple_of(2) {
        (values[mid - 1] + values[mid]) / 2.0
    } else {
        values[mid]
    })
}

fn check_input(similarities: &SimilarityMatrix) -> Result<()> {
    let n = similarities.len();
    if n == 0 {
        return Err(Error::NoPoints);
    }
    for i in 0..n {
        for (k, v) in similarities.row(i).iter().enumerate() {
            if i != k && !v.is_finite() {
                return Err(Error::NonFiniteSimilarity { row: i, col: k });
            }
        }
    }
    Ok(())
}

pub fn cluster(similarities: &SimilarityMatrix, config: &ApConfig) -> Result<ClusterSolution> {
    config.validate()?;
    check_input(similarities)?;
    let n = similarities.len();

    let preference = match config.preference {
        Preference::Value(p) => p,
        Preference::Median if n == 1 => 0.0,
        Preference::Median => default_preference(similarities)?,
    };

    if n == 1 {
        return Ok(ClusterSolution {
            exemplars: vec![0],
            assignment: vec![0],
            iterations_run: 0,
            converged: true,
            net_similarity: preference,
            preference,
        });
    }

    let mut s: Vec<f64> = (0..n)
        .flat_map(|i| {
            similarities
                .row(i)
                .iter()
                .enumerate()
                .map(move |(k, &v)| if i == k { preference } else { v })
        })
        .collect();
    // Exactly symmetric points (duplicated phrases, mirrored pairs) leave
    // every self-evidence at zero. A sub-ulp-scale preference ramp that
    // favours lower indices breaks such ties deterministically.
    let ramp = TIE_BREAK_SCALE * (preference.abs() + 1.0);
    for k in 0..n {
        s[k * n + k] -= ramp * k as f64 / n as f64;
    }
    if config.noise_seed != 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.noise_seed);
        for v in s.iter_mut() {
            *v += JITTER_SCALE * (v.abs() + 1.0) * rng.gen::<f64>();
        }
    }

    let mut state = MessageState::new(n);
    let mut exemplars: Vec<usize> = Vec::new();
    let mut stable = 0usize;
    let mut iterations_run = 0;
    let mut converged = false;

    for it in 1..=config.max_iterations {
        state.update_responsibilities(&s, config.damping);
        state.update_availabilities(config.damping);
        debug_assert!(state.is_finite(), "non-finite message at sweep {it}");
        iterations_run = it;

        let current = state.exemplars();
        if current == exemplars {
            stable += 1;
        } else {
            exemplars = current;
            stable = 1;
        }
        log::debug!(
            "ap sweep {it}: {} exemplars, stable for {stable}",
            exemplars.len()
        );
        if stable >= config.convergence_iterations
            && !exemplars.is_empty()
            && state.decisions_agree(&exemplars)
        {
            converged = true;
            break;
        }
    }

    if exemplars.is_empty() {
        return Ok(degenerate_fallback(
            similarities,
            &state,
            preference,
            iterations_run,
        ));
    }
    Ok(finish(
        similarities,
        exemplars,
        preference,
        iterations_run,
        converged,
    ))
}

/// Used when message passing ends without any positive `r(k,k) + a(k,k)`:
/// the point with the largest self-evidence becomes the only exemplar.
fn degenerate_fallback(
    similarities: &SimilarityMatrix,
    state: &MessageState,
    preference: f64,
    iterations_run: usize,
) -> ClusterSolution {
    log::warn!("affinity propagation found no exemplars; falling back to a single cluster");
    let best = (0..state.n)
        .map(|k| (k, state.self_evidence(k)))
        .fold(
            (0, f64::NEG_INFINITY),
            |acc, (k, e)| if e > acc.1 { (k, e) } else { acc },
        )
        .0;
    finish(similarities, vec![best], preference, iterations_run, false)
}

fn finish(
    similarities: &SimilarityMatrix,
    exemplars: Vec<usize>,
    preference: f64,
    iterations_run: usize,
    converged: bool,
) -> ClusterSolution {
    let (mut exemplars, mut assignment, mut net_similarity) =
        assign(similarities, exemplars, preference);

    // Refinement: within each cluster, move the exemplar to the member with
    // the largest total similarity from the others, then reassign. Each
    // accepted round strictly improves net similarity, so this terminates.
    loop {
        let mut moved: Vec<usize> = exemplars
            .iter()
            .map(|&e| {
                let members: Vec<usize> = (0..assignment.len())
                    .filter(|&i| assignment[i] == e)
                    .collect();
                let pull = |k: usize| -> f64 {
                    members
                        .iter()
                        .filter(|&&i| i != k)
                        .map(|&i| similarities.get(i, k))
                        .sum()
                };
                let mut best = (e, pull(e));
                for &k in &members {
                    let v = pull(k);
                    if v > best.1 {
                        best = (k, v);
                    }
                }
                best.0
            })
            .collect();
        moved.sort_unstable();
        if moved == exemplars {
            break;
        }
        let candidate = assign(similarities, moved, preference);
        if candidate.2 <= net_similarity {
            break;
        }
        (exemplars, assignment, net_similarity) = candidate;
    }

    ClusterSolution {
        exemplars,
        assignment,
        iterations_run,
        converged,
        net_similarity,
        preference,
    }
}

/// Attach every non-exemplar to its most similar exemplar (first exemplar
/// wins ties) and total the net similarity, preferences included.
fn assign(
    similarities: &SimilarityMatrix,
    exemplars: Vec<usize>,
    preference: f64,
) -> (Vec<usize>, Vec<usize>, f64) {
    let n = similarities.len();
    let mut is_exemplar = vec![false; n];
    for &e in &exemplars {
        is_exemplar[e] = true;
    }
    let mut net_similarity = 0.0;
    let assignment = (0..n)
        .map(|i| {
            if is_exemplar[i] {
                net_similarity += preference;
                return i;
            }
            let best = exemplars
                .iter()
                .copied()
                .fold(None::<(usize, f64)>, |acc, k| {
                    let v = similarities.get(i, k);
                    match acc {
                        Some((_, bv)) if bv >= v => acc,
                        _ => Some((k, v)),
                    }
                })
                .expect("at least one exemplar");
            net_similarity += best.1;
            best.0
        })
        .collect();
    (exemplars, assignment, net_similarity)
}

struct MessageState {
    n: usize,
    responsibility: Vec<f64>,
    availability: Vec<f64>,
    scratch: Vec<f64>,
}

impl MessageState {
    fn new(n: usize) -> Self {
        Self {
            n,
            responsibility: vec![0.0; n * n],
            availability: vec![0.0; n * n],
            scratch: vec![0.0; n],
        }
    }

    /// r(i,k) <- s(i,k) - max_{k' != k} (a(i,k') + s(i,k'))
    fn update_responsibilities(&mut self, s: &[f64], damping: f64) {
        let n = self.n;
        for i in 0..n {
            let row = i * n..(i + 1) * n;
            let s_row = &s[row.clone()];
            let a_row = &self.availability[row.clone()];

            let (mut first, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            let mut arg_first = 0;
            for k in 0..n {
                let v = a_row[k] + s_row[k];
                if v > first {
                    second = first;
                    first = v;
                    arg_first = k;
                } else if v > second {
                    second = v;
                }
            }

            let r_row = &mut self.responsibility[row];
            for k in 0..n {
                let competitor = if k == arg_first { second } else { first };
                let fresh = s_row[k] - competitor;
                r_row[k] = damping * r_row[k] + (1.0 - damping) * fresh;
            }
        }
    }

    /// a(i,k) <- min(0, r(k,k) + sum_{i' not in {i,k}} max(0, r(i',k)))
    /// a(k,k) <- sum_{i' != k} max(0, r(i',k))
    // i and k index the flat n×n buffers as well as col_pos
    #[allow(clippy::needless_range_loop)]
    fn update_availabilities(&mut self, damping: f64) {
        let n = self.n;
        // Column sums of positive responsibilities, excluding the diagonal.
        let col_pos = &mut self.scratch;
        col_pos.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..n {
            let r_row = &self.responsibility[i * n..(i + 1) * n];
            for k in 0..n {
                if k != i {
                    col_pos[k] += r_row[k].max(0.0);
                }
            }
        }
        for i in 0..n {
            for k in 0..n {
                let idx = i * n + k;
                let fresh = if i == k {
                    col_pos[k]
                } else {
                    let r_kk = self.responsibility[k * n + k];
                    let others = col_pos[k] - self.responsibility[idx].max(0.0);
                    (r_kk + others).min(0.0)
                };
                self.availability[idx] = damping * self.availability[idx] + (1.0 - damping) * fresh;
            }
        }
    }

    fn self_evidence(&self, k: usize) -> f64 {
        let idx = k * self.n + k;
        self.responsibility[idx] + self.availability[idx]
    }

    fn exemplars(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&k| self.self_evidence(k) > 0.0)
            .collect()
    }

    /// Whether every point's message decision, argmax_k a(i,k) + r(i,k),
    /// lands on a current exemplar. A stable exemplar set whose members
    /// are still pulled elsewhere has not settled yet.
    fn decisions_agree(&self, exemplars: &[usize]) -> bool {
        (0..self.n).all(|i| {
            let row = i * self.n..(i + 1) * self.n;
            let best = self.availability[row.clone()]
                .iter()
                .zip(&self.responsibility[row])
                .map(|(a, r)| a + r)
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |acc, (k, v)| if v > acc.1 { (k, v) } else { acc },
                )
                .0;
            exemplars.binary_search(&best).is_ok()
        })
    }

    fn is_finite(&self) -> bool {
        self.responsibility
            .iter()
            .chain(&self.availability)
            .all(|x| x.is_finite())
    }
}
