//! K-medoids on a precomputed distance matrix and majority-rule scoring.
//!
//! The k-medoids variant is the alternating (Voronoi iteration) scheme:
//! assign every item to its nearest medoid, move each medoid to the member
//! with the smallest total distance to its cluster, repeat until the medoid
//! set stops changing. Initial medoids are drawn uniformly at random, so
//! repeated runs with different seeds explore different local optima.
//!
//! Ties are always broken towards the lowest index. Medoids are kept sorted
//! ascending, so cluster `c` is the cluster of the `c`-th smallest medoid.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::distances::DistanceMatrix;
use crate::rng::derive_seed;

/// Iteration cap used when none is given.
pub const DEFAULT_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClusteringError {
    #[error("k = {k} is invalid for {n} items (need 2 <= k <= n)")]
    InvalidK { k: usize, n: usize },
    #[error("medoid {0} is out of range")]
    MedoidOutOfRange(usize),
    #[error("medoid {0} is listed twice")]
    DuplicateMedoid(usize),
    #[error("{predicted} predictions for {truth} truth labels")]
    LengthMismatch { predicted: usize, truth: usize },
    #[error("nothing to score")]
    Empty,
    #[error("repeats must be at least 1")]
    ZeroRepeats,
}

/// Outcome of one k-medoids run.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    /// Cluster id in `0..k` for every item.
    pub assignments: Vec<usize>,
    /// Medoid item of each cluster, ascending.
    pub medoids: Vec<usize>,
    /// Sum over items of the distance to their medoid.
    pub objective: f64,
    /// Number of medoid-update steps performed.
    pub n_iterations: usize,
    /// Objective after the initial assignment and after every assignment
    /// that followed a medoid change.
    pub objective_trace: Vec<f64>,
}

/// Assigns items to the nearest medoid; a medoid always keeps itself.
fn assign(d: &DistanceMatrix, medoids: &[usize]) -> (Vec<usize>, f64) {
    let n = d.len();
    let mut assignments = vec![0; n];
    let mut objective = 0.0;
    for (item, slot) in assignments.iter_mut().enumerate() {
        let (best, dist) = match medoids.iter().position(|&m| m == item) {
            Some(c) => (c, 0.0),
            None => {
                let row = d.row(item);
                let mut best = 0;
                for c in 1..medoids.len() {
                    if row[medoids[c]] < row[medoids[best]] {
                        best = c;
                    }
                }
                (best, row[medoids[best]])
            }
        };
        *slot = best;
        objective += dist;
    }
    (assignments, objective)
}

/// Cost-minimizing member of every cluster, returned sorted.
fn update_medoids(d: &DistanceMatrix, k: usize, assignments: &[usize]) -> Vec<usize> {
    let mut members = vec![Vec::new(); k];
    for (item, &c) in assignments.iter().enumerate() {
        members[c].push(item);
    }
    let mut medoids: Vec<usize> = members
        .iter()
        .map(|cluster| {
            let mut best = (f64::INFINITY, usize::MAX);
            for &candidate in cluster {
                let row = d.row(candidate);
                let cost: f64 = cluster.iter().map(|&x| row[x]).sum();
                if cost < best.0 {
                    best = (cost, candidate);
                }
            }
            best.1
        })
        .collect();
    medoids.sort_unstable();
    medoids
}

/// K-medoids from a given initial medoid set.
pub fn kmedoids_from(
    d: &DistanceMatrix,
    initial: &[usize],
    max_iter: usize,
) -> Result<ClusteringResult, ClusteringError> {
    let (n, k) = (d.len(), initial.len());
    if k < 2 || k > n {
        return Err(ClusteringError::InvalidK { k, n });
    }
    let mut medoids = initial.to_vec();
    medoids.sort_unstable();
    for w in medoids.windows(2) {
        if w[0] == w[1] {
            return Err(ClusteringError::DuplicateMedoid(w[0]));
        }
    }
    if let Some(&m) = medoids.iter().find(|&&m| m >= n) {
        return Err(ClusteringError::MedoidOutOfRange(m));
    }

    let (mut assignments, mut objective) = assign(d, &medoids);
    let mut trace = vec![objective];
    let mut n_iterations = 0;
    while n_iterations < max_iter {
        let next = update_medoids(d, k, &assignments);
        n_iterations += 1;
        if next == medoids {
            break;
        }
        medoids = next;
        (assignments, objective) = assign(d, &medoids);
        trace.push(objective);
    }
    Ok(ClusteringResult { assignments, medoids, objective, n_iterations, objective_trace: trace })
}

/// K-medoids with `k` distinct initial medoids drawn uniformly from a
/// ChaCha8 stream seeded with `seed`.
pub fn kmedoids(
    d: &DistanceMatrix,
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<ClusteringResult, ClusteringError> {
    let n = d.len();
    if k < 2 || k > n {
        return Err(ClusteringError::InvalidK { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial = rand::seq::index::sample(&mut rng, n, k).into_vec();
    kmedoids_from(d, &initial, max_iter)
}

/// Fraction of items whose truth label equals the majority label of their
/// predicted cluster.
///
/// Each cluster takes its most frequent truth label, ties going to the
/// smallest label; several clusters may take the same label.
pub fn majority_rule_accuracy<L: Ord>(
    predicted: &[usize],
    truth: &[L],
) -> Result<f64, ClusteringError> {
    if predicted.len() != truth.len() {
        return Err(ClusteringError::LengthMismatch {
            predicted: predicted.len(),
            truth: truth.len(),
        });
    }
    if predicted.is_empty() {
        return Err(ClusteringError::Empty);
    }
    let mut tallies: BTreeMap<usize, BTreeMap<&L, usize>> = BTreeMap::new();
    for (&c, label) in predicted.iter().zip(truth) {
        *tallies.entry(c).or_default().entry(label).or_default() += 1;
    }
    let correct: usize = tallies
        .values()
        .map(|counts| {
            counts.values().fold(0, |best, &count| if count > best { count } else { best })
        })
        .sum();
    Ok(correct as f64 / predicted.len() as f64)
}

/// Per-repeat and mean accuracy of repeated k-medoids runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatedAccuracy {
    pub mean: f64,
    pub per_repeat: Vec<f64>,
}

/// Seed of repeat `r` in [`repeated_clustering_accuracy`].
pub fn repeat_seed(seed: u64, r: usize) -> u64 {
    derive_seed(seed, r as u64)
}

/// Runs k-medoids `repeats` times (seed of run `r` is
/// [`repeat_seed`]`(seed, r)`), scores each run against `truth` and
/// averages.
pub fn repeated_clustering_accuracy<L: Ord>(
    d: &DistanceMatrix,
    truth: &[L],
    k: usize,
    repeats: usize,
    seed: u64,
) -> Result<RepeatedAccuracy, ClusteringError> {
    if repeats == 0 {
        return Err(ClusteringError::ZeroRepeats);
    }
    if truth.len() != d.len() {
        return Err(ClusteringError::LengthMismatch { predicted: d.len(), truth: truth.len() });
    }
    let per_repeat = (0..repeats)
        .map(|r| {
            let result = kmedoids(d, k, repeat_seed(seed, r), DEFAULT_MAX_ITER)?;
            majority_rule_accuracy(&result.assignments, truth)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mean = per_repeat.iter().sum::<f64>() / repeats as f64;
    Ok(RepeatedAccuracy { mean, per_repeat })
}
