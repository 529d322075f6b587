//! Random rooted binary trees from the beta-splitting model.
//!
//! A clade with `n` leaves splits into a left part of `i` leaves and a
//! right part of `n - i` leaves with probability
//!
//! ```text
//! q_n(i) ∝ Γ(β+1+i) Γ(β+1+n−i) / (Γ(i+1) Γ(n−i+1)),   1 ≤ i ≤ n−1
//! ```
//!
//! β = −1.5 gives the PDA model, β = −1 Aldous' branching model and β = 0
//! the Yule model.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::rng;
use crate::tree::RootedTree;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TreeGenError {
    #[error("beta must be a finite number greater than -2, got {0}")]
    BetaOutOfRange(f64),
    #[error("a split needs at least 2 leaves, got {0}")]
    TooFewLeaves(usize),
    #[error("{0} must be positive")]
    ZeroCount(&'static str),
    #[error("at most {} beta groups are supported", rng::MAX_GROUP + 1)]
    TooManyGroups,
    #[error("at most {} trees per group are supported", rng::MAX_TREE_INDEX as u64 + 1)]
    TooManyTrees,
}

/// The splitting parameter β of the model, always finite and > −2.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BetaParam(f64);

impl BetaParam {
    pub fn new(beta: f64) -> Result<Self, TreeGenError> {
        if beta.is_finite() && beta > -2.0 {
            Ok(BetaParam(beta))
        } else {
            Err(TreeGenError::BetaOutOfRange(beta))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Shortest decimal form of β, used as the group label in data files
    /// (`-1.5`, `-1`, `0`).
    pub fn label(self) -> String {
        // Avoid "-0".
        let b = if self.0 == 0.0 { 0.0 } else { self.0 };
        format!("{b}")
    }
}

/// Split probabilities `q_n(1), ..., q_n(n-1)` for a clade of `n` leaves.
pub fn beta_split_weights(n: usize, beta: f64) -> Result<Vec<f64>, TreeGenError> {
    let beta = BetaParam::new(beta)?;
    if n < 2 {
        return Err(TreeGenError::TooFewLeaves(n));
    }
    Ok(split_weights(n, beta.0))
}

fn split_weights(n: usize, beta: f64) -> Vec<f64> {
    let log_q = |i: usize| {
        let (i, j) = (i as f64, (n - i) as f64);
        libm::lgamma(beta + 1.0 + i) + libm::lgamma(beta + 1.0 + j)
            - libm::lgamma(i + 1.0)
            - libm::lgamma(j + 1.0)
    };
    let mut w: Vec<f64> = (1..n).map(log_q).collect();
    // Mirror so that q(i) == q(n - i) holds exactly.
    for i in 0..w.len() / 2 {
        let m = w.len() - 1 - i;
        w[m] = w[i];
    }
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for x in w.iter_mut() {
        *x = libm::exp(*x - max);
    }
    let total: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x /= total;
    }
    w
}

/// Cached cumulative split tables for one β and clade sizes up to a bound.
#[derive(Debug, Clone)]
pub struct BetaSplitter {
    beta: BetaParam,
    // cumulative[n] holds the running sums of q_n for n >= 2.
    cumulative: Vec<Vec<f64>>,
}

impl BetaSplitter {
    pub fn new(beta: f64, max_leaves: usize) -> Result<Self, TreeGenError> {
        let beta = BetaParam::new(beta)?;
        let mut cumulative = vec![Vec::new(); max_leaves.max(1) + 1];
        for (n, table) in cumulative.iter_mut().enumerate().skip(2) {
            let mut acc = 0.0;
            *table = split_weights(n, beta.0)
                .into_iter()
                .map(|q| {
                    acc += q;
                    acc
                })
                .collect();
        }
        Ok(BetaSplitter { beta, cumulative })
    }

    pub fn beta(&self) -> BetaParam {
        self.beta
    }

    pub fn max_leaves(&self) -> usize {
        self.cumulative.len() - 1
    }

    /// Draws the left-part size of a split of `n` leaves: one uniform
    /// `f64` in `[0, 1)` is inverted through the cumulative table.
    ///
    /// Panics if `n < 2` or `n > max_leaves()`.
    pub fn sample_split<R: RngCore + ?Sized>(&self, n: usize, rng: &mut R) -> usize {
        assert!(n >= 2, "cannot split a clade of {n} leaves");
        let table = &self.cumulative[n];
        let u: f64 = rng.random();
        table.iter().position(|&c| u < c).unwrap_or(table.len() - 1) + 1
    }

    /// A random binary tree with `n_leaves` leaves.
    ///
    /// Clades are expanded depth-first, left part first; each internal
    /// vertex consumes exactly one draw. Panics if `n_leaves` is 0 or
    /// exceeds `max_leaves()`.
    pub fn generate<R: RngCore + ?Sized>(&self, n_leaves: usize, rng: &mut R) -> RootedTree {
        assert!(n_leaves >= 1, "a tree needs at least one leaf");
        let mut children: Vec<Vec<usize>> = vec![Vec::new()];
        let mut stack = vec![(0usize, n_leaves)];
        while let Some((v, size)) = stack.pop() {
            if size == 1 {
                continue;
            }
            let left = self.sample_split(size, rng);
            let (l, r) = (children.len(), children.len() + 1);
            children.push(Vec::new());
            children.push(Vec::new());
            children[v] = vec![l, r];
            stack.push((r, size - left));
            stack.push((l, left));
        }
        RootedTree::from_children(children, 0).expect("generated child lists form a tree")
    }
}

/// A random binary tree with `n_leaves` leaves under splitting parameter
/// `beta`.
pub fn generate_tree<R: RngCore + ?Sized>(
    n_leaves: usize,
    beta: f64,
    rng: &mut R,
) -> Result<RootedTree, TreeGenError> {
    if n_leaves == 0 {
        return Err(TreeGenError::ZeroCount("n_leaves"));
    }
    Ok(BetaSplitter::new(beta, n_leaves)?.generate(n_leaves, rng))
}

/// Parameters of a generated dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub n_sets: usize,
    pub per_group: usize,
    pub betas: Vec<f64>,
    pub n_leaves: usize,
    pub seed: u64,
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<(), TreeGenError> {
        if self.n_sets == 0 {
            return Err(TreeGenError::ZeroCount("n_sets"));
        }
        if self.per_group == 0 {
            return Err(TreeGenError::ZeroCount("per_group"));
        }
        if self.n_leaves == 0 {
            return Err(TreeGenError::ZeroCount("n_leaves"));
        }
        if self.betas.is_empty() {
            return Err(TreeGenError::ZeroCount("betas"));
        }
        if self.betas.len() > rng::MAX_GROUP as usize + 1 {
            return Err(TreeGenError::TooManyGroups);
        }
        if self.per_group > rng::MAX_TREE_INDEX as usize + 1 {
            return Err(TreeGenError::TooManyTrees);
        }
        if self.n_sets > u32::MAX as usize + 1 {
            return Err(TreeGenError::TooManyTrees);
        }
        for &b in &self.betas {
            BetaParam::new(b)?;
        }
        Ok(())
    }

    /// Generates set `set_id` (`0 <= set_id < n_sets`).
    pub fn generate_set(&self, set_id: u32) -> Result<LabeledTreeSet, TreeGenError> {
        self.validate()?;
        let mut entries = Vec::with_capacity(self.per_group * self.betas.len());
        for (group, &beta) in self.betas.iter().enumerate() {
            let splitter = BetaSplitter::new(beta, self.n_leaves)?;
            let label = splitter.beta().label();
            for index in 0..self.per_group {
                let stream = rng::tree_stream(set_id, group as u32, index as u32)
                    .ok_or(TreeGenError::TooManyTrees)?;
                let mut r = rng::stream_rng(self.seed, stream);
                entries.push(LabeledTree {
                    tree: splitter.generate(self.n_leaves, &mut r),
                    label: label.clone(),
                    group,
                    index,
                });
            }
        }
        Ok(LabeledTreeSet { set_id, entries })
    }
}

/// One tree of a dataset together with its generating β.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTree {
    pub tree: RootedTree,
    /// β formatted by [`BetaParam::label`].
    pub label: String,
    /// Position of β in the dataset's β list.
    pub group: usize,
    /// Position of the tree within its group.
    pub index: usize,
}

/// One experiment set: `per_group` trees for each β, grouped in β order.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTreeSet {
    pub set_id: u32,
    pub entries: Vec<LabeledTree>,
}

impl LabeledTreeSet {
    pub fn labels(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.label.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Generates sets `0..n_sets`; identical inputs give identical trees.
pub fn generate_dataset(
    n_sets: usize,
    per_group: usize,
    betas: &[f64],
    n_leaves: usize,
    seed: u64,
) -> Result<Vec<LabeledTreeSet>, TreeGenError> {
    let spec = DatasetSpec { n_sets, per_group, betas: betas.to_vec(), n_leaves, seed };
    spec.validate()?;
    (0..n_sets).map(|s| spec.generate_set(s as u32)).collect()
}
