//! Tree polynomials for rooted tree shapes.
//!
//! This crate encodes rooted trees as bivariate polynomials in `x` and `y`
//! (a leaf is `x`, an internal vertex is `y` plus the product of its
//! children's polynomials), turns those polynomials into coefficient
//! matrices, compares matrices with six distances and clusters trees with
//! k-medoids over a precomputed distance matrix. Random binary trees come
//! from the beta-splitting model.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the benchmark
//! driver and the command line live in `treepoly-cli`.
//!
//! ```
//! use treepoly::{parse_newick, tree_polynomial};
//!
//! let tree = parse_newick("((A,B),(C,D));").unwrap();
//! let p = tree_polynomial(&tree);
//! assert_eq!(p.to_string(), "y + y^2 + 2x^2y + x^4");
//! ```

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod clustering;
pub mod distances;
pub mod polynomial;
pub mod rng;
pub mod tree;
pub mod treegen;

pub use clustering::{
    kmedoids, kmedoids_from, majority_rule_accuracy, repeat_seed, repeated_clustering_accuracy,
    ClusteringError, ClusteringResult, RepeatedAccuracy, DEFAULT_MAX_ITER,
};
pub use distances::{
    d_bray_curtis, d_canberra, d_euclidean, d_manhattan, d_norm_euclidean, d_norm_manhattan,
    distance, pairwise_distance_matrix, DistanceError, DistanceMatrix, DistanceMetricId,
};
pub use polynomial::{
    coefficient_matrix, evaluate, poly_add, poly_mul, tree_polynomial, BivariatePolynomial,
    CoefficientMatrix, MatrixEntry, MatrixError,
};
pub use tree::{leaf_count, parse_newick, to_newick, NewickError, RootedTree, TreeError};
pub use treegen::{
    beta_split_weights, generate_dataset, generate_tree, BetaParam, BetaSplitter, DatasetSpec,
    LabeledTree, LabeledTreeSet, TreeGenError,
};
