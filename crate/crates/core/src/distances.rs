//! Distances between coefficient matrices.
//!
//! All six metrics walk the union of nonzero cells of the two matrices in
//! row-major order, accumulating in `f64`. Cells that are zero in both
//! matrices contribute nothing to any metric (for the normalized metrics
//! that is the 0/0 → 0 rule), so skipping them gives the same sums as a
//! dense row-major loop. Matrices of different sizes are compared as if the
//! smaller one were zero-padded.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::polynomial::{CoefficientMatrix, MatrixEntry};

/// The six coefficient-matrix distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DistanceMetricId {
    /// `sqrt(Σ (a − b)²)`
    Euclidean,
    /// `sqrt(Σ ((a − b) / max(a, b))²)`
    NormEuclidean,
    /// `Σ |a − b|`
    Manhattan,
    /// `Σ |a − b| / max(a, b)`
    NormManhattan,
    /// `Σ |a − b| / (a + b)`
    Canberra,
    /// `Σ |a − b| / Σ (a + b)`
    BrayCurtis,
}

impl DistanceMetricId {
    pub const ALL: [DistanceMetricId; 6] = [
        DistanceMetricId::Euclidean,
        DistanceMetricId::NormEuclidean,
        DistanceMetricId::Manhattan,
        DistanceMetricId::NormManhattan,
        DistanceMetricId::Canberra,
        DistanceMetricId::BrayCurtis,
    ];

    /// Name used on the command line and in data files.
    pub fn name(self) -> &'static str {
        match self {
            DistanceMetricId::Euclidean => "euclidean",
            DistanceMetricId::NormEuclidean => "norm_euclidean",
            DistanceMetricId::Manhattan => "manhattan",
            DistanceMetricId::NormManhattan => "norm_manhattan",
            DistanceMetricId::Canberra => "canberra",
            DistanceMetricId::BrayCurtis => "bray_curtis",
        }
    }

    /// True for the metrics that scale each cell difference by the pair
    /// (norm_euclidean, norm_manhattan, canberra).
    pub fn is_entry_normalized(self) -> bool {
        matches!(
            self,
            DistanceMetricId::NormEuclidean
                | DistanceMetricId::NormManhattan
                | DistanceMetricId::Canberra
        )
    }
}

impl fmt::Display for DistanceMetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistanceMetricId {
    type Err = DistanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DistanceMetricId::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| DistanceError::UnknownMetric(String::from(s)))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistanceError {
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
    #[error("need at least 2 items, got {0}")]
    TooFewItems(usize),
    #[error("row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("entry ({row}, {col}) is negative or not finite")]
    InvalidEntry { row: usize, col: usize },
    #[error("diagonal entry {0} is not zero")]
    NonZeroDiagonal(usize),
    #[error("entries ({row}, {col}) and ({col}, {row}) differ")]
    Asymmetric { row: usize, col: usize },
    #[error("{labels} labels for {items} items")]
    LabelCount { labels: usize, items: usize },
}

/// Visits `(a, b)` for every cell that is nonzero in either matrix,
/// row-major.
fn for_each_pair(a: &[MatrixEntry], b: &[MatrixEntry], mut f: impl FnMut(f64, f64)) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (ea, eb) = (&a[i], &b[j]);
        match (ea.row, ea.col).cmp(&(eb.row, eb.col)) {
            core::cmp::Ordering::Less => {
                f(ea.value, 0.0);
                i += 1;
            }
            core::cmp::Ordering::Greater => {
                f(0.0, eb.value);
                j += 1;
            }
            core::cmp::Ordering::Equal => {
                f(ea.value, eb.value);
                i += 1;
                j += 1;
            }
        }
    }
    for e in &a[i..] {
        f(e.value, 0.0);
    }
    for e in &b[j..] {
        f(0.0, e.value);
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Distance between `c1` and `c2` under `metric`.
pub fn distance(metric: DistanceMetricId, c1: &CoefficientMatrix, c2: &CoefficientMatrix) -> f64 {
    let (a, b) = (c1.entries(), c2.entries());
    let mut sum = 0.0;
    match metric {
        DistanceMetricId::Euclidean => {
            for_each_pair(a, b, |x, y| sum += (x - y) * (x - y));
            libm::sqrt(sum)
        }
        DistanceMetricId::NormEuclidean => {
            for_each_pair(a, b, |x, y| {
                let r = ratio(x - y, x.max(y));
                sum += r * r;
            });
            libm::sqrt(sum)
        }
        DistanceMetricId::Manhattan => {
            for_each_pair(a, b, |x, y| sum += (x - y).abs());
            sum
        }
        DistanceMetricId::NormManhattan => {
            for_each_pair(a, b, |x, y| sum += ratio((x - y).abs(), x.max(y)));
            sum
        }
        DistanceMetricId::Canberra => {
            for_each_pair(a, b, |x, y| sum += ratio((x - y).abs(), x + y));
            sum
        }
        DistanceMetricId::BrayCurtis => {
            let mut total = 0.0;
            for_each_pair(a, b, |x, y| {
                sum += (x - y).abs();
                total += x + y;
            });
            ratio(sum, total)
        }
    }
}

pub fn d_euclidean(c1: &CoefficientMatrix, c2: &CoefficientMatrix) -> f64 {
    distance(DistanceMetricId::Euclidean, c1, c2)
}

pub fn d_norm_euclidean(c1: &CoefficientMatrix, c2: &CoefficientMatrix) -> f64 {
    distance(DistanceMetricId::NormEuclidean, c1, c2)
}

pub fn d_manhattan(c1: &CoefficientMatrix, c2: &CoefficientMatrix) -> f64 {
    distance(DistanceMetricId::Manhattan, c1, c2)
}

pub fn d_norm_manhattan(c1: &CoefficientMatrix, c2: &CoefficientMatrix) -> f64 {
    distance(DistanceMetricId::NormManhattan, c1, c2)
}

pub fn d_canberra(c1: &CoefficientMatrix, c2: &CoefficientMatrix) -> f64 {
    distance(DistanceMetricId::Canberra, c1, c2)
}

pub fn d_bray_curtis(c1: &CoefficientMatrix, c2: &CoefficientMatrix) -> f64 {
    distance(DistanceMetricId::BrayCurtis, c1, c2)
}

/// Symmetric matrix of pairwise distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
    metric: Option<DistanceMetricId>,
    labels: Vec<String>,
}

impl DistanceMatrix {
    /// Validates dense rows: square, finite, nonnegative, zero diagonal and
    /// exactly symmetric. Labels default to `"0"`, `"1"`, ...
    pub fn from_rows<R: AsRef<[f64]>>(
        rows: &[R],
        metric: Option<DistanceMetricId>,
    ) -> Result<Self, DistanceError> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(DistanceError::NotSquare { row: i, len: row.len(), expected: n });
            }
            for (j, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(DistanceError::InvalidEntry { row: i, col: j });
                }
            }
            values.extend_from_slice(row);
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(DistanceError::NonZeroDiagonal(i));
            }
            for j in 0..i {
                if values[i * n + j] != values[j * n + i] {
                    return Err(DistanceError::Asymmetric { row: j, col: i });
                }
            }
        }
        Ok(DistanceMatrix { n, values, metric, labels: default_labels(n) })
    }

    /// Replaces the item labels.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, DistanceError> {
        if labels.len() != self.n {
            return Err(DistanceError::LabelCount { labels: labels.len(), items: self.n });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.n + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.values[a * self.n..(a + 1) * self.n]
    }

    pub fn metric(&self) -> Option<DistanceMetricId> {
        self.metric
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{i}")).collect()
}

/// All pairwise distances under `metric`: the upper triangle is computed
/// and mirrored, the diagonal is zero.
pub fn pairwise_distance_matrix(
    matrices: &[CoefficientMatrix],
    metric: DistanceMetricId,
) -> Result<DistanceMatrix, DistanceError> {
    let n = matrices.len();
    if n < 2 {
        return Err(DistanceError::TooFewItems(n));
    }
    let mut values = vec![0.0; n * n];
    for a in 0..n {
        for b in a + 1..n {
            let d = distance(metric, &matrices[a], &matrices[b]);
            values[a * n + b] = d;
            values[b * n + a] = d;
        }
    }
    Ok(DistanceMatrix { n, values, metric: Some(metric), labels: default_labels(n) })
}
