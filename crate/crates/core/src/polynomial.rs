//! Exact bivariate polynomials and the tree polynomial.
//!
//! The tree polynomial is built from the leaves up: a leaf is `x` and an
//! internal vertex with children `v_1..v_k` is `y + P(v_1)···P(v_k)`.
//! Coefficients grow past 64 bits quickly (the balanced 64-leaf tree
//! already does), so they are kept as [`BigUint`] and only widened to
//! `f64` in [`CoefficientMatrix`].

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::tree::RootedTree;

/// A polynomial in `x` and `y` with nonnegative integer coefficients.
///
/// Stored as a dense row-major grid, row = power of `x`, column = power of
/// `y`, trimmed so the last row and last column each hold a nonzero
/// coefficient. The zero polynomial has an empty grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BivariatePolynomial {
    rows: usize,
    cols: usize,
    coeffs: Vec<BigUint>,
}

impl BivariatePolynomial {
    pub fn zero() -> Self {
        BivariatePolynomial { rows: 0, cols: 0, coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(BigUint::from(1u32), 0, 0)
    }

    pub fn x() -> Self {
        Self::monomial(BigUint::from(1u32), 1, 0)
    }

    pub fn y() -> Self {
        Self::monomial(BigUint::from(1u32), 0, 1)
    }

    /// `c · x^i · y^j`.
    pub fn monomial(c: BigUint, i: usize, j: usize) -> Self {
        Self::from_terms([(i, j, c)])
    }

    /// Sum of `c · x^i · y^j` over the given terms; repeated powers add up.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, BigUint)>,
    {
        let terms: Vec<_> = terms.into_iter().collect();
        let rows = terms.iter().map(|t| t.0 + 1).max().unwrap_or(0);
        let cols = terms.iter().map(|t| t.1 + 1).max().unwrap_or(0);
        let mut coeffs = vec![BigUint::zero(); rows * cols];
        for (i, j, c) in terms {
            coeffs[i * cols + j] += c;
        }
        Self::trimmed(rows, cols, coeffs)
    }

    fn trimmed(rows: usize, cols: usize, coeffs: Vec<BigUint>) -> Self {
        let mut new_rows = 0;
        let mut new_cols = 0;
        for i in 0..rows {
            for j in 0..cols {
                if !coeffs[i * cols + j].is_zero() {
                    new_rows = new_rows.max(i + 1);
                    new_cols = new_cols.max(j + 1);
                }
            }
        }
        if new_rows == rows && new_cols == cols {
            return BivariatePolynomial { rows, cols, coeffs };
        }
        let mut out = Vec::with_capacity(new_rows * new_cols);
        for i in 0..new_rows {
            out.extend_from_slice(&coeffs[i * cols..i * cols + new_cols]);
        }
        BivariatePolynomial { rows: new_rows, cols: new_cols, coeffs: out }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest power of `x` with a nonzero coefficient (0 for the zero
    /// polynomial).
    pub fn x_degree(&self) -> usize {
        self.rows.saturating_sub(1)
    }

    /// Highest power of `y` with a nonzero coefficient (0 for the zero
    /// polynomial).
    pub fn y_degree(&self) -> usize {
        self.cols.saturating_sub(1)
    }

    /// Coefficient of `x^i · y^j`.
    pub fn coeff(&self, i: usize, j: usize) -> BigUint {
        if i < self.rows && j < self.cols {
            self.coeffs[i * self.cols + j].clone()
        } else {
            BigUint::zero()
        }
    }

    /// Nonzero terms `(i, j, c)` in row-major order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, &BigUint)> + '_ {
        let cols = self.cols;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(k, c)| (k / cols, k % cols, c))
    }

    /// Number of nonzero terms.
    pub fn term_count(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }
}

/// Coefficient-wise sum.
pub fn poly_add(p: &BivariatePolynomial, q: &BivariatePolynomial) -> BivariatePolynomial {
    let rows = p.rows.max(q.rows);
    let cols = p.cols.max(q.cols);
    let mut coeffs = vec![BigUint::zero(); rows * cols];
    for src in [p, q] {
        for i in 0..src.rows {
            for j in 0..src.cols {
                coeffs[i * cols + j] += &src.coeffs[i * src.cols + j];
            }
        }
    }
    BivariatePolynomial::trimmed(rows, cols, coeffs)
}

/// Schoolbook product.
pub fn poly_mul(p: &BivariatePolynomial, q: &BivariatePolynomial) -> BivariatePolynomial {
    if p.is_zero() || q.is_zero() {
        return BivariatePolynomial::zero();
    }
    let rows = p.rows + q.rows - 1;
    let cols = p.cols + q.cols - 1;
    let mut coeffs = vec![BigUint::zero(); rows * cols];
    let q_terms: Vec<_> = q.terms().collect();
    for (i, j, a) in p.terms() {
        for &(k, l, b) in &q_terms {
            coeffs[(i + k) * cols + j + l] += a * b;
        }
    }
    // Leading coefficients are products of nonzero leading terms, so the
    // grid is already trimmed.
    BivariatePolynomial { rows, cols, coeffs }
}

impl Add for &BivariatePolynomial {
    type Output = BivariatePolynomial;

    fn add(self, rhs: Self) -> BivariatePolynomial {
        poly_add(self, rhs)
    }
}

impl Mul for &BivariatePolynomial {
    type Output = BivariatePolynomial;

    fn mul(self, rhs: Self) -> BivariatePolynomial {
        poly_mul(self, rhs)
    }
}

/// Tree polynomial of `tree`, evaluated in post-order.
pub fn tree_polynomial(tree: &RootedTree) -> BivariatePolynomial {
    let mut value: Vec<Option<BivariatePolynomial>> = vec![None; tree.vertex_count()];
    let y = BivariatePolynomial::y();
    for v in tree.post_order() {
        let kids = tree.children(v);
        let p = if kids.is_empty() {
            BivariatePolynomial::x()
        } else {
            let mut prod = value[kids[0]].take().expect("child evaluated before parent");
            for &c in &kids[1..] {
                let next = value[c].take().expect("child evaluated before parent");
                prod = poly_mul(&prod, &next);
            }
            poly_add(&prod, &y)
        };
        value[v] = Some(p);
    }
    value[tree.root()].take().expect("root evaluated")
}

/// Exact value of `p` at `(x0, y0)`, by Horner's rule in `x` over rows
/// that are themselves evaluated by Horner's rule in `y`.
pub fn evaluate(p: &BivariatePolynomial, x0: &BigRational, y0: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for i in (0..p.rows).rev() {
        let mut row = BigRational::zero();
        for j in (0..p.cols).rev() {
            let c = BigInt::from(p.coeffs[i * p.cols + j].clone());
            row = row * y0 + BigRational::from_integer(c);
        }
        acc = acc * x0 + row;
    }
    acc
}

impl fmt::Display for BivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, j, c) in self.terms() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let unit = *c == BigUint::from(1u32);
            if !unit || (i == 0 && j == 0) {
                write!(f, "{c}")?;
            }
            for (var, pow) in [("x", i), ("y", j)] {
                match pow {
                    0 => {}
                    1 => f.write_str(var)?,
                    _ => write!(f, "{var}^{pow}")?,
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("matrix size {given} is too small, need at least {required}")]
    SizeTooSmall { required: usize, given: usize },
    #[error("row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("entry ({row}, {col}) is negative")]
    NegativeEntry { row: usize, col: usize },
    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
}

/// One nonzero cell of a [`CoefficientMatrix`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixEntry {
    pub row: u32,
    pub col: u32,
    pub value: f64,
}

/// Square grid of nonnegative coefficients, `m[i][j]` = coefficient of
/// `x^i · y^j`.
///
/// Only nonzero cells are stored, in row-major order. Matrices built from a
/// polynomial also keep the exact integer for each stored cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    size: usize,
    entries: Vec<MatrixEntry>,
    exact: Option<Vec<BigUint>>,
}

impl CoefficientMatrix {
    /// Matrix of `p` with side `size`, zero-padded.
    pub fn from_polynomial(p: &BivariatePolynomial, size: usize) -> Result<Self, MatrixError> {
        let required = p.rows.max(p.cols).max(1);
        if size < required {
            return Err(MatrixError::SizeTooSmall { required, given: size });
        }
        let mut entries = Vec::with_capacity(p.term_count());
        let mut exact = Vec::with_capacity(p.term_count());
        for (i, j, c) in p.terms() {
            entries.push(MatrixEntry {
                row: i as u32,
                col: j as u32,
                value: c.to_f64().unwrap_or(f64::INFINITY),
            });
            exact.push(c.clone());
        }
        Ok(CoefficientMatrix { size, entries, exact: Some(exact) })
    }

    /// Matrix with the smallest side holding every term of `p`; for a tree
    /// with `n` leaves that is `n + 1`.
    pub fn of_polynomial(p: &BivariatePolynomial) -> Self {
        let size = p.rows.max(p.cols).max(1);
        Self::from_polynomial(p, size).expect("size covers every term")
    }

    /// Matrix from dense rows. Entries must be finite and nonnegative and
    /// every row must have as many entries as there are rows.
    pub fn from_dense<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, MatrixError> {
        let size = rows.len();
        let mut entries = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != size {
                return Err(MatrixError::NotSquare { row: i, len: row.len(), expected: size });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(MatrixError::NonFinite { row: i, col: j });
                }
                if v < 0.0 {
                    return Err(MatrixError::NegativeEntry { row: i, col: j });
                }
                if v != 0.0 {
                    entries.push(MatrixEntry { row: i as u32, col: j as u32, value: v });
                }
            }
        }
        Ok(CoefficientMatrix { size, entries, exact: None })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Nonzero cells in row-major order.
    pub fn entries(&self) -> &[MatrixEntry] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.entries[k].value)
    }

    /// Exact integer coefficient at `(i, j)`, when the matrix came from a
    /// polynomial.
    pub fn exact(&self, i: usize, j: usize) -> Option<BigUint> {
        let exact = self.exact.as_ref()?;
        Some(self.position(i, j).map_or_else(BigUint::zero, |k| exact[k].clone()))
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        self.entries
            .binary_search_by(|e| (e.row as usize, e.col as usize).cmp(&(i, j)))
            .ok()
    }

    /// Largest entry (0 for an all-zero matrix).
    pub fn max_value(&self) -> f64 {
        self.entries.iter().map(|e| e.value).fold(0.0, f64::max)
    }

    /// Every entry divided by the matrix maximum, so the largest becomes 1.
    /// An all-zero matrix is returned unchanged. Exact values are dropped.
    pub fn normalized(&self) -> Self {
        let max = self.max_value();
        let entries = if max > 0.0 {
            self.entries.iter().map(|e| MatrixEntry { value: e.value / max, ..*e }).collect()
        } else {
            self.entries.clone()
        };
        CoefficientMatrix { size: self.size, entries, exact: None }
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.size]; self.size];
        for e in &self.entries {
            out[e.row as usize][e.col as usize] = e.value;
        }
        out
    }
}

/// Coefficient matrix of `p` with side `size`.
pub fn coefficient_matrix(
    p: &BivariatePolynomial,
    size: usize,
) -> Result<CoefficientMatrix, MatrixError> {
    CoefficientMatrix::from_polynomial(p, size)
}
