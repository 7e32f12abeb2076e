//! Dense real linear algebra primitives and the index-set / sign-pattern
//! domain types shared by every other module.
//!
//! Everything here is immutable after construction and safe to share
//! across threads. Indices are 0-based throughout the crate.

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NumKitError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
}

/// Row-major dense matrix of finite `f64` entries.
///
/// `cols == 0` is permitted (it arises from selecting an empty column
/// set); `rows` must be at least 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, NumKitError> {
        if rows == 0 {
            return Err(NumKitError::InvalidValue("matrix needs at least one row".into()));
        }
        if data.len() != rows * cols {
            return Err(NumKitError::DimensionMismatch(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(NumKitError::InvalidValue("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, NumKitError> {
        if rows.is_empty() {
            return Err(NumKitError::InvalidValue("matrix needs at least one row".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(NumKitError::DimensionMismatch("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1);
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `A x` for a length-`cols` vector.
    pub fn mat_vec(&self, x: &RealVector) -> Result<RealVector, NumKitError> {
        if x.len() != self.cols {
            return Err(NumKitError::DimensionMismatch(format!(
                "mat_vec: matrix has {} columns, vector has length {}",
                self.cols,
                x.len()
            )));
        }
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            out[i] = row.iter().zip(x.as_slice()).map(|(a, b)| a * b).sum();
        }
        RealVector::new(out)
    }

    /// Submatrix formed by the columns listed in `s`, in order.
    /// An empty `s` yields a `rows x 0` matrix.
    pub fn columns(&self, s: &IndexSet) -> Result<DenseMatrix, NumKitError> {
        if s.universe() != self.cols {
            return Err(NumKitError::DimensionMismatch(format!(
                "columns: index universe {} does not match column count {}",
                s.universe(),
                self.cols
            )));
        }
        let mut data = Vec::with_capacity(self.rows * s.len());
        for i in 0..self.rows {
            for &j in s.members() {
                data.push(self.get(i, j));
            }
        }
        Ok(DenseMatrix { rows: self.rows, cols: s.len(), data })
    }

    /// Numerical rank via row elimination with partial pivoting. A pivot
    /// counts iff its magnitude exceeds `pivot_tol` times the largest
    /// initial entry magnitude (or 1 for the all-zero matrix).
    pub fn rank(&self, pivot_tol: f64) -> usize {
        assert!(pivot_tol > 0.0);
        if self.cols == 0 {
            return 0;
        }
        let mut work = self.data.clone();
        let scale = work.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let scale = if scale == 0.0 { 1.0 } else { scale };
        let threshold = pivot_tol * scale;
        let (m, n) = (self.rows, self.cols);
        let mut rank = 0;
        for col in 0..n {
            if rank == m {
                break;
            }
            // best pivot in this column at or below `rank`
            let mut best = rank;
            for i in rank + 1..m {
                if work[i * n + col].abs() > work[best * n + col].abs() {
                    best = i;
                }
            }
            if work[best * n + col].abs() <= threshold {
                continue;
            }
            if best != rank {
                for j in 0..n {
                    work.swap(rank * n + j, best * n + j);
                }
            }
            let pivot = work[rank * n + col];
            for i in rank + 1..m {
                let factor = work[i * n + col] / pivot;
                if factor != 0.0 {
                    for j in col..n {
                        work[i * n + j] -= factor * work[rank * n + j];
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

/// Default relative pivot threshold for [`DenseMatrix::rank`].
pub const DEFAULT_PIVOT_TOL: f64 = 1e-10;

/// Non-empty vector of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVector {
    data: Vec<f64>,
}

impl RealVector {
    pub fn new(data: Vec<f64>) -> Result<Self, NumKitError> {
        if data.is_empty() {
            return Err(NumKitError::InvalidValue("vector must be non-empty".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(NumKitError::InvalidValue("vector entries must be finite".into()));
        }
        Ok(Self { data })
    }

    pub fn zeros(len: usize) -> Self {
        assert!(len >= 1);
        Self { data: vec![0.0; len] }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.data[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.data.iter()
    }

    pub fn inf_norm(&self) -> f64 {
        self.data.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    pub fn inf_dist(&self, other: &RealVector) -> Result<f64, NumKitError> {
        if self.len() != other.len() {
            return Err(NumKitError::DimensionMismatch(format!(
                "inf_dist: lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs())))
    }

    pub fn dot(&self, other: &RealVector) -> Result<f64, NumKitError> {
        if self.len() != other.len() {
            return Err(NumKitError::DimensionMismatch(format!(
                "dot: lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self.data.iter().zip(&other.data).map(|(x, y)| x * y).sum())
    }
}

/// Sorted, duplicate-free set of indices drawn from `[0, universe)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexSet {
    universe: usize,
    members: Vec<usize>,
}

impl IndexSet {
    pub fn new(universe: usize, mut members: Vec<usize>) -> Result<Self, NumKitError> {
        if universe == 0 {
            return Err(NumKitError::InvalidValue("index universe must be positive".into()));
        }
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(NumKitError::InvalidValue("duplicate index".into()));
        }
        if members.last().is_some_and(|&m| m >= universe) {
            return Err(NumKitError::InvalidValue(format!(
                "index {} out of universe {}",
                members.last().unwrap(),
                universe
            )));
        }
        Ok(Self { universe, members })
    }

    pub fn empty(universe: usize) -> Self {
        assert!(universe >= 1);
        Self { universe, members: Vec::new() }
    }

    pub fn full(universe: usize) -> Self {
        assert!(universe >= 1);
        Self { universe, members: (0..universe).collect() }
    }

    #[inline]
    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.members.binary_search(&idx).is_ok()
    }

    pub fn union(&self, other: &IndexSet) -> Result<IndexSet, NumKitError> {
        self.check_universe(other)?;
        let mut members = self.members.clone();
        members.extend_from_slice(&other.members);
        members.sort_unstable();
        members.dedup();
        Ok(IndexSet { universe: self.universe, members })
    }

    pub fn intersection(&self, other: &IndexSet) -> Result<IndexSet, NumKitError> {
        self.check_universe(other)?;
        let members = self
            .members
            .iter()
            .copied()
            .filter(|&i| other.contains(i))
            .collect();
        Ok(IndexSet { universe: self.universe, members })
    }

    pub fn difference(&self, other: &IndexSet) -> Result<IndexSet, NumKitError> {
        self.check_universe(other)?;
        let members = self
            .members
            .iter()
            .copied()
            .filter(|&i| !other.contains(i))
            .collect();
        Ok(IndexSet { universe: self.universe, members })
    }

    pub fn complement(&self) -> IndexSet {
        let members = (0..self.universe).filter(|&i| !self.contains(i)).collect();
        IndexSet { universe: self.universe, members }
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.universe == other.universe && self.members.iter().all(|&i| other.contains(i))
    }

    pub fn is_disjoint_from(&self, other: &IndexSet) -> bool {
        self.members.iter().all(|&i| !other.contains(i))
    }

    fn check_universe(&self, other: &IndexSet) -> Result<(), NumKitError> {
        if self.universe != other.universe {
            return Err(NumKitError::DimensionMismatch(format!(
                "index universes differ: {} vs {}",
                self.universe, other.universe
            )));
        }
        Ok(())
    }
}

// Reports only need the member list.
impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.members.len()))?;
        for m in &self.members {
            seq.serialize_element(m)?;
        }
        seq.end()
    }
}

/// Signs (+1/-1), one per member of a support set, aligned with the
/// support's sorted order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignPattern {
    support: IndexSet,
    signs: Vec<i8>,
}

impl SignPattern {
    pub fn new(support: IndexSet, signs: Vec<i8>) -> Result<Self, NumKitError> {
        if signs.len() != support.len() {
            return Err(NumKitError::DimensionMismatch(format!(
                "sign pattern: {} signs for support of size {}",
                signs.len(),
                support.len()
            )));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(NumKitError::InvalidValue("signs must be +1 or -1".into()));
        }
        Ok(Self { support, signs })
    }

    pub fn empty(universe: usize) -> Self {
        Self { support: IndexSet::empty(universe), signs: Vec::new() }
    }

    pub fn support(&self) -> &IndexSet {
        &self.support
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Sign of the entry at absolute index `idx`, if in the support.
    pub fn sign_of(&self, idx: usize) -> Option<i8> {
        self.support
            .members()
            .binary_search(&idx)
            .ok()
            .map(|pos| self.signs[pos])
    }
}
