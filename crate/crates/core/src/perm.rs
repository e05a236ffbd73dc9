//! Permutation matrices over index vectors.

use crate::error::{invalid, Result};

/// A permutation matrix stored by rows: row `i` has its single one at column
/// `map[i]`.
///
/// Under this convention the matrix product `P·A` selects rows
/// (`(P·A)(i, j) = A(map[i], j)`) and the row-vector product `v·P` scatters
/// (`(v·P)[map[i]] = v[i]`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    /// Validates that `map` is a bijection on `0..map.len()`.
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for (i, &j) in map.iter().enumerate() {
            if j >= map.len() {
                return Err(invalid!("permutation entry {i} -> {j} out of range"));
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(invalid!("permutation maps two rows to column {j}"));
            }
        }
        Ok(Permutation { map })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// The inverse (equivalently, transposed) permutation matrix.
    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.map.len()];
        for (i, &j) in self.map.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { map: inv }
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.len(), other.len(), "permutation size mismatch");
        Permutation {
            map: self.map.iter().map(|&k| other.map[k]).collect(),
        }
    }

    /// Row-vector product `v · P`.
    pub fn apply_row<T: Copy + Default>(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.len(), "vector length mismatch");
        let mut out = vec![T::default(); v.len()];
        for (i, &j) in self.map.iter().enumerate() {
            out[j] = v[i];
        }
        out
    }

    /// Column-vector product `P · v`, i.e. the gather `out[i] = v[map[i]]`.
    pub fn apply_column<T: Copy>(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.len(), "vector length mismatch");
        self.map.iter().map(|&k| v[k]).collect()
    }

    /// Matrix product `P · A` for a dense row-major matrix given as rows.
    pub fn permute_rows<T: Clone>(&self, rows: &[Vec<T>]) -> Vec<Vec<T>> {
        assert_eq!(rows.len(), self.len(), "matrix height mismatch");
        self.map.iter().map(|&k| rows[k].clone()).collect()
    }

    /// Matrix product `A · P` for a dense row-major matrix given as rows.
    pub fn permute_columns<T: Copy + Default>(&self, rows: &[Vec<T>]) -> Vec<Vec<T>> {
        rows.iter().map(|row| self.apply_row(row)).collect()
    }
}
