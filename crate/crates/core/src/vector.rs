//! Sparse binary vectors with an explicit ambient dimension.

use crate::error::{Error, Result};

/// A binary vector in `{0,1}^D` stored as the sorted set of its nonzero
/// coordinates.
///
/// Coordinates are 1-based, matching the convention of the hashing and
/// theory layers. The nonzero list is strictly ascending with every index
/// in `[1, D]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryVector {
    dim: u32,
    nonzeros: Vec<u32>,
}

impl BinaryVector {
    /// Builds a vector from an already-sorted nonzero list, validating the
    /// invariants (strictly ascending, all indices in `[1, dim]`).
    pub fn new(dim: u32, nonzeros: Vec<u32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension { dim });
        }
        let mut prev = 0u32;
        for &i in &nonzeros {
            if i == 0 || i > dim {
                return Err(Error::InvalidVector {
                    reason: format!("index {i} out of range [1, {dim}]"),
                });
            }
            if i <= prev {
                return Err(Error::InvalidVector {
                    reason: format!("indices not strictly ascending at {i}"),
                });
            }
            prev = i;
        }
        Ok(Self { dim, nonzeros })
    }

    /// Builds a vector from indices in any order; duplicates are rejected.
    pub fn from_indices(dim: u32, indices: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut nz: Vec<u32> = indices.into_iter().collect();
        nz.sort_unstable();
        Self::new(dim, nz)
    }

    /// The all-zero vector. Loadable from datasets, but rejected by any
    /// operation that needs a nonempty support.
    pub fn empty(dim: u32) -> Result<Self> {
        Self::new(dim, Vec::new())
    }

    /// The all-ones vector.
    pub fn all_ones(dim: u32) -> Result<Self> {
        Self::new(dim, (1..=dim).collect())
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// Sorted 1-based nonzero coordinates.
    pub fn nonzeros(&self) -> &[u32] {
        &self.nonzeros
    }

    /// Number of nonzero coordinates (`d` in the usual notation).
    pub fn nnz(&self) -> usize {
        self.nonzeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nonzeros.is_empty()
    }

    pub fn contains(&self, index: u32) -> bool {
        self.nonzeros.binary_search(&index).is_ok()
    }
}
