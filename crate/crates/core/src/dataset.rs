//! Plain-text sparse dataset files.
//!
//! The format is line-oriented: the first line is the dimension `D`, and
//! every following line is one vector given as its ascending 1-based nonzero
//! indices separated by single spaces. A blank line is the empty vector
//! (loadable; operations that need a nonempty support reject it later).
//!
//! ```text
//! 5
//! 1 3 5
//!
//! 2
//! ```

use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};
use crate::vector::BinaryVector;

/// A loaded dataset: a shared dimension and one vector per input line.
/// Vector ids are 0-based positions (vector `i` came from file line `i + 2`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseDataset {
    dim: u32,
    vectors: Vec<BinaryVector>,
}

impl SparseDataset {
    pub fn new(dim: u32, vectors: Vec<BinaryVector>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension { dim });
        }
        for v in &vectors {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: v.dim(),
                });
            }
        }
        Ok(Self { dim, vectors })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[BinaryVector] {
        &self.vectors
    }

    pub fn get(&self, id: usize) -> Option<&BinaryVector> {
        self.vectors.get(id)
    }
}

/// Loads a dataset file.
pub fn load_sparse_dataset(path: impl AsRef<Path>) -> Result<SparseDataset> {
    let file = fs::File::open(path)?;
    parse_sparse_dataset(BufReader::new(file))
}

/// Parses the dataset format from any reader. Errors carry 1-based file
/// line numbers.
pub fn parse_sparse_dataset(reader: impl Read) -> Result<SparseDataset> {
    let mut lines = BufReader::new(reader).lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => {
            return Err(Error::Parse {
                line: 1,
                reason: "missing dimension header".to_string(),
            })
        }
    };
    let header = header.trim_end_matches('\r');
    let dim: u32 = header.parse().map_err(|_| Error::Parse {
        line: 1,
        reason: format!("dimension header must be a positive integer, got '{header}'"),
    })?;
    if dim == 0 {
        return Err(Error::Parse {
            line: 1,
            reason: "dimension must be >= 1".to_string(),
        });
    }

    let mut vectors = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            vectors.push(BinaryVector::empty(dim).expect("dim checked"));
            continue;
        }
        let mut indices = Vec::new();
        for tok in line.split(' ') {
            if tok.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    reason: "empty field (indices must be separated by single spaces)".to_string(),
                });
            }
            let i: u32 = tok.parse().map_err(|_| Error::Parse {
                line: line_no,
                reason: format!("'{tok}' is not a valid index"),
            })?;
            indices.push(i);
        }
        let v = BinaryVector::new(dim, indices).map_err(|e| Error::Parse {
            line: line_no,
            reason: e.to_string(),
        })?;
        vectors.push(v);
    }
    SparseDataset::new(dim, vectors)
}

/// Serializes a dataset in the same format `load_sparse_dataset` reads;
/// write-then-load is the identity.
pub fn dataset_to_string(dataset: &SparseDataset) -> String {
    let mut out = String::new();
    out.push_str(&dataset.dim().to_string());
    out.push('\n');
    for v in dataset.vectors() {
        let mut first = true;
        for &i in v.nonzeros() {
            if !first {
                out.push(' ');
            }
            out.push_str(&i.to_string());
            first = false;
        }
        out.push('\n');
    }
    out
}

/// Writes a dataset file.
pub fn write_sparse_dataset(dataset: &SparseDataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, dataset_to_string(dataset))?;
    Ok(())
}
