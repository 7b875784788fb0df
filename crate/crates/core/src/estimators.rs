//! Exact pair statistics and the collision-fraction Jaccard estimator.

use crate::error::{Error, Result};
use crate::sketch::Sketch;
use crate::vector::BinaryVector;

/// Exact overlap statistics of a vector pair: `a` coordinates where both are
/// 1, `f` where at least one is 1, and the Jaccard similarity `J = a / f`.
///
/// `J` is kept as the exact integer pair `(a, f)` so downstream comparisons
/// against theory values avoid any rounding at the definition site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairStats {
    a: u64,
    f: u64,
    dim: u32,
}

impl PairStats {
    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn f(&self) -> u64 {
        self.f
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// `J` as a float. Division of two exactly-represented integers, so this
    /// is correctly rounded.
    pub fn jaccard(&self) -> f64 {
        self.a as f64 / self.f as f64
    }

    /// `J` as the exact rational `(a, f)`.
    pub fn jaccard_exact(&self) -> (u64, u64) {
        (self.a, self.f)
    }
}

/// Computes `(a, f, J)` for a pair by merging the sorted supports.
///
/// Errors if the dimensions differ or both vectors are empty (`f = 0`, where
/// the similarity is undefined).
pub fn exact_pair_stats(v: &BinaryVector, w: &BinaryVector) -> Result<PairStats> {
    if v.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            left: v.dim(),
            right: w.dim(),
        });
    }
    let (mut a, mut f) = (0u64, 0u64);
    let (mut i, mut j) = (0usize, 0usize);
    let (vs, ws) = (v.nonzeros(), w.nonzeros());
    while i < vs.len() && j < ws.len() {
        f += 1;
        match vs[i].cmp(&ws[j]) {
            std::cmp::Ordering::Equal => {
                a += 1;
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
        }
    }
    f += (vs.len() - i) as u64 + (ws.len() - j) as u64;
    if f == 0 {
        return Err(Error::UndefinedSimilarity);
    }
    Ok(PairStats { a, f, dim: v.dim() })
}

/// The collision-fraction estimator: the fraction of positions where the two
/// sketches carry equal hash values.
///
/// Sketches must agree on scheme, K, dimension, and permutation lineage;
/// collision semantics only hold under shared permutations.
pub fn estimate_jaccard(sv: &Sketch, sw: &Sketch) -> Result<f64> {
    if sv.scheme() != sw.scheme() {
        return Err(Error::IncompatibleSketches {
            reason: format!("scheme {} vs {}", sv.scheme(), sw.scheme()),
        });
    }
    if sv.k() != sw.k() {
        return Err(Error::IncompatibleSketches {
            reason: format!("K {} vs {}", sv.k(), sw.k()),
        });
    }
    if sv.dim() != sw.dim() {
        return Err(Error::IncompatibleSketches {
            reason: format!("dimension {} vs {}", sv.dim(), sw.dim()),
        });
    }
    if sv.seed() != sw.seed() {
        return Err(Error::IncompatibleSketches {
            reason: "different permutation lineages".to_string(),
        });
    }
    let equal = sv
        .values()
        .iter()
        .zip(sw.values())
        .filter(|(a, b)| a == b)
        .count();
    Ok(equal as f64 / sv.k() as f64)
}

/// `Var[J_hat] = J (1 - J) / K` for classic MinHash with K independent
/// permutations.
pub fn minhash_theoretical_variance(j: f64, k: usize) -> f64 {
    assert!((0.0..=1.0).contains(&j), "J must lie in [0, 1]");
    assert!(k >= 1, "K must be at least 1");
    j * (1.0 - j) / k as f64
}
