//! Uniform random permutations and circulant index arithmetic.
//!
//! The math-facing API is 1-based: a permutation maps `{1..D}` onto itself
//! and circulant shifts act on `[1, D]`. Storage is 0-based; the adapter is
//! confined to this module (`forward`/`inverse` subtract and add 1 around
//! the internal arrays, and the `*_0` helpers expose raw 0-based views for
//! hot loops).

use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A bijection on `{1..D}` with O(1) forward and inverse lookup.
///
/// Carries the 64-bit seed it was generated from; hand-built permutations
/// take an explicit label instead. The seed participates in sketch lineage
/// checks so that only sketches built under the same permutations compare.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward0: Vec<u32>,
    inverse0: Vec<u32>,
    seed: u64,
}

impl Permutation {
    /// Draws a uniformly distributed permutation of `{1..D}` from the given
    /// seed. Identical `(dim, seed)` always yields an identical permutation.
    pub fn generate(dim: u32, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension { dim });
        }
        let mut forward0: Vec<u32> = (0..dim).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        forward0.shuffle(&mut rng);
        Ok(Self::from_forward0(forward0, seed))
    }

    /// The identity permutation.
    pub fn identity(dim: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension { dim });
        }
        Ok(Self::from_forward0((0..dim).collect(), 0))
    }

    /// Builds a permutation from a 1-based forward map `forward[i-1] = pi(i)`,
    /// validating bijectivity. `seed_label` stamps the lineage field.
    pub fn from_forward(forward: Vec<u32>, seed_label: u64) -> Result<Self> {
        let dim = forward.len() as u32;
        if dim == 0 {
            return Err(Error::InvalidDimension { dim: 0 });
        }
        let mut seen = vec![false; dim as usize];
        for &v in &forward {
            if v == 0 || v > dim {
                return Err(Error::InvalidVector {
                    reason: format!("permutation value {v} out of range [1, {dim}]"),
                });
            }
            if seen[(v - 1) as usize] {
                return Err(Error::InvalidVector {
                    reason: format!("permutation value {v} repeated"),
                });
            }
            seen[(v - 1) as usize] = true;
        }
        let forward0 = forward.into_iter().map(|v| v - 1).collect();
        Ok(Self::from_forward0(forward0, seed_label))
    }

    fn from_forward0(forward0: Vec<u32>, seed: u64) -> Self {
        let mut inverse0 = vec![0u32; forward0.len()];
        for (i, &v) in forward0.iter().enumerate() {
            inverse0[v as usize] = i as u32;
        }
        Self {
            forward0,
            inverse0,
            seed,
        }
    }

    pub fn dim(&self) -> u32 {
        self.forward0.len() as u32
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `pi(i)` for 1-based `i`.
    pub fn forward(&self, i: u32) -> u32 {
        self.forward0[(i - 1) as usize] + 1
    }

    /// `pi^{-1}(j)` for 1-based `j`.
    pub fn inverse(&self, j: u32) -> u32 {
        self.inverse0[(j - 1) as usize] + 1
    }

    /// 1-based copy of the forward map.
    pub fn forward_vec(&self) -> Vec<u32> {
        self.forward0.iter().map(|&v| v + 1).collect()
    }

    /// Raw 0-based forward map for hot loops.
    pub(crate) fn forward0(&self) -> &[u32] {
        &self.forward0
    }
}

/// `i* = ((i + k - 1) mod D) + 1`: the position index `i` moves to under a
/// circulant right-shift by `k`.
pub fn circulant_index(i: u32, k: u32, dim: u32) -> Result<u32> {
    check_circulant_args(i, k, dim)?;
    Ok(circ_fwd0(i - 1, k, dim) + 1)
}

/// `i# = ((i - k - 1) mod D) + 1`: inverse of [`circulant_index`] in `i`.
pub fn circulant_index_inverse(i: u32, k: u32, dim: u32) -> Result<u32> {
    check_circulant_args(i, k, dim)?;
    Ok(circ_inv0(i - 1, k, dim) + 1)
}

fn check_circulant_args(i: u32, k: u32, dim: u32) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidDimension { dim });
    }
    if i == 0 || i > dim {
        return Err(Error::IndexOutOfRange {
            what: "index",
            value: i,
            dim,
        });
    }
    if k == 0 || k > dim {
        return Err(Error::IndexOutOfRange {
            what: "shift",
            value: k,
            dim,
        });
    }
    Ok(())
}

/// 0-based forward shift, `1 <= k <= dim`.
#[inline]
pub(crate) fn circ_fwd0(i0: u32, k: u32, dim: u32) -> u32 {
    let s = i0 + k;
    if s >= dim {
        s - dim
    } else {
        s
    }
}

/// 0-based inverse shift, `1 <= k <= dim`.
#[inline]
pub(crate) fn circ_inv0(i0: u32, k: u32, dim: u32) -> u32 {
    let s = i0 + dim - k;
    if s >= dim {
        s - dim
    } else {
        s
    }
}

/// Derives an independent stream seed from a master seed and a purpose tag
/// (splitmix64 finalizer over the xor). Used so that e.g. the initial
/// permutation, the circulant permutation, and per-trial draws all descend
/// from one master seed without correlation.
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    let mut z = master ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Purpose tags for [`derive_seed`].
pub mod seed_tags {
    /// Initial permutation sigma of the two-permutation scheme.
    pub const SIGMA: u64 = 0x0053_4947_4d41;
    /// Circulant permutation pi.
    pub const PI: u64 = 0x0000_0000_5049;
    /// Base tag for the K independent classic-MinHash permutations; add `k`.
    pub const MINHASH: u64 = 0x4d48_0000_0000;
    /// Synthetic data placement.
    pub const SYNTH: u64 = 0x0000_0053_594e;
    /// Per-trial seeds in Monte Carlo runs; add the trial index.
    pub const TRIAL: u64 = 0x5452_0000_0000;
    /// Per-repetition seeds in MAE runs; add the repetition index.
    pub const REP: u64 = 0x5245_5000_0000;
}
