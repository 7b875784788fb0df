//! The four hashing schemes: classic MinHash and the three circulant
//! C-MinHash variants.
//!
//! All circulant variants share one mechanism: an initial permutation
//! scatters the vector (`v'[init(i)] = v[i]`), then the k-th hash reads the
//! single permutation `pi` rotated right by `k`, i.e. the element at
//! position `m` of the shuffled vector receives index `pi((m - k - 1 mod D) + 1)`.
//! The variants differ only in the initial permutation: `sigma` (two
//! permutations), `pi` itself (one permutation), or none.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::permute::{circ_inv0, derive_seed, seed_tags, Permutation};
use crate::vector::BinaryVector;

/// Hashing scheme identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// K independent permutations.
    MinHash,
    /// Initial permutation sigma, then one circulant permutation pi.
    SigmaPi,
    /// The same permutation pi for both the initial shuffle and the rotations.
    PiPi,
    /// No initial shuffle; rotations of pi only.
    ZeroPi,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::MinHash => "minhash",
            Scheme::SigmaPi => "sigma_pi",
            Scheme::PiPi => "pi_pi",
            Scheme::ZeroPi => "zero_pi",
        }
    }

    pub const ALL: [Scheme; 4] = [
        Scheme::MinHash,
        Scheme::SigmaPi,
        Scheme::PiPi,
        Scheme::ZeroPi,
    ];
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minhash" => Ok(Scheme::MinHash),
            "sigma_pi" => Ok(Scheme::SigmaPi),
            "pi_pi" => Ok(Scheme::PiPi),
            "zero_pi" => Ok(Scheme::ZeroPi),
            other => Err(Error::InvalidSpec {
                reason: format!(
                    "unknown scheme '{other}' (expected minhash|sigma_pi|pi_pi|zero_pi)"
                ),
            }),
        }
    }
}

/// K hash values in `[1, D]` plus the metadata needed to decide whether two
/// sketches are comparable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sketch {
    scheme: Scheme,
    dim: u32,
    /// Lineage tag of the permutation set the sketch was built under.
    seed: u64,
    values: Vec<u32>,
}

impl Sketch {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    /// 1-based hash values, one per k.
    pub fn values(&self) -> &[u32] {
        &self.values
    }
}

/// Folds permutation seeds into a single lineage tag.
fn mix_lineage(parts: &[u64]) -> u64 {
    let mut acc = 0x243F_6A88_85A3_08D3u64;
    for &p in parts {
        acc = derive_seed(acc, p);
    }
    acc
}

fn check_hash_args(v: &BinaryVector, perm_dim: u32) -> Result<()> {
    if v.is_empty() {
        return Err(Error::EmptyVector);
    }
    if v.dim() != perm_dim {
        return Err(Error::DimensionMismatch {
            left: v.dim(),
            right: perm_dim,
        });
    }
    Ok(())
}

fn check_k(k: usize, dim: u32) -> Result<()> {
    if k == 0 || k > dim as usize {
        return Err(Error::KOutOfRange { k, dim });
    }
    Ok(())
}

/// Classic MinHash: `values[k] = min_{i in supp(v)} perms[k](i)`.
pub fn minhash_classic(v: &BinaryVector, perms: &[Permutation]) -> Result<Sketch> {
    if perms.is_empty() {
        return Err(Error::KOutOfRange { k: 0, dim: v.dim() });
    }
    for p in perms {
        check_hash_args(v, p.dim())?;
    }
    let values = perms
        .iter()
        .map(|p| {
            let f0 = p.forward0();
            v.nonzeros()
                .iter()
                .map(|&i| f0[(i - 1) as usize])
                .min()
                .unwrap()
                + 1
        })
        .collect();
    let seeds: Vec<u64> = perms.iter().map(|p| p.seed()).collect();
    Ok(Sketch {
        scheme: Scheme::MinHash,
        dim: v.dim(),
        seed: mix_lineage(&seeds),
        values,
    })
}

/// Circulant hash core shared by the three C-MinHash variants.
///
/// `init0` maps 0-based coordinates to their shuffled positions (`None`
/// means no initial shuffle). For each `k`, the hash is the minimum over the
/// shuffled support of `pi` read at the inverse-rotated position.
fn circulant_values(v: &BinaryVector, init0: Option<&[u32]>, pi0: &[u32], k: usize) -> Vec<u32> {
    let dim = pi0.len() as u32;
    let positions: Vec<u32> = match init0 {
        Some(map) => v
            .nonzeros()
            .iter()
            .map(|&i| map[(i - 1) as usize])
            .collect(),
        None => v.nonzeros().iter().map(|&i| i - 1).collect(),
    };
    (1..=k as u32)
        .map(|kk| {
            positions
                .iter()
                .map(|&m0| pi0[circ_inv0(m0, kk, dim) as usize])
                .min()
                .unwrap()
                + 1
        })
        .collect()
}

/// C-MinHash with an initial permutation `sigma` and circulant rotations of `pi`.
pub fn cminhash_sigma_pi(
    v: &BinaryVector,
    sigma: &Permutation,
    pi: &Permutation,
    k: usize,
) -> Result<Sketch> {
    check_hash_args(v, sigma.dim())?;
    check_hash_args(v, pi.dim())?;
    check_k(k, v.dim())?;
    let values = circulant_values(v, Some(sigma.forward0()), pi.forward0(), k);
    Ok(Sketch {
        scheme: Scheme::SigmaPi,
        dim: v.dim(),
        seed: mix_lineage(&[sigma.seed(), pi.seed()]),
        values,
    })
}

/// C-MinHash re-using `pi` as the initial permutation. Equivalent to
/// [`cminhash_sigma_pi`] with `sigma := pi`, apart from the scheme tag.
pub fn cminhash_pi_pi(v: &BinaryVector, pi: &Permutation, k: usize) -> Result<Sketch> {
    check_hash_args(v, pi.dim())?;
    check_k(k, v.dim())?;
    let values = circulant_values(v, Some(pi.forward0()), pi.forward0(), k);
    Ok(Sketch {
        scheme: Scheme::PiPi,
        dim: v.dim(),
        seed: mix_lineage(&[pi.seed(), pi.seed()]),
        values,
    })
}

/// C-MinHash with the initial shuffle skipped.
pub fn cminhash_zero_pi(v: &BinaryVector, pi: &Permutation, k: usize) -> Result<Sketch> {
    check_hash_args(v, pi.dim())?;
    check_k(k, v.dim())?;
    let values = circulant_values(v, None, pi.forward0(), k);
    Ok(Sketch {
        scheme: Scheme::ZeroPi,
        dim: v.dim(),
        seed: mix_lineage(&[pi.seed()]),
        values,
    })
}

/// Seeded sketching configuration: scheme, sketch length, and a master seed
/// from which all permutations derive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SketchParams {
    pub scheme: Scheme,
    pub k: usize,
    pub seed: u64,
}

impl SketchParams {
    /// Generates the scheme's permutations for the given dimension. The
    /// resulting hasher can sketch any number of vectors of that dimension
    /// under the same permutation set.
    pub fn build(&self, dim: u32) -> Result<SchemeHasher> {
        if dim == 0 {
            return Err(Error::InvalidDimension { dim });
        }
        match self.scheme {
            Scheme::MinHash => {
                if self.k == 0 {
                    return Err(Error::KOutOfRange { k: 0, dim });
                }
            }
            _ => check_k(self.k, dim)?,
        }
        let kind = match self.scheme {
            Scheme::MinHash => {
                let perms = (0..self.k as u64)
                    .map(|i| {
                        Permutation::generate(dim, derive_seed(self.seed, seed_tags::MINHASH + i))
                    })
                    .collect::<Result<Vec<_>>>()?;
                HasherKind::MinHash(perms)
            }
            Scheme::SigmaPi => HasherKind::SigmaPi {
                sigma: Permutation::generate(dim, derive_seed(self.seed, seed_tags::SIGMA))?,
                pi: Permutation::generate(dim, derive_seed(self.seed, seed_tags::PI))?,
            },
            Scheme::PiPi => HasherKind::Pi {
                pi: Permutation::generate(dim, derive_seed(self.seed, seed_tags::PI))?,
                initial: true,
            },
            Scheme::ZeroPi => HasherKind::Pi {
                pi: Permutation::generate(dim, derive_seed(self.seed, seed_tags::PI))?,
                initial: false,
            },
        };
        Ok(SchemeHasher {
            scheme: self.scheme,
            dim,
            k: self.k,
            seed: self.seed,
            kind,
        })
    }
}

enum HasherKind {
    MinHash(Vec<Permutation>),
    SigmaPi { sigma: Permutation, pi: Permutation },
    Pi { pi: Permutation, initial: bool },
}

/// A scheme with its permutations instantiated.
pub struct SchemeHasher {
    scheme: Scheme,
    dim: u32,
    k: usize,
    seed: u64,
    kind: HasherKind,
}

impl SchemeHasher {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Sketches one vector. The sketch's lineage tag is the master seed, so
    /// sketches from the same `SketchParams` are mutually comparable.
    pub fn sketch(&self, v: &BinaryVector) -> Result<Sketch> {
        let mut s = match &self.kind {
            HasherKind::MinHash(perms) => minhash_classic(v, perms)?,
            HasherKind::SigmaPi { sigma, pi } => cminhash_sigma_pi(v, sigma, pi, self.k)?,
            HasherKind::Pi { pi, initial: true } => cminhash_pi_pi(v, pi, self.k)?,
            HasherKind::Pi { pi, initial: false } => cminhash_zero_pi(v, pi, self.k)?,
        };
        s.seed = self.seed;
        Ok(s)
    }
}
