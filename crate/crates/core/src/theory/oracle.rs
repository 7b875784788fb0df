//! Brute-force collision expectations by exhausting all `D!` permutations.
//!
//! For every permutation the oracle runs the one-permutation circulant
//! scheme end to end on the location vector: the union support is scattered
//! by `pi`, the k-th hash is the minimum of `pi` read at the inverse-rotated
//! support positions, and a collision is recorded when the coordinate
//! achieving the minimum is a shared point. The result is the exact rational
//! `collisions / D!`.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::theory::{LocationVector, PointClass};

/// Largest dimension the oracle will enumerate (10! = 3,628,800).
pub const MAX_ORACLE_DIM: u32 = 10;

const FACTORIALS: [u64; 11] = [1, 1, 2, 6, 24, 120, 720, 5040, 40320, 362880, 3628800];

/// Exact collision probability of the k-th hash for every `k` in `1..=D`,
/// as `collisions / D!`.
pub fn bruteforce_collision_expectations(x: &LocationVector) -> Result<Vec<Ratio<u64>>> {
    let dim = x.dim();
    if dim > MAX_ORACLE_DIM {
        return Err(Error::OracleDimension {
            dim,
            max: MAX_ORACLE_DIM,
        });
    }
    let d = dim as usize;

    // 0-based union support with a flag for shared points.
    let support: Vec<(u32, bool)> = x
        .classes()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != PointClass::Neither)
        .map(|(i, c)| (i as u32, *c == PointClass::Both))
        .collect();

    let mut collisions = vec![0u64; d];
    let mut perm: Vec<u32> = (0..dim).collect();
    let mut tally = |p: &[u32]| {
        for k in 1..=dim {
            let mut best = u32::MAX;
            let mut best_shared = false;
            for &(t, shared) in &support {
                // position of coordinate t after the initial scatter
                let m = p[t as usize];
                // read pi at the inverse-rotated position
                let idx = m + dim - k;
                let idx = if idx >= dim { idx - dim } else { idx };
                let val = p[idx as usize];
                if val < best {
                    best = val;
                    best_shared = shared;
                }
            }
            if best_shared {
                collisions[(k - 1) as usize] += 1;
            }
        }
    };

    // Heap's algorithm, iterative.
    tally(&perm);
    let mut c = vec![0usize; d];
    let mut i = 0;
    while i < d {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            tally(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }

    let total = FACTORIALS[d];
    Ok(collisions
        .into_iter()
        .map(|c| Ratio::new(c, total))
        .collect())
}

/// Exact collision probability of the k-th hash as a rational.
pub fn bruteforce_collision_expectation_k_exact(x: &LocationVector, k: u32) -> Result<Ratio<u64>> {
    let dim = x.dim();
    if k == 0 || k > dim {
        return Err(Error::IndexOutOfRange {
            what: "shift",
            value: k,
            dim,
        });
    }
    Ok(bruteforce_collision_expectations(x)?[(k - 1) as usize])
}

/// Exact collision probability of the k-th hash as a float.
pub fn bruteforce_collision_expectation_k(x: &LocationVector, k: u32) -> Result<f64> {
    let r = bruteforce_collision_expectation_k_exact(x, k)?;
    Ok(*r.numer() as f64 / *r.denom() as f64)
}
