//! Exact analysis of the one-permutation circulant estimator.
//!
//! For a pair of binary vectors, each coordinate is one of three kinds:
//! shared (both 1), single (exactly one 1), or absent (both 0). The k-th
//! hash of the pair collides exactly when the minimum over the shuffled
//! union support lands on a shared coordinate. This module computes the
//! exact per-shift collision probability of the `pi_pi` scheme two ways:
//!
//! * [`eval::TheoryEvaluator`] sums the closed-form expression over a
//!   threshold index `j` and a six-class hypergeometric domain;
//! * [`oracle::bruteforce_collision_expectation_k`] enumerates all `D!`
//!   permutations and counts collisions outright (feasible for `D <= 10`).
//!
//! The two routes are independent; their agreement is the correctness
//! anchor for the closed form.

pub mod eval;
pub mod oracle;

use crate::error::{Error, Result};
use crate::permute::{circ_fwd0, circ_inv0};
use crate::vector::BinaryVector;

pub use eval::TheoryEvaluator;
pub use oracle::{
    bruteforce_collision_expectation_k, bruteforce_collision_expectation_k_exact,
    bruteforce_collision_expectations, MAX_ORACLE_DIM,
};

/// Classification of one coordinate of a vector pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointClass {
    /// Both vectors are 1 here (an "O" point; a collision candidate).
    Both,
    /// Exactly one vector is 1 here (a "x" point).
    Single,
    /// Both vectors are 0 here (a "-" point).
    Neither,
}

impl PointClass {
    /// Dense index used by the counting machinery: Both = 0, Single = 1,
    /// Neither = 2.
    pub fn index(self) -> usize {
        match self {
            PointClass::Both => 0,
            PointClass::Single => 1,
            PointClass::Neither => 2,
        }
    }
}

/// Per-coordinate classes of a vector pair, with the class sizes
/// `a = |Both|`, `f - a = |Single|`, `D - f = |Neither|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocationVector {
    classes: Vec<PointClass>,
    a: u32,
    f: u32,
}

impl LocationVector {
    /// Classifies every coordinate of a pair. Requires equal dimensions and
    /// at least one nonzero coordinate overall (`f >= 1`).
    pub fn from_pair(v: &BinaryVector, w: &BinaryVector) -> Result<Self> {
        if v.dim() != w.dim() {
            return Err(Error::DimensionMismatch {
                left: v.dim(),
                right: w.dim(),
            });
        }
        let mut classes = vec![PointClass::Neither; v.dim() as usize];
        for &i in v.nonzeros() {
            classes[(i - 1) as usize] = PointClass::Single;
        }
        for &i in w.nonzeros() {
            let c = &mut classes[(i - 1) as usize];
            *c = if *c == PointClass::Single {
                PointClass::Both
            } else {
                PointClass::Single
            };
        }
        Self::from_classes(classes)
    }

    /// Builds a location vector directly from classes. Requires `f >= 1`.
    pub fn from_classes(classes: Vec<PointClass>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::InvalidDimension { dim: 0 });
        }
        let a = classes.iter().filter(|c| **c == PointClass::Both).count() as u32;
        let f = classes
            .iter()
            .filter(|c| **c != PointClass::Neither)
            .count() as u32;
        if f == 0 {
            return Err(Error::UndefinedSimilarity);
        }
        Ok(Self { classes, a, f })
    }

    pub fn dim(&self) -> u32 {
        self.classes.len() as u32
    }

    /// Number of shared coordinates.
    pub fn a(&self) -> u32 {
        self.a
    }

    /// Number of coordinates where at least one vector is 1.
    pub fn f(&self) -> u32 {
        self.f
    }

    /// Exact Jaccard similarity `a / f` of the underlying pair.
    pub fn jaccard(&self) -> f64 {
        self.a as f64 / self.f as f64
    }

    pub fn classes(&self) -> &[PointClass] {
        &self.classes
    }

    /// Class of the 1-based coordinate `i`.
    pub fn class_at(&self, i: u32) -> PointClass {
        self.classes[(i - 1) as usize]
    }
}

/// Class counts of the circulant partition at threshold `j` under shift `k`:
/// coordinate `i` falls on the minus side when `((i + k - 1) mod D) + 1 <= j`
/// and on the plus side otherwise. Index order: Both, Single, Neither.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CirculantCounts {
    pub j: u32,
    pub k: u32,
    pub n_minus: [u32; 3],
    pub n_plus: [u32; 3],
}

/// Counts each class on both sides of the circulant split at threshold `j`.
pub fn class_counts(x: &LocationVector, j: u32, k: u32) -> Result<CirculantCounts> {
    let dim = x.dim();
    if j == 0 || j > dim {
        return Err(Error::IndexOutOfRange {
            what: "threshold",
            value: j,
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
    let mut n_minus = [0u32; 3];
    let mut n_plus = [0u32; 3];
    for (i0, c) in x.classes().iter().enumerate() {
        let shifted = circ_fwd0(i0 as u32, k, dim) + 1;
        if shifted <= j {
            n_minus[c.index()] += 1;
        } else {
            n_plus[c.index()] += 1;
        }
    }
    Ok(CirculantCounts {
        j,
        k,
        n_minus,
        n_plus,
    })
}

/// One draw-count configuration of the six-class hypergeometric: how many of
/// the `D - f` excluded slots fall into each (side, class) cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZCounts {
    pub z_minus: [u32; 3],
    pub z_plus: [u32; 3],
}

impl ZCounts {
    fn from_cells(cells: [u32; 6]) -> Self {
        ZCounts {
            z_minus: [cells[0], cells[1], cells[2]],
            z_plus: [cells[3], cells[4], cells[5]],
        }
    }

    pub fn total(&self) -> u32 {
        self.z_minus.iter().sum::<u32>() + self.z_plus.iter().sum::<u32>()
    }
}

/// Integer quantities derived from one draw-count configuration: `b0`, the
/// number of excluded slots above the threshold, and `r[q]`, the per-class
/// counts of coordinates that remain in the shifted support (class size
/// minus both sides' exclusions). On the valid domain `r[0] + r[1] + r[2]`
/// always equals `f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZDerived {
    pub b0: u32,
    pub r: [u32; 3],
}

impl ZDerived {
    /// Derives `b0` and the remainders; `None` when `z` violates a cell cap
    /// (outside the domain).
    pub fn new(counts: &CirculantCounts, z: &ZCounts) -> Option<Self> {
        for q in 0..3 {
            if z.z_minus[q] > counts.n_minus[q] || z.z_plus[q] > counts.n_plus[q] {
                return None;
            }
        }
        let class = |q: usize| counts.n_minus[q] + counts.n_plus[q];
        Some(ZDerived {
            b0: z.z_plus.iter().sum(),
            r: [
                class(0) - z.z_minus[0] - z.z_plus[0],
                class(1) - z.z_minus[1] - z.z_plus[1],
                class(2) - z.z_minus[2] - z.z_plus[2],
            ],
        })
    }
}

/// Iterator over the full hypergeometric domain: every six-tuple with
/// `0 <= z_c <= n_c` per cell and total `draws`, in lexicographic order over
/// `(z_minus, z_plus)`.
pub fn enumerate_z_domain(counts: &CirculantCounts, draws: u32) -> ZDomainIter {
    let caps = [
        counts.n_minus[0],
        counts.n_minus[1],
        counts.n_minus[2],
        counts.n_plus[0],
        counts.n_plus[1],
        counts.n_plus[2],
    ];
    ZDomainIter::new(caps, draws)
}

pub struct ZDomainIter {
    caps: [u32; 6],
    suffix_cap: [u32; 7],
    cells: [u32; 6],
    draws: u32,
    done: bool,
}

impl ZDomainIter {
    pub(crate) fn from_caps(caps: [u32; 6], draws: u32) -> Self {
        Self::new(caps, draws)
    }

    fn new(caps: [u32; 6], draws: u32) -> Self {
        let mut suffix_cap = [0u32; 7];
        for i in (0..6).rev() {
            suffix_cap[i] = suffix_cap[i + 1] + caps[i];
        }
        let mut it = ZDomainIter {
            caps,
            suffix_cap,
            cells: [0; 6],
            draws,
            done: false,
        };
        if suffix_cap[0] < draws {
            it.done = true;
        } else {
            it.reset_from(0, 0);
        }
        it
    }

    /// Sets cells `idx..6` to their lexicographically smallest feasible
    /// values given `used` draws already placed before `idx`.
    fn reset_from(&mut self, idx: usize, used: u32) {
        let mut used = used;
        for i in idx..6 {
            let rest = self.suffix_cap[i + 1];
            let need = self.draws - used;
            let lo = need.saturating_sub(rest);
            self.cells[i] = lo;
            used += lo;
        }
        debug_assert_eq!(used, self.draws);
    }
}

impl Iterator for ZDomainIter {
    type Item = ZCounts;

    fn next(&mut self) -> Option<ZCounts> {
        if self.done {
            return None;
        }
        let current = ZCounts::from_cells(self.cells);
        // Advance: find the rightmost cell among the first five that can
        // take one more draw; the suffix re-minimizes.
        let mut suffix_used: u32 = 0;
        let mut advanced = false;
        for i in (0..5).rev() {
            suffix_used += self.cells[i + 1];
            let used_prefix = self.draws - suffix_used - self.cells[i];
            if self.cells[i] < self.caps[i].min(self.draws - used_prefix) {
                self.cells[i] += 1;
                self.reset_from(i + 1, used_prefix + self.cells[i]);
                advanced = true;
                break;
            }
        }
        if !advanced {
            self.done = true;
        }
        Some(current)
    }
}

/// Number of tuples in the domain, without enumerating it. Counts the
/// complement side when that is smaller (placing `draws` items with cell
/// caps equals placing `total - draws`), so the cost scales with
/// `min(draws, total - draws)` rather than the dimension.
pub(crate) fn z_domain_size(caps: &[u32; 6], draws: u32) -> u128 {
    let total: u32 = caps.iter().sum();
    if draws > total {
        return 0;
    }
    let m = draws.min(total - draws) as usize;
    // counts[s] = ways to place s items into the cells seen so far
    let mut counts = vec![0u128; m + 1];
    counts[0] = 1;
    for &cap in caps {
        let mut next = vec![0u128; m + 1];
        for (s, &ways) in counts.iter().enumerate() {
            if ways == 0 {
                continue;
            }
            let top = (cap as usize).min(m - s);
            for z in 0..=top {
                next[s + z] = next[s + z].saturating_add(ways);
            }
        }
        counts = next;
    }
    counts[m]
}

/// Walks thresholds `j = 1..=D` for a fixed shift, maintaining the split
/// counts incrementally: raising `j` by one moves exactly the coordinate
/// `j#` from the plus side to the minus side. The callback receives
/// `(j, class of j#, n_minus, n_plus)`.
pub(crate) fn for_each_split(
    x: &LocationVector,
    k: u32,
    mut visit: impl FnMut(u32, usize, &[u32; 3], &[u32; 3]),
) {
    let dim = x.dim();
    let mut n_minus = [0u32; 3];
    let mut n_plus = [x.a(), x.f() - x.a(), dim - x.f()];
    for j in 1..=dim {
        let p_star = x.classes()[circ_inv0(j - 1, k, dim) as usize].index();
        n_minus[p_star] += 1;
        n_plus[p_star] -= 1;
        visit(j, p_star, &n_minus, &n_plus);
    }
}

/// Probability of one draw-count configuration under the six-class
/// hypergeometric at this circulant split: the product of per-cell binomials
/// over `C(D, draws)`. Returns 0 outside the domain.
pub fn hypergeom_pmf(counts: &CirculantCounts, z: &ZCounts, draws: u32) -> f64 {
    let cells = [
        (counts.n_minus[0], z.z_minus[0]),
        (counts.n_minus[1], z.z_minus[1]),
        (counts.n_minus[2], z.z_minus[2]),
        (counts.n_plus[0], z.z_plus[0]),
        (counts.n_plus[1], z.z_plus[1]),
        (counts.n_plus[2], z.z_plus[2]),
    ];
    let total: u32 = counts.n_minus.iter().chain(counts.n_plus.iter()).sum();
    let drawn: u32 = z.z_minus.iter().chain(z.z_plus.iter()).sum();
    if drawn != draws || draws > total {
        return 0.0;
    }
    let lnfact = eval::LnFactTable::new(total);
    let mut ln = -lnfact.ln_binom(total, draws);
    for (n, zc) in cells {
        if zc > n {
            return 0.0;
        }
        ln += lnfact.ln_binom(n, zc);
    }
    ln.exp()
}
