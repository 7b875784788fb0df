//! Closed-form evaluation of the per-shift collision expectation for the
//! one-permutation circulant scheme.
//!
//! For each threshold `j` (the candidate hash value) the collision
//! probability is decomposed over the six-class hypergeometric draw counts
//! `Z` of the circulant split at `j`. Every `(j, Z)` term factors as
//!
//! ```text
//!   P(Z) * (P1 * S1 + P3 * S3)
//! ```
//!
//! where `P1`/`P3` are the placement probabilities of the minimizing
//! coordinate (landing on a non-absent or absent coordinate respectively)
//! and `S1`/`S3` collect the small rational factors: membership of the
//! minimizer in the shifted support, the class status of the coordinate
//! shifted onto the threshold, and the conditional probability that the
//! element above the minimizer is a shared point (`Jbar` above the
//! threshold, `Jstar` below, exact hit on the diagonal).
//!
//! Two arithmetic backends share this skeleton. The float backend computes
//! every binomial ratio in log space from a compensated ln-factorial table
//! and performs one exponentiation per bucket; sums are accumulated with
//! Neumaier compensation in a fixed order (ascending `j`, lexicographic `Z`),
//! so results are bit-reproducible. The exact backend uses arbitrary-
//! precision rationals; 128-bit rationals would overflow on the common
//! denominators of the larger instances. Both paths must agree, and the
//! float path must match the `D!` oracle; those checks live in the test
//! suites.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::theory::{
    for_each_split, z_domain_size, CirculantCounts, LocationVector, ZDerived, ZDomainIter,
};

/// `ln(n!)` for `n` in `0..=N`, built with compensated summation so that
/// binomial ratios stay accurate to a few ulps.
pub(crate) struct LnFactTable {
    table: Vec<f64>,
}

impl LnFactTable {
    pub(crate) fn new(n: u32) -> Self {
        let mut table = Vec::with_capacity(n as usize + 1);
        table.push(0.0);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for i in 1..=n as u64 {
            let v = (i as f64).ln();
            let t = sum + v;
            if sum.abs() >= v.abs() {
                comp += (sum - t) + v;
            } else {
                comp += (v - t) + sum;
            }
            sum = t;
            table.push(sum + comp);
        }
        Self { table }
    }

    pub(crate) fn ln_binom(&self, n: u32, r: u32) -> f64 {
        self.table[n as usize] - self.table[r as usize] - self.table[(n - r) as usize]
    }
}

/// Arithmetic backend: a scalar type plus the handful of constructions the
/// term assembly needs.
pub(crate) trait Arith: Sync {
    type T: Clone;
    type Acc;

    fn zero(&self) -> Self::T;
    fn one(&self) -> Self::T;
    fn is_zero(&self, t: &Self::T) -> bool;
    fn integer(&self, n: u32) -> Self::T;
    /// `num / den`, with `den = 0` evaluating to 0 (the 0/0 convention of
    /// the vanishing-class guards).
    fn gratio(&self, num: i64, den: u64) -> Self::T;
    fn add(&self, a: Self::T, b: Self::T) -> Self::T;
    fn sub(&self, a: Self::T, b: Self::T) -> Self::T;
    fn mul(&self, a: Self::T, b: Self::T) -> Self::T;
    /// `prod C(n, r)` over `num` divided by `prod C(n, r)` over `den`.
    /// Any numerator binomial with `r` outside `[0, n]` zeroes the ratio.
    fn binom_ratio(&self, num: &[(u32, i64)], den: &[(u32, i64)]) -> Self::T;

    fn acc_new(&self) -> Self::Acc;
    fn acc_add(&self, acc: &mut Self::Acc, t: Self::T);
    fn acc_finish(&self, acc: Self::Acc) -> Self::T;
}

pub(crate) struct F64Arith {
    lnfact: LnFactTable,
}

impl F64Arith {
    pub(crate) fn new(dim: u32) -> Self {
        Self {
            lnfact: LnFactTable::new(dim),
        }
    }
}

impl Arith for F64Arith {
    type T = f64;
    type Acc = (f64, f64);

    fn zero(&self) -> f64 {
        0.0
    }

    fn one(&self) -> f64 {
        1.0
    }

    fn is_zero(&self, t: &f64) -> bool {
        *t == 0.0
    }

    fn integer(&self, n: u32) -> f64 {
        n as f64
    }

    fn gratio(&self, num: i64, den: u64) -> f64 {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    }

    fn add(&self, a: f64, b: f64) -> f64 {
        a + b
    }

    fn sub(&self, a: f64, b: f64) -> f64 {
        a - b
    }

    fn mul(&self, a: f64, b: f64) -> f64 {
        a * b
    }

    fn binom_ratio(&self, num: &[(u32, i64)], den: &[(u32, i64)]) -> f64 {
        let mut ln = 0.0f64;
        for &(n, r) in num {
            if r < 0 || r > n as i64 {
                return 0.0;
            }
            ln += self.lnfact.ln_binom(n, r as u32);
        }
        for &(n, r) in den {
            debug_assert!(r >= 0 && r <= n as i64);
            ln -= self.lnfact.ln_binom(n, r as u32);
        }
        ln.exp()
    }

    fn acc_new(&self) -> (f64, f64) {
        (0.0, 0.0)
    }

    fn acc_add(&self, acc: &mut (f64, f64), t: f64) {
        let (sum, comp) = *acc;
        let s = sum + t;
        let c = if sum.abs() >= t.abs() {
            (sum - s) + t
        } else {
            (t - s) + sum
        };
        *acc = (s, comp + c);
    }

    fn acc_finish(&self, acc: (f64, f64)) -> f64 {
        acc.0 + acc.1
    }
}

pub(crate) struct ExactArith {
    /// Pascal's triangle up to the dimension.
    binom: Vec<Vec<BigInt>>,
}

impl ExactArith {
    pub(crate) fn new(dim: u32) -> Self {
        let n = dim as usize;
        let mut binom: Vec<Vec<BigInt>> = Vec::with_capacity(n + 1);
        binom.push(vec![BigInt::from(1)]);
        for i in 1..=n {
            let prev = &binom[i - 1];
            let mut row = Vec::with_capacity(i + 1);
            row.push(BigInt::from(1));
            for r in 1..i {
                row.push(&prev[r - 1] + &prev[r]);
            }
            row.push(BigInt::from(1));
            binom.push(row);
        }
        Self { binom }
    }
}

impl Arith for ExactArith {
    type T = BigRational;
    type Acc = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    fn one(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(1))
    }

    fn is_zero(&self, t: &BigRational) -> bool {
        t.is_zero()
    }

    fn integer(&self, n: u32) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn gratio(&self, num: i64, den: u64) -> BigRational {
        if den == 0 {
            BigRational::zero()
        } else {
            BigRational::new(BigInt::from(num), BigInt::from(den))
        }
    }

    fn add(&self, a: BigRational, b: BigRational) -> BigRational {
        a + b
    }

    fn sub(&self, a: BigRational, b: BigRational) -> BigRational {
        a - b
    }

    fn mul(&self, a: BigRational, b: BigRational) -> BigRational {
        a * b
    }

    fn binom_ratio(&self, num: &[(u32, i64)], den: &[(u32, i64)]) -> BigRational {
        let mut n_acc = BigInt::from(1);
        for &(n, r) in num {
            if r < 0 || r > n as i64 {
                return BigRational::zero();
            }
            n_acc *= &self.binom[n as usize][r as usize];
        }
        let mut d_acc = BigInt::from(1);
        for &(n, r) in den {
            d_acc *= &self.binom[n as usize][r as usize];
        }
        BigRational::new(n_acc, d_acc)
    }

    fn acc_new(&self) -> BigRational {
        BigRational::zero()
    }

    fn acc_add(&self, acc: &mut BigRational, t: BigRational) {
        *acc += t;
    }

    fn acc_finish(&self, acc: BigRational) -> BigRational {
        acc
    }
}

/// Sums per-threshold domain sizes, stopping once `cap` is crossed. The
/// domains are largest around the middle threshold, so that one is probed
/// first: when it alone crosses the cap the walk is skipped and its size is
/// returned as a lower bound for the sum.
fn term_count_up_to(x: &LocationVector, k: u32, cap: u128) -> u128 {
    let dim = x.dim();
    let draws = dim - x.f();
    if cap < u128::MAX {
        let mid = dim.div_ceil(2);
        let c = crate::theory::class_counts(x, mid, k).expect("mid threshold in range");
        let caps_mid = [
            c.n_minus[0],
            c.n_minus[1],
            c.n_minus[2],
            c.n_plus[0],
            c.n_plus[1],
            c.n_plus[2],
        ];
        let mid_size = z_domain_size(&caps_mid, draws);
        if mid_size > cap {
            return mid_size;
        }
    }
    let mut total = 0u128;
    for_each_split(x, k, |_, _, nm, np| {
        if total > cap {
            return;
        }
        let caps = [nm[0], nm[1], nm[2], np[0], np[1], np[2]];
        total = total.saturating_add(z_domain_size(&caps, draws));
    });
    total
}

/// `Jbar_q`: conditional probability that the element sitting above the
/// minimizer is a shared point, when the minimizer's coordinate class is `q`
/// and its shifted position lies above the threshold.
fn jbar<A: Arith>(arith: &A, q: usize, r1: i64, r2: i64, djb: i64, jstar: &A::T) -> A::T {
    let lead = i64::from(q == 0);
    let used = i64::from(q != 2);
    let direct = arith.gratio(r1 - lead, djb as u64);
    let carry = arith.sub(arith.one(), arith.gratio(r1 + r2 - used, djb as u64));
    arith.add(direct, arith.mul(carry, jstar.clone()))
}

/// Sums the closed form over `j = 1..=D` and the hypergeometric domain.
/// Terms with `j` below the smallest attainable hash vanish through the
/// binomial guards rather than by skipping, which the oracle tests confirm.
fn eval_k<A: Arith>(arith: &A, x: &LocationVector, k: u32) -> A::T {
    let dim = x.dim();
    let a = x.a() as i64;
    let f = x.f() as i64;
    let d = dim as i64;
    let draws = dim - x.f();

    let mut outer = arith.acc_new();
    for_each_split(x, k, |j, p_star, nm, np| {
        let caps = [nm[0], nm[1], nm[2], np[0], np[1], np[2]];
        let counts = CirculantCounts { j, k, n_minus: *nm, n_plus: *np };
        let mut per_j = arith.acc_new();
        for z in ZDomainIter::from_caps(caps, draws) {
            let zm = z.z_minus;
            let zp = z.z_plus;
            let derived = ZDerived::new(&counts, &z).expect("iterator stays in the domain");
            let b0 = derived.b0 as i64;
            let (r1, r2, r3) = (derived.r[0] as i64, derived.r[1] as i64, derived.r[2] as i64);
            let djb = d - j as i64 - b0;

            let jstar = arith.gratio(a - r1, (f - r1 - r2) as u64);

            // Status of the coordinate shifted onto the threshold position:
            // probability that it is (resp. is not) in the shifted support.
            // Its own cell is on the minus side, so nm[p_star] >= 1.
            let nm_p = nm[p_star] as i64;
            let zm_p = zm[p_star] as i64;
            let posj_nondash = arith.gratio(nm_p - zm_p, nm_p as u64);
            let posj_dash = arith.gratio(zm_p, nm_p as u64);

            // Bucket S1: minimizer coordinate is shared or single.
            let mut s1 = arith.zero();
            if p_star == 0 {
                // diagonal case: the threshold preimage is itself the
                // minimizer and is shared, so the collision is certain
                s1 = arith.add(s1, posj_nondash.clone());
            }
            for q in 0..2usize {
                if np[q] > 0 && !arith.is_zero(&posj_nondash) {
                    let memb = arith.gratio(np[q] as i64 - zp[q] as i64, np[q] as u64);
                    if !arith.is_zero(&memb) {
                        let jb = jbar(arith, q, r1, r2, djb, &jstar);
                        let t = arith.mul(
                            arith.mul(arith.mul(arith.integer(np[q]), posj_nondash.clone()), memb),
                            jb,
                        );
                        s1 = arith.add(s1, t);
                    }
                }
                let below = nm[q] - u32::from(p_star == q);
                if below > 0 && !arith.is_zero(&jstar) {
                    let memb = arith.gratio(nm[q] as i64 - zm[q] as i64, nm[q] as u64);
                    if !arith.is_zero(&memb) {
                        let posj = if p_star == q {
                            arith.gratio(nm[q] as i64 - 1 - zm[q] as i64, (nm[q] - 1) as u64)
                        } else {
                            posj_nondash.clone()
                        };
                        if !arith.is_zero(&posj) {
                            let t = arith.mul(
                                arith.mul(arith.mul(arith.integer(below), memb), posj),
                                jstar.clone(),
                            );
                            s1 = arith.add(s1, t);
                        }
                    }
                }
            }

            // Bucket S3: minimizer coordinate is absent.
            let mut s3 = arith.zero();
            {
                let q = 2usize;
                if np[q] > 0 && !arith.is_zero(&posj_dash) {
                    let memb = arith.gratio(np[q] as i64 - zp[q] as i64, np[q] as u64);
                    if !arith.is_zero(&memb) {
                        let jb = jbar(arith, q, r1, r2, djb, &jstar);
                        let t = arith.mul(
                            arith.mul(arith.mul(arith.integer(np[q]), posj_dash.clone()), memb),
                            jb,
                        );
                        s3 = arith.add(s3, t);
                    }
                }
                let below = nm[q] - u32::from(p_star == q);
                if below > 0 && !arith.is_zero(&jstar) {
                    let memb = arith.gratio(nm[q] as i64 - zm[q] as i64, nm[q] as u64);
                    if !arith.is_zero(&memb) {
                        let posj = if p_star == q {
                            arith.gratio(zm[q] as i64, (nm[q] - 1) as u64)
                        } else {
                            posj_dash.clone()
                        };
                        if !arith.is_zero(&posj) {
                            let t = arith.mul(
                                arith.mul(arith.mul(arith.integer(below), memb), posj),
                                jstar.clone(),
                            );
                            s3 = arith.add(s3, t);
                        }
                    }
                }
            }

            if arith.is_zero(&s1) && arith.is_zero(&s3) {
                continue;
            }

            let pmf_cells = [
                (nm[0], zm[0] as i64),
                (nm[1], zm[1] as i64),
                (nm[2], zm[2] as i64),
                (np[0], zp[0] as i64),
                (np[1], zp[1] as i64),
                (np[2], zp[2] as i64),
            ];
            let den = [(dim, draws as i64), (dim - x.f(), r3), (x.f(), r1 + r2)];
            if !arith.is_zero(&s1) {
                // P(Z) * P1, fused: one exponentiation per bucket on the
                // float path
                let mut num = pmf_cells.to_vec();
                num.push((b0 as u32, r3));
                num.push((djb as u32, r1 + r2 - 1));
                let w = arith.binom_ratio(&num, &den);
                if !arith.is_zero(&w) {
                    let w = arith.mul(w, arith.gratio(1, (r1 + r2) as u64));
                    arith.acc_add(&mut per_j, arith.mul(w, s1));
                }
            }
            if !arith.is_zero(&s3) {
                let mut num = pmf_cells.to_vec();
                num.push((b0 as u32, r3 - 1));
                num.push((djb as u32, r1 + r2));
                let w = arith.binom_ratio(&num, &den);
                if !arith.is_zero(&w) {
                    let w = arith.mul(w, arith.gratio(1, r3 as u64));
                    arith.acc_add(&mut per_j, arith.mul(w, s3));
                }
            }
        }
        // per-j partials combine in ascending j order for reproducibility
        arith.acc_add(&mut outer, arith.acc_finish(per_j));
    });
    arith.acc_finish(outer)
}

/// Exact evaluator for the per-shift collision expectation, the estimator
/// mean, and the squared bias of the one-permutation circulant scheme.
///
/// The cost of one shift is the total number of `(j, Z)` terms; instances
/// whose count exceeds `term_budget` are refused with the count reported.
#[derive(Debug, Clone, Copy)]
pub struct TheoryEvaluator {
    term_budget: u128,
}

impl Default for TheoryEvaluator {
    fn default() -> Self {
        Self {
            term_budget: 100_000_000,
        }
    }
}

impl TheoryEvaluator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_budget(term_budget: u128) -> Self {
        Self { term_budget }
    }

    pub fn term_budget(&self) -> u128 {
        self.term_budget
    }

    /// Number of `(j, Z)` terms evaluating shift `k` costs.
    pub fn term_count(&self, x: &LocationVector, k: u32) -> Result<u128> {
        let dim = x.dim();
        if k == 0 || k > dim {
            return Err(Error::IndexOutOfRange {
                what: "shift",
                value: k,
                dim,
            });
        }
        Ok(term_count_up_to(x, k, u128::MAX))
    }

    fn check_budget(&self, terms: u128) -> Result<()> {
        if terms > self.term_budget {
            return Err(Error::BudgetExceeded {
                terms,
                budget: self.term_budget,
            });
        }
        Ok(())
    }

    /// Refuses an instance before evaluation. Counting stops as soon as the
    /// budget is crossed, so refusals of huge instances are cheap; the
    /// reported count is then a lower bound. Every threshold contributes at
    /// least one term per shift, which lets `D > budget` refuse outright.
    fn guard(&self, x: &LocationVector, shifts: &[u32]) -> Result<()> {
        self.check_budget((x.dim() as u128).saturating_mul(shifts.len() as u128))?;
        let mut total = 0u128;
        for &k in shifts {
            total = total.saturating_add(term_count_up_to(x, k, self.term_budget));
            self.check_budget(total)?;
        }
        Ok(())
    }

    /// Exact collision probability of the k-th hash, float path.
    pub fn collision_expectation_k(&self, x: &LocationVector, k: u32) -> Result<f64> {
        if k == 0 || k > x.dim() {
            return Err(Error::IndexOutOfRange {
                what: "shift",
                value: k,
                dim: x.dim(),
            });
        }
        self.guard(x, &[k])?;
        Ok(eval_k(&F64Arith::new(x.dim()), x, k))
    }

    /// Exact collision probability of the k-th hash as a rational.
    pub fn collision_expectation_k_exact(&self, x: &LocationVector, k: u32) -> Result<BigRational> {
        if k == 0 || k > x.dim() {
            return Err(Error::IndexOutOfRange {
                what: "shift",
                value: k,
                dim: x.dim(),
            });
        }
        self.guard(x, &[k])?;
        Ok(eval_k(&ExactArith::new(x.dim()), x, k))
    }

    /// Per-shift expectations for `k = 1..=k_max`. The shifts are evaluated
    /// in parallel; the output order is fixed, so results do not depend on
    /// the worker count.
    pub fn per_k_expectations(&self, x: &LocationVector, k_max: usize) -> Result<Vec<f64>> {
        if k_max == 0 || k_max > x.dim() as usize {
            return Err(Error::KOutOfRange {
                k: k_max,
                dim: x.dim(),
            });
        }
        let shifts: Vec<u32> = (1..=k_max as u32).collect();
        self.guard(x, &shifts)?;
        let arith = F64Arith::new(x.dim());
        Ok((1..=k_max as u32)
            .into_par_iter()
            .map(|k| eval_k(&arith, x, k))
            .collect())
    }

    /// Mean of the estimator at sketch length `K`: the average of the first
    /// `K` per-shift expectations.
    pub fn estimator_mean(&self, x: &LocationVector, k_max: usize) -> Result<f64> {
        let per_k = self.per_k_expectations(x, k_max)?;
        let arith = F64Arith::new(x.dim());
        let mut acc = arith.acc_new();
        for e in per_k {
            arith.acc_add(&mut acc, e);
        }
        Ok(arith.acc_finish(acc) / k_max as f64)
    }

    /// `(E[J_hat] - J)^2` at sketch length `K`, with `J` taken from the
    /// exact class counts.
    pub fn bias_squared(&self, x: &LocationVector, k_max: usize) -> Result<f64> {
        let mean = self.estimator_mean(x, k_max)?;
        let j = x.a() as f64 / x.f() as f64;
        Ok((mean - j) * (mean - j))
    }
}

/// Converts an exact expectation to f64 (used in tests and agreement checks).
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // extremely large terms: fall back to a manual division
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::oracle::bruteforce_collision_expectations;
    use crate::theory::PointClass::{self, Both, Neither, Single};
    use num_rational::Ratio;

    fn structured(dim: u32, f: u32, a: u32) -> LocationVector {
        let mut classes = Vec::with_capacity(dim as usize);
        classes.extend(std::iter::repeat_n(Both, a as usize));
        classes.extend(std::iter::repeat_n(Single, (f - a) as usize));
        classes.extend(std::iter::repeat_n(Neither, (dim - f) as usize));
        LocationVector::from_classes(classes).unwrap()
    }

    fn random_placement(dim: u32, f: u32, a: u32, seed: u64) -> LocationVector {
        use crate::permute::Permutation;
        let p = Permutation::generate(dim, seed).unwrap();
        let mut classes = vec![PointClass::Neither; dim as usize];
        for i in 1..=dim {
            let pos = (p.forward(i) - 1) as usize;
            classes[pos] = if i <= a {
                Both
            } else if i <= f {
                Single
            } else {
                Neither
            };
        }
        LocationVector::from_classes(classes).unwrap()
    }

    #[test]
    fn all_shared_gives_one() {
        let x = structured(8, 8, 8);
        let ev = TheoryEvaluator::new();
        for k in 1..=8 {
            let e = ev.collision_expectation_k(&x, k).unwrap();
            assert!((e - 1.0).abs() < 1e-12, "k = {k}: {e}");
            let ex = ev.collision_expectation_k_exact(&x, k).unwrap();
            assert_eq!(ex, BigRational::from_integer(1.into()));
        }
    }

    #[test]
    fn no_shared_gives_zero() {
        let x = structured(8, 4, 0);
        let ev = TheoryEvaluator::new();
        for k in 1..=8 {
            assert_eq!(ev.collision_expectation_k(&x, k).unwrap(), 0.0);
        }
    }

    /// The hand-enumerable three-coordinate case pins the shift convention:
    /// the closed form must reproduce the oracle's 5/6 at k = 1.
    #[test]
    fn three_coordinate_case_matches_hand_enumeration() {
        let x = LocationVector::from_classes(vec![Both, Single, Neither]).unwrap();
        let ev = TheoryEvaluator::new();
        let exact = ev.collision_expectation_k_exact(&x, 1).unwrap();
        assert_eq!(exact, BigRational::new(5.into(), 6.into()));
        let f = ev.collision_expectation_k(&x, 1).unwrap();
        assert!((f - 5.0 / 6.0).abs() < 1e-13);
    }

    #[test]
    fn matches_oracle_on_8_4_2() {
        let ev = TheoryEvaluator::new();
        for seed in 1..=2u64 {
            let x = random_placement(8, 4, 2, seed);
            let oracle = bruteforce_collision_expectations(&x).unwrap();
            for k in 1..=8u32 {
                let theory = ev.collision_expectation_k(&x, k).unwrap();
                let want = *oracle[(k - 1) as usize].numer() as f64
                    / *oracle[(k - 1) as usize].denom() as f64;
                assert!(
                    (theory - want).abs() <= 1e-9,
                    "seed {seed} k {k}: theory {theory} oracle {want}"
                );
            }
        }
    }

    #[test]
    fn exact_path_matches_oracle_exactly() {
        let ev = TheoryEvaluator::new();
        let x = random_placement(7, 4, 2, 3);
        let oracle = bruteforce_collision_expectations(&x).unwrap();
        for k in 1..=7u32 {
            let exact = ev.collision_expectation_k_exact(&x, k).unwrap();
            let o = oracle[(k - 1) as usize];
            let want = BigRational::new((*o.numer()).into(), (*o.denom()).into());
            assert_eq!(exact, want, "k = {k}");
        }
    }

    #[test]
    fn estimator_mean_and_bias() {
        let ev = TheoryEvaluator::new();
        let x = structured(8, 8, 8);
        assert!((ev.estimator_mean(&x, 8).unwrap() - 1.0).abs() < 1e-12);
        assert!(ev.bias_squared(&x, 8).unwrap() < 1e-24);

        let x = structured(8, 4, 0);
        assert_eq!(ev.estimator_mean(&x, 8).unwrap(), 0.0);

        let x = random_placement(8, 4, 2, 1);
        let per_k = ev.per_k_expectations(&x, 8).unwrap();
        let mean = ev.estimator_mean(&x, 8).unwrap();
        let avg: f64 = per_k.iter().sum::<f64>() / 8.0;
        assert!((mean - avg).abs() < 1e-12);
        let oracle = bruteforce_collision_expectations(&x).unwrap();
        let oracle_mean: Ratio<u64> =
            oracle.iter().take(8).sum::<Ratio<u64>>() / Ratio::from_integer(8);
        let want = *oracle_mean.numer() as f64 / *oracle_mean.denom() as f64;
        assert!((mean - want).abs() <= 1e-9);
    }

    #[test]
    fn k_range_validated() {
        let x = structured(8, 4, 2);
        let ev = TheoryEvaluator::new();
        assert!(matches!(
            ev.estimator_mean(&x, 0),
            Err(Error::KOutOfRange { .. })
        ));
        assert!(matches!(
            ev.estimator_mean(&x, 9),
            Err(Error::KOutOfRange { .. })
        ));
        assert!(ev.collision_expectation_k(&x, 0).is_err());
        assert!(ev.collision_expectation_k(&x, 9).is_err());
    }

    #[test]
    fn budget_refusal_reports_term_count() {
        let x = structured(24, 12, 6);
        // budget above D but below the true term count
        let tight = TheoryEvaluator::with_budget(1000);
        match tight.collision_expectation_k(&x, 1) {
            Err(Error::BudgetExceeded { terms, budget }) => {
                assert_eq!(budget, 1000);
                assert!(terms > 1000);
                assert!(terms <= tight.term_count(&x, 1).unwrap());
            }
            other => panic!("expected budget refusal, got {other:?}"),
        }
        // budget below D: refused up front on the per-threshold lower bound
        assert!(matches!(
            TheoryEvaluator::with_budget(10).collision_expectation_k(&x, 1),
            Err(Error::BudgetExceeded { .. })
        ));
        // the default budget accepts the same instance
        assert!(TheoryEvaluator::new()
            .collision_expectation_k(&x, 1)
            .is_ok());
    }
}
