//! Synthetic pair generation and Monte Carlo experiment engines.
//!
//! All engines draw fresh permutations every trial from seeds derived as a
//! pure function of the master seed and the trial (or repetition) index, so
//! results are independent of execution order and worker count. Sums that
//! feed the reported statistics are accumulated as exact integers (the
//! per-trial estimator is a rational with denominator `K`), which makes the
//! output bit-identical across thread counts by construction.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::exact_pair_stats;
use crate::permute::{derive_seed, seed_tags};
use crate::sketch::{Scheme, SketchParams};
use crate::vector::BinaryVector;

/// How the classes of a synthetic pair are laid out over the coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Classes assigned to uniformly random positions.
    Random,
    /// `a` shared coordinates first, then `f - a` singles, then the rest.
    Structured,
}

impl std::str::FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Placement::Random),
            "structured" => Ok(Placement::Structured),
            other => Err(Error::InvalidSpec {
                reason: format!("unknown placement '{other}' (expected random|structured)"),
            }),
        }
    }
}

impl std::fmt::Display for Placement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Placement::Random => "random",
            Placement::Structured => "structured",
        })
    }
}

/// Specification of a synthetic vector pair with exact overlap counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticPairSpec {
    pub dim: u32,
    pub f: u32,
    pub a: u32,
    pub placement: Placement,
    pub seed: u64,
}

/// Builds a pair whose exact statistics are precisely `(a, f)`: `a` shared
/// coordinates, `f - a` coordinates held by exactly one vector (alternating
/// between the two), and `D - f` coordinates held by neither.
pub fn synth_pair(spec: &SyntheticPairSpec) -> Result<(BinaryVector, BinaryVector)> {
    if spec.dim == 0 {
        return Err(Error::InvalidDimension { dim: 0 });
    }
    if spec.a > spec.f || spec.f > spec.dim {
        return Err(Error::InvalidSpec {
            reason: format!(
                "need a <= f <= D, got a = {}, f = {}, D = {}",
                spec.a, spec.f, spec.dim
            ),
        });
    }
    if spec.f == 0 {
        return Err(Error::InvalidSpec {
            reason: "f = 0 yields an all-empty pair with undefined similarity".to_string(),
        });
    }
    let mut positions: Vec<u32> = (1..=spec.dim).collect();
    if spec.placement == Placement::Random {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, seed_tags::SYNTH));
        positions.shuffle(&mut rng);
    }
    let mut v = Vec::new();
    let mut w = Vec::new();
    for (rank, &pos) in positions.iter().enumerate() {
        let rank = rank as u32;
        if rank < spec.a {
            v.push(pos);
            w.push(pos);
        } else if rank < spec.f {
            if (rank - spec.a).is_multiple_of(2) {
                v.push(pos);
            } else {
                w.push(pos);
            }
        }
    }
    Ok((
        BinaryVector::from_indices(spec.dim, v)?,
        BinaryVector::from_indices(spec.dim, w)?,
    ))
}

/// Builds `n` vectors with densities spread log-uniformly over
/// `[density_lo, density_hi]` and uniformly random supports. Every vector
/// gets at least one nonzero.
pub fn synth_dataset(
    n: usize,
    dim: u32,
    density_lo: f64,
    density_hi: f64,
    seed: u64,
) -> Result<Vec<BinaryVector>> {
    if dim == 0 {
        return Err(Error::InvalidDimension { dim: 0 });
    }
    if n == 0
        || !(0.0..=1.0).contains(&density_lo)
        || !(0.0..=1.0).contains(&density_hi)
        || density_lo > density_hi
        || density_lo <= 0.0
    {
        return Err(Error::InvalidSpec {
            reason: format!("bad dataset spec: n = {n}, densities [{density_lo}, {density_hi}]"),
        });
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, seed_tags::SYNTH + 1 + i));
        let t = if n == 1 {
            0.0
        } else {
            i as f64 / (n - 1) as f64
        };
        let density = density_lo * (density_hi / density_lo).powf(t);
        let nnz = ((density * dim as f64).round() as u32).clamp(1, dim);
        let mut positions: Vec<u32> = (1..=dim).collect();
        positions.shuffle(&mut rng);
        positions.truncate(nnz as usize);
        out.push(BinaryVector::from_indices(dim, positions)?);
    }
    Ok(out)
}

/// Bias/variance/MSE of one scheme on one pair at one sketch length, from
/// `trials` independent permutation draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McStats {
    pub k: usize,
    pub scheme: Scheme,
    pub mean: f64,
    pub bias2: f64,
    pub variance: f64,
    pub mse: f64,
    pub trials: u64,
    pub stderr_mean: f64,
    /// Standard error of the MSE estimate; feeds acceptance bands, not CSV.
    pub stderr_mse: f64,
}

/// Per-chunk accumulators for one grid entry.
#[derive(Clone, Copy, Default)]
struct McAcc {
    sum_c: u64,
    sum_e2: u128,
    sum_e4: f64,
}

impl McAcc {
    fn absorb(&mut self, other: &McAcc) {
        self.sum_c += other.sum_c;
        self.sum_e2 += other.sum_e2;
        self.sum_e4 += other.sum_e4;
    }
}

const TRIAL_CHUNK: u64 = 1024;

/// The union support of a pair with per-coordinate shared flags: the k-th
/// hashes of the two vectors collide exactly when the union minimizer is a
/// shared coordinate.
struct UnionSupport {
    dim: u32,
    coords0: Vec<u32>,
    shared: Vec<bool>,
    a: u64,
    f: u64,
}

impl UnionSupport {
    fn new(v: &BinaryVector, w: &BinaryVector) -> Result<Self> {
        if v.is_empty() || w.is_empty() {
            return Err(Error::EmptyVector);
        }
        let stats = exact_pair_stats(v, w)?;
        let mut coords0 = Vec::with_capacity(stats.f() as usize);
        let mut shared = Vec::with_capacity(stats.f() as usize);
        let (vs, ws) = (v.nonzeros(), w.nonzeros());
        let (mut i, mut j) = (0usize, 0usize);
        while i < vs.len() || j < ws.len() {
            let (coord, is_shared) = if j >= ws.len() || (i < vs.len() && vs[i] < ws[j]) {
                let c = vs[i];
                i += 1;
                (c, false)
            } else if i >= vs.len() || ws[j] < vs[i] {
                let c = ws[j];
                j += 1;
                (c, false)
            } else {
                let c = vs[i];
                i += 1;
                j += 1;
                (c, true)
            };
            coords0.push(coord - 1);
            shared.push(is_shared);
        }
        Ok(Self {
            dim: v.dim(),
            coords0,
            shared,
            a: stats.a(),
            f: stats.f(),
        })
    }
}

/// Scratch buffers for one worker.
struct TrialScratch {
    pi: Vec<u32>,
    sigma: Vec<u32>,
    positions: Vec<u32>,
}

impl TrialScratch {
    fn new(dim: u32, support_len: usize) -> Self {
        Self {
            pi: (0..dim).collect(),
            sigma: (0..dim).collect(),
            positions: vec![0; support_len],
        }
    }
}

fn refill_shuffled(buf: &mut [u32], seed: u64) {
    for (i, v) in buf.iter_mut().enumerate() {
        *v = i as u32;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    buf.shuffle(&mut rng);
}

/// Runs one trial of a circulant scheme and invokes `sink(k, collided)` for
/// k = 1..=k_max in order.
fn circulant_trial(
    union: &UnionSupport,
    scratch: &mut TrialScratch,
    scheme: Scheme,
    trial_seed: u64,
    k_max: usize,
    mut sink: impl FnMut(usize, bool),
) {
    let dim = union.dim;
    refill_shuffled(&mut scratch.pi, derive_seed(trial_seed, seed_tags::PI));
    let init: Option<&[u32]> = match scheme {
        Scheme::SigmaPi => {
            refill_shuffled(
                &mut scratch.sigma,
                derive_seed(trial_seed, seed_tags::SIGMA),
            );
            Some(&scratch.sigma)
        }
        Scheme::PiPi => Some(&scratch.pi),
        Scheme::ZeroPi => None,
        Scheme::MinHash => unreachable!("circulant_trial called with minhash"),
    };
    for (idx, &c0) in union.coords0.iter().enumerate() {
        scratch.positions[idx] = match init {
            Some(map) => map[c0 as usize],
            None => c0,
        };
    }
    let pi = &scratch.pi;
    for k in 1..=k_max {
        let off = dim - k as u32;
        let mut best = u32::MAX;
        let mut best_shared = false;
        for (idx, &m0) in scratch.positions.iter().enumerate() {
            let mut q = m0 + off;
            if q >= dim {
                q -= dim;
            }
            let val = pi[q as usize];
            if val < best {
                best = val;
                best_shared = union.shared[idx];
            }
        }
        sink(k, best_shared);
    }
}

/// Runs one trial of classic MinHash (fresh independent permutation per k).
fn minhash_trial(
    union: &UnionSupport,
    scratch: &mut TrialScratch,
    trial_seed: u64,
    k_max: usize,
    mut sink: impl FnMut(usize, bool),
) {
    for k in 1..=k_max {
        refill_shuffled(
            &mut scratch.pi,
            derive_seed(trial_seed, seed_tags::MINHASH + (k - 1) as u64),
        );
        let mut best = u32::MAX;
        let mut best_shared = false;
        for (idx, &c0) in union.coords0.iter().enumerate() {
            let val = scratch.pi[c0 as usize];
            if val < best {
                best = val;
                best_shared = union.shared[idx];
            }
        }
        sink(k, best_shared);
    }
}

fn validate_k_grid(k_grid: &[usize], scheme: Scheme, dim: u32) -> Result<()> {
    if k_grid.is_empty() {
        return Err(Error::InvalidSpec {
            reason: "empty K grid".to_string(),
        });
    }
    for &k in k_grid {
        if k == 0 {
            return Err(Error::KOutOfRange { k, dim });
        }
        if scheme != Scheme::MinHash && k > dim as usize {
            return Err(Error::KOutOfRange { k, dim });
        }
    }
    Ok(())
}

/// Monte Carlo bias^2/variance/MSE for one pair over a grid of sketch
/// lengths. Each trial draws one fresh permutation set at the largest `K`
/// and evaluates every grid entry on the prefix of the same hash stream.
pub fn mc_bias_mse(
    v: &BinaryVector,
    w: &BinaryVector,
    k_grid: &[usize],
    scheme: Scheme,
    trials: u64,
    seed: u64,
) -> Result<Vec<McStats>> {
    let union = UnionSupport::new(v, w)?;
    validate_k_grid(k_grid, scheme, union.dim)?;
    if trials == 0 {
        return Err(Error::InvalidSpec {
            reason: "trials must be >= 1".to_string(),
        });
    }
    let k_max = *k_grid.iter().max().unwrap();

    // ascending order for prefix snapshots, mapped back to input order at the end
    let mut order: Vec<usize> = (0..k_grid.len()).collect();
    order.sort_by_key(|&i| k_grid[i]);
    let sorted_ks: Vec<usize> = order.iter().map(|&i| k_grid[i]).collect();

    let (a, f) = (union.a, union.f);
    let chunks = trials.div_ceil(TRIAL_CHUNK);
    let partials: Vec<Vec<McAcc>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * TRIAL_CHUNK;
            let hi = (lo + TRIAL_CHUNK).min(trials);
            let mut scratch = TrialScratch::new(union.dim, union.coords0.len());
            let mut accs = vec![McAcc::default(); sorted_ks.len()];
            let mut counts = vec![0u64; sorted_ks.len()];
            for t in lo..hi {
                let trial_seed = derive_seed(seed, seed_tags::TRIAL + t);
                counts.fill(0);
                {
                    let counts = &mut counts;
                    let sorted = &sorted_ks;
                    let mut run = 0u64;
                    let mut next = 0usize;
                    let sink = |k: usize, hit: bool| {
                        run += u64::from(hit);
                        while next < sorted.len() && sorted[next] == k {
                            counts[next] = run;
                            next += 1;
                        }
                    };
                    if scheme == Scheme::MinHash {
                        minhash_trial(&union, &mut scratch, trial_seed, k_max, sink);
                    } else {
                        circulant_trial(&union, &mut scratch, scheme, trial_seed, k_max, sink);
                    }
                }
                for (slot, &c) in counts.iter().enumerate() {
                    let k = sorted_ks[slot] as u64;
                    let e = c as i128 * f as i128 - a as i128 * k as i128;
                    let e2 = (e * e) as u128;
                    accs[slot].sum_c += c;
                    accs[slot].sum_e2 += e2;
                    accs[slot].sum_e4 += (e2 as f64) * (e2 as f64);
                }
            }
            accs
        })
        .collect();

    // combine chunk partials in chunk order
    let mut totals = vec![McAcc::default(); sorted_ks.len()];
    for chunk in &partials {
        for (t, p) in totals.iter_mut().zip(chunk) {
            t.absorb(p);
        }
    }

    let mut rows_sorted = Vec::with_capacity(sorted_ks.len());
    for (slot, &k) in sorted_ks.iter().enumerate() {
        let acc = &totals[slot];
        let n = trials as f64;
        let kf = (k as u64 * f) as f64;
        let mean = acc.sum_c as f64 / (n * k as f64);
        // exact integer bias numerator: sum over trials of (c*f - a*K)
        let bias_num = acc.sum_c as i128 * f as i128 - (a as i128 * k as i128) * trials as i128;
        let bias = bias_num as f64 / (n * kf);
        let bias2 = bias * bias;
        let mse = acc.sum_e2 as f64 / (n * kf * kf);
        let variance = mse - bias2;
        let stderr_mean = (variance.max(0.0) / n).sqrt();
        let m4 = acc.sum_e4 / (n * kf.powi(4));
        let stderr_mse = ((m4 - mse * mse).max(0.0) / n).sqrt();
        rows_sorted.push(McStats {
            k,
            scheme,
            mean,
            bias2,
            variance,
            mse,
            trials,
            stderr_mean,
            stderr_mse,
        });
    }
    // restore the caller's grid order
    let mut rows = vec![None; k_grid.len()];
    for (slot, &orig) in order.iter().enumerate() {
        rows[orig] = Some(rows_sorted[slot]);
    }
    Ok(rows.into_iter().map(Option::unwrap).collect())
}

/// Monte Carlo estimate of the k-th collision probability (fresh
/// permutations each trial) with its binomial standard error.
pub fn mc_per_k_collision(
    v: &BinaryVector,
    w: &BinaryVector,
    k: usize,
    scheme: Scheme,
    trials: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    let union = UnionSupport::new(v, w)?;
    validate_k_grid(&[k], scheme, union.dim)?;
    if trials == 0 {
        return Err(Error::InvalidSpec {
            reason: "trials must be >= 1".to_string(),
        });
    }
    let chunks = trials.div_ceil(TRIAL_CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * TRIAL_CHUNK;
            let hi = (lo + TRIAL_CHUNK).min(trials);
            let mut scratch = TrialScratch::new(union.dim, union.coords0.len());
            let mut local = 0u64;
            for t in lo..hi {
                let trial_seed = derive_seed(seed, seed_tags::TRIAL + t);
                let mut hit = false;
                let sink = |kk: usize, h: bool| {
                    if kk == k {
                        hit = h;
                    }
                };
                if scheme == Scheme::MinHash {
                    minhash_trial(&union, &mut scratch, trial_seed, k, sink);
                } else {
                    circulant_trial(&union, &mut scratch, scheme, trial_seed, k, sink);
                }
                local += u64::from(hit);
            }
            local
        })
        .sum();
    let p = hits as f64 / trials as f64;
    let stderr = (p * (1.0 - p) / trials as f64).sqrt();
    Ok((p, stderr))
}

/// Mean absolute error of one scheme at one sketch length, averaged over all
/// usable pairs and then over repetitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaeResultRow {
    pub k: usize,
    pub scheme: Scheme,
    pub mae: f64,
    pub reps: u64,
}

/// Output of [`mae_all_pairs`], including how many pairs were skipped
/// because a vector was empty (their similarity or sketch is undefined).
#[derive(Debug, Clone)]
pub struct MaeReport {
    pub rows: Vec<MaeResultRow>,
    pub pairs_used: u64,
    pub pairs_skipped: u64,
}

/// All-pairs MAE protocol: per repetition, one permutation set (built by
/// [`SketchParams`] from `derive_seed(seed, REP + rep)`) sketches every
/// vector at the largest grid `K`; the absolute error `|J_hat - J|` is
/// averaged over all usable pairs on each grid prefix, and pair averages
/// are averaged over repetitions.
pub fn mae_all_pairs(
    vectors: &[BinaryVector],
    k_grid: &[usize],
    schemes: &[Scheme],
    reps: u64,
    seed: u64,
) -> Result<MaeReport> {
    if schemes.is_empty() {
        return Err(Error::InvalidSpec {
            reason: "no schemes given".to_string(),
        });
    }
    if reps == 0 {
        return Err(Error::InvalidSpec {
            reason: "reps must be >= 1".to_string(),
        });
    }
    let usable: Vec<&BinaryVector> = vectors.iter().filter(|v| !v.is_empty()).collect();
    if usable.len() < 2 {
        return Err(Error::InvalidSpec {
            reason: format!("need at least 2 nonempty vectors, found {}", usable.len()),
        });
    }
    let dim = usable[0].dim();
    for v in &usable {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: v.dim(),
            });
        }
    }
    for &scheme in schemes {
        validate_k_grid(k_grid, scheme, dim)?;
    }
    let n_total = vectors.len() as u64;
    let n_usable = usable.len() as u64;
    let pairs_total = n_total * (n_total - 1) / 2;
    let pairs_used = n_usable * (n_usable - 1) / 2;

    // exact (a, f) per usable pair, in fixed pair order
    let mut pair_stats = Vec::with_capacity(pairs_used as usize);
    for i in 0..usable.len() {
        for j in (i + 1)..usable.len() {
            let s = exact_pair_stats(usable[i], usable[j])?;
            pair_stats.push((i, j, s.a(), s.f()));
        }
    }

    // grid slots sorted by K for prefix evaluation
    let mut k_sorted: Vec<(usize, usize)> = k_grid
        .iter()
        .copied()
        .enumerate()
        .map(|(slot, k)| (k, slot))
        .collect();
    k_sorted.sort_unstable();
    let k_max = *k_grid.iter().max().unwrap();

    let mut rows = Vec::with_capacity(schemes.len() * k_grid.len());
    for &scheme in schemes {
        // per rep, per grid slot: mean absolute error over pairs
        let rep_means: Vec<Vec<f64>> = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let rep_seed = derive_seed(seed, seed_tags::REP + rep);
                let hasher = SketchParams {
                    scheme,
                    k: k_max,
                    seed: rep_seed,
                }
                .build(dim)
                .expect("validated above");
                let sketches: Vec<Vec<u32>> = usable
                    .iter()
                    .map(|v| hasher.sketch(v).expect("nonempty").values().to_vec())
                    .collect();
                let mut err_sums = vec![0.0f64; k_grid.len()];
                for &(i, j, a, f) in &pair_stats {
                    let (si, sj) = (&sketches[i], &sketches[j]);
                    let mut run = 0u64;
                    let mut next = 0usize;
                    for k in 1..=k_max {
                        run += u64::from(si[k - 1] == sj[k - 1]);
                        while next < k_sorted.len() && k_sorted[next].0 == k {
                            let slot = k_sorted[next].1;
                            let e = (run * f) as i128 - (a * k as u64) as i128;
                            err_sums[slot] += e.unsigned_abs() as f64 / (k as u64 * f) as f64;
                            next += 1;
                        }
                    }
                }
                err_sums.iter().map(|s| s / pairs_used as f64).collect()
            })
            .collect();

        for (slot, &k) in k_grid.iter().enumerate() {
            // fixed rep order
            let mae = rep_means.iter().map(|r| r[slot]).sum::<f64>() / reps as f64;
            rows.push(MaeResultRow {
                k,
                scheme,
                mae,
                reps,
            });
        }
    }
    Ok(MaeReport {
        rows,
        pairs_used,
        pairs_skipped: pairs_total - pairs_used,
    })
}
