//! Command-line surface for sketching, exact theory evaluation, and
//! reproducible Monte Carlo experiments.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 resource-budget
//! refusal (hypergeometric term blowup or an oracle dimension above the D!
//! cap). All randomness flows from `--seed`; `--threads` (or `CMH_THREADS`)
//! only changes speed, never output bytes.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use cminhash::dataset::{load_sparse_dataset, write_sparse_dataset, SparseDataset};
use cminhash::experiments::{
    mae_all_pairs, mc_bias_mse, mc_per_k_collision, synth_dataset, synth_pair, Placement,
    SyntheticPairSpec,
};
use cminhash::report::{results_csv_string, CsvRecord, TheoryAggregateRow, TheoryPerKRow};
use cminhash::theory::{bruteforce_collision_expectations, LocationVector, TheoryEvaluator};
use cminhash::{estimate_jaccard, exact_pair_stats, BinaryVector, Error, Scheme, SketchParams};

#[derive(Parser)]
#[command(
    name = "cminhash",
    version,
    about = "MinHash and circulant C-MinHash: sketching, exact theory, Monte Carlo experiments",
    after_help = "Exit codes: 0 ok, 1 usage error, 2 data error, 3 resource-budget refusal."
)]
struct Cli {
    /// Worker threads (fallback: CMH_THREADS, then all cores). Affects
    /// speed only; outputs are byte-identical for any value.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

/// Inputs selecting a vector pair: either two ids of a dataset file or a
/// synthetic (D, f, a, placement) specification.
#[derive(Args)]
struct PairSource {
    /// Dataset file to take vectors from
    #[arg(long, requires = "ids")]
    data: Option<PathBuf>,

    /// Two 0-based vector ids, e.g. --ids 0,3
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    ids: Option<Vec<usize>>,

    /// Synthetic pair: dimension
    #[arg(long = "D", conflicts_with = "data")]
    dim: Option<u32>,

    /// Synthetic pair: number of coordinates where at least one vector is 1
    #[arg(long)]
    f: Option<u32>,

    /// Synthetic pair: number of coordinates where both vectors are 1
    #[arg(long)]
    a: Option<u32>,

    /// Synthetic pair placement: random | structured
    #[arg(long, default_value = "random")]
    placement: String,
}

impl PairSource {
    fn resolve(&self, seed: u64) -> Result<(BinaryVector, BinaryVector), Error> {
        match (&self.data, self.dim) {
            (Some(path), _) => {
                let ids = self.ids.as_ref().expect("clap enforces ids with data");
                if ids.len() != 2 {
                    return Err(Error::InvalidSpec {
                        reason: format!("--ids needs exactly two ids, got {}", ids.len()),
                    });
                }
                let ds = load_sparse_dataset(path)?;
                let fetch = |id: usize| {
                    ds.get(id).cloned().ok_or_else(|| Error::InvalidSpec {
                        reason: format!("vector id {id} out of range (dataset has {})", ds.len()),
                    })
                };
                Ok((fetch(ids[0])?, fetch(ids[1])?))
            }
            (None, Some(dim)) => {
                let (f, a) = match (self.f, self.a) {
                    (Some(f), Some(a)) => (f, a),
                    _ => {
                        return Err(Error::InvalidSpec {
                            reason: "synthetic pair needs --f and --a".to_string(),
                        })
                    }
                };
                let placement = Placement::from_str(&self.placement)?;
                synth_pair(&SyntheticPairSpec {
                    dim,
                    f,
                    a,
                    placement,
                    seed,
                })
            }
            (None, None) => Err(Error::InvalidSpec {
                reason: "give either --data/--ids or --D/--f/--a".to_string(),
            }),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sketch every vector of a dataset file (CSV: id,k,value)
    Hash {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        scheme: Scheme,
        #[arg(long = "K")]
        k: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output path (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Estimate the Jaccard similarity between two vectors of a dataset
    Estimate {
        #[arg(long)]
        data: PathBuf,
        /// Two 0-based vector ids, e.g. --ids 0,3
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        ids: Vec<usize>,
        #[arg(long)]
        scheme: Scheme,
        #[arg(long = "K")]
        k: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Exact expectation of the one-permutation estimator: mean and bias^2
    /// (CSV: K,mean,bias2), or per-shift expectations with --per-k
    /// (CSV: k,expectation)
    Theory {
        #[command(flatten)]
        pair: PairSource,
        #[arg(long = "K")]
        k: usize,
        /// Emit one row per shift instead of the aggregate
        #[arg(long = "per-k", default_value_t = false)]
        per_k: bool,
        /// Term budget before the evaluator refuses the instance
        #[arg(long, default_value_t = 100_000_000)]
        budget: u128,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Brute-force collision expectations over all D! permutations, D <= 10
    /// (CSV: k,expectation)
    Oracle {
        #[command(flatten)]
        pair: PairSource,
        #[arg(long = "K")]
        k: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Monte Carlo bias^2/variance/MSE over a K grid
    /// (CSV: K,scheme,mean,bias2,variance,mse,trials,stderr_mean), or the
    /// collision frequency of a single shift with --per-k
    /// (CSV: k,scheme,estimate,stderr,trials)
    Mc {
        #[command(flatten)]
        pair: PairSource,
        #[arg(long)]
        scheme: Scheme,
        /// Sketch lengths, e.g. --K 1,4,16,64
        #[arg(long = "K", value_delimiter = ',', num_args = 1..)]
        k: Vec<usize>,
        /// Estimate a single shift's collision frequency instead
        #[arg(long = "per-k")]
        per_k: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// All-pairs mean absolute error over a dataset (CSV: K,scheme,mae,reps)
    Mae {
        #[arg(long)]
        data: PathBuf,
        #[arg(long = "K", value_delimiter = ',', num_args = 1..)]
        k: Vec<usize>,
        /// Schemes to run, e.g. --schemes pi_pi,sigma_pi
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        schemes: Vec<Scheme>,
        #[arg(long, default_value_t = 10)]
        reps: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Emit a synthetic dataset file: a (D,f,a) pair, or n mixed-density
    /// vectors with --n
    Synth {
        #[arg(long = "D")]
        dim: u32,
        /// Pair mode: union count
        #[arg(long, conflicts_with = "n")]
        f: Option<u32>,
        /// Pair mode: intersection count
        #[arg(long, requires = "f")]
        a: Option<u32>,
        #[arg(long, default_value = "random")]
        placement: String,
        /// Dataset mode: number of vectors
        #[arg(long)]
        n: Option<usize>,
        /// Dataset mode: density range
        #[arg(long, default_value_t = 0.02)]
        density_lo: f64,
        #[arg(long, default_value_t = 0.5)]
        density_hi: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    let threads = cli.threads.or_else(|| {
        std::env::var("CMH_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    let run_result = match threads {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(cli.command)),
            Err(e) => {
                eprintln!("error: failed to build thread pool: {e}");
                return ExitCode::from(1);
            }
        },
        _ => run(cli.command),
    };

    match run_result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 1 = bad arguments, 2 = bad data, 3 = resource refusal.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded { .. } | Error::OracleDimension { .. } => 3,
        Error::InvalidSpec { .. } | Error::KOutOfRange { .. } | Error::InvalidDimension { .. } => 1,
        _ => 2,
    }
}

fn emit(text: String, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_rows<R: CsvRecord>(rows: &[R], out: Option<&PathBuf>) -> Result<(), Error> {
    emit(results_csv_string(rows), out)
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Hash {
            data,
            scheme,
            k,
            seed,
            out,
        } => {
            let ds = load_sparse_dataset(&data)?;
            let hasher = SketchParams { scheme, k, seed }.build(ds.dim())?;
            let mut text = String::from("id,k,value\n");
            for (id, v) in ds.vectors().iter().enumerate() {
                if v.is_empty() {
                    continue;
                }
                let sketch = hasher.sketch(v)?;
                for (i, &h) in sketch.values().iter().enumerate() {
                    text.push_str(&format!("{id},{},{h}\n", i + 1));
                }
            }
            emit(text, out.as_ref())
        }

        Command::Estimate {
            data,
            ids,
            scheme,
            k,
            seed,
            out,
        } => {
            if ids.len() != 2 {
                return Err(Error::InvalidSpec {
                    reason: format!("--ids needs exactly two ids, got {}", ids.len()),
                });
            }
            let ds = load_sparse_dataset(&data)?;
            let fetch = |id: usize| {
                ds.get(id).ok_or_else(|| Error::InvalidSpec {
                    reason: format!("vector id {id} out of range (dataset has {})", ds.len()),
                })
            };
            let (v, w) = (fetch(ids[0])?, fetch(ids[1])?);
            let hasher = SketchParams { scheme, k, seed }.build(ds.dim())?;
            let estimate = estimate_jaccard(&hasher.sketch(v)?, &hasher.sketch(w)?)?;
            let exact = exact_pair_stats(v, w)?.jaccard();
            let text = format!(
                "estimate,exact_j\n{},{}\n",
                cminhash::report::format_float(estimate),
                cminhash::report::format_float(exact)
            );
            emit(text, out.as_ref())
        }

        Command::Theory {
            pair,
            k,
            per_k,
            budget,
            seed,
            out,
        } => {
            let (v, w) = pair.resolve(seed)?;
            let x = LocationVector::from_pair(&v, &w)?;
            let ev = TheoryEvaluator::with_budget(budget);
            if per_k {
                let rows: Vec<TheoryPerKRow> = ev
                    .per_k_expectations(&x, k)?
                    .into_iter()
                    .zip(1u32..)
                    .map(|(expectation, k)| TheoryPerKRow { k, expectation })
                    .collect();
                emit_rows(&rows, out.as_ref())
            } else {
                let mean = ev.estimator_mean(&x, k)?;
                let j = x.a() as f64 / x.f() as f64;
                let rows = [TheoryAggregateRow {
                    k,
                    mean,
                    bias2: (mean - j) * (mean - j),
                }];
                emit_rows(&rows, out.as_ref())
            }
        }

        Command::Oracle { pair, k, seed, out } => {
            let (v, w) = pair.resolve(seed)?;
            let x = LocationVector::from_pair(&v, &w)?;
            if k == 0 || k > x.dim() as usize {
                return Err(Error::KOutOfRange { k, dim: x.dim() });
            }
            let all = bruteforce_collision_expectations(&x)?;
            let rows: Vec<TheoryPerKRow> = all
                .into_iter()
                .take(k)
                .zip(1u32..)
                .map(|(r, k)| TheoryPerKRow {
                    k,
                    expectation: *r.numer() as f64 / *r.denom() as f64,
                })
                .collect();
            emit_rows(&rows, out.as_ref())
        }

        Command::Mc {
            pair,
            scheme,
            k,
            per_k,
            trials,
            seed,
            out,
        } => {
            let (v, w) = pair.resolve(seed)?;
            if let Some(shift) = per_k {
                let (estimate, stderr) = mc_per_k_collision(&v, &w, shift, scheme, trials, seed)?;
                let text = format!(
                    "k,scheme,estimate,stderr,trials\n{shift},{scheme},{},{},{trials}\n",
                    cminhash::report::format_float(estimate),
                    cminhash::report::format_float(stderr),
                );
                emit(text, out.as_ref())
            } else {
                if k.is_empty() {
                    return Err(Error::InvalidSpec {
                        reason: "--K grid required unless --per-k is given".to_string(),
                    });
                }
                let rows = mc_bias_mse(&v, &w, &k, scheme, trials, seed)?;
                emit_rows(&rows, out.as_ref())
            }
        }

        Command::Mae {
            data,
            k,
            schemes,
            reps,
            seed,
            out,
        } => {
            let ds = load_sparse_dataset(&data)?;
            let report = mae_all_pairs(ds.vectors(), &k, &schemes, reps, seed)?;
            if report.pairs_skipped > 0 {
                eprintln!(
                    "note: skipped {} pair(s) involving empty vectors",
                    report.pairs_skipped
                );
            }
            emit_rows(&report.rows, out.as_ref())
        }

        Command::Synth {
            dim,
            f,
            a,
            placement,
            n,
            density_lo,
            density_hi,
            seed,
            out,
        } => {
            let vectors = match (f, n) {
                (Some(f), None) => {
                    let a = a.ok_or_else(|| Error::InvalidSpec {
                        reason: "pair mode needs --a".to_string(),
                    })?;
                    let placement = Placement::from_str(&placement)?;
                    let (v, w) = synth_pair(&SyntheticPairSpec {
                        dim,
                        f,
                        a,
                        placement,
                        seed,
                    })?;
                    vec![v, w]
                }
                (None, Some(n)) => synth_dataset(n, dim, density_lo, density_hi, seed)?,
                _ => {
                    return Err(Error::InvalidSpec {
                        reason: "give --f/--a (pair mode) or --n (dataset mode)".to_string(),
                    })
                }
            };
            let ds = SparseDataset::new(dim, vectors)?;
            match out {
                Some(path) => write_sparse_dataset(&ds, path),
                None => {
                    print!("{}", cminhash::dataset::dataset_to_string(&ds));
                    Ok(())
                }
            }
        }
    }
}
