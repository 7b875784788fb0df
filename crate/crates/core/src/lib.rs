//! MinHash and circulant C-MinHash sketches for Jaccard similarity
//! estimation on sparse binary vectors.
//!
//! The crate provides:
//!
//! * the classic K-permutation MinHash and the three circulant variants
//!   (`sigma_pi`, `pi_pi`, `zero_pi`) that re-use one permutation K times
//!   through right-rotations ([`sketch`]);
//! * exact pair statistics and the collision-fraction Jaccard estimator
//!   ([`estimators`]);
//! * an exact evaluator of the one-permutation estimator's per-shift
//!   collision expectation, validated against a brute-force all-permutations
//!   oracle ([`theory`]);
//! * Monte Carlo bias/variance/MSE and all-pairs MAE experiment engines
//!   with deterministic seeding ([`experiments`]);
//! * a plain-text sparse dataset format and CSV result writers ([`dataset`],
//!   [`report`]).

pub mod dataset;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod permute;
pub mod report;
pub mod sketch;
pub mod theory;
pub mod vector;

pub use error::{Error, Result};
pub use estimators::{estimate_jaccard, exact_pair_stats, PairStats};
pub use permute::{circulant_index, circulant_index_inverse, Permutation};
pub use sketch::{Scheme, Sketch, SketchParams};
pub use theory::{LocationVector, PointClass, TheoryEvaluator};
pub use vector::BinaryVector;
