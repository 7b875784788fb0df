//! CSV result serialization.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), enough to
//! round-trip every f64 bit pattern, so files produced from identical runs
//! are byte-identical. Rounding for display is the consumer's job.

use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::experiments::{MaeResultRow, McStats};

/// A row type with a fixed CSV schema.
pub trait CsvRecord {
    fn header() -> &'static str;
    fn write_fields(&self, out: &mut String);
}

/// 17 significant digits, scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl CsvRecord for McStats {
    fn header() -> &'static str {
        "K,scheme,mean,bias2,variance,mse,trials,stderr_mean"
    }

    fn write_fields(&self, out: &mut String) {
        out.push_str(&self.k.to_string());
        out.push(',');
        out.push_str(self.scheme.as_str());
        for x in [self.mean, self.bias2, self.variance, self.mse] {
            out.push(',');
            out.push_str(&format_float(x));
        }
        out.push(',');
        out.push_str(&self.trials.to_string());
        out.push(',');
        out.push_str(&format_float(self.stderr_mean));
    }
}

impl CsvRecord for MaeResultRow {
    fn header() -> &'static str {
        "K,scheme,mae,reps"
    }

    fn write_fields(&self, out: &mut String) {
        out.push_str(&self.k.to_string());
        out.push(',');
        out.push_str(self.scheme.as_str());
        out.push(',');
        out.push_str(&format_float(self.mae));
        out.push(',');
        out.push_str(&self.reps.to_string());
    }
}

/// One exact per-shift collision expectation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryPerKRow {
    pub k: u32,
    pub expectation: f64,
}

impl CsvRecord for TheoryPerKRow {
    fn header() -> &'static str {
        "k,expectation"
    }

    fn write_fields(&self, out: &mut String) {
        out.push_str(&self.k.to_string());
        out.push(',');
        out.push_str(&format_float(self.expectation));
    }
}

/// Exact estimator mean and squared bias at one sketch length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryAggregateRow {
    pub k: usize,
    pub mean: f64,
    pub bias2: f64,
}

impl CsvRecord for TheoryAggregateRow {
    fn header() -> &'static str {
        "K,mean,bias2"
    }

    fn write_fields(&self, out: &mut String) {
        out.push_str(&self.k.to_string());
        out.push(',');
        out.push_str(&format_float(self.mean));
        out.push(',');
        out.push_str(&format_float(self.bias2));
    }
}

/// Renders header plus rows; an empty slice gives a header-only file.
pub fn results_csv_string<R: CsvRecord>(rows: &[R]) -> String {
    let mut out = String::new();
    out.push_str(R::header());
    out.push('\n');
    for row in rows {
        row.write_fields(&mut out);
        out.push('\n');
    }
    out
}

/// Writes rows as CSV to `path`.
pub fn write_results_csv<R: CsvRecord>(rows: &[R], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, results_csv_string(rows))?;
    Ok(())
}
