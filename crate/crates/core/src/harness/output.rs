use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

/// Leading CSV columns; scenario-specific columns follow `config_hash`.
pub const CSV_HEADER: &str = "scenario,method,x_name,x_value,metric,mean,stderr,trials,seed,config_hash";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: String,
    pub x_value: f64,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    /// Values for [`SweepResult::extra_columns`], same order.
    pub extras: Vec<f64>,
}

/// Aggregated output of one experiment: one row per (method, grid point).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub scenario: String,
    pub x_name: String,
    pub trials: usize,
    pub seed: u64,
    pub config_hash: String,
    pub extra_columns: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn rows_for<'a>(&'a self, method: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.method == method)
    }

    /// Index of an extra column by name.
    pub fn extra_index(&self, name: &str) -> Option<usize> {
        self.extra_columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        for c in &self.extra_columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                self.scenario,
                r.method,
                self.x_name,
                format_sig(r.x_value),
                r.metric,
                format_sig(r.mean),
                format_sig(r.stderr),
                self.trials,
                self.seed,
                self.config_hash
            );
            for v in &r.extras {
                out.push(',');
                out.push_str(&format_sig(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Formats with 12 significant digits, `%g` style: positional notation
/// for moderate exponents, scientific otherwise, trailing zeros trimmed.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
