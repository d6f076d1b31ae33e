use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ReportFormat;
use crate::mpm::Method;
use crate::{Error, Result};

pub const CSV_HEADER: &str =
    "scenario,J_m,K_m,beta,method,trial,capacity,wall_time_s,seed,neg_density_frac,fit_residual";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario: String,
    #[serde(rename = "J_m")]
    pub j_m: usize,
    #[serde(rename = "K_m")]
    pub k_m: usize,
    pub beta: f64,
    pub method: Method,
    pub trial: usize,
    pub capacity: f64,
    pub wall_time_s: f64,
    pub seed: u64,
    pub neg_density_frac: f64,
    pub fit_residual: f64,
}

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros dropped,
/// exponent notation only for very small or large magnitudes.
pub fn format_sig12(v: f64) -> String {
    const DIGITS: i32 = 12;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..DIGITS).contains(&exp) {
        format!(
            "{}e{}{:02}",
            trim_zeros(mant),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    } else {
        trim_zeros(&format!("{:.*}", (DIGITS - 1 - exp) as usize, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn rows_to_csv(rows: &[ReportRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            r.j_m,
            r.k_m,
            format_sig12(r.beta),
            r.method,
            r.trial,
            format_sig12(r.capacity),
            format_sig12(r.wall_time_s),
            r.seed,
            format_sig12(r.neg_density_frac),
            format_sig12(r.fit_residual),
        );
    }
    out
}

pub fn emit_report(rows: &[ReportRow], format: ReportFormat, path: &Path) -> Result<()> {
    let body = match format {
        ReportFormat::Csv => rows_to_csv(rows),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(rows)
                .map_err(|e| Error::Invariant(format!("report serialization: {e}")))?;
            s.push('\n');
            s
        }
    };
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Generic gnuplot script plotting `y_cols` against `x_col` (1-based column
/// numbers) of a comma-separated file with a header line.
pub fn write_gnuplot_script(
    csv: &Path,
    x_col: usize,
    y_cols: &[(usize, &str)],
    logscale: bool,
    out: &Path,
) -> Result<()> {
    let mut s = String::new();
    s.push_str("set datafile separator ','\nset key autotitle columnhead\nset grid\n");
    if logscale {
        s.push_str("set logscale xy\n");
    }
    let plots: Vec<String> = y_cols
        .iter()
        .map(|(c, title)| {
            format!(
                "'{}' using {}:{} with linespoints title '{}'",
                csv.display(),
                x_col,
                c,
                title
            )
        })
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    fs::write(out, s).map_err(|e| Error::io(out, e))
}
