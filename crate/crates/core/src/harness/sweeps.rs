use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{build_scenario, format_sig12, ExperimentConfig};
use crate::baseline::{estimate_capacity_cdm, relative_error};
use crate::mpm::{estimate_capacity_mpm, MpmParams};
use crate::par::Execution;
use crate::{Error, Result};

/// Relative MPM error against CDM, one row per swept parameter value and one
/// column per beta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    /// Name of the swept parameter (`eta` or `N`).
    pub parameter: String,
    pub values: Vec<f64>,
    pub betas: Vec<f64>,
    /// `errors[row][col]`, as fractions.
    pub errors: Vec<Vec<f64>>,
}

impl ErrorTable {
    pub fn column(&self, beta_index: usize) -> Vec<f64> {
        self.errors.iter().map(|r| r[beta_index]).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.parameter.clone();
        for b in &self.betas {
            let _ = write!(s, ",beta={}", format_sig12(*b));
        }
        s.push('\n');
        for (v, row) in self.values.iter().zip(&self.errors) {
            s.push_str(&format_sig12(*v));
            for e in row {
                let _ = write!(s, ",{}", format_sig12(*e));
            }
            s.push('\n');
        }
        s
    }

    /// Fixed-width table with errors in percent.
    pub fn to_text(&self) -> String {
        let mut s = format!("{:>10}", self.parameter);
        for b in &self.betas {
            let _ = write!(s, " {:>10}", format!("b={}", format_sig12(*b)));
        }
        s.push('\n');
        for (v, row) in self.values.iter().zip(&self.errors) {
            let _ = write!(s, "{:>10}", format_sig12(*v));
            for e in row {
                let _ = write!(s, " {:>9.2}%", 100.0 * e);
            }
            s.push('\n');
        }
        s
    }
}

fn sweep(
    config: &ExperimentConfig,
    parameter: &str,
    values: &[f64],
    params_for: impl Fn(f64) -> MpmParams,
) -> Result<ErrorTable> {
    if values.is_empty() {
        return Err(Error::param(format!("empty {parameter} grid")));
    }
    config.validate()?;
    let targets = config.user_targets();
    let mut errors = vec![Vec::with_capacity(targets.len()); values.len()];
    for &(k, beta) in &targets {
        let scenario = build_scenario(config, k, beta)?;
        let p = &scenario.profile;
        let cdm = estimate_capacity_cdm(p, config.trials, config.seed, Execution::Parallel)?;
        for (row, &v) in errors.iter_mut().zip(values) {
            let params = params_for(v);
            params.validate()?;
            let mpm = estimate_capacity_mpm(p, &params, config.seed, Execution::Parallel)?;
            row.push(relative_error(&mpm, &cdm)?);
        }
    }
    Ok(ErrorTable {
        parameter: parameter.to_string(),
        values: values.to_vec(),
        betas: targets.iter().map(|t| t.1).collect(),
        errors,
    })
}

/// Error of MPM for each `eta`, other settings from `config`.
pub fn eta_sweep(config: &ExperimentConfig, etas: &[f64]) -> Result<ErrorTable> {
    let base = config.mpm_params();
    sweep(config, "eta", etas, |eta| MpmParams { eta, ..base })
}

/// Error of MPM for each polynomial order `N`.
pub fn moments_sweep(config: &ExperimentConfig, orders: &[usize]) -> Result<ErrorTable> {
    let base = config.mpm_params();
    let values: Vec<f64> = orders.iter().map(|&n| n as f64).collect();
    sweep(config, "N", &values, |n| MpmParams {
        order: n as usize,
        ..base
    })
}
