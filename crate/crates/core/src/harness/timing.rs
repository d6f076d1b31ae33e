use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{direct_profile, ExperimentConfig};
use crate::baseline::estimate_capacity_cdm;
use crate::mpm::{estimate_capacity_mpm, Method};
use crate::par::Execution;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingEntry {
    pub size: usize,
    pub k_m: usize,
    pub method: Method,
    /// Median over repetitions.
    pub median_s: f64,
    pub samples_s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingTable {
    pub entries: Vec<TimingEntry>,
}

impl TimingTable {
    pub fn for_method(&self, method: Method) -> Vec<&TimingEntry> {
        self.entries.iter().filter(|e| e.method == method).collect()
    }

    pub fn median(&self, method: Method, size: usize) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.method == method && e.size == size)
            .map(|e| e.median_s)
    }

    /// Fitted log-log exponent for one method.
    pub fn slope(&self, method: Method) -> Result<f64> {
        let e = self.for_method(method);
        let sizes: Vec<f64> = e.iter().map(|e| e.size as f64).collect();
        let times: Vec<f64> = e.iter().map(|e| e.median_s).collect();
        fit_complexity_slope(&sizes, &times)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("J_m,K_m,method,median_s\n");
        for e in &self.entries {
            s.push_str(&format!(
                "{},{},{},{}\n",
                e.size,
                e.k_m,
                e.method,
                super::format_sig12(e.median_s)
            ));
        }
        s
    }
}

/// Wall-clock sweep over cluster sizes in direct mode.
///
/// Each estimator runs `config.trials` trials, sequentially, `config.reps`
/// times per size; the median is kept. `K_m` follows the first configured
/// beta (or `users / bs` when a user count is set).
pub fn sweep_sizes(config: &ExperimentConfig, sizes: &[usize]) -> Result<TimingTable> {
    if sizes.len() < 4 {
        return Err(Error::param("a timing sweep needs at least 4 sizes"));
    }
    let lo = *sizes.iter().min().unwrap();
    let hi = *sizes.iter().max().unwrap();
    if lo == 0 || hi < 8 * lo {
        return Err(Error::param(
            "timing sizes must span at least a factor of 8",
        ));
    }
    config.validate()?;
    let ratio = match config.users {
        Some(k) => k as f64 / config.bs as f64,
        None => config.betas[0],
    };
    let params = config.mpm_params();
    let mut entries = Vec::new();
    for &size in sizes {
        let k_m = ((ratio * size as f64).round() as usize).max(1);
        let profile = direct_profile(config, size, k_m)?;
        for &method in &config.methods {
            let mut samples = Vec::with_capacity(config.reps.max(1));
            for _ in 0..config.reps.max(1) {
                let t0 = Instant::now();
                match method {
                    Method::Mpm => {
                        estimate_capacity_mpm(
                            &profile,
                            &params,
                            config.seed,
                            Execution::Sequential,
                        )?;
                    }
                    Method::Cdm => {
                        estimate_capacity_cdm(
                            &profile,
                            params.trials,
                            config.seed,
                            Execution::Sequential,
                        )?;
                    }
                }
                samples.push(t0.elapsed().as_secs_f64());
            }
            entries.push(TimingEntry {
                size,
                k_m,
                method,
                median_s: median(&samples),
                samples_s: samples,
            });
        }
    }
    Ok(TimingTable { entries })
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Least-squares slope of `log(time)` against `log(size)`.
pub fn fit_complexity_slope(sizes: &[f64], times: &[f64]) -> Result<f64> {
    if sizes.len() != times.len() {
        return Err(Error::param("sizes and times differ in length"));
    }
    if sizes.len() < 2 {
        return Err(Error::param("slope fit needs at least two points"));
    }
    if sizes.iter().chain(times).any(|v| !(*v > 0.0)) {
        return Err(Error::param("slope fit needs positive sizes and times"));
    }
    let xs: Vec<f64> = sizes.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = times.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::param("slope fit needs at least two distinct sizes"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}
