use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::FadingParams;
use crate::mpm::{Method, MpmParams, DEFAULT_ETA, DEFAULT_ORDER, DEFAULT_TRIALS};
use crate::numkernel::{DEFAULT_POWER_ITERS, DEFAULT_QUAD_NODES};
use crate::scenario::{NodeDistribution, Shape};
use crate::{Error, Result};

/// How the measured cluster is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Whole network of `M * J_m` BSs, clustered; the central cluster is measured.
    Full,
    /// One disc-shaped cluster of exactly `J_m` BSs and `K_m` users, with
    /// out-of-cluster users in a surrounding annulus.
    Direct,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" | "network" => Ok(Mode::Full),
            "direct" | "cluster" => Ok(Mode::Direct),
            other => Err(Error::param(format!("unknown mode '{other}'"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Full => "full",
            Mode::Direct => "direct",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogBase {
    Natural,
    Two,
}

impl LogBase {
    /// Converts a natural-log quantity into this base.
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            LogBase::Natural => nats,
            LogBase::Two => nats / std::f64::consts::LN_2,
        }
    }
}

impl FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "e" | "ln" | "natural" | "nat" => Ok(LogBase::Natural),
            "2" | "bits" | "log2" => Ok(LogBase::Two),
            other => Err(Error::param(format!("unknown log base '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::param(format!("unknown report format '{other}'"))),
        }
    }
}

/// Experiment description. Defaults follow the reference network setting:
/// D = 2000 m, d0 = 10 m, d1 = 50 m, P = 1 W, N0 = 1e-12 W, M = 25,
/// 20 trials, eta = 4e-3, N = 3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub shape: Shape,
    /// Side length (square) or diameter (circle), meters.
    pub scale: f64,
    pub distribution: NodeDistribution,
    pub clusters: usize,
    /// Target BS count of the measured cluster.
    pub bs: usize,
    /// Target user count of the measured cluster; overrides `betas` when set.
    pub users: Option<usize>,
    pub betas: Vec<f64>,
    pub methods: Vec<Method>,
    pub trials: usize,
    pub eta: f64,
    pub order: usize,
    pub power_iters: usize,
    pub quad_nodes: usize,
    pub seed: u64,
    pub mode: Mode,
    /// Out-of-cluster users per in-cluster user in direct mode.
    pub ring_factor: f64,
    pub fading: FadingParams,
    pub log_base: LogBase,
    /// Whether report rows carry measured wall times. When false the column
    /// is written as 0 so reports are byte-reproducible.
    pub record_timing: bool,
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub etas: Vec<f64>,
    pub orders: Vec<usize>,
    pub draws: usize,
    pub out: Option<PathBuf>,
    pub format: ReportFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            shape: Shape::Square,
            scale: 2000.0,
            distribution: NodeDistribution::Uniform,
            clusters: 25,
            bs: 200,
            users: None,
            betas: vec![2.0],
            methods: vec![Method::Mpm, Method::Cdm],
            trials: DEFAULT_TRIALS,
            eta: DEFAULT_ETA,
            order: DEFAULT_ORDER,
            power_iters: DEFAULT_POWER_ITERS,
            quad_nodes: DEFAULT_QUAD_NODES,
            seed: 1,
            mode: Mode::Full,
            ring_factor: 8.0,
            fading: FadingParams::default(),
            log_base: LogBase::Natural,
            record_timing: true,
            sizes: vec![100, 200, 400, 800],
            reps: 3,
            etas: vec![0.0, 0.5e-3, 1e-3, 2e-3, 4e-3, 8e-3, 10e-3, 20e-3],
            orders: vec![1, 2, 3],
            draws: 2000,
            out: None,
            format: ReportFormat::Csv,
        }
    }
}

impl ExperimentConfig {
    pub fn mpm_params(&self) -> MpmParams {
        MpmParams {
            eta: self.eta,
            order: self.order,
            trials: self.trials,
            power_iters: self.power_iters,
            quad_nodes: self.quad_nodes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0) {
            return Err(Error::param("D must be positive"));
        }
        if self.clusters == 0 {
            return Err(Error::param("M must be at least 1"));
        }
        if self.bs == 0 {
            return Err(Error::param("need at least one BS per cluster"));
        }
        if self.users.is_none() && self.betas.is_empty() {
            return Err(Error::param(
                "give either a user count or at least one beta",
            ));
        }
        if let Some(b) = self.betas.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::param(format!("beta must be positive, got {b}")));
        }
        if self.methods.is_empty() {
            return Err(Error::param("no methods selected"));
        }
        if !(self.ring_factor >= 0.0) {
            return Err(Error::param("ring factor must be nonnegative"));
        }
        self.fading.validate()?;
        self.mpm_params().validate()
    }

    /// One `(K_m target, beta label)` per scenario.
    pub fn user_targets(&self) -> Vec<(usize, f64)> {
        match self.users {
            Some(k) => vec![(k, k as f64 / self.bs as f64)],
            None => self
                .betas
                .iter()
                .map(|&b| ((b * self.bs as f64).round() as usize, b))
                .collect(),
        }
    }

    /// Applies one `key = value` setting. Keys match the CLI flag names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::param(format!("invalid value '{value}' for {what}"));
        let v = value.trim();
        match key.trim().trim_start_matches("--") {
            "shape" => self.shape = v.parse()?,
            "dist" | "distribution" => self.distribution = v.parse()?,
            "sigma" => {
                let s: f64 = v.parse().map_err(|_| bad("sigma"))?;
                self.distribution = NodeDistribution::TruncatedNormal { sigma_frac: s };
            }
            "D" | "scale" => self.scale = v.parse().map_err(|_| bad("D"))?,
            "M" | "clusters" => self.clusters = v.parse().map_err(|_| bad("M"))?,
            "bs" => self.bs = v.parse().map_err(|_| bad("bs"))?,
            "users" => self.users = Some(v.parse().map_err(|_| bad("users"))?),
            "beta" | "betas" => {
                self.betas = parse_list(v).map_err(|_| bad("beta"))?;
                self.users = None;
            }
            "methods" => self.methods = parse_list(v)?,
            "trials" => self.trials = v.parse().map_err(|_| bad("trials"))?,
            "eta" => self.eta = v.parse().map_err(|_| bad("eta"))?,
            "moments" | "order" => self.order = v.parse().map_err(|_| bad("moments"))?,
            "power-iters" => self.power_iters = v.parse().map_err(|_| bad("power-iters"))?,
            "quad-nodes" => self.quad_nodes = v.parse().map_err(|_| bad("quad-nodes"))?,
            "seed" => self.seed = v.parse().map_err(|_| bad("seed"))?,
            "mode" => self.mode = v.parse()?,
            "ring-factor" => self.ring_factor = v.parse().map_err(|_| bad("ring-factor"))?,
            "d0" => self.fading.d0 = v.parse().map_err(|_| bad("d0"))?,
            "d1" => self.fading.d1 = v.parse().map_err(|_| bad("d1"))?,
            "power" | "P" => self.fading.power = v.parse().map_err(|_| bad("power"))?,
            "noise" | "N0" => self.fading.noise = v.parse().map_err(|_| bad("noise"))?,
            "log-base" => self.log_base = v.parse()?,
            "timing" => self.record_timing = parse_bool(v).ok_or_else(|| bad("timing"))?,
            "sizes" => self.sizes = parse_list(v).map_err(|_| bad("sizes"))?,
            "reps" => self.reps = v.parse().map_err(|_| bad("reps"))?,
            "etas" => self.etas = parse_list(v).map_err(|_| bad("etas"))?,
            "orders" => self.orders = parse_list(v).map_err(|_| bad("orders"))?,
            "draws" => self.draws = v.parse().map_err(|_| bad("draws"))?,
            "out" => self.out = Some(PathBuf::from(v)),
            "format" => self.format = v.parse()?,
            other => return Err(Error::param(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Reads a flat `key = value` file; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_str(&text)
    }

    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::param(format!("line {}: expected key = value", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Some(true),
        "0" | "false" | "no" | "off" => Some(false),
        _ => None,
    }
}

pub fn parse_list<T: FromStr>(v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::param(format!("cannot parse list item '{s}'")))
        })
        .collect()
}
