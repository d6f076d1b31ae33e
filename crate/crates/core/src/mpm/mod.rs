//! Moment passing method.
//!
//! Capacity per BS is approximated by `int log(1 + x) f(x) dx`, where `f` is a
//! Marčenko–Pastur density with a degree-`N` polynomial correction. The
//! polynomial is chosen so that `f` reproduces the closed-form spectral
//! moments of the SINR matrix (computed once from the profile), while the
//! upper support edge comes from a power-method estimate on each fading draw
//! and the lower edge is `eta` times the upper.

mod lsd;
mod moments;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use lsd::{
    capacity_integral, fit_alpha, lsd_density, mp_coefficient_table, AlphaFit, FittedLsd, LsdModel,
    MAX_FIT_CONDITION,
};
pub use moments::{
    moments, monte_carlo_moments, profile_moments, theta_matrix, MomentVector, MAX_ORDER,
};

use crate::channel::{gain_realization, ChannelProfile};
use crate::numkernel::{
    power_method_max_eig, sample_complex_gaussian, ChebyshevRule, RngStream, DEFAULT_POWER_ITERS,
    DEFAULT_QUAD_NODES,
};
use crate::par::{self, Execution};
use crate::{Error, Result};

/// Stream id for per-trial fading draws, shared by every estimator.
pub const TRIAL_STREAM: u64 = 3;
/// Stream id for the Monte-Carlo moment oracle.
pub const ORACLE_STREAM: u64 = 4;
pub const DEFAULT_ETA: f64 = 4e-3;
pub const DEFAULT_ORDER: usize = 3;
pub const DEFAULT_TRIALS: usize = 20;

/// Stream of trial `trial` under `seed`. Every estimator draws its fading
/// matrix first from this stream, so trials with equal indices see identical
/// `G` across methods.
pub fn trial_stream(seed: u64, trial: usize) -> RngStream {
    RngStream::new(seed, TRIAL_STREAM).derive(0, trial as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mpm,
    Cdm,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Mpm => "mpm",
            Method::Cdm => "cdm",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mpm" => Ok(Method::Mpm),
            "cdm" => Ok(Method::Cdm),
            other => Err(Error::param(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    /// Natural-log capacity per BS for this draw.
    pub value: f64,
    pub wall_time_s: f64,
    /// Fraction of quadrature nodes with negative fitted density (MPM only).
    pub neg_density_frac: f64,
    /// Moment-system residual (MPM only).
    pub fit_residual: f64,
}

impl TrialOutcome {
    pub fn plain(value: f64, wall_time_s: f64) -> Self {
        Self {
            value,
            wall_time_s,
            neg_density_frac: 0.0,
            fit_residual: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub method: Method,
    /// Mean over trials, natural-log units per channel use per BS.
    pub value: f64,
    pub std_error: f64,
    pub trials: Vec<TrialOutcome>,
    pub wall_time_s: f64,
}

impl CapacityEstimate {
    pub fn from_trials(method: Method, trials: Vec<TrialOutcome>, wall_time_s: f64) -> Self {
        let n = trials.len() as f64;
        let value = trials.iter().map(|t| t.value).sum::<f64>() / n;
        let std_error = if trials.len() > 1 {
            let var = trials
                .iter()
                .map(|t| (t.value - value).powi(2))
                .sum::<f64>()
                / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Self {
            method,
            value,
            std_error,
            trials,
            wall_time_s,
        }
    }

    pub fn per_trial(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.value).collect()
    }
}

/// Collects per-trial results in order, reporting the first failure with its
/// trial index.
pub(crate) fn gather_trials(results: Vec<Result<TrialOutcome>>) -> Result<Vec<TrialOutcome>> {
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::Trial {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpmParams {
    /// Ratio of the lower to the upper support edge.
    pub eta: f64,
    /// Polynomial order `N` (at most 3).
    pub order: usize,
    pub trials: usize,
    pub power_iters: usize,
    pub quad_nodes: usize,
}

impl Default for MpmParams {
    fn default() -> Self {
        Self {
            eta: DEFAULT_ETA,
            order: DEFAULT_ORDER,
            trials: DEFAULT_TRIALS,
            power_iters: DEFAULT_POWER_ITERS,
            quad_nodes: DEFAULT_QUAD_NODES,
        }
    }
}

impl MpmParams {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("need at least one trial"));
        }
        if !(0.0..1.0).contains(&self.eta) {
            return Err(Error::param(format!(
                "eta must lie in [0, 1), got {}",
                self.eta
            )));
        }
        if self.order > MAX_ORDER {
            return Err(Error::UnsupportedOrder(self.order));
        }
        if self.power_iters == 0 || self.quad_nodes == 0 {
            return Err(Error::param(
                "power iterations and quadrature nodes must be positive",
            ));
        }
        Ok(())
    }
}

/// Capacity of one profile by the moment passing method.
///
/// Moments come from the profile once; each trial then draws `G`, estimates
/// the top eigenvalue of `(Q ∘ G)(Q ∘ G)*` by power iteration, fits the
/// corrected density on `[eta b, b]` and integrates `log(1 + x)` against it.
pub fn estimate_capacity_mpm(
    profile: &ChannelProfile,
    params: &MpmParams,
    seed: u64,
    exec: Execution,
) -> Result<CapacityEstimate> {
    params.validate()?;
    let start = Instant::now();
    if profile.j_m == 0 {
        return Err(Error::param("profile has no BSs"));
    }
    if profile.k_m == 0 {
        let trials = vec![TrialOutcome::plain(0.0, 0.0); params.trials];
        return Ok(CapacityEstimate::from_trials(
            Method::Mpm,
            trials,
            start.elapsed().as_secs_f64(),
        ));
    }
    let q = profile.q_matrix();
    let phi = profile_moments(&q, params.order)?;
    let rule = ChebyshevRule::new(params.quad_nodes)?;
    let results = par::map_indexed(params.trials, exec, |t| {
        let t0 = Instant::now();
        let mut rng = trial_stream(seed, t);
        let g = sample_complex_gaussian(&mut rng, profile.j_m, profile.k_m);
        let b_mat = gain_realization(&q, &g)?;
        let top = power_method_max_eig(&b_mat, params.power_iters, &mut rng);
        if !(top > 0.0) {
            return Ok(TrialOutcome::plain(0.0, t0.elapsed().as_secs_f64()));
        }
        let fit = LsdModel::fit(
            &phi,
            params.eta,
            top,
            profile.beta,
            profile.k_m,
            params.order,
            &rule,
        )?;
        let value = fit.model.capacity(&rule);
        if !value.is_finite() {
            return Err(Error::Invariant(format!("non-finite capacity {value}")));
        }
        Ok(TrialOutcome {
            value,
            wall_time_s: t0.elapsed().as_secs_f64(),
            neg_density_frac: fit.model.negative_density_fraction(&rule),
            fit_residual: fit.residual,
        })
    });
    let trials = gather_trials(results)?;
    Ok(CapacityEstimate::from_trials(
        Method::Mpm,
        trials,
        start.elapsed().as_secs_f64(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::RealMatrix;

    #[test]
    fn no_users_means_no_capacity() {
        let prof = ChannelProfile::from_profile_matrix(&RealMatrix::zeros(4, 0));
        let est =
            estimate_capacity_mpm(&prof, &MpmParams::default(), 1, Execution::Parallel).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.trials.len(), 20);
    }

    #[test]
    fn zero_profile_gives_zero() {
        let prof = ChannelProfile::from_profile_matrix(&RealMatrix::zeros(3, 5));
        let est =
            estimate_capacity_mpm(&prof, &MpmParams::default(), 1, Execution::Sequential).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn deterministic_and_execution_independent() {
        let q = RealMatrix::from_fn(30, 60, |i, j| {
            1.0 + 0.5 * (((i * 7 + j * 3) % 11) as f64 / 10.0)
        });
        let prof = ChannelProfile::from_profile_matrix(&q);
        let p = MpmParams {
            trials: 6,
            ..MpmParams::default()
        };
        let a = estimate_capacity_mpm(&prof, &p, 42, Execution::Parallel).unwrap();
        let b = estimate_capacity_mpm(&prof, &p, 42, Execution::Sequential).unwrap();
        assert_eq!(a.per_trial(), b.per_trial());
        assert_eq!(a.value, b.value);
        let c = estimate_capacity_mpm(&prof, &p, 43, Execution::Parallel).unwrap();
        assert_ne!(a.value, c.value);
    }

    #[test]
    fn parameter_validation() {
        let prof = ChannelProfile::from_profile_matrix(&RealMatrix::from_fn(2, 2, |_, _| 1.0));
        let bad = [
            MpmParams {
                trials: 0,
                ..MpmParams::default()
            },
            MpmParams {
                eta: 1.0,
                ..MpmParams::default()
            },
            MpmParams {
                eta: -0.1,
                ..MpmParams::default()
            },
            MpmParams {
                order: 4,
                ..MpmParams::default()
            },
        ];
        for p in bad {
            let err = estimate_capacity_mpm(&prof, &p, 0, Execution::Sequential).unwrap_err();
            assert!(err.is_parameter_error(), "{err}");
        }
    }

    #[test]
    fn estimate_statistics() {
        let trials = vec![TrialOutcome::plain(1.0, 0.0), TrialOutcome::plain(3.0, 0.0)];
        let est = CapacityEstimate::from_trials(Method::Cdm, trials, 0.0);
        assert_eq!(est.value, 2.0);
        assert!((est.std_error - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trial_errors_carry_index() {
        let results = vec![
            Ok(TrialOutcome::plain(1.0, 0.0)),
            Err(Error::Invariant("boom".into())),
        ];
        match gather_trials(results) {
            Err(Error::Trial { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
    }
}
