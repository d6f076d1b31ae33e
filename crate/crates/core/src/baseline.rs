//! Exact Monte-Carlo capacity: `E[(1/J_m) log det(I + B B*)]`, `B = Q ∘ G`,
//! evaluated by Hermitian Cholesky on every draw.

use std::time::Instant;

use crate::channel::{gain_realization, ChannelProfile};
use crate::mpm::{gather_trials, trial_stream, CapacityEstimate, Method, TrialOutcome};
use crate::numkernel::{logdet_i_plus_gram, sample_complex_gaussian};
use crate::par::{self, Execution};
use crate::{Error, Result};

/// Per-trial draws use [`trial_stream`], so trial `t` sees the same `G` as
/// trial `t` of the moment passing estimator under the same seed.
pub fn estimate_capacity_cdm(
    profile: &ChannelProfile,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<CapacityEstimate> {
    if trials == 0 {
        return Err(Error::param("need at least one trial"));
    }
    if profile.j_m == 0 {
        return Err(Error::param("profile has no BSs"));
    }
    let start = Instant::now();
    let q = profile.q_matrix();
    let results = par::map_indexed(trials, exec, |t| {
        let t0 = Instant::now();
        let mut rng = trial_stream(seed, t);
        let g = sample_complex_gaussian(&mut rng, profile.j_m, profile.k_m);
        let b = gain_realization(&q, &g)?;
        let value = logdet_i_plus_gram(&b)? / profile.j_m as f64;
        Ok(TrialOutcome::plain(value, t0.elapsed().as_secs_f64()))
    });
    let outcomes = gather_trials(results)?;
    Ok(CapacityEstimate::from_trials(
        Method::Cdm,
        outcomes,
        start.elapsed().as_secs_f64(),
    ))
}

/// `|mpm - cdm| / cdm`.
pub fn relative_error(mpm: &CapacityEstimate, cdm: &CapacityEstimate) -> Result<f64> {
    relative_error_values(mpm.value, cdm.value)
}

pub fn relative_error_values(estimate: f64, reference: f64) -> Result<f64> {
    if reference == 0.0 {
        return if estimate == 0.0 {
            Ok(0.0)
        } else {
            Err(Error::UndefinedRelativeError(estimate))
        };
    }
    Ok((estimate - reference).abs() / reference.abs())
}
