//! Experiment runner behind the `rmtcap` binary.
//!
//! Builds a scenario from an [`ExperimentConfig`], runs the requested
//! estimators on the measured cluster with paired trial seeds, and turns the
//! results into report rows, timing tables and error tables.

mod cli;
mod config;
mod report;
mod sweeps;
mod timing;

use std::f64::consts::PI;

use rand::Rng;

pub use cli::{cli_main, THREADS_ENV};
pub use config::{parse_list, ExperimentConfig, LogBase, Mode, ReportFormat};
pub use report::{
    emit_report, format_sig12, rows_to_csv, write_gnuplot_script, ReportRow, CSV_HEADER,
};
pub use sweeps::{eta_sweep, moments_sweep, ErrorTable};
pub use timing::{fit_complexity_slope, sweep_sizes, TimingEntry, TimingTable};

use crate::baseline::{estimate_capacity_cdm, relative_error};
use crate::channel::{build_profile, fading_matrix, interference_diagonal, ChannelProfile};
use crate::clustering::{central_cluster, cluster_network};
use crate::mpm::{estimate_capacity_mpm, CapacityEstimate, Method, MpmParams};
use crate::numkernel::RngStream;
use crate::par::Execution;
use crate::scenario::{distance_matrix, sample_nodes, Point, Region, NODE_STREAM};
use crate::{Error, Result};

/// The measured cluster of one scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub tag: String,
    /// Beta requested by the configuration; the realized cluster ratio is
    /// `profile.beta`.
    pub target_beta: f64,
    pub profile: ChannelProfile,
}

/// Builds the measured cluster for a `(J_m, K_m)` target.
pub fn build_scenario(
    config: &ExperimentConfig,
    k_target: usize,
    beta_label: f64,
) -> Result<Scenario> {
    config.validate()?;
    let profile = match config.mode {
        Mode::Full => full_network_profile(config, k_target)?,
        Mode::Direct => direct_profile(config, config.bs, k_target)?,
    };
    if profile.j_m == 0 || profile.k_m == 0 {
        return Err(Error::DegenerateScenario {
            seed: config.seed,
            reason: format!(
                "measured cluster has {} BSs and {} users",
                profile.j_m, profile.k_m
            ),
        });
    }
    let tag = format!(
        "{}-{}-{}-b{}-J{}",
        config.shape,
        config.distribution.tag(),
        config.mode,
        format_sig12(beta_label),
        config.bs
    );
    Ok(Scenario {
        tag,
        target_beta: beta_label,
        profile,
    })
}

fn full_network_profile(config: &ExperimentConfig, k_target: usize) -> Result<ChannelProfile> {
    let region = Region::new(config.shape, config.scale)?;
    let j = config.clusters * config.bs;
    let k = config.clusters * k_target;
    let nodes = sample_nodes(&region, j, k, config.distribution, config.seed)?;
    let assignment = cluster_network(&nodes, config.clusters, config.seed)?;
    let center = central_cluster(&assignment, &region);
    build_profile(&nodes, &assignment, center, &config.fading)
}

/// Disc cluster with the area of one of `M` equal cells of the configured
/// region; `ring_factor * K_m` interfering users fill the annulus out to three
/// cluster radii.
pub fn direct_profile(config: &ExperimentConfig, j_m: usize, k_m: usize) -> Result<ChannelProfile> {
    config.fading.validate()?;
    let area = match config.shape {
        crate::scenario::Shape::Square => config.scale * config.scale,
        crate::scenario::Shape::Circle => PI * config.scale * config.scale / 4.0,
    };
    let radius = (area / config.clusters as f64 / PI).sqrt();
    let mut rng = RngStream::new(config.seed, NODE_STREAM);
    let mut in_disc = |r0: f64, r1: f64| {
        // uniform over the annulus r0 <= r <= r1
        let u: f64 = rng.random();
        let r = (r0 * r0 + u * (r1 * r1 - r0 * r0)).sqrt();
        let th = 2.0 * PI * rng.random::<f64>();
        Point::new(r * th.cos(), r * th.sin())
    };
    let bs: Vec<Point> = (0..j_m).map(|_| in_disc(0.0, radius)).collect();
    let own: Vec<Point> = (0..k_m).map(|_| in_disc(0.0, radius)).collect();
    let n_ext = (config.ring_factor * k_m as f64).round() as usize;
    let ext: Vec<Point> = (0..n_ext).map(|_| in_disc(radius, 3.0 * radius)).collect();
    let l = fading_matrix(&distance_matrix(&bs, &own), &config.fading);
    let xi = interference_diagonal(
        &distance_matrix(&bs, &ext),
        &vec![false; n_ext],
        &config.fading,
    )?;
    ChannelProfile::from_parts(&l, xi, &config.fading)
}

/// Estimates for one scenario, in `config.methods` order.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub estimates: Vec<CapacityEstimate>,
}

impl ScenarioResult {
    pub fn estimate(&self, method: Method) -> Option<&CapacityEstimate> {
        self.estimates.iter().find(|e| e.method == method)
    }

    /// Relative error of the MPM mean against the CDM mean, when both ran.
    pub fn relative_error(&self) -> Option<Result<f64>> {
        Some(relative_error(
            self.estimate(Method::Mpm)?,
            self.estimate(Method::Cdm)?,
        ))
    }
}

/// Runs every configured method on a profile. Both estimators consume the
/// same per-trial fading draws.
pub fn run_methods(
    profile: &ChannelProfile,
    methods: &[Method],
    params: &MpmParams,
    seed: u64,
    exec: Execution,
) -> Result<Vec<CapacityEstimate>> {
    methods
        .iter()
        .map(|m| match m {
            Method::Mpm => estimate_capacity_mpm(profile, params, seed, exec),
            Method::Cdm => estimate_capacity_cdm(profile, params.trials, seed, exec),
        })
        .collect()
}

pub fn run_scenarios(config: &ExperimentConfig) -> Result<Vec<ScenarioResult>> {
    config.validate()?;
    config
        .user_targets()
        .into_iter()
        .map(|(k, beta)| {
            let scenario = build_scenario(config, k, beta)?;
            let estimates = run_methods(
                &scenario.profile,
                &config.methods,
                &config.mpm_params(),
                config.seed,
                Execution::Parallel,
            )?;
            Ok(ScenarioResult {
                scenario,
                estimates,
            })
        })
        .collect()
}

/// One row per (scenario, method, trial).
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    Ok(rows_from_results(config, &run_scenarios(config)?))
}

pub fn rows_from_results(config: &ExperimentConfig, results: &[ScenarioResult]) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for r in results {
        let p = &r.scenario.profile;
        for est in &r.estimates {
            for (t, out) in est.trials.iter().enumerate() {
                rows.push(ReportRow {
                    scenario: r.scenario.tag.clone(),
                    j_m: p.j_m,
                    k_m: p.k_m,
                    beta: p.beta,
                    method: est.method,
                    trial: t,
                    capacity: config.log_base.convert(out.value),
                    wall_time_s: if config.record_timing {
                        out.wall_time_s
                    } else {
                        0.0
                    },
                    seed: config.seed,
                    neg_density_frac: out.neg_density_frac,
                    fit_residual: out.fit_residual,
                });
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Shape;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            clusters: 4,
            bs: 20,
            betas: vec![2.0],
            trials: 3,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn method_filter() {
        let cfg = ExperimentConfig {
            methods: vec![Method::Cdm],
            ..small()
        };
        let rows = run_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.method == Method::Cdm));
    }

    #[test]
    fn paired_rows_share_seed_and_trial() {
        let rows = run_experiment(&small()).unwrap();
        assert_eq!(rows.len(), 6);
        for t in 0..3 {
            let pair: Vec<_> = rows.iter().filter(|r| r.trial == t).collect();
            assert_eq!(pair.len(), 2);
            assert_eq!(pair[0].seed, pair[1].seed);
            assert!(pair.iter().all(|r| r.capacity.is_finite()));
        }
    }

    #[test]
    fn direct_mode_has_exact_counts() {
        let cfg = ExperimentConfig {
            mode: Mode::Direct,
            shape: Shape::Circle,
            ..small()
        };
        let s = build_scenario(&cfg, 40, 2.0).unwrap();
        assert_eq!((s.profile.j_m, s.profile.k_m), (20, 40));
        assert!(s.profile.xi.iter().all(|&x| x > cfg.fading.noise));
        let isolated = ExperimentConfig {
            ring_factor: 0.0,
            ..cfg
        };
        let s = build_scenario(&isolated, 40, 2.0).unwrap();
        assert!(s.profile.xi.iter().all(|&x| x == isolated.fading.noise));
    }

    #[test]
    fn degenerate_cluster_names_seed() {
        let cfg = ExperimentConfig {
            users: Some(0),
            seed: 99,
            ..small()
        };
        match run_experiment(&cfg) {
            Err(Error::DegenerateScenario { seed, .. }) => assert_eq!(seed, 99),
            other => panic!("{other:?}"),
        }
    }
}
