use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::{
    build_scenario, emit_report, eta_sweep, format_sig12, moments_sweep, rows_from_results,
    run_scenarios, sweep_sizes, write_gnuplot_script, ExperimentConfig,
};
use crate::mpm::{monte_carlo_moments, profile_moments, Method, MAX_ORDER};
use crate::{par, Error, Result};

/// Environment variable holding the worker thread count (0 or unset: rayon default).
pub const THREADS_ENV: &str = "RMTCAP_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "rmtcap",
    version,
    about = "Moment-passing capacity estimates for clustered wireless networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run MPM and CDM on one scenario per beta and print both capacities.
    Estimate(Common),
    /// Timing sweep over cluster sizes with a log-log slope fit.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated J_m values.
        #[arg(long)]
        sizes: Option<String>,
        #[arg(long)]
        reps: Option<String>,
        /// Write a gnuplot script plotting the timing CSV (needs --out).
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Compare closed-form moments with Monte-Carlo traces on the measured cluster.
    MomentsCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        draws: Option<String>,
    },
    /// Relative error table over a grid of eta values.
    EtaSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        etas: Option<String>,
    },
    /// Relative error table over polynomial orders.
    MomentsSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        orders: Option<String>,
    },
}

/// Flags shared by every subcommand. Values are applied through
/// [`ExperimentConfig::set`] after the optional config file.
#[derive(Debug, Args)]
struct Common {
    /// key = value file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// circle or square.
    #[arg(long)]
    shape: Option<String>,
    /// uniform or normal.
    #[arg(long)]
    dist: Option<String>,
    /// Region diameter (circle) or side (square), meters.
    #[arg(long = "D")]
    scale: Option<String>,
    /// Number of clusters.
    #[arg(long = "M")]
    clusters: Option<String>,
    /// BSs per cluster.
    #[arg(long)]
    bs: Option<String>,
    /// Users per cluster.
    #[arg(long, conflicts_with = "beta")]
    users: Option<String>,
    /// Comma-separated users-to-BSs ratios.
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    /// Polynomial order N.
    #[arg(long)]
    moments: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// e or 2.
    #[arg(long = "log-base")]
    log_base: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// full or direct.
    #[arg(long)]
    mode: Option<String>,
    /// Comma-separated subset of mpm,cdm.
    #[arg(long)]
    methods: Option<String>,
    /// Record wall times in reports (off writes 0).
    #[arg(long)]
    timing: Option<String>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let pairs = [
            ("shape", &self.shape),
            ("dist", &self.dist),
            ("D", &self.scale),
            ("M", &self.clusters),
            ("bs", &self.bs),
            ("users", &self.users),
            ("beta", &self.beta),
            ("trials", &self.trials),
            ("eta", &self.eta),
            ("moments", &self.moments),
            ("seed", &self.seed),
            ("log-base", &self.log_base),
            ("format", &self.format),
            ("mode", &self.mode),
            ("methods", &self.methods),
            ("timing", &self.timing),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Entry point of the `rmtcap` binary. Returns the process exit code:
/// 0 on success, 1 for bad arguments or parameters, 2 for runtime failures.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.trim().parse::<usize>() {
            Ok(n) => par::configure_threads(n),
            Err(_) => {
                eprintln!("error: {THREADS_ENV} must be a nonnegative integer, got '{v}'");
                return 1;
            }
        }
    }
    match run(cli.command) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_parameter_error() {
                1
            } else {
                2
            }
        }
    }
}

fn run(command: Command) -> Result<String> {
    match command {
        Command::Estimate(common) => estimate(&common.config()?),
        Command::Sweep {
            common,
            sizes,
            reps,
            plot,
        } => {
            let mut cfg = common.config()?;
            set_opt(&mut cfg, "sizes", &sizes)?;
            set_opt(&mut cfg, "reps", &reps)?;
            sweep(&cfg, plot)
        }
        Command::MomentsCheck { common, draws } => {
            let mut cfg = common.config()?;
            set_opt(&mut cfg, "draws", &draws)?;
            moments_check(&cfg)
        }
        Command::EtaSweep { common, etas } => {
            let mut cfg = common.config()?;
            set_opt(&mut cfg, "etas", &etas)?;
            let table = eta_sweep(&cfg, &cfg.etas)?;
            table_output(&cfg, table.to_text(), table.to_csv())
        }
        Command::MomentsSweep { common, orders } => {
            let mut cfg = common.config()?;
            set_opt(&mut cfg, "orders", &orders)?;
            let table = moments_sweep(&cfg, &cfg.orders)?;
            table_output(&cfg, table.to_text(), table.to_csv())
        }
    }
}

fn set_opt(cfg: &mut ExperimentConfig, key: &str, value: &Option<String>) -> Result<()> {
    match value {
        Some(v) => cfg.set(key, v),
        None => Ok(()),
    }
}

fn estimate(cfg: &ExperimentConfig) -> Result<String> {
    let results = run_scenarios(cfg)?;
    let mut s = String::new();
    for r in &results {
        let p = &r.scenario.profile;
        let _ = writeln!(
            s,
            "{}: J_m={} K_m={} beta={}",
            r.scenario.tag,
            p.j_m,
            p.k_m,
            format_sig12(p.beta)
        );
        for e in &r.estimates {
            let _ = writeln!(
                s,
                "  {:<3} capacity={} stderr={} time={:.3}s",
                e.method,
                format_sig12(cfg.log_base.convert(e.value)),
                format_sig12(cfg.log_base.convert(e.std_error)),
                e.wall_time_s
            );
        }
        if let Some(err) = r.relative_error() {
            let _ = writeln!(s, "  relative error {:.4}%", 100.0 * err?);
        }
    }
    if let Some(out) = &cfg.out {
        emit_report(&rows_from_results(cfg, &results), cfg.format, out)?;
    }
    Ok(s)
}

fn sweep(cfg: &ExperimentConfig, plot: Option<PathBuf>) -> Result<String> {
    let table = sweep_sizes(cfg, &cfg.sizes)?;
    let mut s = table.to_csv();
    for &m in &cfg.methods {
        let _ = writeln!(s, "# {m} slope {:.3}", table.slope(m)?);
    }
    if let Some(out) = &cfg.out {
        std::fs::write(out, table.to_csv()).map_err(|e| Error::io(out, e))?;
        if let Some(script) = plot {
            // columns: J_m,K_m,method,median_s
            write_gnuplot_script(out, 1, &[(4, "median_s")], true, &script)?;
        }
    } else if plot.is_some() {
        return Err(Error::param("--plot needs --out"));
    }
    if cfg.methods.contains(&Method::Mpm) && cfg.methods.contains(&Method::Cdm) {
        if let Some(&size) = cfg.sizes.iter().max() {
            if let (Some(m), Some(c)) = (
                table.median(Method::Mpm, size),
                table.median(Method::Cdm, size),
            ) {
                let _ = writeln!(s, "# cdm/mpm time ratio at J_m={size}: {:.2}", c / m);
            }
        }
    }
    Ok(s)
}

fn moments_check(cfg: &ExperimentConfig) -> Result<String> {
    let (k, beta) = cfg.user_targets()[0];
    let scenario = build_scenario(cfg, k, beta)?;
    let q = scenario.profile.q_matrix();
    let theory = profile_moments(&q, MAX_ORDER)?;
    let mc = monte_carlo_moments(&q, cfg.draws, cfg.seed)?;
    let mut s = format!(
        "{}: J_m={} K_m={} draws={}\n",
        scenario.tag, scenario.profile.j_m, scenario.profile.k_m, cfg.draws
    );
    for j in 1..=MAX_ORDER {
        let (t, m) = (theory.get(j), mc.get(j));
        let _ = writeln!(
            s,
            "phi{j} closed-form={} monte-carlo={} rel-diff={:.3}%",
            format_sig12(t),
            format_sig12(m),
            100.0 * (t - m).abs() / m.abs()
        );
    }
    Ok(s)
}

fn table_output(cfg: &ExperimentConfig, text: String, csv: String) -> Result<String> {
    if let Some(out) = &cfg.out {
        std::fs::write(out, csv).map_err(|e| Error::io(out, e))?;
    }
    Ok(text)
}
