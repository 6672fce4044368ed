//! Command-line driver: simulation, closed-form curves, realized curves,
//! calibration, tick ingestion, and the per-day kernel-norm histogram.
//!
//! Every run writes its outputs into one directory together with a
//! `manifest.json` carrying the resolved options, a stable hash of the
//! semantically relevant ones, and the seed, so identical invocations
//! reproduce byte-identical files. Options come from defaults, then an
//! optional flat `key = value` config file, then command-line flags, in
//! that order of precedence.

use crate::analytics;
use crate::curve::{linear_grid, log_grid, Curve};
use crate::empirics;
use crate::estimation::{self, FitOptions, RegressionData, RegressionWeights};
use crate::ingest::{self, IngestOptions, MultiTickPolicy, SessionSpec, Side};
use crate::model::{Asset, BivariateParams, EventLog, ModelParams, PricePath, UnivariateParams};
use crate::simulate::{self, SimulationOptions, ThinningBound};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config file {path}: {message}")]
    BadConfig { path: PathBuf, message: String },
    #[error("invalid option: {0}")]
    BadOption(String),
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Simulation(#[from] crate::simulate::SimulationError),
    #[error(transparent)]
    Analytics(#[from] crate::analytics::AnalyticsError),
    #[error(transparent)]
    Empirics(#[from] crate::empirics::EmpiricsError),
    #[error(transparent)]
    Estimation(#[from] crate::estimation::EstimationError),
    #[error(transparent)]
    Ingest(#[from] crate::ingest::IngestError),
    #[error(transparent)]
    Curve(#[from] crate::curve::CurveError),
}

/// Tick-by-tick price models on mutually exciting point processes.
#[derive(Debug, Parser)]
#[command(name = "hawkes-micro", version, about)]
pub struct Cli {
    /// Flat key = value config file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed for anything stochastic in the run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory for this run.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for multi-day fan-out (0 = all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Scale grid lo:hi:n (log-spaced; append :lin for linear).
    #[arg(long = "tau-grid", global = true)]
    pub tau_grid: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Uni,
    Bi,
}

/// Model parameters shared by several subcommands; bivariate runs use the
/// fully symmetric model.
#[derive(Debug, Args, Clone)]
pub struct ParamArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Exogenous intensity (1/s).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Univariate excitation amplitude (1/s).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Within-asset excitation amplitude (1/s).
    #[arg(long)]
    pub alpha12: Option<f64>,
    /// Cross-asset excitation amplitude (1/s).
    #[arg(long)]
    pub alpha13: Option<f64>,
    /// Kernel decay rate (1/s).
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate event logs, one CSV per day.
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        /// Session length in seconds.
        #[arg(long)]
        horizon: Option<f64>,
        /// Number of independent days.
        #[arg(long)]
        days: Option<usize>,
        /// Stationarity warm-up in seconds (default: relaxation based).
        #[arg(long)]
        burn_in: Option<f64>,
        /// Use a fixed thinning bound instead of the adaptive one.
        #[arg(long)]
        fixed_bound: Option<f64>,
    },
    /// Closed-form curves: signature plot(s), correlation, lead-lag,
    /// diffusive covariance, and the volatility-ratio function.
    Analytic {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Realized signature plot of stored event logs, aggregated across days.
    Signature {
        /// Event-log CSV files (time,stream).
        #[arg(long, required = true, num_args = 1..)]
        logs: Vec<PathBuf>,
        /// Horizon of each log in seconds.
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Realized correlation across scales of stored 4-stream logs.
    Epps {
        #[arg(long, required = true, num_args = 1..)]
        logs: Vec<PathBuf>,
        #[arg(long)]
        horizon: Option<f64>,
        /// Emit the raw cross-covariance per unit time instead of the
        /// correlation.
        #[arg(long)]
        raw_covariance: bool,
    },
    /// Maximum-likelihood fit of stored event logs.
    FitMle {
        #[arg(long, required = true, num_args = 1..)]
        logs: Vec<PathBuf>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long, value_enum)]
        model: Option<ModelKind>,
    },
    /// Multiscale regression fit of realized curves from stored logs.
    FitReg {
        #[arg(long, required = true, num_args = 1..)]
        logs: Vec<PathBuf>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long, value_enum)]
        model: Option<ModelKind>,
        /// Residual-block weights a1,a2,a12 for bivariate fits.
        #[arg(long)]
        weights: Option<String>,
    },
    /// Sessionize a trade tape into per-day event logs.
    Ingest {
        /// Tick CSV (timestamp,price,volume,side).
        #[arg(long)]
        ticks: PathBuf,
        /// Session window start, HH:MM:SS.
        #[arg(long)]
        session_start: Option<String>,
        /// Session window end, HH:MM:SS.
        #[arg(long)]
        session_end: Option<String>,
        /// Instrument tick size in price units.
        #[arg(long)]
        tick_size: Option<f64>,
        /// Trade side to keep: B, S, or all.
        #[arg(long)]
        side: Option<String>,
        /// Emit one event per move instead of one per tick.
        #[arg(long)]
        single_event: bool,
    },
    /// Histogram of per-day regression-fitted kernel norms.
    HistogramX {
        #[arg(long, required = true, num_args = 1..)]
        logs: Vec<PathBuf>,
        #[arg(long)]
        horizon: Option<f64>,
        /// Number of histogram bins over [0, 1).
        #[arg(long)]
        bins: Option<usize>,
    },
}

/// Flat config file: `key = value` lines, `#` comments.
fn read_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::BadConfig {
                path: path.to_path_buf(),
                message: format!("line {}: expected key = value, got {raw:?}", lineno + 1),
            });
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

const KNOWN_KEYS: &[&str] = &[
    "model", "mu", "alpha", "alpha12", "alpha13", "beta", "horizon", "days", "burn_in",
    "fixed_bound", "tau_grid", "seed", "jobs", "out", "session_start", "session_end",
    "tick_size", "side", "single_event", "bins", "weights",
];

/// Resolved options of one run, in deterministic order.
#[derive(Debug, Clone, Default)]
struct Resolved {
    values: BTreeMap<String, String>,
}

impl Resolved {
    fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| CliError::BadOption(format!("{key} = {raw}: {e}"))),
        }
    }

    fn require<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    /// Stable 64-bit FNV-1a hash of the semantically relevant options.
    fn config_hash(&self) -> String {
        const EXCLUDED: &[&str] = &["out", "jobs"];
        let mut hash: u64 = 0xcbf29ce484222325;
        for (k, v) in &self.values {
            if EXCLUDED.contains(&k.as_str()) {
                continue;
            }
            for byte in k.bytes().chain([b'='].into_iter()).chain(v.bytes()).chain([b'\n']) {
                hash ^= u64::from(byte);
                hash = hash.wrapping_mul(0x100000001b3);
            }
        }
        format!("{hash:016x}")
    }
}

#[derive(Debug, Serialize)]
struct Manifest {
    command: String,
    options: BTreeMap<String, String>,
    config_hash: String,
    seed: u64,
    outputs: Vec<String>,
    warnings: Vec<String>,
}

/// Everything a finished run reports back.
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub outputs: Vec<PathBuf>,
    pub config_hash: String,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn parse_tau_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::BadOption(format!("tau grid {spec:?}; expected lo:hi:n or lo:hi:n:lin"));
    if parts.len() < 3 || parts.len() > 4 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(bad());
    }
    match parts.get(3) {
        None => Ok(log_grid(lo, hi, n)),
        Some(&"lin") => Ok(linear_grid(lo, hi, n)),
        Some(&"log") => Ok(log_grid(lo, hi, n)),
        Some(other) => Err(CliError::BadOption(format!("unknown grid spacing {other:?}"))),
    }
}

fn resolve_params(r: &Resolved) -> Result<ModelParams, CliError> {
    let model = r.get("model").unwrap_or("uni");
    match model {
        "uni" => {
            let mu = r.require("mu", 0.016)?;
            let alpha = r.require("alpha", 0.023)?;
            let beta = r.require("beta", 0.11)?;
            Ok(ModelParams::Univariate(UnivariateParams::from_rates(mu, alpha, beta)?))
        }
        "bi" => {
            let mu = r.require("mu", 0.015)?;
            let alpha12 = r.require("alpha12", 0.023)?;
            let alpha13 = r.require("alpha13", 0.05)?;
            let beta = r.require("beta", 0.11)?;
            Ok(ModelParams::Bivariate(BivariateParams::symmetric(mu, alpha12, alpha13, beta)?))
        }
        other => Err(CliError::BadOption(format!("model must be uni or bi, got {other:?}"))),
    }
}

fn load_logs(paths: &[PathBuf], horizon: f64, n_streams: u8) -> Result<Vec<EventLog>, CliError> {
    paths
        .iter()
        .map(|p| {
            let file =
                fs::File::open(p).map_err(|source| CliError::Io { path: p.clone(), source })?;
            EventLog::read_csv(file, horizon, n_streams).map_err(CliError::from)
        })
        .collect()
}

/// Run a parsed command line; returns the run summary on success.
pub fn run(cli: Cli) -> Result<RunSummary, CliError> {
    // Layer the options: defaults under config under flags.
    let mut r = Resolved::default();
    if let Some(path) = &cli.config {
        for (k, v) in read_config(path)? {
            if !KNOWN_KEYS.contains(&k.as_str()) {
                return Err(CliError::BadConfig {
                    path: path.clone(),
                    message: format!("unknown key {k:?}"),
                });
            }
            r.set(&k, v);
        }
    }
    if let Some(seed) = cli.seed {
        r.set("seed", seed);
    }
    if let Some(out) = &cli.out {
        r.set("out", out.display());
    }
    if let Some(jobs) = cli.jobs {
        r.set("jobs", jobs);
    }
    if let Some(grid) = &cli.tau_grid {
        r.set("tau_grid", grid);
    }

    let command_name = match &cli.command {
        Command::Simulate { .. } => "simulate",
        Command::Analytic { .. } => "analytic",
        Command::Signature { .. } => "signature",
        Command::Epps { .. } => "epps",
        Command::FitMle { .. } => "fit-mle",
        Command::FitReg { .. } => "fit-reg",
        Command::Ingest { .. } => "ingest",
        Command::HistogramX { .. } => "histogram-x",
    };

    let apply_params = |r: &mut Resolved, p: &ParamArgs| {
        if let Some(m) = p.model {
            r.set("model", match m {
                ModelKind::Uni => "uni",
                ModelKind::Bi => "bi",
            });
        }
        for (key, value) in [
            ("mu", p.mu),
            ("alpha", p.alpha),
            ("alpha12", p.alpha12),
            ("alpha13", p.alpha13),
            ("beta", p.beta),
        ] {
            if let Some(v) = value {
                r.set(key, v);
            }
        }
    };

    match &cli.command {
        Command::Simulate { params, horizon, days, burn_in, fixed_bound } => {
            apply_params(&mut r, params);
            set_if(&mut r, "horizon", *horizon);
            set_if(&mut r, "days", *days);
            set_if(&mut r, "burn_in", *burn_in);
            set_if(&mut r, "fixed_bound", *fixed_bound);
        }
        Command::Analytic { params } => apply_params(&mut r, params),
        Command::Signature { horizon, .. } | Command::Epps { horizon, .. } => {
            set_if(&mut r, "horizon", *horizon)
        }
        Command::FitMle { horizon, model, .. } | Command::FitReg { horizon, model, .. } => {
            set_if(&mut r, "horizon", *horizon);
            if let Some(m) = model {
                r.set("model", match m {
                    ModelKind::Uni => "uni",
                    ModelKind::Bi => "bi",
                });
            }
            if let Command::FitReg { weights: Some(w), .. } = &cli.command {
                r.set("weights", w);
            }
        }
        Command::Ingest { session_start, session_end, tick_size, side, single_event, .. } => {
            set_if(&mut r, "session_start", session_start.clone());
            set_if(&mut r, "session_end", session_end.clone());
            set_if(&mut r, "tick_size", *tick_size);
            set_if(&mut r, "side", side.clone());
            if *single_event {
                r.set("single_event", "true");
            }
        }
        Command::HistogramX { horizon, bins, .. } => {
            set_if(&mut r, "horizon", *horizon);
            set_if(&mut r, "bins", *bins);
        }
    }

    let seed: u64 = r.require("seed", 0)?;
    let jobs: usize = r.require("jobs", 0)?;
    let out_dir = PathBuf::from(
        r.get("out").map(String::from).unwrap_or_else(|| format!("runs/{command_name}")),
    );
    fs::create_dir_all(&out_dir)
        .map_err(|source| CliError::Io { path: out_dir.clone(), source })?;
    let taus = parse_tau_grid(r.get("tau_grid").unwrap_or("1:1000:50"))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::BadOption(format!("jobs: {e}")))?;

    let mut outputs: Vec<PathBuf> = Vec::new();
    let mut warnings: Vec<String> = Vec::new();

    match &cli.command {
        Command::Simulate { .. } => {
            let params = resolve_params(&r)?;
            let horizon: f64 = r.require("horizon", 7200.0)?;
            let days: usize = r.require("days", 1)?;
            let options = SimulationOptions {
                burn_in: r.parse("burn_in")?,
                bound: match r.parse::<f64>("fixed_bound")? {
                    Some(m) => ThinningBound::Fixed(m),
                    None => ThinningBound::Adaptive,
                },
            };
            let logs =
                pool.install(|| simulate::simulate_days(&params, horizon, days, seed, &options))?;
            #[derive(Serialize)]
            struct DayInfo {
                file: String,
                seed: u64,
                counts: Vec<usize>,
            }
            let mut infos = Vec::new();
            for (i, log) in logs.iter().enumerate() {
                let name = format!("day_{i:03}.csv");
                let mut buf = Vec::new();
                log.write_csv(&mut buf).map_err(|source| CliError::Io {
                    path: out_dir.join(&name),
                    source,
                })?;
                write_file(&out_dir.join(&name), &buf)?;
                outputs.push(out_dir.join(&name));
                infos.push(DayInfo {
                    file: name,
                    seed: simulate::replication_seed(seed, i as u64),
                    counts: (1..=params.n_streams()).map(|s| log.count(s)).collect(),
                });
            }
            let detail = serde_json::to_vec_pretty(&infos).expect("serializable");
            write_file(&out_dir.join("days.json"), &detail)?;
            outputs.push(out_dir.join("days.json"));
        }
        Command::Analytic { .. } => {
            let params = resolve_params(&r)?;
            match &params {
                ModelParams::Univariate(p) => {
                    let curve = analytics::signature_curve(p, &taus)?;
                    outputs.push(write_curve(&out_dir, "signature.csv", &curve)?);
                    let shape = analytics::univariate::SignaturePlotParams::from_params(p)?;
                    let density = analytics::covariance_density(p)?;
                    #[derive(Serialize)]
                    struct UniSummary {
                        lambda: f64,
                        kappa: f64,
                        gamma: f64,
                        v0: f64,
                        v_inf: f64,
                        covariance_density: analytics::CovarianceDensity,
                    }
                    let summary = UniSummary {
                        lambda: shape.lambda,
                        kappa: shape.kappa,
                        gamma: shape.gamma,
                        v0: shape.v0(),
                        v_inf: shape.v_inf(),
                        covariance_density: density,
                    };
                    write_file(
                        &out_dir.join("summary.json"),
                        &serde_json::to_vec_pretty(&summary).expect("serializable"),
                    )?;
                    outputs.push(out_dir.join("summary.json"));
                }
                ModelParams::Bivariate(p) => {
                    let coeffs = analytics::covariance_coefficients(p)?;
                    let grids: Vec<(&str, Curve)> = vec![
                        ("c11.csv", analytics::bivariate::bivariate_signature_curve(&coeffs, 0, &taus)?),
                        ("c22.csv", analytics::bivariate::bivariate_signature_curve(&coeffs, 1, &taus)?),
                        ("c12.csv", analytics::bivariate::cross_covariance_curve(&coeffs, &taus)?),
                        ("rho.csv", analytics::epps_curve(&coeffs, &taus)?),
                        ("leadlag.csv", analytics::leadlag_curve(&coeffs, &taus)?),
                    ];
                    for (name, curve) in &grids {
                        outputs.push(write_curve(&out_dir, name, curve)?);
                    }
                    #[derive(Serialize)]
                    struct BiSummary {
                        diffusive_covariance: [[f64; 2]; 2],
                        epps_asymptote: Option<f64>,
                        epps_slope: Option<f64>,
                        g1: f64,
                        g2: f64,
                        mean_intensities: [f64; 4],
                    }
                    let summary = BiSummary {
                        diffusive_covariance: analytics::diffusive_covariance(&coeffs),
                        epps_asymptote: analytics::epps_asymptote(p).ok(),
                        epps_slope: analytics::epps_slope(p).ok(),
                        g1: coeffs.g1,
                        g2: coeffs.g2,
                        mean_intensities: p.mean_intensities()?,
                    };
                    write_file(
                        &out_dir.join("summary.json"),
                        &serde_json::to_vec_pretty(&summary).expect("serializable"),
                    )?;
                    outputs.push(out_dir.join("summary.json"));
                }
            }
            // Volatility-ratio curve over the kernel norm, not the scale.
            let mut buf = String::from("x,value\n");
            for i in 0..200 {
                let x = i as f64 / 200.0;
                buf.push_str(&format!("{x},{}\n", analytics::volatility_ratio(x)?));
            }
            write_file(&out_dir.join("volatility_ratio.csv"), buf.as_bytes())?;
            outputs.push(out_dir.join("volatility_ratio.csv"));
        }
        Command::Signature { logs, .. } => {
            let horizon: f64 = r.require("horizon", 7200.0)?;
            let stored = load_logs_any_dimension(logs, horizon)?;
            let bivariate = stored.iter().any(|l| l.events().iter().any(|e| e.stream > 2));
            let assets: &[Asset] =
                if bivariate { &[Asset::First, Asset::Second] } else { &[Asset::First] };
            for (i, &asset) in assets.iter().enumerate() {
                let curves = pool.install(|| -> Result<Vec<Curve>, CliError> {
                    stored
                        .iter()
                        .map(|log| {
                            let path = PricePath::from_log(log, asset);
                            empirics::realized_signature_plot(&path, &taus).map_err(CliError::from)
                        })
                        .collect()
                })?;
                let agg = empirics::aggregate_days(&curves)?;
                let name = if i == 0 { "signature.csv" } else { "signature_asset2.csv" };
                outputs.push(write_curve(&out_dir, name, &agg)?);
            }
        }
        Command::Epps { logs, raw_covariance, .. } => {
            let horizon: f64 = r.require("horizon", 7200.0)?;
            let stored = load_logs(logs, horizon, 4)?;
            let curves = pool.install(|| -> Result<Vec<Curve>, CliError> {
                stored
                    .iter()
                    .map(|log| {
                        let p1 = PricePath::from_log(log, Asset::First);
                        let p2 = PricePath::from_log(log, Asset::Second);
                        if *raw_covariance {
                            let values = taus
                                .iter()
                                .map(|&tau| {
                                    empirics::realized_cross_covariance(&p1, &p2, tau, 0.0)
                                })
                                .collect::<Result<Vec<f64>, _>>()?;
                            Curve::from_values(&taus, &values).map_err(CliError::from)
                        } else {
                            empirics::realized_epps(&p1, &p2, &taus).map_err(CliError::from)
                        }
                    })
                    .collect()
            })?;
            let agg = empirics::aggregate_days(&curves)?;
            let name = if *raw_covariance { "c12.csv" } else { "epps.csv" };
            outputs.push(write_curve(&out_dir, name, &agg)?);
        }
        Command::FitMle { logs, .. } => {
            let horizon: f64 = r.require("horizon", 7200.0)?;
            let stored = load_logs_any_dimension(logs, horizon)?;
            let options = FitOptions { seed, ..Default::default() };
            let fit = estimation::fit_mle(&stored, None, &options)?;
            write_file(
                &out_dir.join("fit.json"),
                &serde_json::to_vec_pretty(&fit).expect("serializable"),
            )?;
            outputs.push(out_dir.join("fit.json"));
        }
        Command::FitReg { logs, .. } => {
            let horizon: f64 = r.require("horizon", 7200.0)?;
            let stored = load_logs_any_dimension(logs, horizon)?;
            let bivariate = match r.get("model") {
                Some("bi") => true,
                Some("uni") => false,
                _ => stored.iter().any(|l| l.events().iter().any(|e| e.stream > 2)),
            };
            let options = FitOptions { seed, ..Default::default() };
            let fit = if bivariate {
                let weights = match r.get("weights") {
                    None => RegressionWeights::default(),
                    Some(spec) => {
                        let parts: Vec<f64> = spec
                            .split(',')
                            .map(|p| p.trim().parse::<f64>())
                            .collect::<Result<_, _>>()
                            .map_err(|e| CliError::BadOption(format!("weights {spec:?}: {e}")))?;
                        if parts.len() != 3 {
                            return Err(CliError::BadOption(format!(
                                "weights must be a1,a2,a12, got {spec:?}"
                            )));
                        }
                        RegressionWeights { a1: parts[0], a2: parts[1], a12: parts[2] }
                    }
                };
                let (c11, c22, c12) = pool.install(|| -> Result<(Curve, Curve, Curve), CliError> {
                    let per_day = |f: &dyn Fn(&EventLog) -> Result<Curve, CliError>| {
                        stored.iter().map(f).collect::<Result<Vec<Curve>, CliError>>()
                    };
                    let c11 = empirics::aggregate_days(&per_day(&|log| {
                        let p = PricePath::from_log(log, Asset::First);
                        empirics::realized_signature_plot(&p, &taus).map_err(CliError::from)
                    })?)?;
                    let c22 = empirics::aggregate_days(&per_day(&|log| {
                        let p = PricePath::from_log(log, Asset::Second);
                        empirics::realized_signature_plot(&p, &taus).map_err(CliError::from)
                    })?)?;
                    let c12 = empirics::aggregate_days(&per_day(&|log| {
                        let p1 = PricePath::from_log(log, Asset::First);
                        let p2 = PricePath::from_log(log, Asset::Second);
                        let values = taus
                            .iter()
                            .map(|&tau| empirics::realized_cross_covariance(&p1, &p2, tau, 0.0))
                            .collect::<Result<Vec<f64>, _>>()?;
                        Curve::from_values(&taus, &values).map_err(CliError::from)
                    })?)?;
                    Ok((c11, c22, c12))
                })?;
                estimation::fit_regression(
                    &RegressionData::Bivariate { c11: &c11, c22: &c22, c12: &c12 },
                    &weights,
                    None,
                    &options,
                )?
            } else {
                let curves = pool.install(|| -> Result<Vec<Curve>, CliError> {
                    stored
                        .iter()
                        .map(|log| {
                            let p = PricePath::from_log(log, Asset::First);
                            empirics::realized_signature_plot(&p, &taus).map_err(CliError::from)
                        })
                        .collect()
                })?;
                let agg = empirics::aggregate_days(&curves)?;
                estimation::fit_regression(
                    &RegressionData::Univariate { curve: &agg },
                    &RegressionWeights::default(),
                    None,
                    &options,
                )?
            };
            write_file(
                &out_dir.join("fit.json"),
                &serde_json::to_vec_pretty(&fit).expect("serializable"),
            )?;
            outputs.push(out_dir.join("fit.json"));
        }
        Command::Ingest { ticks, .. } => {
            let start = parse_clock(r.get("session_start").unwrap_or("09:00:00"))?;
            let end = parse_clock(r.get("session_end").unwrap_or("11:00:00"))?;
            let tick_size: f64 = r.require("tick_size", 0.01)?;
            let session = SessionSpec::new(start, end, tick_size)?;
            let side_filter = match r.get("side").unwrap_or("B") {
                "B" => Some(Side::Buy),
                "S" => Some(Side::Sell),
                "all" => None,
                other => {
                    return Err(CliError::BadOption(format!(
                        "side must be B, S, or all, got {other:?}"
                    )))
                }
            };
            let options = IngestOptions {
                side_filter,
                multi_tick: if r.get("single_event") == Some("true") {
                    MultiTickPolicy::SingleEvent
                } else {
                    MultiTickPolicy::UnitJumps
                },
                ..Default::default()
            };
            let file = fs::File::open(ticks)
                .map_err(|source| CliError::Io { path: ticks.clone(), source })?;
            let records = ingest::parse_ticks(file)?;
            let result = ingest::to_event_logs(&records, &session, &options)?;
            warnings.extend(result.warnings.iter().cloned());
            for day in &result.days {
                let name = format!("day_{}.csv", day.date);
                let mut buf = Vec::new();
                day.log.write_csv(&mut buf).map_err(|source| CliError::Io {
                    path: out_dir.join(&name),
                    source,
                })?;
                write_file(&out_dir.join(&name), &buf)?;
                outputs.push(out_dir.join(&name));
            }
            let detail = serde_json::to_vec_pretty(&result.days).expect("serializable");
            write_file(&out_dir.join("days.json"), &detail)?;
            outputs.push(out_dir.join("days.json"));
        }
        Command::HistogramX { logs, .. } => {
            let horizon: f64 = r.require("horizon", 7200.0)?;
            let bins: usize = r.require("bins", 20)?;
            if bins == 0 {
                return Err(CliError::BadOption("bins must be positive".into()));
            }
            let stored = load_logs_any_dimension(logs, horizon)?;
            let options = FitOptions { seed, ..Default::default() };
            let fits = pool.install(|| -> Result<Vec<(f64, UnivariateParams, f64)>, CliError> {
                use rayon::prelude::*;
                stored
                    .par_iter()
                    .map(|log| {
                        let path = PricePath::from_log(log, Asset::First);
                        let curve = empirics::realized_signature_plot(&path, &taus)?;
                        let fit = estimation::fit_regression(
                            &RegressionData::Univariate { curve: &curve },
                            &RegressionWeights::default(),
                            None,
                            &options,
                        )?;
                        let ModelParams::Univariate(p) = fit.params else { unreachable!() };
                        Ok((p.spectral_radius(), p, fit.objective))
                    })
                    .collect()
            })?;
            let mut fits_csv = String::from("day,x,mu,alpha,beta,objective\n");
            for (i, (x, p, objective)) in fits.iter().enumerate() {
                fits_csv.push_str(&format!(
                    "{i},{x},{},{},{},{objective}\n",
                    p.mu, p.kernel.alpha, p.kernel.beta
                ));
            }
            write_file(&out_dir.join("fits.csv"), fits_csv.as_bytes())?;
            outputs.push(out_dir.join("fits.csv"));
            let mut counts = vec![0usize; bins];
            for (x, ..) in &fits {
                let bin = ((x * bins as f64) as usize).min(bins - 1);
                counts[bin] += 1;
            }
            let mut hist = String::from("bin_low,bin_high,count\n");
            for (b, count) in counts.iter().enumerate() {
                let lo = b as f64 / bins as f64;
                let hi = (b + 1) as f64 / bins as f64;
                hist.push_str(&format!("{lo},{hi},{count}\n"));
            }
            write_file(&out_dir.join("histogram.csv"), hist.as_bytes())?;
            outputs.push(out_dir.join("histogram.csv"));
        }
    }

    let manifest = Manifest {
        command: command_name.to_string(),
        options: r.values.clone(),
        config_hash: r.config_hash(),
        seed,
        outputs: outputs
            .iter()
            .map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned())
            .collect(),
        warnings,
    };
    write_file(
        &out_dir.join("manifest.json"),
        &serde_json::to_vec_pretty(&manifest).expect("serializable"),
    )?;

    Ok(RunSummary { out_dir, outputs, config_hash: manifest.config_hash })
}

fn set_if<T: ToString>(r: &mut Resolved, key: &str, value: Option<T>) {
    if let Some(v) = value {
        r.set(key, v);
    }
}

fn parse_clock(raw: &str) -> Result<chrono::NaiveTime, CliError> {
    chrono::NaiveTime::parse_from_str(raw, "%H:%M:%S")
        .map_err(|e| CliError::BadOption(format!("clock time {raw:?}: {e}")))
}

fn write_curve(out_dir: &Path, name: &str, curve: &Curve) -> Result<PathBuf, CliError> {
    let path = out_dir.join(name);
    let mut buf = Vec::new();
    curve.write_csv(&mut buf)?;
    write_file(&path, &buf)?;
    // JSON mirror alongside the CSV.
    let json_path = path.with_extension("json");
    let mut jbuf = Vec::new();
    curve.write_json(&mut jbuf)?;
    write_file(&json_path, &jbuf)?;
    Ok(path)
}

/// Read logs as univariate or bivariate depending on the streams present.
fn load_logs_any_dimension(paths: &[PathBuf], horizon: f64) -> Result<Vec<EventLog>, CliError> {
    load_logs(paths, horizon, 4)
}

/// Entry point for the binary: parse, run, report machine-readable errors.
pub fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            println!(
                "{}",
                serde_json::json!({
                    "out_dir": summary.out_dir.display().to_string(),
                    "outputs": summary.outputs.len(),
                    "config_hash": summary.config_hash,
                })
            );
            std::process::ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", serde_json::json!({ "error": err.to_string() }));
            std::process::ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_grid_parses_log_and_linear() {
        let g = parse_tau_grid("1:1000:4").unwrap();
        assert_eq!(g.len(), 4);
        assert!((g[0] - 1.0).abs() < 1e-12 && (g[3] - 1000.0).abs() < 1e-9);
        assert!((g[1] - 10.0).abs() < 1e-9);
        let l = parse_tau_grid("1:4:4:lin").unwrap();
        assert_eq!(l, vec![1.0, 2.0, 3.0, 4.0]);
        assert!(parse_tau_grid("5:1:10").is_err());
        assert!(parse_tau_grid("1:10").is_err());
    }

    #[test]
    fn config_hash_tracks_semantic_options_only() {
        let mut a = Resolved::default();
        a.set("mu", 0.016);
        a.set("model", "uni");
        a.set("out", "/tmp/x");
        a.set("jobs", 4);
        let mut b = Resolved::default();
        b.set("model", "uni");
        b.set("mu", 0.016);
        b.set("out", "/elsewhere");
        b.set("jobs", 1);
        // Same semantics, different plumbing: equal hashes.
        assert_eq!(a.config_hash(), b.config_hash());
        b.set("mu", 0.017);
        assert_ne!(a.config_hash(), b.config_hash());
    }

    #[test]
    fn clock_parser_accepts_hms() {
        assert!(parse_clock("09:00:00").is_ok());
        assert!(parse_clock("9am").is_err());
    }

    #[test]
    fn config_file_rejects_unknown_keys() {
        let dir = std::env::temp_dir().join(format!("hm-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.cfg");
        std::fs::write(&path, "muu = 0.016\n").unwrap();
        let cli = Cli::parse_from([
            "hawkes-micro",
            "--config",
            path.to_str().unwrap(),
            "analytic",
        ]);
        assert!(matches!(run(cli), Err(CliError::BadConfig { .. })));
        std::fs::remove_dir_all(&dir).ok();
    }
}
