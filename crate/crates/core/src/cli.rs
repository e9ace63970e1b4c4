//! `qkerr` command line: scenario resolution, scans and CSV output.
//!
//! Every subcommand resolves flags over an optional JSON config file over
//! built-in defaults, computes all of its outputs in memory, and only then
//! writes them together with a `<command>_config.json` echo of the resolved
//! configuration.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{autocorrelation, evolve, revival_time, TimeGrid};
use crate::expectations::quadrature_stats;
use crate::fock::{make_pacs, ModelParams, DEFAULT_TAIL_EPSILON};
use crate::squeezing::{dq_cs_half_revival, dq_numeric, dq_pacs_half_revival, hong_mandel_m4, HONG_MANDEL_BOUND};
use crate::wigner::{delta_from_field, delta_timescan, wigner_at, GridSpec, DEFAULT_LOBE_THRESHOLD, DELTA_TOLERANCE};

/// Relative agreement required between closed-form and brute-force `D_q`.
const CLOSED_FORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "qkerr", version, about = "Coherent and photon-added coherent states in a Kerr medium")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Autocorrelation and quadrature moments over time.
    RevivalScan(CommonArgs),
    /// D_q at half revival versus nu and theta; Δx and the fourth central moment versus time.
    Squeezing(SqueezingArgs),
    /// Wigner function snapshots on a grid, with a summary per snapshot.
    Wigner(WignerArgs),
    /// Wigner negativity delta(t) for each initial state.
    Delta(CommonArgs),
}

#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// JSON file with any of the flag values; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Kerr susceptibility.
    #[arg(long)]
    pub chi: Option<f64>,
    /// Mean photon number |alpha|^2 of the seed coherent state.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Phase of alpha.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Added photon count; repeat for several states (0 is the coherent state).
    #[arg(long = "m")]
    pub m: Vec<usize>,
    /// Fock tail probability allowed beyond the cutoff.
    #[arg(long)]
    pub cutoff_eps: Option<f64>,
    /// End of the time scan in units of the revival time.
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Number of time samples.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Half-width of the Wigner grid.
    #[arg(long)]
    pub grid_extent: Option<f64>,
    /// Odd number of Wigner grid nodes per axis.
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct SqueezingArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Squeezing order; repeat for several.
    #[arg(long = "q")]
    pub q: Vec<usize>,
    /// Upper end of the nu scan, which starts at nu_max / nu_samples.
    #[arg(long)]
    pub nu_max: Option<f64>,
    /// Samples of nu, evenly spaced up to nu_max.
    #[arg(long)]
    pub nu_samples: Option<usize>,
    /// Samples of theta over [0, pi].
    #[arg(long)]
    pub theta_samples: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct WignerArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Snapshot times in units of the revival time, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub times: Vec<f64>,
}

/// Contents of a `--config` file. Keys mirror the long flag names with `_`.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub chi: Option<f64>,
    pub nu: Option<f64>,
    pub theta: Option<f64>,
    pub m: Option<Vec<usize>>,
    pub q: Option<Vec<usize>>,
    pub cutoff_eps: Option<f64>,
    pub tmax: Option<f64>,
    pub samples: Option<usize>,
    pub grid_extent: Option<f64>,
    pub grid_points: Option<usize>,
    pub out: Option<PathBuf>,
    pub nu_max: Option<f64>,
    pub nu_samples: Option<usize>,
    pub theta_samples: Option<usize>,
    pub times: Option<Vec<f64>>,
}

impl ConfigFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Uniform sampling of `[start, end]`, both ends included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Axis {
    pub start: f64,
    pub end: f64,
    pub samples: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.samples == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.samples - 1) as f64;
        (0..self.samples)
            .map(|i| if i + 1 == self.samples { self.end } else { self.start + step * i as f64 })
            .collect()
    }
}

/// Fully resolved run configuration; this is what the sidecar records.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub command: String,
    pub chi: f64,
    pub nu: f64,
    pub theta: f64,
    pub cutoff_eps: f64,
    pub m: Vec<usize>,
    pub q: Vec<usize>,
    pub time: TimeGrid,
    pub nu_axis: Axis,
    pub theta_axis: Axis,
    /// Wigner snapshot times in units of the revival time.
    pub times: Vec<f64>,
    /// Shared by every state of a `wigner` or `delta` run.
    pub grid: GridSpec,
    pub out: PathBuf,
}

impl ScenarioConfig {
    pub fn params(&self, m: usize) -> Result<ModelParams> {
        ModelParams::with_tail_epsilon(self.chi, self.nu, self.theta, m, self.cutoff_eps)
    }
}

struct Defaults {
    m: &'static [usize],
    samples: usize,
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::RevivalScan(_) => "revival-scan",
        Command::Squeezing(_) => "squeezing",
        Command::Wigner(_) => "wigner",
        Command::Delta(_) => "delta",
    }
}

/// Merges flags over the config file over the defaults of `command`.
pub fn resolve(command: &Command) -> Result<ScenarioConfig> {
    let empty_sq = SqueezingArgs::default();
    let empty_wg = WignerArgs::default();
    let (common, sq, wg, defaults) = match command {
        Command::RevivalScan(c) => (c, &empty_sq, &empty_wg, Defaults { m: &[0], samples: 256 }),
        Command::Squeezing(s) => (&s.common, s, &empty_wg, Defaults { m: &[0, 1], samples: 512 }),
        Command::Wigner(w) => (&w.common, &empty_sq, w, Defaults { m: &[0, 1, 10], samples: 64 }),
        Command::Delta(c) => (c, &empty_sq, &empty_wg, Defaults { m: &[0, 1, 10], samples: 64 }),
    };
    let file = match &common.config {
        Some(path) => ConfigFile::read(path)?,
        None => ConfigFile::default(),
    };
    let list = |flag: &Vec<usize>, file: &Option<Vec<usize>>, default: &[usize]| -> Vec<usize> {
        if !flag.is_empty() {
            flag.clone()
        } else {
            file.clone().unwrap_or_else(|| default.to_vec())
        }
    };

    let chi = common.chi.or(file.chi).unwrap_or(5.0);
    let nu = common.nu.or(file.nu).unwrap_or(1.0);
    let theta = common.theta.or(file.theta).unwrap_or(0.0);
    let cutoff_eps = common.cutoff_eps.or(file.cutoff_eps).unwrap_or(DEFAULT_TAIL_EPSILON);
    let m = list(&common.m, &file.m, defaults.m);
    let q = list(&sq.q, &file.q, &[1, 2, 3]);
    let tmax = common.tmax.or(file.tmax).unwrap_or(1.0);
    let samples = common.samples.or(file.samples).unwrap_or(defaults.samples);
    let nu_max = sq.nu_max.or(file.nu_max).unwrap_or(10.0);
    let nu_samples = sq.nu_samples.or(file.nu_samples).unwrap_or(100);
    let theta_samples = sq.theta_samples.or(file.theta_samples).unwrap_or(91);
    let times = if !wg.times.is_empty() {
        wg.times.clone()
    } else {
        file.times.clone().unwrap_or_else(|| vec![0.0, 0.25, 1.0 / 3.0, 0.5])
    };
    let out = common.out.clone().or(file.out.clone()).unwrap_or_else(|| PathBuf::from("."));

    if m.is_empty() || q.is_empty() || times.is_empty() {
        return Err(Error::InvalidParameter("m, q and times lists must be non-empty".into()));
    }
    if let Some(&bad) = q.iter().find(|&&q| q == 0) {
        return Err(Error::InvalidParameter(format!("q must be >= 1, got {bad}")));
    }
    if !(nu_max > 0.0) || nu_samples == 0 || theta_samples == 0 {
        return Err(Error::InvalidParameter("nu_max must be positive and sample counts non-zero".into()));
    }
    if !(cutoff_eps > 0.0 && cutoff_eps < 1.0) {
        return Err(Error::InvalidParameter(format!("cutoff_eps must lie in (0, 1), got {cutoff_eps}")));
    }
    let time = TimeGrid::revival_periods(tmax, samples)?;
    let params = m
        .iter()
        .map(|&m| ModelParams::with_tail_epsilon(chi, nu, theta, m, cutoff_eps))
        .collect::<Result<Vec<_>>>()?;
    let auto = GridSpec::for_states(&params);
    let extent = common.grid_extent.or(file.grid_extent).unwrap_or(auto.half_extent);
    let points = common.grid_points.or(file.grid_points).unwrap_or_else(|| GridSpec::default_points(extent));

    Ok(ScenarioConfig {
        command: command_name(command).to_string(),
        chi,
        nu,
        theta: params[0].theta,
        cutoff_eps,
        m,
        q,
        time,
        nu_axis: Axis { start: nu_max / nu_samples as f64, end: nu_max, samples: nu_samples },
        theta_axis: Axis { start: 0.0, end: PI, samples: theta_samples },
        times,
        grid: GridSpec::new(auto.center(), extent, points)?,
        out,
    })
}

/// One CSV file held in memory until every output of a run is ready.
struct Table {
    name: String,
    header: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(name: impl Into<String>, header: &[&'static str]) -> Self {
        Self { name: name.into(), header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(&self.name);
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| format_number(v)))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

/// Shortest round-trip representation, switching to exponent form far from 1.
fn format_number(v: f64) -> String {
    if v == 0.0 || (1e-4..1e15).contains(&v.abs()) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// Runs one subcommand and returns the paths written.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    let config = resolve(&cli.command)?;
    let tables = match cli.command {
        Command::RevivalScan(_) => revival_scan(&config)?,
        Command::Squeezing(_) => squeezing(&config)?,
        Command::Wigner(_) => wigner(&config)?,
        Command::Delta(_) => delta(&config)?,
    };
    write_outputs(&config, &tables)
}

fn write_outputs(config: &ScenarioConfig, tables: &[Table]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    let mut written = Vec::with_capacity(tables.len() + 1);
    for table in tables {
        written.push(table.write(&config.out)?);
    }
    let sidecar = config.out.join(format!("{}_config.json", config.command));
    let mut text = serde_json::to_string_pretty(config)?;
    text.push('\n');
    fs::write(&sidecar, text).map_err(|e| Error::io(&sidecar, e))?;
    written.push(sidecar);
    Ok(written)
}

fn revival_scan(config: &ScenarioConfig) -> Result<Vec<Table>> {
    let t_rev = revival_time(config.chi);
    let times = config.time.times(config.chi);
    let mut tables = Vec::new();
    for &m in &config.m {
        let psi0 = make_pacs(&config.params(m)?)?;
        let rows = times
            .par_iter()
            .map(|&t| {
                let psi = evolve(&psi0, t, config.chi);
                let stats = quadrature_stats(&psi, 4).map_err(|e| e.at_time(t))?;
                let c = autocorrelation(&psi0, &psi).map_err(|e| e.at_time(t))?;
                Ok(vec![
                    t,
                    t / t_rev,
                    c,
                    stats.mean_x,
                    stats.mean_p,
                    stats.variance_x,
                    stats.skewness2_x,
                    stats.kurtosis_x,
                ])
            })
            .collect::<Result<Vec<_>>>()?;
        let mut table = Table::new(
            format!("revival_m{m}.csv"),
            &["t", "t_over_Trev", "autocorr", "mean_x", "mean_p", "var_x", "skew2_x", "kurt_x"],
        );
        rows.into_iter().for_each(|r| table.push(r));
        tables.push(table);
    }
    Ok(tables)
}

/// Closed-form and brute-force `D_q(T_rev / 2)`, which must agree.
fn dq_pair(params: &ModelParams, q: usize) -> Result<(f64, f64)> {
    let closed = if params.m == 0 {
        dq_cs_half_revival(q, params.nu, params.theta)
    } else {
        dq_pacs_half_revival(q, params)
    };
    let t = 0.5 * params.revival_time();
    let psi = evolve(&make_pacs(params)?, t, params.chi);
    let numeric = dq_numeric(&psi, q)?.dq;
    if (closed - numeric).abs() > CLOSED_FORM_TOLERANCE * (1.0 + closed.abs()) {
        return Err(Error::Contract(format!(
            "D_{q} closed form {closed} disagrees with brute force {numeric} (m = {}, nu = {}, theta = {})",
            params.m, params.nu, params.theta
        )));
    }
    Ok((closed, numeric))
}

fn squeezing(config: &ScenarioConfig) -> Result<Vec<Table>> {
    let t_rev = revival_time(config.chi);
    let mut vs_nu = Table::new("dq_vs_nu.csv", &["m", "q", "theta", "nu", "dq_closed", "dq_numeric"]);
    let mut vs_theta = Table::new("dq_vs_theta.csv", &["m", "q", "nu", "theta", "dq_closed", "dq_numeric"]);
    let mut dx = Table::new("delta_x_vs_t.csv", &["m", "t", "t_over_Trev", "delta_x", "reference"]);
    let mut m4 = Table::new("m4_vs_t.csv", &["m", "t", "t_over_Trev", "m4", "bound"]);
    let nus = config.nu_axis.values();
    let thetas = config.theta_axis.values();
    let times = config.time.times(config.chi);

    for &m in &config.m {
        for &q in &config.q {
            let rows = nus
                .par_iter()
                .map(|&nu| {
                    let params = ModelParams::with_tail_epsilon(config.chi, nu, config.theta, m, config.cutoff_eps)?;
                    let (closed, numeric) = dq_pair(&params, q)?;
                    Ok(vec![m as f64, q as f64, params.theta, nu, closed, numeric])
                })
                .collect::<Result<Vec<_>>>()?;
            rows.into_iter().for_each(|r| vs_nu.push(r));

            let rows = thetas
                .par_iter()
                .map(|&theta| {
                    let params = ModelParams::with_tail_epsilon(config.chi, config.nu, theta, m, config.cutoff_eps)?;
                    let (closed, numeric) = dq_pair(&params, q)?;
                    Ok(vec![m as f64, q as f64, config.nu, theta, closed, numeric])
                })
                .collect::<Result<Vec<_>>>()?;
            rows.into_iter().for_each(|r| vs_theta.push(r));
        }

        let psi0 = make_pacs(&config.params(m)?)?;
        let rows = times
            .par_iter()
            .map(|&t| {
                let psi = evolve(&psi0, t, config.chi);
                let stats = quadrature_stats(&psi, 4).map_err(|e| e.at_time(t))?;
                let hm = hong_mandel_m4(&psi).map_err(|e| e.at_time(t))?;
                Ok((stats.variance_x.sqrt(), hm.moment4, t))
            })
            .collect::<Result<Vec<_>>>()?;
        for (delta_x, moment4, t) in rows {
            dx.push(vec![m as f64, t, t / t_rev, delta_x, FRAC_1_SQRT_2]);
            m4.push(vec![m as f64, t, t / t_rev, moment4, HONG_MANDEL_BOUND]);
        }
    }
    Ok(vec![vs_nu, vs_theta, dx, m4])
}

fn check_normalization(integral: f64, m: usize, t: f64) -> Result<()> {
    if (integral - 1.0).abs() > DELTA_TOLERANCE {
        return Err(Error::Contract(format!("Wigner integral {integral} deviates from 1 (m = {m})")).at_time(t));
    }
    Ok(())
}

fn wigner(config: &ScenarioConfig) -> Result<Vec<Table>> {
    let t_rev = revival_time(config.chi);
    let grid = &config.grid;
    let n = grid.points_per_axis;
    let mut summary = Table::new(
        "summary.csv",
        &["m", "t", "t_over_Trev", "min_w", "max_w", "negative_cells", "lobes", "integral", "delta"],
    );
    let mut tables = Vec::new();
    for &m in &config.m {
        let psi0 = make_pacs(&config.params(m)?)?;
        for &frac in &config.times {
            let t = frac * t_rev;
            let field = wigner_at(&psi0, t, config.chi, grid);
            let d = delta_from_field(&field).map_err(|e| e.at_time(t))?;
            check_normalization(d.integral, m, t)?;
            summary.push(vec![
                m as f64,
                t,
                frac,
                d.min_w,
                d.max_w,
                field.negative_cells() as f64,
                field.count_local_maxima(DEFAULT_LOBE_THRESHOLD) as f64,
                d.integral,
                d.clamped,
            ]);
            let mut table = Table::new(format!("wigner_m{m}_t{frac:.4}.csv"), &["beta1", "beta2", "w"]);
            for i in 0..n {
                for j in 0..n {
                    let beta = grid.node(i, j);
                    table.push(vec![beta.re, beta.im, field.get(i, j)]);
                }
            }
            tables.push(table);
        }
    }
    tables.push(summary);
    Ok(tables)
}

fn delta(config: &ScenarioConfig) -> Result<Vec<Table>> {
    let mut all = Table::new("delta_all.csv", &["m", "t", "t_over_Trev", "delta_raw", "delta"]);
    let mut tables = Vec::new();
    for &m in &config.m {
        let psi0 = make_pacs(&config.params(m)?)?;
        let scan = delta_timescan(&psi0, &config.time, &config.grid, config.chi)?;
        let mut table = Table::new(format!("delta_m{m}.csv"), &["t", "t_over_Trev", "delta_raw", "delta"]);
        for s in scan {
            check_normalization(s.delta.integral, m, s.t)?;
            table.push(vec![s.t, s.t_over_trev, s.delta.raw, s.delta.clamped]);
            all.push(vec![m as f64, s.t, s.t_over_trev, s.delta.raw, s.delta.clamped]);
        }
        tables.push(table);
    }
    tables.push(all);
    Ok(tables)
}
