//! Command-line surface: curve solving, correlator evaluation, density
//! tables, sampler runs and sampler-vs-theory comparisons.
//!
//! All experiment inputs live in a single JSON config; CLI flags override
//! top-level fields. Every command is deterministic given its config
//! (seeds included), so output files are bit-reproducible. CSV output uses
//! '.' decimals, ',' separators, a header row and 17 significant digits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::correlators::{CorrelatorEngine, CorrelatorKey};
use crate::density::{combined_density, ThetaGrid};
use crate::error::{Error, Result};
use crate::numerics::Complex;
use crate::sampler::{histogram_in_theta, run_chains, EnsembleConfig};
use crate::spectral::{solve_endpoints, BetaParams, Potential, SpectralCurve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub t0: f64,
    pub beta: f64,
    pub n_eigen: u64,
    pub max_twice_g: u32,
    pub grid: usize,
    pub sweeps: u64,
    pub burn_in: u64,
    pub chains: usize,
    pub seed: u64,
    pub bins: usize,
    pub step_scale: f64,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            t1: 0.0,
            t2: 1.0,
            t3: 0.0,
            t4: 4.0,
            t0: 1.0,
            beta: 1.0,
            n_eigen: 50,
            max_twice_g: 1,
            grid: 512,
            sweeps: 100_000,
            burn_in: 5_000,
            chains: 1,
            seed: 42,
            bins: 60,
            step_scale: 1.0,
            output_dir: PathBuf::from("."),
            format: OutputFormat::Csv,
        }
    }
}

impl RunConfig {
    pub fn potential(&self) -> Result<Potential> {
        Potential::new(self.t1, self.t2, self.t3, self.t4, self.t0)
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn params(&self) -> Result<BetaParams> {
        BetaParams::new(self.beta, self.n_eigen, self.t0)
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn sampler_config(&self) -> Result<EnsembleConfig> {
        let cfg = EnsembleConfig {
            potential: self.potential()?,
            beta: self.beta,
            n_eigen: self.n_eigen as usize,
            sweeps: self.sweeps,
            burn_in: self.burn_in,
            step_scale: self.step_scale,
            seed: self.seed,
            chains: self.chains,
            bins: self.bins,
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Parser)]
#[command(name = "beta-spectral", version, about = "One-cut beta-ensemble correlators, densities and Metropolis comparisons")]
pub struct Cli {
    /// JSON config file; flags below override its top-level fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub t1: Option<f64>,
    #[arg(long, global = true)]
    pub t2: Option<f64>,
    #[arg(long, global = true)]
    pub t3: Option<f64>,
    #[arg(long, global = true)]
    pub t4: Option<f64>,
    #[arg(long, global = true)]
    pub t0: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub n_eigen: Option<u64>,
    #[arg(long, global = true)]
    pub max_twice_g: Option<u32>,
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true)]
    pub sweeps: Option<u64>,
    #[arg(long, global = true)]
    pub burn_in: Option<u64>,
    #[arg(long, global = true)]
    pub chains: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub bins: Option<usize>,
    #[arg(long, global = true)]
    pub step_scale: Option<f64>,
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the spectral curve and write curve.json.
    Curve,
    /// Evaluate a correlator at given points and write correlators.csv.
    Correlator {
        /// Order as "twice_g,n", e.g. "1,2" for the half-order two-point.
        #[arg(long)]
        key: String,
        /// Evaluation rows "re im re im ...;re im ..." with n complex
        /// numbers per row.
        #[arg(long)]
        points: String,
    },
    /// Tabulate the density and its corrections; writes density.csv.
    Density,
    /// Run the Metropolis sampler; writes sample.csv and summary.json.
    Sample,
    /// Sampler vs theory in the angle variable; writes compare.csv and
    /// summary.json.
    Compare,
}

pub fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<RunConfig>(&text)
                .map_err(|e| Error::Config(format!("invalid config: {e}")))?
        }
        None => RunConfig::default(),
    };
    macro_rules! over {
        ($($field:ident),*) => {
            $(if let Some(v) = &cli.$field { cfg.$field = v.clone(); })*
        };
    }
    over!(
        t1, t2, t3, t4, t0, beta, n_eigen, max_twice_g, grid, sweeps, burn_in, chains, seed,
        bins, step_scale, output_dir, format
    );
    Ok(cfg)
}

/// 17 significant digits, enough to round-trip any double.
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

fn complex_pair(z: Complex) -> serde_json::Value {
    serde_json::json!([z.re, z.im])
}

fn build_curve(cfg: &RunConfig) -> Result<SpectralCurve> {
    solve_endpoints(&cfg.potential()?, None)
}

fn build_engine(cfg: &RunConfig) -> Result<CorrelatorEngine> {
    Ok(CorrelatorEngine::new(build_curve(cfg)?, cfg.params()?))
}

pub fn cmd_curve(cfg: &RunConfig) -> Result<()> {
    let curve = build_curve(cfg)?;
    let doc = serde_json::json!({
        "a": curve.a,
        "b": curve.b,
        "m0": curve.m0,
        "m1": curve.m1,
        "m2": curve.m2,
        "d": curve.d,
        "zeros_x": curve.zeros_x.iter().map(|z| complex_pair(*z)).collect::<Vec<_>>(),
        "zeros_z": curve.zeros_z.iter().map(|z| complex_pair(*z)).collect::<Vec<_>>(),
        "residuals": {
            "asymptotic": curve.asymptotic_residual,
            "printed_eq_ab": curve.printed_residual,
        },
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
    text.push('\n');
    write_file(&cfg.output_dir, "curve.json", &text)
}

fn parse_key(key: &str) -> Result<CorrelatorKey> {
    let parts: Vec<&str> = key.split(',').collect();
    let bad = || Error::Config(format!("key must be \"twice_g,n\", got {key:?}"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let twice_g: u32 = parts[0].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[1].trim().parse().map_err(|_| bad())?;
    CorrelatorKey::new(twice_g, n).map_err(|e| Error::Config(e.to_string()))
}

fn parse_points(points: &str, n: usize) -> Result<Vec<Vec<Complex>>> {
    let mut rows = Vec::new();
    for row in points.split(';') {
        let nums: Vec<f64> = row
            .split_whitespace()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad number {s:?} in points")))
            })
            .collect::<Result<_>>()?;
        if nums.len() != 2 * n {
            return Err(Error::Config(format!(
                "each row needs {} numbers (re im per point), got {}",
                2 * n,
                nums.len()
            )));
        }
        rows.push(nums.chunks(2).map(|c| Complex::new(c[0], c[1])).collect());
    }
    Ok(rows)
}

pub fn cmd_correlator(cfg: &RunConfig, key: &str, points: &str) -> Result<()> {
    let key = parse_key(key)?;
    let rows = parse_points(points, key.n)?;
    let engine = build_engine(cfg)?;

    let mut out = String::new();
    for i in 1..=key.n {
        write!(out, "z{i}_re,z{i}_im,").unwrap();
    }
    out.push_str("re,im,closed_re,closed_im,error\n");
    for pts in rows {
        for p in &pts {
            write!(out, "{},{},", fmt(p.re), fmt(p.im)).unwrap();
        }
        match engine.w(key, &pts) {
            Ok(v) => {
                write!(out, "{},{}", fmt(v.re), fmt(v.im)).unwrap();
                // The one-point orders also have printed closed forms;
                // emit them alongside for cross-checking.
                let closed = match (key.twice_g, key.n) {
                    (1, 1) => Some(
                        engine
                            .w_half_one(&crate::numerics::Jet::constant(pts[0], pts[0], 0))?
                            .value(),
                    ),
                    (2, 1) => Some(
                        engine
                            .w_one_one(&crate::numerics::Jet::constant(pts[0], pts[0], 0))?
                            .value(),
                    ),
                    _ => None,
                };
                match closed {
                    Some(c) => writeln!(out, ",{},{},", fmt(c.re), fmt(c.im)).unwrap(),
                    None => writeln!(out, ",,,").unwrap(),
                }
            }
            Err(e) => {
                writeln!(out, "NaN,NaN,,,{}", e.to_string().replace(',', ";")).unwrap()
            }
        }
    }
    write_file(&cfg.output_dir, "correlators.csv", &out)
}

pub fn cmd_density(cfg: &RunConfig) -> Result<()> {
    let engine = build_engine(cfg)?;
    let grid = ThetaGrid::uniform(cfg.grid).map_err(|e| Error::Config(e.to_string()))?;
    let series = combined_density(&engine, cfg.max_twice_g, &grid)?;

    let mut out = String::from("theta,rho0");
    for tg in 1..=cfg.max_twice_g {
        write!(out, ",coef_{tg}").unwrap();
    }
    out.push_str(",combined\n");
    for (k, &theta) in grid.points().iter().enumerate() {
        write!(out, "{},{}", fmt(theta), fmt(series.rho0[k])).unwrap();
        for tg in 1..=cfg.max_twice_g {
            let v = if series.non_integrable.contains(&tg) {
                f64::NAN
            } else {
                series.corrections[&tg][k]
            };
            write!(out, ",{}", fmt(v)).unwrap();
        }
        writeln!(out, ",{}", fmt(series.combined[k])).unwrap();
    }

    // Trailing metadata: quadrature integrals in the same column layout.
    let step = std::f64::consts::PI / cfg.grid as f64;
    write!(out, "integral,{}", fmt(1.0)).unwrap();
    for tg in 1..=cfg.max_twice_g {
        let v = series.correction_integrals.get(&tg).copied().unwrap_or(f64::NAN);
        write!(out, ",{}", fmt(v)).unwrap();
    }
    writeln!(out, ",{}", fmt(series.combined.iter().sum::<f64>() * step)).unwrap();
    writeln!(out, "raw_rho0_integral,{}", fmt(series.rho0_raw_integral)).unwrap();
    if !series.warnings.is_empty() {
        writeln!(out, "warning,{}", series.warnings.join(" | ").replace(',', ";")).unwrap();
    }
    write_file(&cfg.output_dir, "density.csv", &out)
}

pub fn cmd_sample(cfg: &RunConfig) -> Result<()> {
    let sampler_cfg = cfg.sampler_config()?;
    let (hist, stats) = run_chains(&sampler_cfg)?;

    let mut out = String::from("x_lo,x_hi,count,density\n");
    for k in 0..hist.bins() {
        writeln!(
            out,
            "{},{},{},{}",
            fmt(hist.edges[k]),
            fmt(hist.edges[k + 1]),
            hist.counts[k],
            fmt(hist.density[k])
        )
        .unwrap();
    }
    write_file(&cfg.output_dir, "sample.csv", &out)?;

    let summary = serde_json::json!({
        "acceptance": stats.acceptance,
        "acceptance_per_chain": stats.acceptance_per_chain,
        "step_per_chain": stats.step_per_chain,
        "outside_fraction": stats.outside_fraction,
        "total_samples": hist.total,
        "warnings": stats.warnings,
    });
    let mut text = serde_json::to_string_pretty(&summary).expect("serializable");
    text.push('\n');
    write_file(&cfg.output_dir, "summary.json", &text)
}

pub fn cmd_compare(cfg: &RunConfig) -> Result<()> {
    let engine = build_engine(cfg)?;
    let sampler_cfg = cfg.sampler_config()?;
    let (hist, stats) = run_chains(&sampler_cfg)?;
    let (theta_hist, beyond_cut) = histogram_in_theta(&hist, &engine.curve, cfg.bins);

    // Theory on the theta-bin centers (which are the uniform midpoints).
    let grid = ThetaGrid::uniform(cfg.bins).map_err(|e| Error::Config(e.to_string()))?;
    let series = combined_density(&engine, cfg.max_twice_g, &grid)?;

    let width = std::f64::consts::PI / cfg.bins as f64;
    let mut out = String::from("theta,empirical,rho0,combined\n");
    let mut l1_rho0 = 0.0;
    let mut l1_combined = 0.0;
    let mut cdf_emp = 0.0;
    let mut cdf_rho0 = 0.0;
    let mut cdf_comb = 0.0;
    let mut ks_rho0 = 0.0f64;
    let mut ks_combined = 0.0f64;
    for (k, &theta) in grid.points().iter().enumerate() {
        let emp = theta_hist.density[k];
        writeln!(
            out,
            "{},{},{},{}",
            fmt(theta),
            fmt(emp),
            fmt(series.rho0[k]),
            fmt(series.combined[k])
        )
        .unwrap();
        l1_rho0 += (emp - series.rho0[k]).abs() * width;
        l1_combined += (emp - series.combined[k]).abs() * width;
        cdf_emp += emp * width;
        cdf_rho0 += series.rho0[k] * width;
        cdf_comb += series.combined[k] * width;
        ks_rho0 = ks_rho0.max((cdf_emp - cdf_rho0).abs());
        ks_combined = ks_combined.max((cdf_emp - cdf_comb).abs());
    }
    write_file(&cfg.output_dir, "compare.csv", &out)?;

    let mut warnings = stats.warnings.clone();
    warnings.extend(series.warnings.clone());
    if beyond_cut > 0.01 {
        warnings.push(format!("{:.2}% of samples outside the cut", 100.0 * beyond_cut));
    }
    let summary = serde_json::json!({
        "l1_rho0": l1_rho0,
        "l1_combined": l1_combined,
        "ks_rho0": ks_rho0,
        "ks_combined": ks_combined,
        "acceptance": stats.acceptance,
        "outside_cut_fraction": beyond_cut,
        "warnings": warnings,
    });
    let mut text = serde_json::to_string_pretty(&summary).expect("serializable");
    text.push('\n');
    write_file(&cfg.output_dir, "summary.json", &text)
}

pub fn execute(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Curve => cmd_curve(&cfg),
        Command::Correlator { key, points } => cmd_correlator(&cfg, key, points),
        Command::Density => cmd_density(&cfg),
        Command::Sample => cmd_sample(&cfg),
        Command::Compare => cmd_compare(&cfg),
    }
}

/// Exit codes: 0 ok, 1 runtime/math failure, 2 config error.
pub fn main_entry() -> i32 {
    if let Ok(threads) = std::env::var("BETA_SPECTRAL_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => 2,
                _ => 1,
            }
        }
    }
}
