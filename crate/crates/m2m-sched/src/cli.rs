//! Batch experiment runner: `run` executes one scheme, `compare` runs a set
//! of schemes on common random numbers, `sweep` scans a parameter. All
//! commands write CSVs first and derive the SVG plots from the files they
//! just wrote.
//!
//! Exit codes: 0 success, 1 usage, 2 config/validation, 3 runtime.

use crate::config::{ConfigError, SimConfig};
use crate::report::{self, SweepRow};
use crate::sim::{self, ExperimentSummary};
use crate::{lte, plot};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "m2m-sched",
    version,
    about = "Battery-lifetime-aware uplink scheduling experiments for cellular M2M"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Experiment configuration file (TOML). Defaults to the bundled
    /// desk-scale configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSVs and plots.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Node count override.
    #[arg(long)]
    nodes: Option<usize>,
    /// Replication count override.
    #[arg(long)]
    replications: Option<usize>,
    /// Extra section.key=value overrides, applied last.
    #[arg(long = "set")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scheme and write report.csv and lifetimes.csv.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Scheduling scheme 1..6 (overrides the config).
        #[arg(long)]
        scheme: Option<u8>,
    },
    /// Run several schemes on shared seeds and write compare.csv plus plots.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated scheme ids, e.g. 1,2,4.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
        schemes: Vec<u8>,
        /// Histogram bin count for the lifetime PDF plot.
        #[arg(long, default_value_t = 40)]
        bins: usize,
    },
    /// Sweep a parameter and write sweep.csv plus line plots.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Which knob to sweep.
        #[arg(long, value_parser = ["snr_target", "payload", "load"])]
        parameter: String,
        /// Comma-separated sweep values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        /// Schemes to evaluate at each point.
        #[arg(long, value_delimiter = ',', default_value = "2,4")]
        schemes: Vec<u8>,
    },
}

const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");

fn load_config(common: &CommonArgs) -> Result<SimConfig, ConfigError> {
    let mut cfg = match &common.config {
        Some(path) => SimConfig::load(path)?,
        None => SimConfig::from_toml_str(DEFAULT_CONFIG)?,
    };
    if let Some(seed) = common.seed {
        cfg.sim.seed = seed;
    }
    if let Some(nodes) = common.nodes {
        cfg.network.node_count = nodes;
    }
    if let Some(reps) = common.replications {
        cfg.sim.replications = reps;
    }
    for spec in &common.set {
        cfg.apply_override(spec)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_scheme(cfg: &SimConfig, scheme: u8) -> Result<ExperimentSummary, sim::SimError> {
    let mut c = cfg.clone();
    c.sim.scheme = scheme;
    sim::run_experiment(&c)
}

fn cmd_run(common: &CommonArgs, scheme: Option<u8>) -> Result<(), CliError> {
    let mut cfg = load_config(common)?;
    if let Some(s) = scheme {
        cfg.sim.scheme = s;
        cfg.validate()?;
    }
    std::fs::create_dir_all(&common.out).map_err(CliError::Io)?;
    let summary = sim::run_experiment(&cfg)?;
    report::write_report_csv(&common.out.join("report.csv"), &cfg, &summary)
        .map_err(CliError::Io)?;
    report::write_lifetimes_csv(&common.out.join("lifetimes.csv"), &cfg, &[&summary])
        .map_err(CliError::Io)?;
    eprintln!(
        "scheme {}: sil {:.1} s, lil {:.1} s, jain {:.4}, violations {}",
        cfg.sim.scheme,
        summary.stat(|r| r.sil_s()).mean,
        summary.stat(|r| r.lil_s()).mean,
        summary.stat(|r| r.jain()).mean,
        summary.total_violations()
    );
    Ok(())
}

fn cmd_compare(common: &CommonArgs, schemes: &[u8], bins: usize) -> Result<(), CliError> {
    if schemes.len() < 2 {
        return Err(CliError::Validation(
            "compare needs at least two schemes".into(),
        ));
    }
    let cfg = load_config(common)?;
    for &s in schemes {
        if !(1..=6).contains(&s) {
            return Err(CliError::Validation(format!("unknown scheme id {s}")));
        }
    }
    std::fs::create_dir_all(&common.out).map_err(CliError::Io)?;
    let mut summaries = Vec::new();
    for &s in schemes {
        summaries.push(run_scheme(&cfg, s)?);
    }
    // Common random numbers: the per-replication streams must agree across
    // schemes.
    for s in &summaries[1..] {
        for (a, b) in summaries[0].reports.iter().zip(&s.reports) {
            if a.arrival_hash != b.arrival_hash {
                return Err(CliError::Runtime(
                    "arrival streams diverged across schemes".into(),
                ));
            }
        }
    }
    let compare_path = common.out.join("compare.csv");
    report::write_compare_csv(&compare_path, &cfg, &summaries).map_err(CliError::Io)?;
    let refs: Vec<&ExperimentSummary> = summaries.iter().collect();
    let lifetimes_path = common.out.join("lifetimes.csv");
    report::write_lifetimes_csv(&lifetimes_path, &cfg, &refs).map_err(CliError::Io)?;
    render_compare_plots(&common.out, &compare_path, &lifetimes_path, bins)?;
    eprintln!("compared schemes {schemes:?} -> {}", compare_path.display());
    Ok(())
}

/// Plots are built strictly from the CSVs written above.
fn render_compare_plots(
    out: &Path,
    compare_csv: &Path,
    lifetimes_csv: &Path,
    bins: usize,
) -> Result<(), CliError> {
    let (header, rows) = report::read_csv_columns(lifetimes_csv).map_err(CliError::Io)?;
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (c_scheme, c_drain) = (col("scheme"), col("drain_s"));
    let mut by_scheme: Vec<(String, Vec<f64>)> = Vec::new();
    for row in &rows {
        let scheme = &row[c_scheme];
        let drain: f64 = row[c_drain].parse().unwrap_or(0.0);
        match by_scheme.iter_mut().find(|(s, _)| s == scheme) {
            Some((_, v)) => v.push(drain),
            None => by_scheme.push((scheme.clone(), vec![drain])),
        }
    }
    let labeled: Vec<(String, Vec<f64>)> = by_scheme
        .iter()
        .map(|(s, v)| (format!("scheme {s}"), v.clone()))
        .collect();
    plot::histogram_svg(
        &out.join("lifetime_pdf.svg"),
        "Empirical distribution of individual lifetimes",
        "lifetime (log10 s)",
        &labeled,
        bins,
        true,
    )
    .map_err(CliError::Io)?;

    let (header, rows) = report::read_csv_columns(compare_csv).map_err(CliError::Io)?;
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let schemes: Vec<String> = rows.iter().map(|r| r[col("scheme")].clone()).collect();
    let grab = |name: &str| -> Vec<f64> {
        rows.iter()
            .map(|r| r[col(name)].parse().unwrap_or(0.0))
            .collect()
    };
    plot::bar_chart_svg(
        &out.join("lifetime_bars.svg"),
        "Network lifetime by scheme",
        "seconds (log10)",
        &schemes,
        &[
            ("sil".to_string(), grab("sil_mean")),
            ("lil".to_string(), grab("lil_mean")),
            ("ail".to_string(), grab("ail_mean")),
        ],
        true,
    )
    .map_err(CliError::Io)?;
    plot::bar_chart_svg(
        &out.join("fairness.svg"),
        "Fairness of the schemes",
        "Jain index / lifetime variance",
        &schemes,
        &[
            ("jain".to_string(), grab("jain_mean")),
            (
                "variance (norm.)".to_string(),
                normalize(&grab("drain_variance_mean")),
            ),
        ],
        false,
    )
    .map_err(CliError::Io)?;
    Ok(())
}

fn normalize(v: &[f64]) -> Vec<f64> {
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi > 0.0 {
        v.iter().map(|x| x / hi).collect()
    } else {
        v.to_vec()
    }
}

fn cmd_sweep(
    common: &CommonArgs,
    parameter: &str,
    values: &[f64],
    schemes: &[u8],
) -> Result<(), CliError> {
    if values.len() < 2 {
        return Err(CliError::Validation("sweep needs at least two values".into()));
    }
    let cfg = load_config(common)?;
    std::fs::create_dir_all(&common.out).map_err(CliError::Io)?;
    let mut rows: Vec<SweepRow> = Vec::new();
    for &value in values {
        // The load sweep scans the node population (offered bits per
        // reserved block) and doubles as the resource-provisioning
        // comparison: each load runs against the full and the halved
        // reservation.
        let frames: Vec<u32> = match parameter {
            "load" => vec![
                (cfg.sim.reserved_subframes / 2).max(1),
                cfg.sim.reserved_subframes,
            ],
            _ => vec![cfg.sim.reserved_subframes],
        };
        for frame in frames {
            let mut point = cfg.clone();
            point.sim.reserved_subframes = frame;
            match parameter {
                "snr_target" => point.lte.snr_target_db = value,
                "payload" => point.traffic.payload_bits = value,
                "load" => {
                    if value < 1.0 || value.fract() != 0.0 {
                        return Err(CliError::Validation(format!(
                            "load sweep values are node counts, got {value}"
                        )));
                    }
                    point.network.node_count = value as usize;
                }
                other => {
                    return Err(CliError::Validation(format!(
                        "unknown sweep parameter {other:?}"
                    )))
                }
            }
            point.validate()?;
            for &s in schemes {
                let summary = run_scheme(&point, s)?;
                rows.push(SweepRow::from_summary(parameter, value, frame, &summary));
            }
        }
    }
    let sweep_path = common.out.join("sweep.csv");
    report::write_sweep_csv(&sweep_path, &cfg, &rows).map_err(CliError::Io)?;
    render_sweep_plots(&common.out, &sweep_path, parameter)?;
    eprintln!(
        "swept {parameter} over {values:?} for schemes {schemes:?} -> {}",
        sweep_path.display()
    );
    Ok(())
}

fn render_sweep_plots(out: &Path, sweep_csv: &Path, parameter: &str) -> Result<(), CliError> {
    let (header, rows) = report::read_csv_columns(sweep_csv).map_err(CliError::Io)?;
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let mut xs: Vec<f64> = rows
        .iter()
        .map(|r| r[col("value")].parse().unwrap_or(0.0))
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let series_of = |metric: &str| -> Vec<(String, Vec<f64>)> {
        let mut keys: Vec<(String, String)> = rows
            .iter()
            .map(|r| (r[col("scheme")].clone(), r[col("reserved_subframes")].clone()))
            .collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|(scheme, frames)| {
                let label = format!("scheme {scheme}, {frames} subframe(s)/s");
                let ys: Vec<f64> = xs
                    .iter()
                    .map(|&x| {
                        rows.iter()
                            .find(|r| {
                                r[col("scheme")] == scheme
                                    && r[col("reserved_subframes")] == frames
                                    && (r[col("value")].parse::<f64>().unwrap_or(f64::NAN) - x)
                                        .abs()
                                        < 1e-9
                            })
                            .map(|r| r[col(metric)].parse().unwrap_or(0.0))
                            .unwrap_or(0.0)
                    })
                    .collect();
                (label, ys)
            })
            .collect()
    };
    let x_label = match parameter {
        "snr_target" => "SNR target (dB)",
        "payload" => "report size (bits)",
        _ => "machine nodes (offered load)",
    };
    plot::line_chart_svg(
        &out.join("sweep_lifetime.svg"),
        "Network lifetime across the sweep",
        x_label,
        "SIL lifetime (s)",
        &xs,
        &series_of("sil_mean"),
        false,
    )
    .map_err(CliError::Io)?;
    plot::line_chart_svg(
        &out.join("sweep_efficiency.svg"),
        "Energy and spectral efficiency across the sweep",
        x_label,
        "bits/J (log10)",
        &xs,
        &series_of("ee_mean"),
        true,
    )
    .map_err(CliError::Io)?;
    plot::line_chart_svg(
        &out.join("sweep_spectral.svg"),
        "Spectral efficiency across the sweep",
        x_label,
        "bit/s/Hz",
        &xs,
        &series_of("se_mean"),
        false,
    )
    .map_err(CliError::Io)?;
    Ok(())
}

#[derive(Debug)]
enum CliError {
    Validation(String),
    Io(std::io::Error),
    Runtime(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<sim::SimError> for CliError {
    fn from(e: sim::SimError) -> Self {
        match e {
            sim::SimError::Config(c) => CliError::Validation(c.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<lte::LteError> for CliError {
    fn from(e: lte::LteError) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap prints its own message (help/version go to stdout).
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Run { common, scheme } => cmd_run(common, *scheme),
        Command::Compare {
            common,
            schemes,
            bins,
        } => cmd_compare(common, schemes, *bins),
        Command::Sweep {
            common,
            parameter,
            values,
            schemes,
        } => cmd_sweep(common, parameter, values, schemes),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("usage: m2m-sched <run|compare|sweep> --help");
            EXIT_VALIDATION
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_RUNTIME
        }
    }
}
