//! CSV emission for experiment results. Every file starts with a comment
//! block carrying the config hash, master seed, and code version so a run
//! can be audited and reproduced.

use crate::config::SimConfig;
use crate::sim::{metric_stats, paired_ratio_stats, ExperimentSummary, MetricStats, SimReport};
use std::io::{self, Write};
use std::path::Path;

/// Provenance lines prepended to every CSV.
pub fn metadata_block(cfg: &SimConfig, extra: &[(&str, String)]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# config_hash: {:016x}\n", cfg.content_hash()));
    out.push_str(&format!("# seed: {}\n", cfg.sim.seed));
    out.push_str(&format!("# version: {}\n", env!("CARGO_PKG_VERSION")));
    for (k, v) in extra {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out
}

fn fmt(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.9e}")
    } else {
        // Stable spelling for infinities in SLIL-style columns.
        format!("{x}")
    }
}

fn scheme_row(s: &ExperimentSummary) -> String {
    let cols: [(&str, MetricStats); 6] = [
        ("sil", s.stat(|r| r.sil_s())),
        ("lil", s.stat(|r| r.lil_s())),
        ("ail", s.stat(|r| r.ail_s())),
        ("jain", s.stat(|r| r.jain())),
        ("ee", s.stat(|r| r.energy_efficiency())),
        ("se", s.stat(|r| r.spectral_efficiency())),
    ];
    let mut row = format!("{}", s.scheme);
    for (_, st) in &cols {
        row.push_str(&format!(",{},{},{}", fmt(st.mean), fmt(st.ci_lo), fmt(st.ci_hi)));
    }
    let drained = s.stat(|r| r.drained_count() as f64);
    let var = s.stat(|r| r.drain_variance());
    row.push_str(&format!(
        ",{},{},{},{}",
        fmt(drained.mean),
        fmt(var.mean),
        s.total_violations(),
        s.reports.iter().filter(|r| r.all_drained).count()
    ));
    row
}

const SCHEME_HEADER: &str = "scheme,sil_mean,sil_ci_lo,sil_ci_hi,lil_mean,lil_ci_lo,lil_ci_hi,\
ail_mean,ail_ci_lo,ail_ci_hi,jain_mean,jain_ci_lo,jain_ci_hi,ee_mean,ee_ci_lo,ee_ci_hi,\
se_mean,se_ci_lo,se_ci_hi,drained_mean,drain_variance_mean,violations,all_drained_reps";

/// Aggregate metrics of one scheme's replication set.
pub fn write_report_csv(
    path: &Path,
    cfg: &SimConfig,
    summary: &ExperimentSummary,
) -> io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    write!(f, "{}", metadata_block(cfg, &[("kind", "report".into())]))?;
    writeln!(f, "{SCHEME_HEADER}")?;
    writeln!(f, "{}", scheme_row(summary))?;
    Ok(())
}

/// Per-node drain times for every replication of one or more schemes.
pub fn write_lifetimes_csv(
    path: &Path,
    cfg: &SimConfig,
    summaries: &[&ExperimentSummary],
) -> io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    write!(f, "{}", metadata_block(cfg, &[("kind", "lifetimes".into())]))?;
    writeln!(
        f,
        "scheme,replication,node,distance_m,drain_s,censored,consumed_j"
    )?;
    for s in summaries {
        for r in &s.reports {
            for i in 0..r.drain_time_s.len() {
                let (drain, censored) = match r.drain_time_s[i] {
                    Some(d) => (d, 0),
                    None => (r.end_s, 1),
                };
                writeln!(
                    f,
                    "{},{},{},{},{},{},{}",
                    s.scheme,
                    r.replication,
                    i,
                    fmt(r.distances_m[i]),
                    fmt(drain),
                    censored,
                    fmt(r.consumed_j[i]),
                )?;
            }
        }
    }
    Ok(())
}

/// Side-by-side scheme comparison plus pairwise metric ratios on common
/// random numbers.
pub fn write_compare_csv(
    path: &Path,
    cfg: &SimConfig,
    summaries: &[ExperimentSummary],
) -> io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    let arrival = summaries
        .first()
        .and_then(|s| s.reports.first())
        .map(|r| format!("{:016x}", r.arrival_hash))
        .unwrap_or_default();
    write!(
        f,
        "{}",
        metadata_block(
            cfg,
            &[("kind", "compare".into()), ("arrival_hash", arrival)]
        )
    )?;
    writeln!(f, "{SCHEME_HEADER}")?;
    for s in summaries {
        writeln!(f, "{}", scheme_row(s))?;
    }
    writeln!(f)?;
    writeln!(
        f,
        "pair,sil_ratio,sil_ratio_ci_lo,sil_ratio_ci_hi,lil_ratio,lil_ratio_ci_lo,\
lil_ratio_ci_hi,ail_ratio,jain_ratio,ee_ratio,se_ratio"
    )?;
    for a in summaries {
        for b in summaries {
            if a.scheme == b.scheme {
                continue;
            }
            let sil = paired_ratio_stats(a, b, |r| r.sil_s());
            let lil = paired_ratio_stats(a, b, |r| r.lil_s());
            let ail = paired_ratio_stats(a, b, |r| r.ail_s());
            let jain = paired_ratio_stats(a, b, |r| r.jain());
            let ee = paired_ratio_stats(a, b, |r| r.energy_efficiency());
            let se = paired_ratio_stats(a, b, |r| r.spectral_efficiency());
            writeln!(
                f,
                "{}/{},{},{},{},{},{},{},{},{},{},{}",
                a.scheme,
                b.scheme,
                fmt(sil.mean),
                fmt(sil.ci_lo),
                fmt(sil.ci_hi),
                fmt(lil.mean),
                fmt(lil.ci_lo),
                fmt(lil.ci_hi),
                fmt(ail.mean),
                fmt(jain.mean),
                fmt(ee.mean),
                fmt(se.mean),
            )?;
        }
    }
    Ok(())
}

/// One sweep observation: a parameter value, the resource setting, and one
/// scheme's aggregate metrics at that point.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub parameter: String,
    pub value: f64,
    pub reserved_subframes: u32,
    pub scheme: u8,
    pub sil: MetricStats,
    pub lil: MetricStats,
    pub jain: MetricStats,
    pub ee: MetricStats,
    pub se: MetricStats,
    pub violations: u64,
}

impl SweepRow {
    pub fn from_summary(
        parameter: &str,
        value: f64,
        reserved_subframes: u32,
        s: &ExperimentSummary,
    ) -> Self {
        Self {
            parameter: parameter.to_string(),
            value,
            reserved_subframes,
            scheme: s.scheme,
            sil: s.stat(|r| r.sil_s()),
            lil: s.stat(|r| r.lil_s()),
            jain: s.stat(|r| r.jain()),
            ee: s.stat(|r| r.energy_efficiency()),
            se: s.stat(|r| r.spectral_efficiency()),
            violations: s.total_violations(),
        }
    }
}

pub fn write_sweep_csv(path: &Path, cfg: &SimConfig, rows: &[SweepRow]) -> io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    write!(f, "{}", metadata_block(cfg, &[("kind", "sweep".into())]))?;
    writeln!(
        f,
        "parameter,value,reserved_subframes,scheme,sil_mean,sil_ci_lo,sil_ci_hi,\
lil_mean,jain_mean,ee_mean,se_mean,violations"
    )?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.parameter,
            fmt(r.value),
            r.reserved_subframes,
            r.scheme,
            fmt(r.sil.mean),
            fmt(r.sil.ci_lo),
            fmt(r.sil.ci_hi),
            fmt(r.lil.mean),
            fmt(r.jain.mean),
            fmt(r.ee.mean),
            fmt(r.se.mean),
            r.violations,
        )?;
    }
    Ok(())
}

/// First table of a CSV written by this module (plots are derived from the
/// files, not from in-memory state).
pub fn read_csv_columns(path: &Path) -> io::Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = std::fs::read_to_string(path)?;
    let mut header = Vec::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            if !header.is_empty() {
                break; // a second table starts; first table only
            }
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|s| s.to_string()).collect();
        if header.is_empty() {
            header = fields;
        } else {
            rows.push(fields);
        }
    }
    Ok((header, rows))
}

/// Ratio block of a compare CSV (the second table in the file).
pub fn read_compare_ratios(path: &Path) -> io::Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = std::fs::read_to_string(path)?;
    let mut tables: Vec<(Vec<String>, Vec<Vec<String>>)> = Vec::new();
    let mut current_header: Option<Vec<String>> = None;
    let mut current_rows = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            if let Some(h) = current_header.take() {
                tables.push((h, std::mem::take(&mut current_rows)));
            }
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|s| s.to_string()).collect();
        match &current_header {
            None => current_header = Some(fields),
            Some(_) => current_rows.push(fields),
        }
    }
    if let Some(h) = current_header.take() {
        tables.push((h, current_rows));
    }
    tables
        .into_iter()
        .nth(1)
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, "no ratio table"))
}

/// Mean/CI over a slice of reports (printed by the acceptance suite).
pub fn mean_of(reports: &[SimReport], f: impl Fn(&SimReport) -> f64) -> MetricStats {
    let v: Vec<f64> = reports.iter().map(&f).collect();
    metric_stats(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::run_experiment;

    fn tiny_summary(scheme: u8) -> (SimConfig, ExperimentSummary) {
        let mut cfg = SimConfig::default();
        cfg.network.node_count = 12;
        cfg.sim.scheme = scheme;
        cfg.sim.replications = 2;
        cfg.sim.horizon_s = 120.0;
        cfg.energy.initial_j = 1e-4;
        (cfg.clone(), run_experiment(&cfg).unwrap())
    }

    #[test]
    fn report_csv_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let (cfg, summary) = tiny_summary(4);
        let path = dir.path().join("report.csv");
        write_report_csv(&path, &cfg, &summary).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# config_hash:"));
        assert!(text.contains("# seed: 42"));
        let (header, rows) = read_csv_columns(&path).unwrap();
        assert_eq!(header[0], "scheme");
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0][0], "4");
    }

    #[test]
    fn compare_csv_has_ratio_table() {
        let dir = tempfile::tempdir().unwrap();
        let (cfg, s1) = tiny_summary(1);
        let (_, s4) = tiny_summary(4);
        let path = dir.path().join("compare.csv");
        write_compare_csv(&path, &cfg, &[s1, s4]).unwrap();
        let (header, rows) = read_compare_ratios(&path).unwrap();
        assert_eq!(header[0], "pair");
        assert!(rows.iter().any(|r| r[0] == "1/4"));
        assert!(rows.iter().any(|r| r[0] == "4/1"));
    }

    #[test]
    fn lifetimes_csv_lists_every_node() {
        let dir = tempfile::tempdir().unwrap();
        let (cfg, summary) = tiny_summary(2);
        let path = dir.path().join("lifetimes.csv");
        write_lifetimes_csv(&path, &cfg, &[&summary]).unwrap();
        let (_, rows) = read_csv_columns(&path).unwrap();
        assert_eq!(rows.len(), 12 * 2);
    }

    #[test]
    fn byte_identical_for_same_seed() {
        let dir = tempfile::tempdir().unwrap();
        let (cfg, s_a) = tiny_summary(4);
        let (_, s_b) = tiny_summary(4);
        let pa = dir.path().join("a.csv");
        let pb = dir.path().join("b.csv");
        write_report_csv(&pa, &cfg, &s_a).unwrap();
        write_report_csv(&pb, &cfg, &s_b).unwrap();
        assert_eq!(std::fs::read(&pa).unwrap(), std::fs::read(&pb).unwrap());
    }
}
