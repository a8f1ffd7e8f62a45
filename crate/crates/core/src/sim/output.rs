//! CSV and manifest writers. Every file has a header row; floats are written
//! in shortest round-trip form so identical inputs give identical bytes.
//!
//! | file | columns |
//! |---|---|
//! | `regret.csv` | t, avg_regret, avg_instant_regret, avg_realized_regret, snr_db |
//! | `arms.csv` | arm, pulls, mean, oracle_mean, oracle_stderr, output_runs, snr_db |
//! | `oracle.csv` | arm, mean, stderr, p_miss, snr_db |
//! | `rate_vs_snr.csv` | snr_db, policy, mean_rate, stderr |
//! | `rate_cdf.csv` | policy, rate, cdf |
//! | `miss.csv` | snr_db, policy, p_miss |
//! | `sweep_arms.csv` | snr_db, policy, arm, blocks |
//! | `trace.csv` | block, hop, phase, level, candidate, power, winner, detected |
//! | `manifest.toml` | resolved configuration, seed and SNR list |

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::beam_training::Phase;
use crate::error::Result;
use crate::sim::config::ScenarioConfig;
use crate::sim::learn::LearningReport;
use crate::sim::oracle::ArmMeans;
use crate::sim::sweep::{empirical_cdf, ExperimentReport};
use crate::sim::trial::HopTrace;

fn write_rows<W: Write, T: Serialize>(
    writer: W,
    header: &[&str],
    rows: impl IntoIterator<Item = T>,
) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    out.write_record(header)?;
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_regret_csv<W: Write>(reports: &[LearningReport], writer: W) -> Result<()> {
    let rows = reports.iter().flat_map(|r| {
        (0..r.avg_regret.len()).map(move |t| {
            (
                t + 1,
                r.avg_regret[t],
                r.avg_instant_regret[t],
                r.avg_realized_regret[t],
                r.transmit_snr_db,
            )
        })
    });
    write_rows(
        writer,
        &[
            "t",
            "avg_regret",
            "avg_instant_regret",
            "avg_realized_regret",
            "snr_db",
        ],
        rows,
    )
}

pub fn write_arms_csv<W: Write>(arms: &[String], reports: &[LearningReport], writer: W) -> Result<()> {
    let rows = reports.iter().flat_map(|r| {
        arms.iter().enumerate().map(move |(a, name)| {
            (
                name.as_str(),
                r.pulls[a],
                r.mean_rewards[a],
                r.oracle.means[a],
                r.oracle.std_errors[a],
                r.output_counts[a],
                r.transmit_snr_db,
            )
        })
    });
    write_rows(
        writer,
        &[
            "arm",
            "pulls",
            "mean",
            "oracle_mean",
            "oracle_stderr",
            "output_runs",
            "snr_db",
        ],
        rows,
    )
}

pub fn write_oracle_csv<W: Write>(arms: &[String], points: &[(f64, ArmMeans)], writer: W) -> Result<()> {
    let rows = points.iter().flat_map(|(snr, o)| {
        arms.iter()
            .enumerate()
            .map(move |(a, name)| (name.as_str(), o.means[a], o.std_errors[a], o.miss_rates[a], *snr))
    });
    write_rows(writer, &["arm", "mean", "stderr", "p_miss", "snr_db"], rows)
}

pub fn write_rate_vs_snr_csv<W: Write>(report: &ExperimentReport, writer: W) -> Result<()> {
    let rows = report
        .points
        .iter()
        .map(|p| (p.transmit_snr_db, p.policy.name(), p.mean_rate(), p.std_error()));
    write_rows(writer, &["snr_db", "policy", "mean_rate", "stderr"], rows)
}

pub fn write_miss_csv<W: Write>(report: &ExperimentReport, writer: W) -> Result<()> {
    let rows = report
        .points
        .iter()
        .map(|p| (p.transmit_snr_db, p.policy.name(), p.miss_rate()));
    write_rows(writer, &["snr_db", "policy", "p_miss"], rows)
}

/// Writes the reward CDF of each policy at `report.cdf_snr_db`; header only
/// if that SNR was not swept.
pub fn write_rate_cdf_csv<W: Write>(report: &ExperimentReport, writer: W) -> Result<()> {
    let mut rows = Vec::new();
    if let Some(snr) = report.cdf_snr_db {
        for p in report.points.iter().filter(|p| p.transmit_snr_db == snr) {
            rows.extend(
                empirical_cdf(&p.rewards)
                    .into_iter()
                    .map(|(x, f)| (p.policy.name(), x, f)),
            );
        }
    }
    write_rows(writer, &["policy", "rate", "cdf"], rows)
}

pub fn write_sweep_arms_csv<W: Write>(report: &ExperimentReport, writer: W) -> Result<()> {
    let rows = report.points.iter().flat_map(|p| {
        report
            .arms
            .iter()
            .zip(&p.arm_counts)
            .map(move |(name, &n)| (p.transmit_snr_db, p.policy.name(), name.as_str(), n))
    });
    write_rows(writer, &["snr_db", "policy", "arm", "blocks"], rows)
}

pub fn write_block_trace_csv<W: Write>(trace: &[(u64, HopTrace)], writer: W) -> Result<()> {
    let rows = trace.iter().map(|(b, t)| {
        let e = t.entry;
        let phase = match e.phase {
            Phase::Tx => "tx",
            Phase::Rx => "rx",
        };
        (
            b,
            t.hop,
            phase,
            e.level,
            e.candidate,
            e.power,
            e.winner,
            e.detected,
        )
    });
    write_rows(
        writer,
        &[
            "block",
            "hop",
            "phase",
            "level",
            "candidate",
            "power",
            "winner",
            "detected",
        ],
        rows,
    )
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    seed: u64,
    snr_list_db: &'a [f64],
    config: &'a ScenarioConfig,
}

pub fn manifest_string(command: &str, cfg: &ScenarioConfig, snr_list: &[f64]) -> Result<String> {
    Ok(toml::to_string(&Manifest {
        command,
        seed: cfg.seed,
        snr_list_db: snr_list,
        config: cfg,
    })?)
}

/// Writes `manifest.toml` into `dir`.
pub fn write_manifest(dir: &Path, command: &str, cfg: &ScenarioConfig, snr_list: &[f64]) -> Result<()> {
    fs::write(
        dir.join("manifest.toml"),
        manifest_string(command, cfg, snr_list)?,
    )?;
    Ok(())
}

/// Creates `dir/name` and hands a buffered writer to `f`.
pub fn write_file<F>(dir: &Path, name: &str, f: F) -> Result<()>
where
    F: FnOnce(&mut std::io::BufWriter<fs::File>) -> Result<()>,
{
    fs::create_dir_all(dir)?;
    let mut w = std::io::BufWriter::new(fs::File::create(dir.join(name))?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}
