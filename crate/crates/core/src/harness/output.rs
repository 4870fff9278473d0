//! CSV and JSON payload writers. Payload files contain no timestamps or
//! timing, so equal configs and seeds reproduce them byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::de::{DeConfig, DeTrajectory, ThresholdReport};
use crate::Result;

use super::{BerRecord, SimConfig};

#[derive(Serialize)]
struct BerSummary<'a> {
    config: &'a SimConfig,
    /// Raw config file text when one was used, echoed for provenance.
    config_echo: Option<&'a str>,
    records: &'a [BerRecord],
}

/// Write `ber.csv` and `summary.json`; returns the paths written.
pub fn write_ber_outputs(
    dir: &Path,
    cfg: &SimConfig,
    config_echo: Option<&str>,
    records: &[BerRecord],
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut csv = String::from(
        "snr_db,scheme,trials,bit_errors,bits_counted,ber,wilson_half_width,frame_errors\n",
    );
    for r in records {
        csv.push_str(&format!(
            "{},{},{},{},{},{:.6e},{:.6e},{}\n",
            r.snr_db,
            r.scheme,
            r.trials,
            r.bit_errors,
            r.bits_counted,
            r.ber,
            r.wilson_half_width,
            r.frame_errors
        ));
    }
    let csv_path = dir.join("ber.csv");
    fs::write(&csv_path, csv)?;

    let summary = BerSummary {
        config: cfg,
        config_echo,
        records,
    };
    let json_path = dir.join("summary.json");
    fs::write(&json_path, serde_json::to_string_pretty(&summary)?)?;
    Ok(vec![csv_path, json_path])
}

#[derive(Serialize)]
struct TrajectorySummary<'a> {
    config: &'a DeConfig,
    converged: bool,
    outer_iterations: usize,
    final_min_me: f64,
}

/// Write `trajectory.csv` and `summary.json` for a DE run.
pub fn write_trajectory_outputs(
    dir: &Path,
    cfg: &DeConfig,
    traj: &DeTrajectory,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join("trajectory.csv");
    fs::write(&csv_path, traj.to_csv())?;
    let summary = TrajectorySummary {
        config: cfg,
        converged: traj.converged,
        outer_iterations: traj.outer_iterations,
        final_min_me: traj.final_state().min_me(),
    };
    let json_path = dir.join("summary.json");
    fs::write(&json_path, serde_json::to_string_pretty(&summary)?)?;
    Ok(vec![csv_path, json_path])
}

/// Write `threshold.txt` (human-readable with bracket history) and
/// `threshold.json`.
pub fn write_threshold_outputs(dir: &Path, report: &ThresholdReport) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let txt_path = dir.join("threshold.txt");
    fs::write(&txt_path, report.to_text())?;
    let json_path = dir.join("threshold.json");
    fs::write(&json_path, serde_json::to_string_pretty(report)?)?;
    Ok(vec![txt_path, json_path])
}
