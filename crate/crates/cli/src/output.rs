//! Run-record serialization: `trajectory.{csv,json}`, `metrics.{csv,json}`,
//! and `manifest.json`.
//!
//! CSV columns are frozen (see the header constants) and numbers use the
//! shortest decimal representation that round-trips, so identical runs emit
//! byte-identical files. The manifest holds the fully resolved config plus
//! the tool version; feeding it back through `--config` reproduces the run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use hydrotrack_core::sim::RunRecord;

use crate::config::ConfigDoc;
use crate::CliError;

/// Output format for the data files (the manifest is always JSON).
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Provenance record for a run; everything needed to reproduce it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub format: Format,
    pub seed: u64,
    pub config: ConfigDoc,
}

impl Manifest {
    pub fn new(command: &str, format: Format, resolved: &ConfigDoc) -> Self {
        Manifest {
            tool: "hydrotrack".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            format,
            seed: resolved.seed.expect("resolved config has a seed"),
            config: resolved.clone(),
        }
    }
}

pub const TRAJECTORY_HEADER: &str = "time_s,true_x_m,true_y_m,true_z_m,tdoa_x_m,tdoa_y_m,tdoa_z_m,filt_x_m,filt_y_m,filt_z_m,region_center_x_m,region_center_y_m,region_center_z_m,region_radius_m,region_semi_a_m,region_semi_b_m,region_semi_c_m";
pub const METRICS_HEADER: &str = "name,key,value";

/// One trajectory row as serialized to JSON (and, column-wise, to CSV).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub time_s: f64,
    pub true_x_m: f64,
    pub true_y_m: f64,
    pub true_z_m: f64,
    pub tdoa_x_m: Option<f64>,
    pub tdoa_y_m: Option<f64>,
    pub tdoa_z_m: Option<f64>,
    pub filt_x_m: Option<f64>,
    pub filt_y_m: Option<f64>,
    pub filt_z_m: Option<f64>,
    pub region_center_x_m: Option<f64>,
    pub region_center_y_m: Option<f64>,
    pub region_center_z_m: Option<f64>,
    pub region_radius_m: Option<f64>,
    pub region_semi_a_m: Option<f64>,
    pub region_semi_b_m: Option<f64>,
    pub region_semi_c_m: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CdfEntry {
    pub threshold_m: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsDoc {
    pub mae_m: f64,
    pub mae_euclidean_m: f64,
    pub solver_failures: usize,
    pub mse_tdoa_m2: Vec<f64>,
    pub mse_filtered_m2: Vec<f64>,
    pub cdf: Vec<CdfEntry>,
}

fn trajectory_rows(record: &RunRecord) -> Vec<TrajectoryRow> {
    record
        .steps
        .iter()
        .map(|s| {
            let tdoa = s.tdoa.as_ref().map(|f| f.position);
            let filt = s.posterior.as_ref().map(|p| p.position());
            let region = s.region.as_ref();
            TrajectoryRow {
                time_s: s.time,
                true_x_m: s.true_position.x,
                true_y_m: s.true_position.y,
                true_z_m: s.true_position.z,
                tdoa_x_m: tdoa.map(|p| p.x),
                tdoa_y_m: tdoa.map(|p| p.y),
                tdoa_z_m: tdoa.map(|p| p.z),
                filt_x_m: filt.map(|p| p.x),
                filt_y_m: filt.map(|p| p.y),
                filt_z_m: filt.map(|p| p.z),
                region_center_x_m: region.map(|r| r.center.x),
                region_center_y_m: region.map(|r| r.center.y),
                region_center_z_m: region.map(|r| r.center.z),
                region_radius_m: region.map(|r| r.radius),
                region_semi_a_m: region.map(|r| r.axes[0].semi_length),
                region_semi_b_m: region.map(|r| r.axes[1].semi_length),
                region_semi_c_m: region.map(|r| r.axes[2].semi_length),
            }
        })
        .collect()
}

fn metrics_doc(record: &RunRecord) -> MetricsDoc {
    MetricsDoc {
        mae_m: record.metrics.mae,
        mae_euclidean_m: record.metrics.mae_euclidean,
        solver_failures: record.metrics.solver_failures,
        mse_tdoa_m2: record.metrics.mse_tdoa.clone(),
        mse_filtered_m2: record.metrics.mse_filtered.clone(),
        cdf: record
            .metrics
            .cdf
            .iter()
            .map(|&(threshold_m, fraction)| CdfEntry {
                threshold_m,
                fraction,
            })
            .collect(),
    }
}

/// Shortest round-trip decimal formatting (Rust's float `Display`).
fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn trajectory_csv(rows: &[TrajectoryRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 64);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for r in rows {
        let cells = [
            fmt_f64(r.time_s),
            fmt_f64(r.true_x_m),
            fmt_f64(r.true_y_m),
            fmt_f64(r.true_z_m),
            fmt_opt(r.tdoa_x_m),
            fmt_opt(r.tdoa_y_m),
            fmt_opt(r.tdoa_z_m),
            fmt_opt(r.filt_x_m),
            fmt_opt(r.filt_y_m),
            fmt_opt(r.filt_z_m),
            fmt_opt(r.region_center_x_m),
            fmt_opt(r.region_center_y_m),
            fmt_opt(r.region_center_z_m),
            fmt_opt(r.region_radius_m),
            fmt_opt(r.region_semi_a_m),
            fmt_opt(r.region_semi_b_m),
            fmt_opt(r.region_semi_c_m),
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn metrics_csv(doc: &MetricsDoc) -> String {
    let mut out = String::new();
    out.push_str(METRICS_HEADER);
    out.push('\n');
    out.push_str(&format!("mae_m,,{}\n", fmt_f64(doc.mae_m)));
    out.push_str(&format!(
        "mae_euclidean_m,,{}\n",
        fmt_f64(doc.mae_euclidean_m)
    ));
    out.push_str(&format!("solver_failures,,{}\n", doc.solver_failures));
    for (k, v) in doc.mse_tdoa_m2.iter().enumerate() {
        out.push_str(&format!("mse_tdoa_m2,{k},{}\n", fmt_f64(*v)));
    }
    for (k, v) in doc.mse_filtered_m2.iter().enumerate() {
        out.push_str(&format!("mse_filtered_m2,{k},{}\n", fmt_f64(*v)));
    }
    for e in &doc.cdf {
        out.push_str(&format!(
            "cdf,{},{}\n",
            fmt_f64(e.threshold_m),
            fmt_f64(e.fraction)
        ));
    }
    out
}

/// Write the data files plus `manifest.json`; returns the written paths.
pub fn write_run_record(
    record: &RunRecord,
    dir: &Path,
    format: Format,
    manifest: &Manifest,
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(3);

    let rows = trajectory_rows(record);
    let trajectory_path = dir.join(format!("trajectory.{}", format.extension()));
    let trajectory_bytes = match format {
        Format::Csv => trajectory_csv(&rows),
        Format::Json => {
            serde_json::to_string_pretty(&rows).expect("trajectory serialization") + "\n"
        }
    };
    std::fs::write(&trajectory_path, trajectory_bytes)?;
    written.push(trajectory_path);

    let doc = metrics_doc(record);
    let metrics_path = dir.join(format!("metrics.{}", format.extension()));
    let metrics_bytes = match format {
        Format::Csv => metrics_csv(&doc),
        Format::Json => serde_json::to_string_pretty(&doc).expect("metrics serialization") + "\n",
    };
    std::fs::write(&metrics_path, metrics_bytes)?;
    written.push(metrics_path);

    let manifest_path = dir.join("manifest.json");
    let manifest_bytes =
        serde_json::to_string_pretty(manifest).expect("manifest serialization") + "\n";
    std::fs::write(&manifest_path, manifest_bytes)?;
    written.push(manifest_path);

    Ok(written)
}
