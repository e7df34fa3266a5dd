//! On-disk artifact formats: the monitors CSV, gzip-compressed state snapshot
//! streams, and small JSON helpers. All writers format floats with the
//! shortest round-trip representation, so identical runs produce identical
//! bytes.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use attractor_lab_core::solver::TrajectoryRecord;
use attractor_lab_core::spectral::FieldSnapshot;
use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};

pub const MONITOR_COLUMNS: [&str; 10] = [
    "t",
    "E",
    "E_alpha",
    "E_V_omega",
    "L",
    "ut_l2",
    "grad_u_l2",
    "diss_cum",
    "ut_m1_cum",
    "st_norm_cum",
];

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_monitors_csv(path: &Path, record: &TrajectoryRecord<f64>) -> anyhow::Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(MONITOR_COLUMNS)?;
    for m in &record.monitors {
        writer.write_record([
            fmt(m.t),
            fmt(m.energy),
            fmt(m.energy_alpha),
            fmt(m.strong_energy),
            fmt(m.lyapunov),
            fmt(m.ut_l2),
            fmt(m.grad_u_l2),
            fmt(m.diss_cum),
            fmt(m.ut_m1_cum),
            fmt(m.st_norm_cum),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct MonitorRow {
    pub t: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "E_alpha")]
    pub energy_alpha: f64,
    #[serde(rename = "E_V_omega")]
    pub strong_energy: f64,
    #[serde(rename = "L")]
    pub lyapunov: f64,
    pub ut_l2: f64,
    pub grad_u_l2: f64,
    pub diss_cum: f64,
    pub ut_m1_cum: f64,
    pub st_norm_cum: f64,
}

pub fn read_monitors_csv(path: &Path) -> anyhow::Result<Vec<MonitorRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

/// One state snapshot line of the gzip-compressed stream.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub t: f64,
    pub u: FieldSnapshot,
    pub v: FieldSnapshot,
}

pub fn write_states_gz(path: &Path, record: &TrajectoryRecord<f64>) -> anyhow::Result<()> {
    let file = std::fs::File::create(path)?;
    let mut gz = GzEncoder::new(file, Compression::default());
    for s in &record.states {
        let line = StateSnapshot {
            t: s.t,
            u: FieldSnapshot::of(&s.u),
            v: FieldSnapshot::of(&s.v),
        };
        serde_json::to_writer(&mut gz, &line)?;
        gz.write_all(b"\n")?;
    }
    gz.finish()?;
    Ok(())
}

pub fn read_states_gz(path: &Path) -> anyhow::Result<Vec<StateSnapshot>> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(GzDecoder::new(file));
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

/// Compact cloud representation for the attractor experiment (plain f64
/// coefficient arrays; one JSON line per state).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CloudPoint {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

pub fn write_cloud_gz(path: &Path, points: &[CloudPoint]) -> anyhow::Result<()> {
    let file = std::fs::File::create(path)?;
    let mut gz = GzEncoder::new(file, Compression::default());
    for p in points {
        serde_json::to_writer(&mut gz, p)?;
        gz.write_all(b"\n")?;
    }
    gz.finish()?;
    Ok(())
}

pub fn read_cloud_gz(path: &Path) -> anyhow::Result<Vec<CloudPoint>> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(GzDecoder::new(file));
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}
