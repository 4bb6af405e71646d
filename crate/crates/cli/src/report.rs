//! Report rows and their JSON/CSV serialization.
//!
//! JSON and CSV carry the same row values. Non-finite numbers (a perfect
//! reconstruction's PSNR, the HQL-only profile's `t_nu`) are written as the
//! strings `inf`/`-inf`/`nan` in both formats.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Serialize, Serializer};

pub const SCHEMA_VERSION: u32 = 1;

/// A number that may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

/// One line of the report: a single image under a single method, or an
/// aggregate (`image == "MEAN"`) over all successful images.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub schema_version: u32,
    pub image: String,
    pub method: String,
    pub profile: Option<String>,
    pub t_phi: Option<Num>,
    pub t_nu: Option<Num>,
    pub pattern: String,
    pub seed: u64,
    pub loss_rate: f64,
    pub psnr_scope: &'static str,
    pub psnr: Option<Num>,
    pub ssim: Option<f64>,
    pub patches: usize,
    pub brl: usize,
    pub idl: usize,
    pub hql: usize,
    pub brl_fraction: Option<f64>,
    pub idl_fraction: Option<f64>,
    pub hql_fraction: Option<f64>,
    pub deferred_fills: usize,
    /// Mean wall time per patch, milliseconds.
    pub ms_per_patch: f64,
    pub total_ms: f64,
    /// `ms_per_patch` relative to the kmmse run on the same image(s).
    pub time_ratio: Option<f64>,
    /// PSNR difference to the kmmse run on the same image(s), dB.
    pub psnr_gain: Option<f64>,
    pub status: String,
}

impl ReportRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Fields that depend on wall-clock time.
pub const TIMING_FIELDS: [&str; 4] = ["ms_per_patch", "total_ms", "time_ratio", "generated_unix"];

#[derive(Serialize)]
struct JsonReport<'a, C: Serialize> {
    schema: &'static str,
    schema_version: u32,
    generated_unix: u64,
    config: &'a C,
    rows: &'a [ReportRow],
    aggregates: &'a [ReportRow],
}

pub fn write_json<C: Serialize>(path: &Path, config: &C, rows: &[ReportRow], aggregates: &[ReportRow]) -> Result<()> {
    let generated_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let report = JsonReport {
        schema: "skmmse-report",
        schema_version: SCHEMA_VERSION,
        generated_unix,
        config,
        rows,
        aggregates,
    };
    let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(&mut f, &report)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn write_csv(path: &Path, rows: &[ReportRow], aggregates: &[ReportRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for row in rows.iter().chain(aggregates) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
