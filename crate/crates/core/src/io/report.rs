use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::Tolerances;
use crate::focal::FocalProfile;
use crate::harness::{FiberProbe, MorseReport};
use crate::linking::{DeltaDimension, ZvSample};
use crate::transversal::SplittingReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexRow {
    pub vector: usize,
    pub length: f64,
    pub index: Option<usize>,
    pub nullity: Option<usize>,
    /// Focal times on `(0, 1]` with multiplicities.
    pub focal: Vec<(f64, usize)>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRow {
    pub seed: u64,
    pub length: f64,
    pub param: Vec<f64>,
    pub coeffs: Vec<f64>,
    pub split: Option<SplittingReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TautRow {
    pub target: Vec<f64>,
    pub report: Option<MorseReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRow {
    pub vector: usize,
    pub length: f64,
    pub delta: Option<DeltaDimension>,
    pub tangent_dim: Option<usize>,
    pub cohdim: Option<usize>,
    pub sample: Option<ZvSample>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub vector: usize,
    pub probe: Option<FiberProbe>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "operation", rename_all = "kebab-case")]
pub enum OperationResult {
    FocalScan { focal_count: usize, profile: FocalProfile },
    Index { rows: Vec<IndexRow> },
    Split { rows: Vec<SplitRow> },
    TautCheck { rows: Vec<TautRow> },
    Cycles { rows: Vec<CycleRow> },
    FiberProbe { rows: Vec<ProbeRow> },
}

/// Everything one run computed; no timing, so identical inputs give identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub result: OperationResult,
    pub findings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub threads: usize,
    pub files: Vec<String>,
    pub findings: usize,
    pub wall_time_seconds: f64,
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(std::io::Error::other)?;
    w.write_record(header).map_err(std::io::Error::other)?;
    for r in rows {
        w.write_record(r).map_err(std::io::Error::other)?;
    }
    w.flush()
}

/// Header of the focal-scan table.
pub fn focal_scan_header(count: usize) -> Vec<String> {
    let mut h = vec!["direction_index".to_string(), "angle".to_string()];
    for i in 1..=count {
        h.push(format!("lambda_{i}"));
        h.push(format!("mult_{i}"));
    }
    h
}

pub const SPLIT_HEADER: [&str; 6] = ["seed", "length", "ind_total", "ind_vertical", "ind_horizontal", "holds"];
pub const INDEX_HEADER: [&str; 5] = ["vector", "length", "index", "nullity", "focal_times"];

fn tables(result: &OperationResult) -> Option<(&'static str, Vec<String>, Vec<Vec<String>>)> {
    match result {
        OperationResult::FocalScan { focal_count, profile } => {
            let rows = profile
                .rows
                .iter()
                .map(|r| {
                    let mut row = vec![r.index.to_string(), num(r.angle)];
                    for i in 0..*focal_count {
                        match r.focal.get(i) {
                            Some((t, m)) => {
                                row.push(num(*t));
                                row.push(m.to_string());
                            }
                            None => row.extend([String::new(), String::new()]),
                        }
                    }
                    row
                })
                .collect();
            Some(("focal_scan.csv", focal_scan_header(*focal_count), rows))
        }
        OperationResult::Index { rows } => Some((
            "index.csv",
            INDEX_HEADER.iter().map(|s| s.to_string()).collect(),
            rows.iter()
                .map(|r| {
                    let times: Vec<String> = r.focal.iter().map(|(t, m)| format!("{t}:{m}")).collect();
                    vec![r.vector.to_string(), num(r.length), opt(&r.index), opt(&r.nullity), times.join(" ")]
                })
                .collect(),
        )),
        OperationResult::Split { rows } => Some((
            "split.csv",
            SPLIT_HEADER.iter().map(|s| s.to_string()).collect(),
            rows.iter()
                .map(|r| {
                    let s = r.split.as_ref();
                    vec![
                        r.seed.to_string(),
                        num(r.length),
                        opt(&s.map(|s| s.ind_total)),
                        opt(&s.map(|s| s.ind_vertical)),
                        opt(&s.map(|s| s.ind_horizontal)),
                        s.is_some_and(|s| s.holds).to_string(),
                    ]
                })
                .collect(),
        )),
        _ => None,
    }
}

fn stem(result: &OperationResult) -> &'static str {
    match result {
        OperationResult::FocalScan { .. } => "focal_scan",
        OperationResult::Index { .. } => "index",
        OperationResult::Split { .. } => "split",
        OperationResult::TautCheck { .. } => "taut",
        OperationResult::Cycles { .. } => "cycles",
        OperationResult::FiberProbe { .. } => "fiber_probe",
    }
}

/// Writes the JSON report and, for tabular operations, its CSV table.
pub fn emit_report(report: &Report, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let json = dir.join(format!("{}.json", stem(&report.result)));
    write_json(&json, report)?;
    files.push(json);
    if let Some((name, header, rows)) = tables(&report.result) {
        let path = dir.join(name);
        write_csv(&path, &header, &rows)?;
        files.push(path);
    }
    Ok(files)
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> std::io::Result<PathBuf> {
    let path = dir.join("manifest.json");
    let mut f = fs::File::create(&path)?;
    f.write_all(serde_json::to_string_pretty(manifest).map_err(std::io::Error::other)?.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(path)
}
