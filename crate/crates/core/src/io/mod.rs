//! Experiment configs, the scenario registry, the runner and report files.

mod config;
mod report;
mod scenario;

pub use config::{ConfigError, ExperimentConfig, Operation, Tolerances, VectorSpec};
pub use report::{
    emit_report, focal_scan_header, write_csv, write_json, CycleRow, IndexRow, Manifest, OperationResult, ProbeRow,
    Report, SplitRow, TautRow, INDEX_HEADER, SPLIT_HEADER,
};
pub use scenario::{scenario, scenarios, Built, Scenario};

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Error;
use crate::focal::{focal_time_profile, index_and_nullity, FocalOptions, RegularityProbe};
use crate::geodesic::normal_geodesic;
use crate::geometry::NormalVector;
use crate::harness::{fiber_integrability_probe, morse_report, reference_betti, FiberProbeOptions, FiberVerdict, ShootingOptions};
use crate::linking::{bundle_descriptor, cohdim_bookkeeping, delta_dimension, sample_zv, tangent_decomposition_dim, ZvOptions};
use crate::transversal::verify_index_splitting;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "FOCAL_FORGE_THREADS";

/// Why a run did not complete.
#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Failed(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error at {e}"),
            RunError::Failed(m) => write!(f, "run failed: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Failed(e.to_string())
    }
}

impl RunError {
    /// Process exit code: 2 for configuration problems, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Failed(_) => 3,
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: Report,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    /// 0 for a clean run, 1 when the report carries findings.
    pub fn exit_code(&self) -> i32 {
        if self.report.findings.is_empty() {
            0
        } else {
            1
        }
    }
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs `f` on a pool capped by [`THREADS_ENV`], or on the global pool.
pub fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match thread_cap().and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

fn focal_options(t: &Tolerances) -> FocalOptions {
    FocalOptions {
        gap_ratio: t.gap_ratio,
        zero_rel: t.zero_rel,
        ..FocalOptions::default()
    }
}

fn vectors(cfg: &ExperimentConfig, built: &Built, focal: bool) -> Result<Vec<NormalVector<f64>>, ConfigError> {
    if cfg.vectors.is_empty() {
        let defaults = if focal { &built.focal_vectors } else { &built.vectors };
        if defaults.is_empty() {
            return Err(ConfigError {
                path: "vectors".into(),
                message: format!("scenario `{}` has no default vectors; list some", cfg.scenario),
            });
        }
        return Ok(defaults.clone());
    }
    let (np, nc) = (built.patch.param_dim(), built.patch.codim());
    cfg.vectors
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if v.param.len() != np {
                return Err(ConfigError {
                    path: format!("vectors[{i}].param"),
                    message: format!("expected {np} entries, got {}", v.param.len()),
                });
            }
            if v.coeffs.len() != nc {
                return Err(ConfigError {
                    path: format!("vectors[{i}].coeffs"),
                    message: format!("expected {nc} entries, got {}", v.coeffs.len()),
                });
            }
            Ok(NormalVector::new(
                built.patch.normalize_param(&DVector::from_column_slice(&v.param)),
                DVector::from_column_slice(&v.coeffs),
            ))
        })
        .collect()
}

fn targets(cfg: &ExperimentConfig, built: &Built) -> Result<Vec<DVector<f64>>, ConfigError> {
    if cfg.targets.is_empty() {
        return Ok(vec![built.target.clone()]);
    }
    let na = built.patch.parent().ambient_dim();
    cfg.targets
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if t.len() != na {
                return Err(ConfigError {
                    path: format!("targets[{i}]"),
                    message: format!("expected {na} coordinates, got {}", t.len()),
                });
            }
            Ok(DVector::from_column_slice(t))
        })
        .collect()
}

fn split_row(built: &Built, sc: &Scenario, seed: u64, tol: f64, opts: &FocalOptions) -> SplitRow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = built.random_unit_normal(&mut rng);
    let mut length = rand::Rng::random_range(&mut rng, 0.2..sc.max_length);
    let mut row = SplitRow {
        seed,
        length,
        param: w.param.iter().copied().collect(),
        coeffs: w.coeffs.iter().copied().collect(),
        split: None,
        error: None,
    };
    let Some(fol) = built.foliation.as_ref() else {
        row.error = Some("scenario has no foliation".into());
        return row;
    };
    // a focal endpoint is moved by shortening the geodesic
    for _ in 0..5 {
        row.length = length;
        let result = normal_geodesic(&built.patch, &w, length, tol)
            .and_then(|g| verify_index_splitting(&g, fol, &built.patch, opts));
        match result {
            Ok(s) => {
                row.split = Some(s);
                row.error = None;
                return row;
            }
            Err(e @ Error::Precondition(_)) => {
                row.error = Some(e.to_string());
                length *= 0.97;
            }
            Err(e) => {
                row.error = Some(e.to_string());
                return row;
            }
        }
    }
    row
}

fn cycle_row(built: &Built, k: usize, v: &NormalVector<f64>, cfg: &ExperimentConfig, opts: &FocalOptions) -> CycleRow {
    let mut row = CycleRow {
        vector: k,
        length: v.length(),
        delta: None,
        tangent_dim: None,
        cohdim: None,
        sample: None,
        errors: Vec::new(),
    };
    match delta_dimension(&built.patch, v, built.foliation.as_ref(), opts) {
        Ok(d) => row.delta = Some(d),
        Err(e) => row.errors.push(format!("delta dimension: {e}")),
    }
    match tangent_decomposition_dim(&built.patch, v, &RegularityProbe::default(), opts) {
        Ok(d) => row.tangent_dim = Some(d),
        Err(e) => row.errors.push(format!("tangent decomposition: {e}")),
    }
    let zv = ZvOptions {
        samples: cfg.samples,
        seed: cfg.seed,
        newton_tol: cfg.tolerances.newton.min(1e-12),
        focal: *opts,
        ..ZvOptions::default()
    };
    match bundle_descriptor(&built.patch, v, zv.max_depth, opts).and_then(|d| cohdim_bookkeeping(&d)) {
        Ok(c) => row.cohdim = Some(c),
        Err(e) => row.errors.push(format!("bundle bookkeeping: {e}")),
    }
    match sample_zv(&built.patch, v, &zv) {
        Ok(s) => row.sample = Some(s),
        Err(e) => row.errors.push(format!("polygon sampling: {e}")),
    }
    row
}

fn cycle_findings(r: &CycleRow, out: &mut Vec<String>) {
    let k = r.vector;
    out.extend(r.errors.iter().map(|e| format!("vector {k}: {e}")));
    if let Some(d) = &r.delta {
        if !d.agrees() {
            out.push(format!("vector {k}: crossing count {:?} differs from index {}", d.crossing_count, d.index));
        }
        for (name, other) in [("tangent decomposition", r.tangent_dim), ("bundle bookkeeping", r.cohdim)] {
            if other.is_some_and(|x| x != d.index) {
                out.push(format!("vector {k}: {name} {other:?} differs from index {}", d.index));
            }
        }
    }
    if let Some(s) = &r.sample {
        if !s.monotone {
            out.push(format!("vector {k}: index does not drop along the fiber"));
        }
        let bad = s.polygons.iter().filter(|p| !p.is_valid()).count();
        if bad > 0 {
            out.push(format!("vector {k}: {bad} polygons violate the chain or energy identity"));
        }
        out.extend(s.diagnostics.iter().map(|d| format!("vector {k}: branch {:?}: {}", d.path, d.message)));
    }
}

/// Computes the report of a validated config without writing anything.
pub fn evaluate(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    cfg.validate()?;
    let op = cfg.operation.ok_or_else(|| ConfigError {
        path: "operation".into(),
        message: "no operation selected".into(),
    })?;
    let sc = scenario(&cfg.scenario).ok_or_else(|| ConfigError {
        path: "scenario".into(),
        message: format!("unknown scenario `{}`", cfg.scenario),
    })?;
    let built = sc.build().map_err(|e| RunError::Failed(e.to_string()))?;
    let opts = focal_options(&cfg.tolerances);
    let mut findings = Vec::new();
    let result = match op {
        Operation::FocalScan => {
            let samples: Vec<(f64, NormalVector<f64>)> =
                (0..cfg.directions).map(|k| built.scan_direction(k, cfg.directions)).collect();
            let profile = focal_time_profile(&built.patch, &samples, cfg.focal_count, cfg.horizon, None, &opts);
            for r in &profile.rows {
                if let Some(e) = &r.error {
                    findings.push(format!("direction {}: {e}", r.index));
                }
            }
            OperationResult::FocalScan {
                focal_count: cfg.focal_count,
                profile,
            }
        }
        Operation::Index => {
            let rows: Vec<IndexRow> = vectors(cfg, &built, false)?
                .par_iter()
                .enumerate()
                .map(|(k, v)| match index_and_nullity(&built.patch, v, &opts) {
                    Ok((i, n, recs)) => IndexRow {
                        vector: k,
                        length: v.length(),
                        index: Some(i),
                        nullity: Some(n),
                        focal: recs.iter().map(|r| (r.time, r.multiplicity)).collect(),
                        error: None,
                    },
                    Err(e) => IndexRow {
                        vector: k,
                        length: v.length(),
                        index: None,
                        nullity: None,
                        focal: vec![],
                        error: Some(e.to_string()),
                    },
                })
                .collect();
            for r in &rows {
                if let Some(e) = &r.error {
                    findings.push(format!("vector {}: {e}", r.vector));
                }
            }
            OperationResult::Index { rows }
        }
        Operation::Split => {
            if built.foliation.is_none() {
                return Err(ConfigError {
                    path: "scenario".into(),
                    message: format!("`{}` has no foliation to split along", sc.id),
                }
                .into());
            }
            let rows: Vec<SplitRow> = (0..cfg.seeds as u64)
                .into_par_iter()
                .map(|i| split_row(&built, sc, cfg.seed.wrapping_add(i), cfg.tolerances.ode, &opts))
                .collect();
            for r in &rows {
                match (&r.split, &r.error) {
                    (Some(s), _) if !s.holds => findings.push(format!(
                        "seed {}: {} != {} + {}",
                        r.seed, s.ind_total, s.ind_vertical, s.ind_horizontal
                    )),
                    (None, Some(e)) => findings.push(format!("seed {}: {e}", r.seed)),
                    _ => {}
                }
            }
            OperationResult::Split { rows }
        }
        Operation::TautCheck => {
            let cap = cfg.cap.unwrap_or(sc.default_cap);
            let reference = match cfg.reference.as_deref().or(sc.reference) {
                Some(id) => Some(reference_betti(id).map_err(|e| ConfigError {
                    path: "reference".into(),
                    message: e.to_string(),
                })?),
                None => None,
            };
            let shooting = ShootingOptions {
                density: cfg.density,
                newton_tol: cfg.tolerances.newton,
                focal: opts,
                ..ShootingOptions::default()
            };
            let mut rows = Vec::new();
            for q in targets(cfg, &built)? {
                let row = match morse_report(&built.patch, &q, cap, &shooting, reference.clone()) {
                    Ok(r) => TautRow {
                        target: q.iter().copied().collect(),
                        report: Some(r),
                        error: None,
                    },
                    Err(e) => TautRow {
                        target: q.iter().copied().collect(),
                        report: None,
                        error: Some(e.to_string()),
                    },
                };
                let k = rows.len();
                match (&row.report, &row.error) {
                    (Some(r), _) => match (&r.verdict, &r.diagnostic) {
                        (Some(v), _) if v.is_perfect() => {}
                        (Some(v), _) => findings.push(format!("target {k}: {v:?}")),
                        (None, Some(d)) => findings.push(format!("target {k}: {d}")),
                        (None, None) => {}
                    },
                    (None, Some(e)) => findings.push(format!("target {k}: {e}")),
                    _ => {}
                }
                rows.push(row);
            }
            OperationResult::TautCheck { rows }
        }
        Operation::Cycles => {
            let rows: Vec<CycleRow> = vectors(cfg, &built, false)?
                .iter()
                .enumerate()
                .map(|(k, v)| cycle_row(&built, k, v, cfg, &opts))
                .collect();
            for r in &rows {
                cycle_findings(r, &mut findings);
            }
            OperationResult::Cycles { rows }
        }
        Operation::FiberProbe => {
            let probe = FiberProbeOptions {
                samples: cfg.samples.max(4),
                seed: cfg.seed,
                focal: opts,
                ..FiberProbeOptions::default()
            };
            let rows: Vec<ProbeRow> = vectors(cfg, &built, true)?
                .iter()
                .enumerate()
                .map(|(k, v)| match fiber_integrability_probe(&built.patch, v, &probe) {
                    Ok(p) => ProbeRow {
                        vector: k,
                        probe: Some(p),
                        error: None,
                    },
                    Err(e) => ProbeRow {
                        vector: k,
                        probe: None,
                        error: Some(e.to_string()),
                    },
                })
                .collect();
            for r in &rows {
                match (&r.probe, &r.error) {
                    (Some(p), _) if p.verdict != FiberVerdict::Integrable => {
                        findings.push(format!("vector {}: fiber verdict {:?}", r.vector, p.verdict))
                    }
                    (None, Some(e)) => findings.push(format!("vector {}: {e}", r.vector)),
                    _ => {}
                }
            }
            OperationResult::FiberProbe { rows }
        }
    };
    Ok(Report {
        scenario: sc.id.to_string(),
        seed: cfg.seed,
        tolerances: cfg.tolerances,
        result,
        findings,
    })
}

/// Runs one experiment, writing its report files and a manifest into
/// `out_dir` (or the config's `out_dir`, or `out`).
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<RunOutcome, RunError> {
    let start = Instant::now();
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let report = with_thread_cap(|| evaluate(cfg))?;
    let mut files = emit_report(&report, &dir)?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: serde_json::to_value(cfg).map_err(|e| RunError::Failed(e.to_string()))?,
        seed: cfg.seed,
        threads: thread_cap().unwrap_or_else(rayon::current_num_threads),
        files: files
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
        findings: report.findings.len(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    files.push(report::write_manifest(&dir, &manifest)?);
    Ok(RunOutcome { report, files })
}
