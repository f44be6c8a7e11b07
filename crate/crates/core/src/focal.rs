//! Focal times, multiplicities, Morse index and nullity.
//!
//! A focal time is where the evaluation matrix `J(t)` of a Lagrangian family
//! loses rank. Candidates come from local minima of its smallest singular
//! value on the output grid. Each candidate is refined on the compressed
//! matrix `M(t) = Uᵀ J(t) V`, where `U, V` span the small singular
//! directions: with `B = Uᵀ J'(t) V`, the scalar `tr(B⁻¹ M(t)) / μ` behaves
//! like `t − t*` and changes sign even for multiplicity above one, where a
//! determinant would not.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::linalg::svd_ascending;
use crate::geometry::{NormalVector, SubmanifoldPatch};
use crate::jacobi::{l_jacobi_trace, JacobiBasisTrace};

/// Endpoint tolerance for "q is a focal point".
pub const ENDPOINT_TOLERANCE: f64 = 1e-8;

/// A one-parameter family of matrices sampled on a grid, with derivative.
pub trait MatrixPath {
    fn times(&self) -> &[f64];
    fn value(&self, k: usize) -> DMatrix<f64>;
    fn rate(&self, k: usize) -> DMatrix<f64>;
    /// Interpolated value and derivative at an arbitrary time.
    fn value_at(&self, t: f64) -> (DMatrix<f64>, DMatrix<f64>);
}

impl MatrixPath for JacobiBasisTrace<f64> {
    fn times(&self) -> &[f64] {
        JacobiBasisTrace::times(self)
    }

    fn value(&self, k: usize) -> DMatrix<f64> {
        JacobiBasisTrace::value(self, k)
    }

    fn rate(&self, k: usize) -> DMatrix<f64> {
        JacobiBasisTrace::rate(self, k)
    }

    fn value_at(&self, t: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        self.eval_at(t)
    }
}

/// A matrix path given by samples of value and derivative; cubic Hermite
/// in between.
#[derive(Debug, Clone)]
pub struct SampledPath {
    times: Vec<f64>,
    values: Vec<DMatrix<f64>>,
    rates: Vec<DMatrix<f64>>,
}

impl SampledPath {
    pub fn new(times: Vec<f64>, values: Vec<DMatrix<f64>>, rates: Vec<DMatrix<f64>>) -> Result<Self> {
        if times.len() < 2 || values.len() != times.len() || rates.len() != times.len() {
            return Err(Error::mismatch(times.len(), values.len(), "sampled path nodes"));
        }
        Ok(Self { times, values, rates })
    }
}

impl MatrixPath for SampledPath {
    fn times(&self) -> &[f64] {
        &self.times
    }

    fn value(&self, k: usize) -> DMatrix<f64> {
        self.values[k].clone()
    }

    fn rate(&self, k: usize) -> DMatrix<f64> {
        self.rates[k].clone()
    }

    fn value_at(&self, t: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.times.len() - 1;
        let k = match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            p => (p - 1).min(n - 1),
        };
        let dt = self.times[k + 1] - self.times[k];
        let s = (t - self.times[k]) / dt;
        crate::geodesic::hermite(&self.values[k], &self.rates[k], &self.values[k + 1], &self.rates[k + 1], s, dt)
    }
}

/// Numerical rules for focal detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocalOptions {
    /// Minimum ratio between retained and discarded singular values.
    pub gap_ratio: f64,
    /// Singular values below `zero_rel * scale` count as zero.
    pub zero_rel: f64,
    /// Bisection stops at this bracket width.
    pub bisection_tol: f64,
    /// Candidates closer than this are merged.
    pub merge_tol: f64,
}

impl Default for FocalOptions {
    fn default() -> Self {
        Self {
            gap_ratio: 1e3,
            zero_rel: 1e-6,
            bisection_tol: 1e-11,
            merge_tol: 1e-7,
        }
    }
}

/// One focal time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocalRecord {
    pub time: f64,
    pub multiplicity: usize,
    /// Smallest singular value kept as non-zero; `None` when all vanish.
    pub smallest_retained: Option<f64>,
    pub largest_discarded: f64,
    /// Isolated simple crossing on nearby rays; `None` until classified.
    pub regular: Option<bool>,
}

fn smallest_sigma(m: &DMatrix<f64>) -> f64 {
    if m.ncols() == 0 {
        return f64::INFINITY;
    }
    svd_ascending(m).0[0]
}

struct Proxy {
    u: DMatrix<f64>,
    v: DMatrix<f64>,
    b_inv: DMatrix<f64>,
    mu: usize,
}

impl Proxy {
    /// Builds the proxy from the small singular directions at `t`.
    fn at(path: &dyn MatrixPath, t: f64, small: f64) -> Option<Self> {
        let (m, d) = path.value_at(t);
        let (sigma, u, v) = svd_ascending(&m);
        let mu = sigma.iter().take_while(|&&s| s <= small).count().max(1);
        let u = u.columns(0, mu).into_owned();
        let v = v.columns(0, mu).into_owned();
        let b = u.transpose() * d * &v;
        let b_inv = b.try_inverse()?;
        Some(Self { u, v, b_inv, mu })
    }

    fn eval(&self, path: &dyn MatrixPath, t: f64) -> f64 {
        let (m, _) = path.value_at(t);
        (&self.b_inv * (self.u.transpose() * m * &self.v)).trace() / self.mu as f64
    }
}

fn bisect(path: &dyn MatrixPath, proxy: &Proxy, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let mut fa = proxy.eval(path, a);
    let fb = proxy.eval(path, b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    while b - a > tol {
        let c = 0.5 * (a + b);
        let fc = proxy.eval(path, c);
        if fc == 0.0 {
            return Some(c);
        }
        if fc.signum() == fa.signum() {
            a = c;
            fa = fc;
        } else {
            b = c;
        }
    }
    Some(0.5 * (a + b))
}

/// Golden-section minimization of the smallest singular value (fallback).
fn minimize_sigma(path: &dyn MatrixPath, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let f = |t: f64| smallest_sigma(&path.value_at(t).0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn refine(path: &dyn MatrixPath, t0: f64, dt: f64, opts: &FocalOptions) -> f64 {
    let lo_limit = path.times()[1];
    let mut t = t0;
    let mut half = 1.5 * dt;
    for _ in 0..6 {
        let (_, d) = path.value_at(t);
        let small = 2.0 * dt * d.norm() + 1e-300;
        let Some(proxy) = Proxy::at(path, t, small) else {
            return minimize_sigma(path, (t - dt).max(lo_limit), t + dt, opts.bisection_tol);
        };
        let mut found = None;
        for w in [half, 1.5 * dt, 3.0 * dt] {
            if let Some(r) = bisect(path, &proxy, (t - w).max(lo_limit), t + w, opts.bisection_tol) {
                found = Some(r);
                break;
            }
        }
        let Some(next) = found else {
            return minimize_sigma(path, (t0 - dt).max(lo_limit), t0 + dt, opts.bisection_tol);
        };
        let step = (next - t).abs();
        t = next;
        if step < 10.0 * opts.bisection_tol {
            break;
        }
        half = (8.0 * step).max(1e-9);
    }
    t
}

/// Classifies the corank at `t` under the gap rule; `None` when nothing vanishes.
pub fn classify_corank(path: &dyn MatrixPath, t: f64, opts: &FocalOptions) -> Result<Option<FocalRecord>> {
    let (m, d) = path.value_at(t);
    let (sigma, _, _) = svd_ascending(&m);
    let dmax = if d.ncols() == 0 { 0.0 } else { svd_ascending(&d).0.last().copied().unwrap_or(0.0) };
    let scale = sigma.last().copied().unwrap_or(0.0).max(dmax);
    let zero = opts.zero_rel * scale;
    let mu = sigma.iter().take_while(|&&s| s <= zero).count();
    if mu == 0 {
        return Ok(None);
    }
    let discarded = sigma[mu - 1];
    let retained = sigma.get(mu).copied();
    if let Some(r) = retained {
        if discarded > 0.0 && r / discarded < opts.gap_ratio {
            return Err(Error::AmbiguousCorank { time: t, spectrum: sigma });
        }
    }
    Ok(Some(FocalRecord {
        time: t,
        multiplicity: mu,
        smallest_retained: retained,
        largest_discarded: discarded,
        regular: None,
    }))
}

/// Focal times of `path` in `(0, window_end]`, sorted by time.
pub fn detect_focal(path: &dyn MatrixPath, window_end: f64, opts: &FocalOptions) -> Result<Vec<FocalRecord>> {
    let times = path.times();
    if times.len() < 4 || path.value(0).ncols() == 0 {
        return Ok(Vec::new());
    }
    let dt = times[1] - times[0];
    let last = times
        .iter()
        .rposition(|&t| t <= window_end + 0.5 * dt)
        .unwrap_or(0);
    if last < 2 {
        return Ok(Vec::new());
    }
    let sigma: Vec<f64> = (0..=last.min(times.len() - 1)).map(|k| smallest_sigma(&path.value(k))).collect();
    let mut candidates = Vec::new();
    for k in 2..=last {
        let left = sigma[k] < sigma[k - 1];
        let right = k == last || sigma[k] <= sigma[k + 1];
        if left && right {
            let thr = 2.0 * dt * path.rate(k).norm();
            if sigma[k] <= thr {
                candidates.push(k);
            }
        }
    }
    let mut records: Vec<FocalRecord> = Vec::new();
    for k in candidates {
        let mut t = refine(path, times[k], dt, opts);
        if t > window_end + ENDPOINT_TOLERANCE || t <= opts.merge_tol {
            continue;
        }
        if t > window_end {
            t = window_end;
        }
        if let Some(rec) = classify_corank(path, t, opts)? {
            records.push(rec);
        }
    }
    records.sort_by(|a, b| a.time.total_cmp(&b.time));
    let mut merged: Vec<FocalRecord> = Vec::with_capacity(records.len());
    for r in records {
        match merged.last_mut() {
            Some(prev) if (r.time - prev.time).abs() < opts.merge_tol => {
                if r.largest_discarded < prev.largest_discarded {
                    *prev = r;
                }
            }
            _ => merged.push(r),
        }
    }
    Ok(merged)
}

/// Sum of multiplicities over focal times in the open interval `(0, end)`.
pub fn morse_index(records: &[FocalRecord], end: f64) -> usize {
    records
        .iter()
        .filter(|r| r.time < end - ENDPOINT_TOLERANCE)
        .map(|r| r.multiplicity)
        .sum()
}

/// Multiplicity of the focal time at `t = 1`, or 0.
pub fn nullity_at_endpoint(records: &[FocalRecord]) -> usize {
    records
        .iter()
        .filter(|r| (r.time - 1.0).abs() < ENDPOINT_TOLERANCE)
        .map(|r| r.multiplicity)
        .sum()
}

/// Normal geodesic of `normal` on `[0, horizon]`, its L-Jacobi basis and focal records.
pub fn focal_records(
    patch: &SubmanifoldPatch<f64>,
    normal: &NormalVector<f64>,
    horizon: f64,
    opts: &FocalOptions,
) -> Result<(JacobiBasisTrace<f64>, Vec<FocalRecord>)> {
    let basis = l_jacobi_trace(patch, normal, horizon)?;
    let records = detect_focal(&basis, horizon, opts)?;
    Ok((basis, records))
}

/// Morse index and nullity of the unit-parameter normal geodesic of `normal`.
pub fn index_and_nullity(
    patch: &SubmanifoldPatch<f64>,
    normal: &NormalVector<f64>,
    opts: &FocalOptions,
) -> Result<(usize, usize, Vec<FocalRecord>)> {
    let (_, records) = focal_records(patch, normal, 1.0, opts)?;
    Ok((morse_index(&records, 1.0), nullity_at_endpoint(&records), records))
}

/// Settings of the regularity classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityProbe {
    pub samples: usize,
    /// Relative size of ray perturbations.
    pub radius: f64,
    pub seed: u64,
}

impl Default for RegularityProbe {
    fn default() -> Self {
        Self {
            samples: 4,
            radius: 1e-3,
            seed: 7,
        }
    }
}

fn perturbed(patch: &SubmanifoldPatch<f64>, normal: &NormalVector<f64>, radius: f64, rng: &mut ChaCha8Rng) -> NormalVector<f64> {
    let len = normal.length().max(1.0);
    let du = DVector::from_fn(normal.param.len(), |_, _| rng.random_range(-1.0..1.0) * radius);
    let dc = DVector::from_fn(normal.coeffs.len(), |_, _| rng.random_range(-1.0..1.0) * radius * len);
    let u = patch.normalize_param(&(&normal.param + du));
    NormalVector::new(u, &normal.coeffs + dc)
}

/// Marks each record regular when every perturbed ray has exactly one focal
/// time of the same multiplicity in a window around it.
pub fn classify_regularity(
    patch: &SubmanifoldPatch<f64>,
    normal: &NormalVector<f64>,
    records: &mut [FocalRecord],
    horizon: f64,
    probe: &RegularityProbe,
    opts: &FocalOptions,
) -> Result<()> {
    if records.is_empty() {
        return Ok(());
    }
    let mut gaps: Vec<f64> = records.windows(2).map(|w| w[1].time - w[0].time).collect();
    gaps.push(0.2);
    let min_gap = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    let window = (0.25 * min_gap).min(0.05).max(10.0 * probe.radius);
    let mut rng = ChaCha8Rng::seed_from_u64(probe.seed);
    let rays: Vec<NormalVector<f64>> = (0..probe.samples)
        .map(|_| perturbed(patch, normal, probe.radius, &mut rng))
        .collect();
    let results: Vec<Result<Vec<FocalRecord>>> = rays
        .par_iter()
        .map(|w| focal_records(patch, w, horizon + window, opts).map(|(_, r)| r))
        .collect();
    for rec in records.iter_mut() {
        let mut ok = true;
        for res in &results {
            match res {
                Ok(found) => {
                    let near: Vec<&FocalRecord> =
                        found.iter().filter(|q| (q.time - rec.time).abs() < window).collect();
                    if near.len() != 1 || near[0].multiplicity != rec.multiplicity {
                        ok = false;
                    }
                }
                Err(_) => ok = false,
            }
        }
        rec.regular = Some(ok);
    }
    Ok(())
}

/// One sampled direction of a focal-time profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub index: usize,
    pub angle: f64,
    /// First focal times with multiplicities.
    pub focal: Vec<(f64, usize)>,
    /// Every focal vector on the segment is regular.
    pub regular: bool,
    pub error: Option<String>,
}

/// Focal-time table over sampled unit normals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocalProfile {
    pub rows: Vec<ProfileRow>,
    /// Empirical Lipschitz constant of `λ_i` between adjacent samples.
    pub lipschitz: f64,
}

fn sample_distance(patch: &SubmanifoldPatch<f64>, a: &NormalVector<f64>, b: &NormalVector<f64>) -> f64 {
    let pa = patch.point(&a.param);
    let pb = patch.point(&b.param);
    let va = patch.ambient_normal(a);
    let vb = patch.ambient_normal(b);
    let cos = (va.dot(&vb) / (va.norm() * vb.norm())).clamp(-1.0, 1.0);
    (pa - pb).norm() + cos.acos()
}

/// First `count` focal times along each labelled unit normal, up to `horizon`.
pub fn focal_time_profile(
    patch: &SubmanifoldPatch<f64>,
    samples: &[(f64, NormalVector<f64>)],
    count: usize,
    horizon: f64,
    probe: Option<&RegularityProbe>,
    opts: &FocalOptions,
) -> FocalProfile {
    let rows: Vec<ProfileRow> = samples
        .par_iter()
        .enumerate()
        .map(|(index, (angle, nv))| {
            let mut row = ProfileRow {
                index,
                angle: *angle,
                focal: Vec::new(),
                regular: false,
                error: None,
            };
            if (nv.length() - 1.0).abs() > 1e-9 {
                row.error = Some(format!("sample {index} is not a unit normal"));
                return row;
            }
            let run = || -> Result<(Vec<FocalRecord>, bool)> {
                let (_, mut recs) = focal_records(patch, nv, horizon, opts)?;
                if let Some(p) = probe {
                    classify_regularity(patch, nv, &mut recs, horizon, p, opts)?;
                }
                let regular = recs.iter().all(|r| r.regular.unwrap_or(probe.is_none()));
                Ok((recs, regular))
            };
            match run() {
                Ok((recs, regular)) => {
                    row.focal = recs.iter().take(count).map(|r| (r.time, r.multiplicity)).collect();
                    row.regular = regular;
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect();
    let mut lipschitz: f64 = 0.0;
    for w in 0..rows.len().saturating_sub(1) {
        let (a, b) = (&rows[w], &rows[w + 1]);
        let delta = sample_distance(patch, &samples[w].1, &samples[w + 1].1);
        if delta <= 0.0 {
            continue;
        }
        for (x, y) in a.focal.iter().zip(&b.focal) {
            lipschitz = lipschitz.max((x.0 - y.0).abs() / delta);
        }
    }
    FocalProfile { rows, lipschitz }
}
