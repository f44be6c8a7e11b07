//! Broken normal geodesics built by following a normal geodesic to its last
//! interior focal point, jumping inside the exponential fiber there and
//! repeating until the index drops to zero.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::focal::{
    classify_regularity, focal_records, morse_index, nullity_at_endpoint, FocalOptions, FocalRecord, RegularityProbe,
    ENDPOINT_TOLERANCE,
};
use crate::foliation::{singular_crossings, FoliationSpec};
use crate::geodesic::{normal_exp, normal_geodesic};
use crate::geometry::{NormalVector, SubmanifoldPatch};
use crate::harness::{solution_cloud, FiberProbeOptions};

/// Largest accepted `|E − |v|²|` and chain mismatch.
pub const IDENTITY_TOLERANCE: f64 = 1e-8;
/// Largest accepted gap between consecutive segments in the target.
pub const CONTINUITY_TOLERANCE: f64 = 1e-7;

fn interior(records: &[FocalRecord]) -> impl Iterator<Item = &FocalRecord> {
    records.iter().filter(|r| r.time < 1.0 - ENDPOINT_TOLERANCE)
}

/// Last focal time of `s_v` strictly inside `(0, 1)`, or 0 when there is none.
pub fn first_focal_param(patch: &SubmanifoldPatch<f64>, v: &NormalVector<f64>, opts: &FocalOptions) -> Result<f64> {
    if v.length() == 0.0 {
        return Err(Error::Precondition("zero normal vector".into()));
    }
    let (_, records) = focal_records(patch, v, 1.0, opts)?;
    Ok(interior(&records).map(|r| r.time).fold(0.0, f64::max))
}

/// One segment of a broken geodesic, the geodesic of `vector` on `[focal_param, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonSegment {
    pub param: Vec<f64>,
    pub coeffs: Vec<f64>,
    /// `m(w)` of this segment's vector.
    pub focal_param: f64,
    /// Index of this segment's vector.
    pub index: usize,
    /// Relative speed drift of the integrated segment.
    pub geodesic_residual: f64,
}

impl PolygonSegment {
    pub fn vector(&self) -> NormalVector<f64> {
        NormalVector::new(
            DVector::from_column_slice(&self.param),
            DVector::from_column_slice(&self.coeffs),
        )
    }

    pub fn length(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// A broken normal geodesic with breakpoints `1 = t_0 > t_1 > … > t_r = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaPolygon {
    /// `t_0, t_1, …, t_r` in decreasing order.
    pub breakpoints: Vec<f64>,
    pub segments: Vec<PolygonSegment>,
    /// Distance between `exp⊥(m(w_i) w_i)` and `exp⊥(w_{i+1})` per joint.
    pub continuity: Vec<f64>,
    /// `|m(w_i)|w_i| − |w_{i+1}||` per joint.
    pub chain_mismatch: Vec<f64>,
}

impl EtaPolygon {
    pub fn depth(&self) -> usize {
        self.segments.len() - 1
    }

    pub fn initial_length(&self) -> f64 {
        self.segments[0].length()
    }

    /// Invariants: chain consistency, energy identity, continuity and
    /// per-segment geodesic residual.
    pub fn is_valid(&self) -> bool {
        self.segments.iter().all(|s| s.geodesic_residual <= CONTINUITY_TOLERANCE)
            && self.chain_mismatch.iter().all(|&e| e <= IDENTITY_TOLERANCE)
            && self.continuity.iter().all(|&e| e <= CONTINUITY_TOLERANCE)
            && energy_identity_check(self) <= IDENTITY_TOLERANCE
    }
}

/// Energy of the polygon on `[0, 1]` recomputed segment by segment, minus `|v|²`.
///
/// Segment `i` traverses the geodesic of `w_i` on `[m(w_i), 1]`, of length
/// `(1 − m(w_i))|w_i|`, in parameter time `t_{i−1} − t_i`.
pub fn energy_identity_check(polygon: &EtaPolygon) -> f64 {
    let v2 = polygon.initial_length().powi(2);
    if polygon.segments.len() == 1 {
        let s = &polygon.segments[0];
        if s.focal_param == 0.0 {
            return 0.0;
        }
    }
    let mut energy = 0.0;
    for (i, s) in polygon.segments.iter().enumerate() {
        let dt = polygon.breakpoints[i] - polygon.breakpoints[i + 1];
        let len = (1.0 - s.focal_param) * s.length();
        if dt <= 0.0 {
            return f64::INFINITY;
        }
        energy += len * len / dt;
    }
    (energy - v2).abs()
}

/// Sampling parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZvOptions {
    /// Fiber samples drawn per focal jump.
    pub samples: usize,
    pub max_depth: usize,
    /// Sampling ball radius relative to `max(|m(v)v|, 1)`.
    pub radius: f64,
    pub seed: u64,
    pub newton_tol: f64,
    pub focal: FocalOptions,
}

impl Default for ZvOptions {
    fn default() -> Self {
        Self {
            samples: 4,
            max_depth: 6,
            radius: 0.1,
            seed: 5,
            newton_tol: 1e-12,
            focal: FocalOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchDiagnostic {
    /// Positions of the fiber samples leading to the failed branch.
    pub path: Vec<usize>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZvSample {
    pub polygons: Vec<EtaPolygon>,
    pub index: usize,
    pub max_depth: usize,
    pub samples_per_level: usize,
    /// Every first-level fiber sample has strictly smaller index.
    pub monotone: bool,
    pub energy_spread: f64,
    pub diagnostics: Vec<BranchDiagnostic>,
}

struct Chain {
    segments: Vec<PolygonSegment>,
    ends: Vec<DVector<f64>>,
}

fn segment(patch: &SubmanifoldPatch<f64>, w: &NormalVector<f64>, opts: &ZvOptions) -> Result<(PolygonSegment, Vec<FocalRecord>)> {
    let (_, records) = focal_records(patch, w, 1.0, &opts.focal)?;
    let trace = normal_geodesic(patch, w, 1.0, 1e-10)?;
    let m = interior(&records).map(|r| r.time).fold(0.0, f64::max);
    Ok((
        PolygonSegment {
            param: w.param.iter().copied().collect(),
            coeffs: w.coeffs.iter().copied().collect(),
            focal_param: m,
            index: morse_index(&records, 1.0),
            geodesic_residual: trace.speed_deviation(),
        },
        records,
    ))
}

/// Points of the exponential fiber through `f`, on the sphere of radius `|f|`.
fn fiber_samples(
    patch: &SubmanifoldPatch<f64>,
    f: &NormalVector<f64>,
    opts: &ZvOptions,
    seed: u64,
) -> Result<Vec<NormalVector<f64>>> {
    let q = normal_exp(patch, f)?;
    let probe = FiberProbeOptions {
        samples: 3 * opts.samples,
        radius: opts.radius,
        seed,
        newton_tol: opts.newton_tol,
        focal: opts.focal,
        ..FiberProbeOptions::default()
    };
    let len = f.length();
    let out: Vec<NormalVector<f64>> = solution_cloud(patch, f, &q, &probe)
        .into_iter()
        .map(|(u, c)| NormalVector::new(u, c))
        .filter(|w| (w.length() - len).abs() <= IDENTITY_TOLERANCE * len.max(1.0))
        .take(opts.samples)
        .collect();
    if out.len() < opts.samples {
        return Err(Error::Construction(format!(
            "fiber sampling produced {} of {} points on the sphere of radius {len}",
            out.len(),
            opts.samples
        )));
    }
    Ok(out)
}

fn branch_seed(base: u64, path: &[usize]) -> u64 {
    path.iter().fold(base ^ 0x9e37_79b9, |h, &k| h.wrapping_mul(0x100_0000_01b3).wrapping_add(k as u64 + 1))
}

fn expand(
    patch: &SubmanifoldPatch<f64>,
    w: &NormalVector<f64>,
    opts: &ZvOptions,
    path: Vec<usize>,
    first_level: &mut Option<(usize, Vec<usize>)>,
) -> (Vec<Chain>, Vec<BranchDiagnostic>) {
    let fail = |path: &[usize], e: String| {
        (
            Vec::new(),
            vec![BranchDiagnostic {
                path: path.to_vec(),
                message: e,
            }],
        )
    };
    let (seg, _) = match segment(patch, w, opts) {
        Ok(s) => s,
        Err(e) => return fail(&path, e.to_string()),
    };
    let end = match normal_exp(patch, &w.scaled(seg.focal_param)) {
        Ok(x) => x,
        Err(e) => return fail(&path, e.to_string()),
    };
    if seg.focal_param == 0.0 {
        return (
            vec![Chain {
                segments: vec![seg],
                ends: vec![end],
            }],
            Vec::new(),
        );
    }
    if path.len() >= opts.max_depth {
        return fail(&path, format!("depth cap {} reached", opts.max_depth));
    }
    let f = w.scaled(seg.focal_param);
    let fiber = match fiber_samples(patch, &f, opts, branch_seed(opts.seed, &path)) {
        Ok(s) => s,
        Err(e) => return fail(&path, e.to_string()),
    };
    let results: Vec<(Vec<Chain>, Vec<BranchDiagnostic>, usize)> = fiber
        .par_iter()
        .enumerate()
        .map(|(k, child)| {
            let mut p = path.clone();
            p.push(k);
            let (chains, diags) = expand(patch, child, opts, p, &mut None);
            let idx = chains.first().map_or(usize::MAX, |c| c.segments[0].index);
            (chains, diags, idx)
        })
        .collect();
    if let Some(slot) = first_level.as_mut() {
        slot.0 = seg.index;
        slot.1 = results.iter().map(|r| r.2).collect();
    }
    let mut chains = Vec::new();
    let mut diags = Vec::new();
    for (cs, ds, _) in results {
        diags.extend(ds);
        for mut c in cs {
            c.segments.insert(0, seg.clone());
            c.ends.insert(0, end.clone());
            chains.push(c);
        }
    }
    (chains, diags)
}

fn assemble(patch: &SubmanifoldPatch<f64>, chain: Chain) -> Result<EtaPolygon> {
    let v = chain.segments[0].length();
    let mut breakpoints = vec![1.0];
    for s in &chain.segments {
        breakpoints.push(s.focal_param * s.length() / v);
    }
    let mut continuity = Vec::new();
    let mut chain_mismatch = Vec::new();
    for i in 0..chain.segments.len() - 1 {
        let (a, b) = (&chain.segments[i], &chain.segments[i + 1]);
        let start = normal_exp(patch, &b.vector())?;
        continuity.push((&start - &chain.ends[i]).norm());
        chain_mismatch.push((a.focal_param * a.length() - b.length()).abs());
    }
    Ok(EtaPolygon {
        breakpoints,
        segments: chain.segments,
        continuity,
        chain_mismatch,
    })
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(a.len().cmp(&b.len()))
}

/// Samples broken geodesics starting along `v`: at each last interior focal
/// time the path continues from `samples` points of the exponential fiber
/// there, until the index reaches zero.
///
/// Failed branches are reported in `diagnostics`; the remaining polygons are
/// still returned.
pub fn sample_zv(patch: &SubmanifoldPatch<f64>, v: &NormalVector<f64>, opts: &ZvOptions) -> Result<ZvSample> {
    if v.length() == 0.0 {
        return Err(Error::Precondition("zero normal vector".into()));
    }
    if opts.samples == 0 {
        return Err(Error::Precondition("at least one fiber sample per level".into()));
    }
    let mut first = Some((0, Vec::new()));
    let (chains, mut diagnostics) = expand(patch, v, opts, Vec::new(), &mut first);
    let mut polygons = Vec::with_capacity(chains.len());
    for c in chains {
        match assemble(patch, c) {
            Ok(p) => polygons.push(p),
            Err(e) => diagnostics.push(BranchDiagnostic {
                path: vec![],
                message: e.to_string(),
            }),
        }
    }
    polygons.sort_by(|a, b| {
        a.depth()
            .cmp(&b.depth())
            .then_with(|| lex_cmp(&a.breakpoints, &b.breakpoints))
            .then_with(|| {
                let ka: Vec<f64> = a.segments.iter().flat_map(|s| s.param.iter().chain(&s.coeffs).copied()).collect();
                let kb: Vec<f64> = b.segments.iter().flat_map(|s| s.param.iter().chain(&s.coeffs).copied()).collect();
                lex_cmp(&ka, &kb)
            })
    });
    let (index, children) = first.unwrap_or_default();
    let index = if children.is_empty() {
        polygons.first().map_or(0, |p| p.segments[0].index)
    } else {
        index
    };
    let energies: Vec<f64> = polygons
        .iter()
        .map(|p| p.initial_length().powi(2) + energy_identity_check(p))
        .collect();
    let spread = match energies.iter().copied().reduce(f64::max) {
        Some(hi) => hi - energies.iter().copied().fold(f64::INFINITY, f64::min),
        None => 0.0,
    };
    Ok(ZvSample {
        polygons,
        index,
        max_depth: opts.max_depth,
        samples_per_level: opts.samples,
        monotone: children.iter().all(|&k| k < index),
        energy_spread: spread,
        diagnostics,
    })
}

/// Index of `v` with an optional count from singular-leaf crossings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaDimension {
    pub index: usize,
    /// Total leaf-dimension drop, when every focal time is a singular crossing.
    pub crossing_count: Option<usize>,
    pub records: Vec<FocalRecord>,
}

impl DeltaDimension {
    pub fn agrees(&self) -> bool {
        self.crossing_count.is_none_or(|c| c == self.index)
    }
}

/// `Σ μ(tv)` over `t ∈ (0, 1)`, cross-checked against the singular crossings
/// of `foliation` when the focal times are exactly those crossings.
pub fn delta_dimension(
    patch: &SubmanifoldPatch<f64>,
    v: &NormalVector<f64>,
    foliation: Option<&FoliationSpec>,
    opts: &FocalOptions,
) -> Result<DeltaDimension> {
    let (_, records) = focal_records(patch, v, 1.0, opts)?;
    if nullity_at_endpoint(&records) > 0 {
        return Err(Error::Precondition("v is focal at the endpoint".into()));
    }
    let index = morse_index(&records, 1.0);
    let mut crossing_count = None;
    if let Some(fol) = foliation {
        let trace = normal_geodesic(patch, v, 1.0, 1e-10)?;
        let crossings = singular_crossings(&trace, fol)?;
        let focal: Vec<&FocalRecord> = interior(&records).collect();
        let matched = focal.len() == crossings.len()
            && focal
                .iter()
                .zip(&crossings)
                .all(|(r, c)| (r.time - c.time).abs() < 1e-6 && r.multiplicity == c.drop);
        if matched {
            crossing_count = Some(crossings.iter().map(|c| c.drop).sum());
        }
    }
    Ok(DeltaDimension {
        index,
        crossing_count,
        records,
    })
}

/// `Σ_k dim 𝒥(t_k)` over interior focal times, each counted by the corank of
/// the L-Jacobi matrix; every crossing must be regular.
pub fn tangent_decomposition_dim(
    patch: &SubmanifoldPatch<f64>,
    v: &NormalVector<f64>,
    probe: &RegularityProbe,
    opts: &FocalOptions,
) -> Result<usize> {
    let (_, mut records) = focal_records(patch, v, 1.0, opts)?;
    records.retain(|r| r.time < 1.0 - ENDPOINT_TOLERANCE);
    classify_regularity(patch, v, &mut records, 1.0, probe, opts)?;
    if let Some(r) = records.iter().find(|r| r.regular != Some(true)) {
        return Err(Error::Precondition(format!("non-regular focal crossing at t = {}", r.time)));
    }
    Ok(records.iter().map(|r| r.multiplicity).sum())
}

/// One level of the iterated bundle: the base is the fiber component at the
/// last focal time, the child describes what lies over it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleNode {
    pub focal_time: f64,
    pub multiplicity: usize,
    pub base_dim: usize,
    pub child: Option<Box<BundleNode>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BundleDescriptor {
    pub root: Option<BundleNode>,
}

impl BundleDescriptor {
    pub fn levels(&self) -> usize {
        let mut n = 0;
        let mut cur = self.root.as_ref();
        while let Some(node) = cur {
            n += 1;
            cur = node.child.as_deref();
        }
        n
    }
}

/// Descriptor read off the focal chain of `v`: at each level the base is
/// the fiber through the last interior focal vector, of dimension `μ` there,
/// and the recursion continues along that focal vector.
pub fn bundle_descriptor(
    patch: &SubmanifoldPatch<f64>,
    v: &NormalVector<f64>,
    max_depth: usize,
    opts: &FocalOptions,
) -> Result<BundleDescriptor> {
    let mut levels = Vec::new();
    let mut w = v.clone();
    loop {
        let (_, records) = focal_records(patch, &w, 1.0, opts)?;
        let Some(last) = interior(&records).last().cloned() else {
            break;
        };
        if levels.len() >= max_depth {
            return Err(Error::Precondition(format!("depth cap {max_depth} reached")));
        }
        levels.push((last.time, last.multiplicity));
        w = w.scaled(last.time);
    }
    let mut root: Option<BundleNode> = None;
    for (time, mu) in levels.into_iter().rev() {
        root = Some(BundleNode {
            focal_time: time,
            multiplicity: mu,
            base_dim: mu,
            child: root.map(Box::new),
        });
    }
    Ok(BundleDescriptor { root })
}

/// Cohomological dimension: leaf 0, a node over a base of dimension `k`
/// whose child has dimension `n` gives `n + k`.
pub fn cohdim_bookkeeping(descriptor: &BundleDescriptor) -> Result<usize> {
    fn walk(node: &BundleNode) -> Result<usize> {
        if !(node.focal_time > 0.0 && node.focal_time < 1.0) {
            return Err(Error::Malformed(format!("focal time {} outside (0, 1)", node.focal_time)));
        }
        if node.multiplicity == 0 || node.base_dim != node.multiplicity {
            return Err(Error::Malformed(format!(
                "base dimension {} does not match multiplicity {}",
                node.base_dim, node.multiplicity
            )));
        }
        let below = match &node.child {
            Some(c) => {
                if c.focal_time >= node.focal_time {
                    return Err(Error::Malformed("child focal time not below its parent".into()));
                }
                walk(c)?
            }
            None => 0,
        };
        Ok(below + node.base_dim)
    }
    descriptor.root.as_ref().map_or(Ok(0), walk)
}
