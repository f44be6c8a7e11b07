use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::shooting::{shoot_critical_points, CriticalPoint, ShootingOptions};
use super::{bundle_differential, bundle_point, endpoint_jacobian};
use crate::error::{Error, Result};
use crate::focal::{index_and_nullity, FocalOptions};
use crate::foliation::FoliationSpec;
use crate::geometry::linalg::{max_principal_angle, pseudo_inverse, range_basis, svd_ascending};
use crate::geometry::{NormalVector, SubmanifoldPatch};

/// Settings of the solution-cloud probes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberProbeOptions {
    pub samples: usize,
    /// Ball radius relative to `max(|v|, 1)`.
    pub radius: f64,
    pub seed: u64,
    /// Singular-value gap that separates fiber directions from noise.
    pub gap_ratio: f64,
    /// Largest accepted angle between kernel and cloud tangent.
    pub tangency_tol: f64,
    pub newton_tol: f64,
    pub focal: FocalOptions,
}

impl Default for FiberProbeOptions {
    fn default() -> Self {
        Self {
            samples: 12,
            radius: 1e-4,
            seed: 11,
            gap_ratio: 1e3,
            tangency_tol: 1e-3,
            newton_tol: 1e-12,
            focal: FocalOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberVerdict {
    Integrable,
    NotIntegrable,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberProbe {
    pub fiber_dim: Option<usize>,
    pub nullity: usize,
    pub tangency_residual: f64,
    pub solutions: usize,
    /// Singular values of the centered cloud, descending.
    pub spectrum: Vec<f64>,
    pub verdict: FiberVerdict,
    pub diagnostic: Option<String>,
}

/// Solutions of `exp⊥(w) = q` near `center`, from random starts in a ball,
/// each refined by minimum-norm Gauss-Newton steps.
pub fn solution_cloud(
    patch: &SubmanifoldPatch<f64>,
    center: &NormalVector<f64>,
    q: &DVector<f64>,
    opts: &FiberProbeOptions,
) -> Vec<(DVector<f64>, DVector<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let r = opts.radius * center.length().max(1.0);
    let np = center.param.len();
    let nc = center.coeffs.len();
    let mut out = Vec::new();
    for _ in 0..opts.samples {
        let g: DVector<f64> = DVector::from_fn(np + nc, |_, _| StandardNormal.sample(&mut rng));
        let scale: f64 = rng.random::<f64>().powf(1.0 / (np + nc) as f64) * r / g.norm().max(1e-300);
        let mut u = patch.normalize_param(&(&center.param + g.rows(0, np) * scale));
        let mut c = &center.coeffs + g.rows(np, nc) * scale;
        let mut ok = false;
        for _ in 0..30 {
            let Ok((x, jac)) = endpoint_jacobian(patch, &u, &c, 1e-12) else {
                break;
            };
            let f = x - q;
            if f.norm() < opts.newton_tol {
                ok = true;
                break;
            }
            let step = pseudo_inverse(&jac, 1e-8) * f;
            u = patch.normalize_param(&(&u - step.rows(0, np)));
            c -= step.rows(np, nc);
            if step.norm() > 100.0 * r {
                break;
            }
        }
        if ok {
            out.push((u, c));
        }
    }
    out
}

/// A genuine fiber spreads the cloud over a good part of the sampling ball.
fn min_extent(center: &NormalVector<f64>, opts: &FiberProbeOptions) -> f64 {
    0.25 * opts.radius * center.length().max(1.0)
}

struct CloudFit {
    dim: Option<usize>,
    spectrum: Vec<f64>,
    tangent: DMatrix<f64>,
}

/// PCA of the cloud. Directions spread less than `min_extent` are Newton
/// stragglers (at a fold they sit about `sqrt(tol)` from the root), not fiber.
fn fit_cloud(points: &[DVector<f64>], gap: f64, min_extent: f64) -> CloudFit {
    let n = points.len();
    let d = points[0].len();
    let mean = points.iter().fold(DVector::zeros(d), |a, p| a + p) / n as f64;
    let data = DMatrix::from_fn(d, n, |i, j| points[j][i] - mean[i]);
    let (sigma, u, _) = svd_ascending(&data);
    let desc: Vec<f64> = sigma.iter().rev().copied().collect();
    let floor = 1e-13 * points.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let dim = if desc.first().is_none_or(|&s| s < floor) {
        Some(0)
    } else {
        (0..desc.len()).find(|&k| desc.get(k + 1).is_none_or(|&next| desc[k] >= gap * next.max(floor)))
            .map(|k| k + 1)
    };
    let dim = dim.map(|k| desc[..k].iter().filter(|&&s| s >= min_extent).count());
    let k = dim.unwrap_or(0);
    let tangent = DMatrix::from_fn(d, k, |i, j| u[(i, u.ncols() - 1 - j)]);
    CloudFit {
        dim,
        spectrum: desc,
        tangent,
    }
}

/// Kernel of `d exp⊥` at `(u, c)` mapped into normal-bundle coordinates.
fn kernel_image(patch: &SubmanifoldPatch<f64>, u: &DVector<f64>, c: &DVector<f64>, gap: f64) -> Result<DMatrix<f64>> {
    let (_, jac) = endpoint_jacobian(patch, u, c, 1e-12)?;
    let (sigma, _, v) = svd_ascending(&jac);
    let smax = sigma.last().copied().unwrap_or(0.0);
    let cols: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] * gap * 1e3 < smax).collect();
    let k = DMatrix::from_fn(v.nrows(), cols.len(), |i, j| v[(i, cols[j])]);
    let g = bundle_differential(patch, u, c);
    Ok(range_basis(&(g * k), 1e-6))
}

/// Compares the local fiber of `exp⊥` through a focal vector with the
/// kernel of its differential.
pub fn fiber_integrability_probe(
    patch: &SubmanifoldPatch<f64>,
    v: &NormalVector<f64>,
    opts: &FiberProbeOptions,
) -> Result<FiberProbe> {
    let (_, nullity, _) = index_and_nullity(patch, v, &opts.focal)?;
    if nullity == 0 {
        return Err(Error::Precondition("fiber probe needs a focal vector (nullity > 0)".into()));
    }
    let (q, _) = endpoint_jacobian(patch, &v.param, &v.coeffs, 1e-12)?;
    let cloud = solution_cloud(patch, v, &q, opts);
    let mut probe = FiberProbe {
        fiber_dim: None,
        nullity,
        tangency_residual: f64::NAN,
        solutions: cloud.len(),
        spectrum: Vec::new(),
        verdict: FiberVerdict::Inconclusive,
        diagnostic: None,
    };
    if cloud.len() < nullity + 2 {
        probe.diagnostic = Some(format!("only {} of {} starts converged", cloud.len(), opts.samples));
        return Ok(probe);
    }
    let mut pts: Vec<DVector<f64>> = cloud.iter().map(|(u, c)| bundle_point(patch, u, c)).collect();
    pts.push(bundle_point(patch, &v.param, &v.coeffs));
    let fit = fit_cloud(&pts, opts.gap_ratio, min_extent(v, opts));
    probe.spectrum = fit.spectrum.clone();
    probe.fiber_dim = fit.dim;
    let Some(dim) = fit.dim else {
        probe.diagnostic = Some("no singular-value gap in the solution cloud".into());
        return Ok(probe);
    };
    let mut worst: f64 = 0.0;
    for (u, c) in std::iter::once((v.param.clone(), v.coeffs.clone())).chain(cloud.iter().cloned()) {
        let ker = kernel_image(patch, &u, &c, opts.gap_ratio)?;
        worst = worst.max(max_principal_angle(&fit.tangent, &ker));
    }
    probe.tangency_residual = worst;
    probe.verdict = if dim == nullity && worst < opts.tangency_tol {
        FiberVerdict::Integrable
    } else {
        FiberVerdict::NotIntegrable
    };
    Ok(probe)
}

/// Critical points of one energy level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseBottComponent {
    pub energy: f64,
    pub points: usize,
    pub indices: Vec<usize>,
    pub nullities: Vec<usize>,
    /// Dimension of the critical set estimated from solution clouds.
    pub critical_dim: Option<usize>,
    pub index_constant: bool,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseBottReport {
    pub components: Vec<MorseBottComponent>,
    /// Every critical point is non-degenerate.
    pub morse_case: bool,
    pub consistent: bool,
}

/// Checks nullity against the dimension of the critical set of the energy
/// at `q`, component by component.
pub fn morse_bott_probe(
    patch: &SubmanifoldPatch<f64>,
    q: &DVector<f64>,
    cap: f64,
    shooting: &ShootingOptions,
    opts: &FiberProbeOptions,
) -> Result<MorseBottReport> {
    let shot = shoot_critical_points(patch, q, cap, shooting)?;
    let mut groups: Vec<Vec<&CriticalPoint>> = Vec::new();
    for cp in &shot.critical_points {
        match groups.last_mut() {
            Some(g) if (g[0].energy - cp.energy).abs() <= 1e-6 * cp.energy.max(1.0) => g.push(cp),
            _ => groups.push(vec![cp]),
        }
    }
    let mut components = Vec::new();
    for g in groups {
        let indices: Vec<usize> = g.iter().map(|c| c.index).collect();
        let nullities: Vec<usize> = g.iter().map(|c| c.nullity).collect();
        let mut dims = Vec::new();
        for cp in g.iter().take(3) {
            if cp.nullity == 0 {
                dims.push(Some(0));
                continue;
            }
            let nv = cp.normal_vector();
            let cloud = solution_cloud(patch, &nv, q, opts);
            if cloud.len() < cp.nullity + 2 {
                dims.push(None);
                continue;
            }
            let mut pts: Vec<DVector<f64>> = cloud.iter().map(|(u, c)| bundle_point(patch, u, c)).collect();
            pts.push(bundle_point(patch, &nv.param, &nv.coeffs));
            dims.push(fit_cloud(&pts, opts.gap_ratio, min_extent(&nv, opts)).dim);
        }
        let critical_dim = if dims.iter().all(|d| *d == dims[0]) { dims[0] } else { None };
        let index_constant = indices.iter().all(|&i| i == indices[0]);
        let consistent = index_constant
            && critical_dim.is_some_and(|d| nullities.iter().all(|&n| n == d));
        components.push(MorseBottComponent {
            energy: g[0].energy,
            points: g.len(),
            indices,
            nullities,
            critical_dim,
            index_constant,
            consistent,
        });
    }
    let morse_case = shot.critical_points.iter().all(|c| c.nullity == 0);
    let consistent = components.iter().all(|c| c.consistent);
    Ok(MorseBottReport {
        components,
        morse_case,
        consistent,
    })
}

/// A subset of the leaf space of a built-in foliation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuotientSubset {
    /// A radius in the ray quotient of concentric spheres.
    Radius { r: f64 },
    /// A point of the Hopf base `S^2(1/2)`.
    BasePoint { b: Vec<f64> },
    /// A point of the point foliation.
    Point { x: Vec<f64> },
}

fn hopf_lift(b: &[f64]) -> DVector<f64> {
    let w2 = 0.5 - b[0];
    if w2 < 1e-12 {
        return DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
    }
    let c = w2.sqrt();
    DVector::from_vec(vec![b[1] / c, b[2] / c, c, 0.0])
}

/// Union of the leaves over `subset`, as a patch.
pub fn build_saturated_preimage(foliation: &FoliationSpec, subset: &QuotientSubset) -> Result<SubmanifoldPatch<f64>> {
    if foliation.quotient().is_none() {
        return Err(Error::Precondition("foliation has no quotient projection".into()));
    }
    match (foliation.label(), subset) {
        ("concentric-circles" | "concentric-spheres", QuotientSubset::Radius { r }) => {
            if !(r.is_finite() && *r > crate::foliation::STRATUM_TOLERANCE) {
                return Err(Error::Precondition(format!(
                    "radius {r} touches the singular boundary of the quotient"
                )));
            }
            Ok(SubmanifoldPatch::sphere_in_euclidean(foliation.parent().ambient_dim(), *r))
        }
        ("hopf", QuotientSubset::BasePoint { b }) => {
            if b.len() != 3 {
                return Err(Error::mismatch(3, b.len(), "Hopf base point"));
            }
            let dev = (DVector::from_column_slice(b).norm() - 0.5).abs();
            if dev > 1e-9 {
                return Err(Error::domain("base point on S^2(1/2)", dev));
            }
            SubmanifoldPatch::hopf_fiber(hopf_lift(b))
        }
        ("points", QuotientSubset::Point { x }) => {
            SubmanifoldPatch::point_patch(foliation.parent().clone(), DVector::from_column_slice(x))
        }
        (label, s) => Err(Error::Precondition(format!("no saturated preimage for {s:?} in foliation `{label}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foliation::hopf_map;
    use crate::geometry::RiemannianSpace;
    use std::f64::consts::PI;

    #[test]
    fn sphere_center_fiber_is_two_dimensional() {
        let patch = SubmanifoldPatch::sphere_in_euclidean(3, 1.0);
        let u = DVector::from_vec(vec![0.3, -0.5, 0.8]).normalize();
        let v = NormalVector::new(u, DVector::from_element(1, 1.0));
        let probe = fiber_integrability_probe(&patch, &v, &FiberProbeOptions::default()).unwrap();
        assert_eq!(probe.nullity, 2);
        assert_eq!(probe.fiber_dim, Some(2), "{probe:?}");
        assert_eq!(probe.verdict, FiberVerdict::Integrable, "{probe:?}");
    }

    #[test]
    fn antipode_fiber_on_three_sphere() {
        let s3 = RiemannianSpace::round_sphere(3, 1.0);
        let patch = SubmanifoldPatch::point_patch(s3, DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0])).unwrap();
        let v = NormalVector::new(DVector::zeros(0), DVector::from_vec(vec![PI, 0.0, 0.0]));
        let probe = fiber_integrability_probe(&patch, &v, &FiberProbeOptions::default()).unwrap();
        assert_eq!((probe.nullity, probe.fiber_dim), (2, Some(2)), "{probe:?}");
        assert_eq!(probe.verdict, FiberVerdict::Integrable);
    }

    #[test]
    fn non_focal_vector_rejected() {
        let patch = SubmanifoldPatch::sphere_in_euclidean(3, 1.0);
        let v = NormalVector::new(DVector::from_vec(vec![0.0, 0.0, 1.0]), DVector::from_element(1, 0.4));
        assert!(matches!(
            fiber_integrability_probe(&patch, &v, &FiberProbeOptions::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn preimages() {
        let circ = build_saturated_preimage(&FoliationSpec::concentric_circles(), &QuotientSubset::Radius { r: 2.0 }).unwrap();
        let p = circ.point(&DVector::from_element(1, 0.7));
        assert!((p.norm() - 2.0).abs() < 1e-14);
        assert!(build_saturated_preimage(&FoliationSpec::concentric_circles(), &QuotientSubset::Radius { r: 0.0 }).is_err());
        let b = vec![0.1, 0.3, (0.25f64 - 0.01 - 0.09).sqrt()];
        let fiber = build_saturated_preimage(&FoliationSpec::hopf(), &QuotientSubset::BasePoint { b: b.clone() }).unwrap();
        for t in [0.0, 1.0, 2.5] {
            let x = fiber.point(&DVector::from_element(1, t));
            assert!((hopf_map(&x) - DVector::from_vec(b.clone())).norm() < 1e-12);
        }
    }
}
