//! Singular Riemannian foliations given by leaf data and Killing generators.
//!
//! Every built-in is homogeneous: its leaves are orbits of affine Killing
//! fields `X(x) = Kx + b`, which restricted to a horizontal geodesic span the
//! vertical Jacobi space. Singular leaves are located by minimizing a
//! distance-to-singular-stratum function along the geodesic; the integer
//! leaf dimension is then read off at the minimizer.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::focal::{detect_focal, morse_index, FocalOptions, FocalRecord};
use crate::geodesic::GeodesicTrace;
use crate::geometry::linalg::{self, max_principal_angle, range_basis};
use crate::geometry::{complex_i, RiemannianSpace};
use crate::jacobi::{JacobiBasisTrace, JacobiSeed, SeedKind};

pub type LeafDimFn = Arc<dyn Fn(&DVector<f64>) -> usize + Send + Sync>;
pub type VerticalFrameFn = Arc<dyn Fn(&DVector<f64>) -> Vec<DVector<f64>> + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
pub type QuotientMap = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

/// Points closer than this to the singular stratum of a built-in lie on it.
pub const STRATUM_TOLERANCE: f64 = 1e-8;

/// Affine Killing field `X(x) = Kx + b` in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct KillingField {
    pub linear: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl KillingField {
    pub fn rotation(n: usize, i: usize, j: usize) -> Self {
        let mut k = DMatrix::zeros(n, n);
        k[(i, j)] = -1.0;
        k[(j, i)] = 1.0;
        Self {
            linear: k,
            offset: DVector::zeros(n),
        }
    }

    pub fn translation(n: usize, i: usize) -> Self {
        let mut b = DVector::zeros(n);
        b[i] = 1.0;
        Self {
            linear: DMatrix::zeros(n, n),
            offset: b,
        }
    }

    pub fn at(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.linear * x + &self.offset
    }

    /// Derivative of `t ↦ X(γ(t))` for velocity `v`.
    pub fn along(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.linear * v
    }
}

/// Projection to the leaf space with a description of its metric.
#[derive(Clone)]
pub struct Quotient {
    pub map: QuotientMap,
    pub description: String,
}

/// A singular Riemannian foliation of `parent`.
#[derive(Clone)]
pub struct FoliationSpec {
    label: String,
    parent: RiemannianSpace<f64>,
    regular_dim: usize,
    leaf_dim: LeafDimFn,
    vertical_frame: VerticalFrameFn,
    killing: Vec<KillingField>,
    stratum_distance: Option<ScalarFn>,
    quotient: Option<Quotient>,
}

impl fmt::Debug for FoliationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FoliationSpec")
            .field("label", &self.label)
            .field("parent", &self.parent)
            .field("regular_dim", &self.regular_dim)
            .field("generators", &self.killing.len())
            .finish_non_exhaustive()
    }
}

fn orthonormal_complement(x: &DVector<f64>) -> Vec<DVector<f64>> {
    let n = x.len();
    let d = x / x.norm();
    let basis = linalg::complete_basis(&[d], n, n, |a, b| a.dot(b), |v| v);
    basis[1..].to_vec()
}

impl FoliationSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        label: impl Into<String>,
        parent: RiemannianSpace<f64>,
        regular_dim: usize,
        leaf_dim: LeafDimFn,
        vertical_frame: VerticalFrameFn,
        killing: Vec<KillingField>,
        stratum_distance: Option<ScalarFn>,
        quotient: Option<Quotient>,
    ) -> Self {
        Self {
            label: label.into(),
            parent,
            regular_dim,
            leaf_dim,
            vertical_frame,
            killing,
            stratum_distance,
            quotient,
        }
    }

    /// Spheres centered at the origin of `R^m`; the origin is the singular leaf.
    pub fn concentric_spheres(m: usize) -> Self {
        let mut killing = Vec::new();
        for i in 0..m {
            for j in (i + 1)..m {
                killing.push(KillingField::rotation(m, i, j));
            }
        }
        Self::new(
            if m == 2 { "concentric-circles" } else { "concentric-spheres" },
            RiemannianSpace::euclidean(m),
            m - 1,
            Arc::new(move |x: &DVector<f64>| if x.norm() < STRATUM_TOLERANCE { 0 } else { m - 1 }),
            Arc::new(|x: &DVector<f64>| {
                if x.norm() < STRATUM_TOLERANCE {
                    Vec::new()
                } else {
                    orthonormal_complement(x)
                }
            }),
            killing,
            Some(Arc::new(|x: &DVector<f64>| x.norm())),
            Some(Quotient {
                map: Arc::new(|x: &DVector<f64>| DVector::from_element(1, x.norm())),
                description: "ray [0, inf) with metric dr^2".into(),
            }),
        )
    }

    pub fn concentric_circles() -> Self {
        Self::concentric_spheres(2)
    }

    /// Hopf circles `{e^{iθ} x}` on `S^3(1) ⊂ C^2`.
    pub fn hopf() -> Self {
        let k = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, -1.0, 0.0, 0.0, //
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, -1.0, //
                0.0, 0.0, 1.0, 0.0,
            ],
        );
        Self::new(
            "hopf",
            RiemannianSpace::round_sphere(3, 1.0),
            1,
            Arc::new(|_| 1),
            Arc::new(|x: &DVector<f64>| {
                let v = complex_i(x);
                let n = v.norm();
                vec![v / n]
            }),
            vec![KillingField {
                linear: k,
                offset: DVector::zeros(4),
            }],
            None,
            Some(Quotient {
                map: Arc::new(hopf_map),
                description: "round sphere S^2(1/2)".into(),
            }),
        )
    }

    /// Every point is a leaf.
    pub fn points(parent: RiemannianSpace<f64>) -> Self {
        Self::new(
            "points",
            parent,
            0,
            Arc::new(|_| 0),
            Arc::new(|_| Vec::new()),
            Vec::new(),
            None,
            Some(Quotient {
                map: Arc::new(|x: &DVector<f64>| x.clone()),
                description: "the space itself".into(),
            }),
        )
    }

    /// `R^n` as a single leaf, generated by translations.
    pub fn total(n: usize) -> Self {
        Self::new(
            "total",
            RiemannianSpace::euclidean(n),
            n,
            Arc::new(move |_| n),
            Arc::new(move |_| (0..n).map(|i| DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 })).collect()),
            (0..n).map(|i| KillingField::translation(n, i)).collect(),
            None,
            Some(Quotient {
                map: Arc::new(|_| DVector::zeros(0)),
                description: "a point".into(),
            }),
        )
    }

    /// Product foliation on the product of the parents. Two Euclidean
    /// parents give a Euclidean product.
    pub fn product(a: &FoliationSpec, b: &FoliationSpec) -> Self {
        let na = a.parent.ambient_dim();
        let nb = b.parent.ambient_dim();
        let both_flat = a.parent.constant_curvature() == Some(0.0) && b.parent.constant_curvature() == Some(0.0);
        let parent = if both_flat {
            RiemannianSpace::euclidean(na + nb)
        } else {
            RiemannianSpace::product(a.parent.clone(), b.parent.clone())
        };
        let split = move |x: &DVector<f64>| (x.rows(0, na).into_owned(), x.rows(na, nb).into_owned());
        let (la, lb) = (a.leaf_dim.clone(), b.leaf_dim.clone());
        let (fa, fb) = (a.vertical_frame.clone(), b.vertical_frame.clone());
        let mut killing = Vec::new();
        for k in &a.killing {
            let mut lin = DMatrix::zeros(na + nb, na + nb);
            lin.view_mut((0, 0), (na, na)).copy_from(&k.linear);
            let mut off = DVector::zeros(na + nb);
            off.rows_mut(0, na).copy_from(&k.offset);
            killing.push(KillingField { linear: lin, offset: off });
        }
        for k in &b.killing {
            let mut lin = DMatrix::zeros(na + nb, na + nb);
            lin.view_mut((na, na), (nb, nb)).copy_from(&k.linear);
            let mut off = DVector::zeros(na + nb);
            off.rows_mut(na, nb).copy_from(&k.offset);
            killing.push(KillingField { linear: lin, offset: off });
        }
        let stratum_distance: Option<ScalarFn> = match (a.stratum_distance.clone(), b.stratum_distance.clone()) {
            (None, None) => None,
            (da, db) => Some(Arc::new(move |x: &DVector<f64>| {
                let (x1, x2) = split(x);
                let d1 = da.as_ref().map_or(f64::INFINITY, |f| f(&x1));
                let d2 = db.as_ref().map_or(f64::INFINITY, |f| f(&x2));
                d1.min(d2)
            })),
        };
        let quotient = match (a.quotient.clone(), b.quotient.clone()) {
            (Some(qa), Some(qb)) => Some(Quotient {
                map: Arc::new(move |x: &DVector<f64>| {
                    let (x1, x2) = split(x);
                    let (y1, y2) = ((qa.map)(&x1), (qb.map)(&x2));
                    DVector::from_iterator(y1.len() + y2.len(), y1.iter().chain(y2.iter()).copied())
                }),
                description: format!("({}) x ({})", qa.description, qb.description),
            }),
            _ => None,
        };
        Self::new(
            format!("{} x {}", a.label, b.label),
            parent,
            a.regular_dim + b.regular_dim,
            Arc::new(move |x: &DVector<f64>| {
                let (x1, x2) = split(x);
                la(&x1) + lb(&x2)
            }),
            Arc::new(move |x: &DVector<f64>| {
                let (x1, x2) = split(x);
                let mut out: Vec<DVector<f64>> = fa(&x1)
                    .into_iter()
                    .map(|v| DVector::from_iterator(na + nb, v.iter().copied().chain(std::iter::repeat_n(0.0, nb))))
                    .collect();
                out.extend(fb(&x2).into_iter().map(|v| {
                    DVector::from_iterator(na + nb, std::iter::repeat_n(0.0, na).chain(v.iter().copied()))
                }));
                out
            }),
            killing,
            stratum_distance,
            quotient,
        )
    }

    /// Concentric circles in the plane times the point foliation of a line:
    /// leaves are horizontal circles around the z-axis.
    pub fn circles_times_line() -> Self {
        Self::product(&Self::concentric_circles(), &Self::points(RiemannianSpace::euclidean(1)))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn parent(&self) -> &RiemannianSpace<f64> {
        &self.parent
    }

    pub fn regular_dim(&self) -> usize {
        self.regular_dim
    }

    pub fn leaf_dim(&self, x: &DVector<f64>) -> usize {
        (self.leaf_dim)(x)
    }

    pub fn vertical_frame(&self, x: &DVector<f64>) -> Vec<DVector<f64>> {
        (self.vertical_frame)(x)
    }

    pub fn killing_generators(&self) -> &[KillingField] {
        &self.killing
    }

    pub fn quotient(&self) -> Option<&Quotient> {
        self.quotient.as_ref()
    }

    pub fn stratum_distance(&self, x: &DVector<f64>) -> Option<f64> {
        self.stratum_distance.as_ref().map(|f| f(x))
    }

    /// Orthogonal projection onto the leaf tangent space at `x`.
    pub fn vertical_projection(&self, x: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(w.len());
        for e in self.vertical_frame(x) {
            out += &e * self.parent.inner(x, &e, w);
        }
        out
    }
}

/// Hopf map `S^3(1) → S^2(1/2)`.
pub fn hopf_map(x: &DVector<f64>) -> DVector<f64> {
    let (a, b, c, d) = (x[0], x[1], x[2], x[3]);
    // z = a + ib, w = c + id; (|z|² − |w|², 2 z w̄) / 2
    DVector::from_column_slice(&[
        0.5 * (a * a + b * b - c * c - d * d),
        a * c + b * d,
        b * c - a * d,
    ])
}

/// Result of a horizontality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Horizontality {
    pub horizontal: bool,
    pub max_deviation: f64,
}

/// Checks `|⟨γ'(t), V⟩| < tol` for all vertical frame vectors at all nodes.
pub fn horizontality_check(geodesic: &GeodesicTrace<f64>, foliation: &FoliationSpec, tol: f64) -> Horizontality {
    let space = geodesic.space();
    let mut dev: f64 = 0.0;
    for k in 0..geodesic.len() {
        let x = geodesic.position(k);
        let v = geodesic.velocity(k);
        for e in foliation.vertical_frame(x) {
            dev = dev.max(space.inner(x, &e, v).abs());
        }
    }
    Horizontality {
        horizontal: dev < tol,
        max_deviation: dev,
    }
}

/// A crossing of a singular leaf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularCrossing {
    pub time: f64,
    pub leaf_dim: usize,
    pub drop: usize,
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
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

/// Times in `(0, T)` where the geodesic meets a singular leaf.
pub fn singular_crossings(geodesic: &GeodesicTrace<f64>, foliation: &FoliationSpec) -> Result<Vec<SingularCrossing>> {
    let n = geodesic.len();
    let times = geodesic.times();
    let dt = times[1] - times[0];
    let regular = foliation.leaf_dim(geodesic.position(0));
    let mut out = Vec::new();
    if let Some(dist) = &foliation.stratum_distance {
        let d: Vec<f64> = (0..n).map(|k| dist(geodesic.position(k))).collect();
        let speed = geodesic.speed(0);
        for k in 1..n - 1 {
            if !(d[k] <= d[k - 1] && d[k] < d[k + 1]) || d[k] > 2.0 * dt * speed {
                continue;
            }
            let t = golden_min(|t| dist(&geodesic.eval_at(t).0), times[k - 1], times[k + 1], 1e-12);
            let ld = foliation.leaf_dim(&geodesic.eval_at(t).0);
            if ld >= regular {
                continue;
            }
            let before = foliation.leaf_dim(geodesic.position(k - 1));
            let after = foliation.leaf_dim(geodesic.position(k + 1));
            if before != regular || after != regular {
                return Err(Error::Precondition(format!(
                    "non-transversal crossing of a singular leaf near t = {t}"
                )));
            }
            out.push(SingularCrossing {
                time: t,
                leaf_dim: ld,
                drop: regular - ld,
            });
        }
    } else {
        for k in 1..n - 1 {
            let ld = foliation.leaf_dim(geodesic.position(k));
            if ld < regular {
                out.push(SingularCrossing {
                    time: times[k],
                    leaf_dim: ld,
                    drop: regular - ld,
                });
            }
        }
    }
    Ok(out)
}

fn require_regular_horizontal(geodesic: &GeodesicTrace<f64>, foliation: &FoliationSpec, both_ends: bool) -> Result<()> {
    let reg = foliation.regular_dim();
    if foliation.leaf_dim(geodesic.position(0)) != reg
        || (both_ends && foliation.leaf_dim(geodesic.endpoint()) != reg)
    {
        return Err(Error::Precondition("geodesic endpoint on a singular leaf".into()));
    }
    let h = horizontality_check(geodesic, foliation, 1e-6);
    if !h.horizontal {
        return Err(Error::Precondition(format!(
            "geodesic is not horizontal (deviation {:e})",
            h.max_deviation
        )));
    }
    Ok(())
}

/// Crossing number: total leaf-dimension drop over singular crossings.
pub fn crossing_number(geodesic: &GeodesicTrace<f64>, foliation: &FoliationSpec) -> Result<usize> {
    require_regular_horizontal(geodesic, foliation, true)?;
    Ok(singular_crossings(geodesic, foliation)?.iter().map(|c| c.drop).sum())
}

/// Vertical Jacobi fields along a horizontal geodesic: Killing generators
/// restricted to `γ`, reduced to an independent set of size `d(γ)`.
pub fn vertical_jacobi_basis(geodesic: &GeodesicTrace<f64>, foliation: &FoliationSpec) -> Result<JacobiBasisTrace<f64>> {
    require_regular_horizontal(geodesic, foliation, false)?;
    let space = geodesic.space();
    let p = geodesic.position(0);
    let v = geodesic.velocity(0);
    let d = foliation.leaf_dim(p);
    let na = space.ambient_dim();
    // greedy independent subset by values at the regular start point
    let mut chosen: Vec<&KillingField> = Vec::new();
    let mut ortho: Vec<DVector<f64>> = Vec::new();
    for k in foliation.killing_generators() {
        let x = k.at(p);
        let mut r = x.clone();
        for e in &ortho {
            r -= e * e.dot(&r);
        }
        if r.norm() > 1e-8 * x.norm().max(1.0) {
            ortho.push(&r / r.norm());
            chosen.push(k);
        }
        if chosen.len() == d {
            break;
        }
    }
    if chosen.len() < d {
        return Err(Error::Construction(format!(
            "foliation '{}' provides {} independent generators, need {d}",
            foliation.label(),
            chosen.len()
        )));
    }
    let seeds: Vec<JacobiSeed<f64>> = chosen
        .iter()
        .enumerate()
        .map(|(i, k)| {
            let x = k.at(p);
            JacobiSeed {
                kind: SeedKind::Custom(i),
                derivative: space.covariant_from_coordinate(p, v, &x, &k.along(v)),
                value: x,
            }
        })
        .collect();
    let mut values = Vec::with_capacity(geodesic.len());
    let mut rates = Vec::with_capacity(geodesic.len());
    for n in 0..geodesic.len() {
        let x = geodesic.position(n);
        let xd = geodesic.velocity(n);
        let mut jm = DMatrix::zeros(na, d);
        let mut dm = DMatrix::zeros(na, d);
        for (i, k) in chosen.iter().enumerate() {
            jm.set_column(i, &k.at(x));
            dm.set_column(i, &k.along(xd));
        }
        values.push(jm);
        rates.push(dm);
    }
    let basis = JacobiBasisTrace::from_samples(geodesic.clone(), seeds, values, rates)?;
    let res = basis.jacobi_residual();
    if res > 1e-6 {
        return Err(Error::Construction(format!("generator restriction is not a Jacobi field (residual {res:e})")));
    }
    for n in (0..geodesic.len()).step_by(16) {
        let x = geodesic.position(n);
        if foliation.leaf_dim(x) != d || d == 0 {
            continue;
        }
        let span = range_basis(&basis.value(n), 1e-10);
        let frame = linalg::columns(na, &foliation.vertical_frame(x));
        let angle = max_principal_angle(&span, &frame);
        if angle > 1e-8 {
            return Err(Error::Construction(format!(
                "generators do not span the leaf at t = {} (angle {angle:e})",
                geodesic.times()[n]
            )));
        }
    }
    Ok(basis)
}

/// Vertical index with its focal records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerticalIndex {
    pub index: usize,
    pub records: Vec<FocalRecord>,
}

/// `ind_W`: focal multiplicities of the vertical Jacobi space on `(0, T)`.
pub fn w_focal_index(geodesic: &GeodesicTrace<f64>, foliation: &FoliationSpec, opts: &FocalOptions) -> Result<VerticalIndex> {
    let basis = vertical_jacobi_basis(geodesic, foliation)?;
    let horizon = geodesic.horizon();
    let records = detect_focal(&basis, horizon, opts)?;
    Ok(VerticalIndex {
        index: morse_index(&records, horizon),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic::integrate_geodesic;
    use std::f64::consts::PI;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn radial_line_is_horizontal() {
        let f = FoliationSpec::concentric_spheres(3);
        let g = integrate_geodesic(f.parent(), &v(&[-1.0, 0.0, 0.0]), &v(&[1.0, 0.0, 0.0]), 2.0, 1e-12).unwrap();
        let h = horizontality_check(&g, &f, 1e-10);
        assert!(h.horizontal && h.max_deviation < 1e-10);
        assert_eq!(crossing_number(&g, &f).unwrap(), 2);
        let w = w_focal_index(&g, &f, &FocalOptions::default()).unwrap();
        assert_eq!(w.index, 2);
        assert!((w.records[0].time - 1.0).abs() < 1e-8);
    }

    #[test]
    fn concentric_circles_crossing() {
        let f = FoliationSpec::concentric_circles();
        let g = integrate_geodesic(f.parent(), &v(&[0.0, -1.0]), &v(&[0.0, 1.0]), 2.0, 1e-12).unwrap();
        assert_eq!(crossing_number(&g, &f).unwrap(), 1);
        assert_eq!(w_focal_index(&g, &f, &FocalOptions::default()).unwrap().index, 1);
    }

    #[test]
    fn hopf_vertical_and_horizontal_great_circles() {
        let f = FoliationSpec::hopf();
        let p = v(&[1.0, 0.0, 0.0, 0.0]);
        let vert = integrate_geodesic(f.parent(), &p, &complex_i(&p), 1.0, 1e-12).unwrap();
        assert!(!horizontality_check(&vert, &f, 1e-8).horizontal);
        let hor = integrate_geodesic(f.parent(), &p, &v(&[0.0, 0.0, 1.0, 0.0]), 2.0 * PI, 1e-12).unwrap();
        let h = horizontality_check(&hor, &f, 1e-8);
        assert!(h.horizontal, "{h:?}");
        assert_eq!(crossing_number(&hor, &f).unwrap(), 0);
        let b = vertical_jacobi_basis(&hor, &f).unwrap();
        assert_eq!(b.count(), 1);
        for k in (0..b.len()).step_by(200) {
            assert!((b.value(k).norm() - 1.0).abs() < 1e-9);
        }
        assert_eq!(w_focal_index(&hor, &f, &FocalOptions::default()).unwrap().index, 0);
    }

    #[test]
    fn rotation_fields_vanish_at_origin() {
        let f = FoliationSpec::concentric_spheres(3);
        let g = integrate_geodesic(f.parent(), &v(&[0.0, -0.6, -0.8]), &v(&[0.0, 0.6, 0.8]), 2.0, 1e-12).unwrap();
        let b = vertical_jacobi_basis(&g, &f).unwrap();
        assert_eq!(b.count(), 2);
        let k = g.nearest_node(1.0);
        assert!(b.value(k).norm() < 1e-12);
    }

    #[test]
    fn point_foliation_has_empty_basis() {
        let f = FoliationSpec::points(RiemannianSpace::round_sphere(2, 1.0));
        let g = integrate_geodesic(f.parent(), &v(&[0.0, 0.0, 1.0]), &v(&[1.0, 0.0, 0.0]), 1.0, 1e-12).unwrap();
        assert_eq!(vertical_jacobi_basis(&g, &f).unwrap().count(), 0);
        assert_eq!(w_focal_index(&g, &f, &FocalOptions::default()).unwrap().index, 0);
    }

    #[test]
    fn endpoint_on_singular_leaf_is_rejected() {
        let f = FoliationSpec::concentric_spheres(3);
        let g = integrate_geodesic(f.parent(), &v(&[-1.0, 0.0, 0.0]), &v(&[1.0, 0.0, 0.0]), 1.0, 1e-12).unwrap();
        assert!(matches!(crossing_number(&g, &f), Err(Error::Precondition(_))));
    }

    #[test]
    fn circles_times_line_leaves() {
        let f = FoliationSpec::circles_times_line();
        let x = v(&[1.0, 0.0, 0.3]);
        assert_eq!(f.leaf_dim(&x), 1);
        assert_eq!(f.leaf_dim(&v(&[0.0, 0.0, 0.3])), 0);
        let frame = f.vertical_frame(&x);
        assert_eq!(frame.len(), 1);
        assert!((frame[0].dot(&v(&[0.0, 1.0, 0.0])).abs() - 1.0).abs() < 1e-12);
        for k in f.killing_generators() {
            let r = k.at(&x) - f.vertical_projection(&x, &k.at(&x));
            assert!(r.norm() < 1e-9);
        }
    }
}
