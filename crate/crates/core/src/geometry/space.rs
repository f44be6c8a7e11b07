//! Riemannian spaces: flat and round spaces in their standard embeddings,
//! metrics given in a single chart, and Riemannian products.
//!
//! Embedded kinds use ambient coordinates for points and tangent vectors;
//! a tangent vector of the round sphere is an ambient vector orthogonal to
//! the base point. Chart-metric kinds use chart coordinates throughout.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::chart::{ChartMetric, FiniteDifference, MetricFn};
use super::linalg;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tolerance on the sphere constraint `||p| - r|` for accepted points.
pub const POINT_TOLERANCE: f64 = 1e-9;

/// Tolerance on the linear tangency constraint for accepted tangent vectors.
pub const TANGENT_TOLERANCE: f64 = 1e-8;

#[derive(Clone)]
pub enum SpaceKind<T: Real> {
    Euclidean { dim: usize },
    RoundSphere { dim: usize, radius: T },
    Chart(ChartMetric<T>),
    Product(Box<RiemannianSpace<T>>, Box<RiemannianSpace<T>>),
}

#[derive(Clone)]
pub struct RiemannianSpace<T: Real> {
    kind: SpaceKind<T>,
}

impl<T: Real> fmt::Debug for RiemannianSpace<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SpaceKind::Euclidean { dim } => write!(f, "Euclidean({dim})"),
            SpaceKind::RoundSphere { dim, radius } => write!(f, "RoundSphere({dim}, r={radius})"),
            SpaceKind::Chart(c) => write!(f, "{c:?}"),
            SpaceKind::Product(a, b) => write!(f, "Product({a:?}, {b:?})"),
        }
    }
}

impl<T: Real> RiemannianSpace<T> {
    pub fn euclidean(dim: usize) -> Self {
        Self {
            kind: SpaceKind::Euclidean { dim },
        }
    }

    /// Round sphere `S^dim(radius)` embedded in `R^(dim+1)`.
    pub fn round_sphere(dim: usize, radius: T) -> Self {
        Self {
            kind: SpaceKind::RoundSphere { dim, radius },
        }
    }

    pub fn chart_metric(dim: usize, metric: MetricFn<T>) -> Self {
        Self {
            kind: SpaceKind::Chart(ChartMetric::new(dim, metric)),
        }
    }

    pub fn chart_metric_with_steps(dim: usize, metric: MetricFn<T>, steps: FiniteDifference<T>) -> Self {
        Self {
            kind: SpaceKind::Chart(ChartMetric::new(dim, metric).with_steps(steps)),
        }
    }

    /// The unit 2-sphere in stereographic coordinates, `g = 4/(1+|x|²)² I`.
    pub fn stereographic_sphere() -> Self {
        Self::chart_metric(
            2,
            Arc::new(|x: &DVector<T>| {
                let s = T::one() + x.norm_squared();
                DMatrix::identity(2, 2) * (T::lit(4.0) / (s * s))
            }),
        )
    }

    pub fn product(a: RiemannianSpace<T>, b: RiemannianSpace<T>) -> Self {
        Self {
            kind: SpaceKind::Product(Box::new(a), Box::new(b)),
        }
    }

    pub fn kind(&self) -> &SpaceKind<T> {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        match &self.kind {
            SpaceKind::Euclidean { dim } | SpaceKind::RoundSphere { dim, .. } => *dim,
            SpaceKind::Chart(c) => c.dim,
            SpaceKind::Product(a, b) => a.dimension() + b.dimension(),
        }
    }

    /// Length of the coordinate vectors representing points.
    pub fn ambient_dim(&self) -> usize {
        match &self.kind {
            SpaceKind::Euclidean { dim } => *dim,
            SpaceKind::RoundSphere { dim, .. } => dim + 1,
            SpaceKind::Chart(c) => c.dim,
            SpaceKind::Product(a, b) => a.ambient_dim() + b.ambient_dim(),
        }
    }

    /// True when coordinates are ambient Euclidean coordinates (no chart factor).
    pub fn is_embedded(&self) -> bool {
        match &self.kind {
            SpaceKind::Euclidean { .. } | SpaceKind::RoundSphere { .. } => true,
            SpaceKind::Chart(_) => false,
            SpaceKind::Product(a, b) => a.is_embedded() && b.is_embedded(),
        }
    }

    /// Sectional curvature when the space has constant curvature.
    pub fn constant_curvature(&self) -> Option<T> {
        match &self.kind {
            SpaceKind::Euclidean { .. } => Some(T::zero()),
            SpaceKind::RoundSphere { radius, .. } => Some(T::one() / (*radius * *radius)),
            _ => None,
        }
    }

    fn split(&self, a: &RiemannianSpace<T>, x: &DVector<T>) -> (DVector<T>, DVector<T>) {
        let na = a.ambient_dim();
        (
            x.rows(0, na).into_owned(),
            x.rows(na, x.len() - na).into_owned(),
        )
    }

    fn join(x: DVector<T>, y: DVector<T>) -> DVector<T> {
        let mut out = DVector::zeros(x.len() + y.len());
        out.rows_mut(0, x.len()).copy_from(&x);
        out.rows_mut(x.len(), y.len()).copy_from(&y);
        out
    }

    fn check_len(&self, x: &DVector<T>, what: &str) -> Result<()> {
        if x.len() != self.ambient_dim() {
            return Err(Error::mismatch(self.ambient_dim(), x.len(), what));
        }
        Ok(())
    }

    /// Deviation of `point` from the space's coordinate domain.
    pub fn constraint_residual(&self, point: &DVector<T>) -> T {
        match &self.kind {
            SpaceKind::Euclidean { .. } | SpaceKind::Chart(_) => T::zero(),
            SpaceKind::RoundSphere { radius, .. } => (point.norm() - *radius).abs(),
            SpaceKind::Product(a, b) => {
                let (x, y) = self.split(a, point);
                a.constraint_residual(&x).max(b.constraint_residual(&y))
            }
        }
    }

    pub fn check_point(&self, point: &DVector<T>) -> Result<()> {
        self.check_len(point, "point coordinates")?;
        if point.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("finite coordinates", f64::INFINITY));
        }
        let r = self.constraint_residual(point);
        if r > T::lit(POINT_TOLERANCE) {
            return Err(Error::domain("sphere constraint ||p| - r| < 1e-9", r.to_f64_lossy()));
        }
        Ok(())
    }

    /// Nearest point satisfying the embedding constraint.
    pub fn project_point(&self, point: &DVector<T>) -> DVector<T> {
        match &self.kind {
            SpaceKind::Euclidean { .. } | SpaceKind::Chart(_) => point.clone(),
            SpaceKind::RoundSphere { radius, .. } => point * (*radius / point.norm()),
            SpaceKind::Product(a, b) => {
                let (x, y) = self.split(a, point);
                Self::join(a.project_point(&x), b.project_point(&y))
            }
        }
    }

    /// Orthogonal projection of an ambient vector onto `T_p M`.
    pub fn project_tangent(&self, point: &DVector<T>, v: &DVector<T>) -> DVector<T> {
        match &self.kind {
            SpaceKind::Euclidean { .. } | SpaceKind::Chart(_) => v.clone(),
            SpaceKind::RoundSphere { .. } => {
                let p2 = point.norm_squared();
                v - point * (v.dot(point) / p2)
            }
            SpaceKind::Product(a, b) => {
                let (x, y) = self.split(a, point);
                let (u, w) = self.split(a, v);
                Self::join(a.project_tangent(&x, &u), b.project_tangent(&y, &w))
            }
        }
    }

    pub fn tangent_residual(&self, point: &DVector<T>, v: &DVector<T>) -> T {
        (v - self.project_tangent(point, v)).norm()
    }

    pub fn check_tangent(&self, point: &DVector<T>, v: &DVector<T>) -> Result<()> {
        self.check_len(v, "tangent vector")?;
        let r = self.tangent_residual(point, v);
        let scale = T::one().max(v.norm());
        if r > T::lit(TANGENT_TOLERANCE) * scale {
            return Err(Error::domain("tangency <p, v> = 0", r.to_f64_lossy()));
        }
        Ok(())
    }

    /// Metric inner product of two tangent vectors at `point`.
    pub fn inner(&self, point: &DVector<T>, u: &DVector<T>, w: &DVector<T>) -> T {
        match &self.kind {
            SpaceKind::Euclidean { .. } | SpaceKind::RoundSphere { .. } => u.dot(w),
            SpaceKind::Chart(c) => (u.transpose() * c.metric(point) * w)[(0, 0)],
            SpaceKind::Product(a, b) => {
                let (x, y) = self.split(a, point);
                let (u1, u2) = self.split(a, u);
                let (w1, w2) = self.split(a, w);
                a.inner(&x, &u1, &w1) + b.inner(&y, &u2, &w2)
            }
        }
    }

    pub fn norm(&self, point: &DVector<T>, v: &DVector<T>) -> T {
        self.inner(point, v, v).max(T::zero()).sqrt()
    }

    /// Coordinate basis of `T_p M` (ambient-dim x dim).
    ///
    /// Orthonormal for embedded kinds; the chart coordinate basis otherwise.
    pub fn tangent_basis(&self, point: &DVector<T>) -> DMatrix<T> {
        match &self.kind {
            SpaceKind::Euclidean { dim } | SpaceKind::Chart(ChartMetric { dim, .. }) => {
                DMatrix::identity(*dim, *dim)
            }
            SpaceKind::RoundSphere { dim, .. } => {
                let n = dim + 1;
                let basis = linalg::complete_basis(&[], n, *dim, |a, b| a.dot(b), |v| {
                    self.project_tangent(point, &v)
                });
                linalg::columns(n, &basis)
            }
            SpaceKind::Product(a, b) => {
                let (x, y) = self.split(a, point);
                let ba = a.tangent_basis(&x);
                let bb = b.tangent_basis(&y);
                let mut m = DMatrix::zeros(self.ambient_dim(), self.dimension());
                m.view_mut((0, 0), ba.shape()).copy_from(&ba);
                m.view_mut((ba.nrows(), ba.ncols()), bb.shape()).copy_from(&bb);
                m
            }
        }
    }

    /// Metric matrix at `point` in the basis returned by [`Self::tangent_basis`].
    pub fn metric_at(&self, point: &DVector<T>) -> Result<DMatrix<T>> {
        self.check_point(point)?;
        Ok(self.metric_unchecked(point))
    }

    fn metric_unchecked(&self, point: &DVector<T>) -> DMatrix<T> {
        match &self.kind {
            SpaceKind::Chart(c) => c.metric(point),
            SpaceKind::Product(a, b) => {
                let (x, y) = self.split(a, point);
                let ga = a.metric_unchecked(&x);
                let gb = b.metric_unchecked(&y);
                let n = self.dimension();
                let mut m = DMatrix::zeros(n, n);
                m.view_mut((0, 0), ga.shape()).copy_from(&ga);
                m.view_mut((ga.nrows(), ga.ncols()), gb.shape()).copy_from(&gb);
                m
            }
            _ => {
                let b = self.tangent_basis(point);
                b.transpose() * b
            }
        }
    }

    /// Matrix `F` with `|F v|² = g(v, v)`, mapping coordinates to an
    /// orthonormal frame. Identity for embedded kinds.
    pub fn frame_factor(&self, point: &DVector<T>) -> DMatrix<T> {
        match &self.kind {
            SpaceKind::Euclidean { .. } | SpaceKind::RoundSphere { .. } => {
                DMatrix::identity(self.ambient_dim(), self.ambient_dim())
            }
            SpaceKind::Chart(c) => {
                let g = c.metric(point);
                match g.clone().cholesky() {
                    Some(ch) => ch.l().transpose(),
                    None => DMatrix::identity(c.dim, c.dim),
                }
            }
            SpaceKind::Product(a, b) => {
                let (x, y) = self.split(a, point);
                let fa = a.frame_factor(&x);
                let fb = b.frame_factor(&y);
                let n = self.ambient_dim();
                let mut m = DMatrix::zeros(n, n);
                m.view_mut((0, 0), fa.shape()).copy_from(&fa);
                m.view_mut((fa.nrows(), fa.ncols()), fb.shape()).copy_from(&fb);
                m
            }
        }
    }

    /// Second derivative of a geodesic through `point` with velocity `v`
    /// in coordinates (ambient for embedded kinds).
    pub fn geodesic_accel(&self, point: &DVector<T>, v: &DVector<T>) -> DVector<T> {
        match &self.kind {
            SpaceKind::Euclidean { dim } => DVector::zeros(*dim),
            SpaceKind::RoundSphere { radius, .. } => point * (-v.norm_squared() / (*radius * *radius)),
            SpaceKind::Chart(c) => -c.christoffel(point).contract(v, v),
            SpaceKind::Product(a, b) => {
                let (x, y) = self.split(a, point);
                let (u, w) = self.split(a, v);
                Self::join(a.geodesic_accel(&x, &u), b.geodesic_accel(&y, &w))
            }
        }
    }

    /// Linearization of [`Self::geodesic_accel`] along `(dp, dv)`.
    ///
    /// Solutions of `J'' = accel_jvp(γ, γ', J, J')` with tangent initial data
    /// are exactly the Jacobi fields along `γ`, written in coordinates.
    pub fn accel_jvp(
        &self,
        point: &DVector<T>,
        v: &DVector<T>,
        dp: &DVector<T>,
        dv: &DVector<T>,
    ) -> DVector<T> {
        match &self.kind {
            SpaceKind::Euclidean { dim } => DVector::zeros(*dim),
            SpaceKind::RoundSphere { radius, .. } => {
                let k = T::one() / (*radius * *radius);
                let two = T::lit(2.0);
                -(point * (two * v.dot(dv)) + dp * v.norm_squared()) * k
            }
            SpaceKind::Chart(c) => {
                let (gamma, dgamma) = c.christoffel_with_derivative(point, c.steps.curvature_step);
                let lin = ChartMetric::gamma_derivative_contract(&dgamma, dp, v);
                -(lin + gamma.contract(v, dv) * T::lit(2.0))
            }
            SpaceKind::Product(a, b) => {
                let (x, y) = self.split(a, point);
                let (v1, v2) = self.split(a, v);
                let (p1, p2) = self.split(a, dp);
                let (d1, d2) = self.split(a, dv);
                Self::join(a.accel_jvp(&x, &v1, &p1, &d1), b.accel_jvp(&y, &v2, &p2, &d2))
            }
        }
    }

    /// Symmetric bilinear form `B(u, w)` with `B(v, v) = geodesic_accel(p, v)`.
    pub fn polar_accel(&self, point: &DVector<T>, u: &DVector<T>, w: &DVector<T>) -> DVector<T> {
        let quarter = T::lit(0.25);
        (self.geodesic_accel(point, &(u + w)) - self.geodesic_accel(point, &(u - w))) * quarter
    }

    /// Covariant derivative `∇J` of a field along a curve with velocity `v`,
    /// given its coordinate derivative `jdot`.
    pub fn covariant_from_coordinate(
        &self,
        point: &DVector<T>,
        v: &DVector<T>,
        j: &DVector<T>,
        jdot: &DVector<T>,
    ) -> DVector<T> {
        self.project_tangent(point, &(jdot - self.polar_accel(point, v, j)))
    }

    /// Inverse of [`Self::covariant_from_coordinate`] for tangent fields:
    /// the coordinate derivative whose covariant part is `cov` and which keeps
    /// `J` tangent to first order.
    pub fn coordinate_from_covariant(
        &self,
        point: &DVector<T>,
        v: &DVector<T>,
        j: &DVector<T>,
        cov: &DVector<T>,
    ) -> DVector<T> {
        cov + self.polar_accel(point, v, j)
    }

    /// Restores the linearized constraints on a variation `(J, J')` along a
    /// curve at `point` with velocity `v`.
    pub fn project_variation(
        &self,
        point: &DVector<T>,
        v: &DVector<T>,
        j: &DVector<T>,
        jdot: &DVector<T>,
    ) -> (DVector<T>, DVector<T>) {
        match &self.kind {
            SpaceKind::Euclidean { .. } | SpaceKind::Chart(_) => (j.clone(), jdot.clone()),
            SpaceKind::RoundSphere { .. } => {
                let p2 = point.norm_squared();
                let jp = j - point * (j.dot(point) / p2);
                // d/dt <J, p> = <J', p> + <J, v> must vanish
                let jd = jdot - point * ((jdot.dot(point) + jp.dot(v)) / p2);
                (jp, jd)
            }
            SpaceKind::Product(a, b) => {
                let (x, y) = self.split(a, point);
                let (v1, v2) = self.split(a, v);
                let (j1, j2) = self.split(a, j);
                let (d1, d2) = self.split(a, jdot);
                let (ja, da) = a.project_variation(&x, &v1, &j1, &d1);
                let (jb, db) = b.project_variation(&y, &v2, &j2, &d2);
                (Self::join(ja, jb), Self::join(da, db))
            }
        }
    }

    /// Curvature operator `R(u, w)w`.
    pub fn curvature_operator(&self, point: &DVector<T>, u: &DVector<T>, w: &DVector<T>) -> Result<DVector<T>> {
        self.check_point(point)?;
        self.check_tangent(point, u)?;
        self.check_tangent(point, w)?;
        Ok(self.curvature_unchecked(point, u, w))
    }

    pub(crate) fn curvature_unchecked(&self, point: &DVector<T>, u: &DVector<T>, w: &DVector<T>) -> DVector<T> {
        match &self.kind {
            SpaceKind::Euclidean { dim } => DVector::zeros(*dim),
            SpaceKind::RoundSphere { radius, .. } => {
                let k = T::one() / (*radius * *radius);
                (u * w.dot(w) - w * u.dot(w)) * k
            }
            SpaceKind::Chart(c) => c.curvature(point, u, w, c.steps.curvature_step),
            SpaceKind::Product(a, b) => {
                let (x, y) = self.split(a, point);
                let (u1, u2) = self.split(a, u);
                let (w1, w2) = self.split(a, w);
                Self::join(a.curvature_unchecked(&x, &u1, &w1), b.curvature_unchecked(&y, &u2, &w2))
            }
        }
    }

    /// Chart-metric curvature with an explicit finite-difference step.
    pub fn chart_curvature_with_step(&self, point: &DVector<T>, u: &DVector<T>, w: &DVector<T>, step: T) -> Option<DVector<T>> {
        match &self.kind {
            SpaceKind::Chart(c) => Some(c.curvature(point, u, w, step)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn flat_metric_is_identity() {
        let s = RiemannianSpace::<f64>::euclidean(3);
        let g = s.metric_at(&v(&[0.3, -1.0, 2.0])).unwrap();
        assert_eq!(g, DMatrix::identity(3, 3));
    }

    #[test]
    fn sphere_metric_in_orthonormal_frame() {
        let s = RiemannianSpace::<f64>::round_sphere(2, 1.0);
        let g = s.metric_at(&v(&[0.0, 0.0, 1.0])).unwrap();
        assert!((g - DMatrix::identity(2, 2)).abs().max() < 1e-14);
    }

    #[test]
    fn stereographic_metric_at_origin() {
        let s = RiemannianSpace::<f64>::stereographic_sphere();
        let g = s.metric_at(&v(&[0.0, 0.0])).unwrap();
        assert!((g - DMatrix::identity(2, 2) * 4.0).abs().max() < 1e-14);
    }

    #[test]
    fn off_sphere_point_is_rejected_with_residual() {
        let s = RiemannianSpace::<f64>::round_sphere(2, 1.0);
        match s.metric_at(&v(&[0.0, 0.0, 1.1])) {
            Err(Error::Domain { residual, constraint }) => {
                assert!((residual - 0.1).abs() < 1e-12);
                assert!(constraint.contains("sphere"));
            }
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn flat_curvature_vanishes() {
        let s = RiemannianSpace::<f64>::euclidean(4);
        let r = s
            .curvature_operator(&v(&[1.0, 2.0, 3.0, 4.0]), &v(&[1.0, 0.0, 0.0, 1.0]), &v(&[0.0, 1.0, 1.0, 0.0]))
            .unwrap();
        assert_eq!(r.norm(), 0.0);
    }

    #[test]
    fn unit_three_sphere_orthonormal_pair() {
        let s = RiemannianSpace::<f64>::round_sphere(3, 1.0);
        let p = v(&[1.0, 0.0, 0.0, 0.0]);
        let u = v(&[0.0, 1.0, 0.0, 0.0]);
        let w = v(&[0.0, 0.0, 0.0, 1.0]);
        let r = s.curvature_operator(&p, &u, &w).unwrap();
        assert!((r - &u).norm() < 1e-15);
    }

    #[test]
    fn non_tangent_curvature_input_is_rejected() {
        let s = RiemannianSpace::<f64>::round_sphere(2, 1.0);
        let p = v(&[0.0, 0.0, 1.0]);
        assert!(matches!(
            s.curvature_operator(&p, &v(&[0.0, 0.0, 1.0]), &v(&[1.0, 0.0, 0.0])),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn product_mixed_pairs_are_flat() {
        let s = RiemannianSpace::product(
            RiemannianSpace::<f64>::round_sphere(2, 1.0),
            RiemannianSpace::round_sphere(2, 2.0),
        );
        let p = v(&[0.0, 0.0, 1.0, 2.0, 0.0, 0.0]);
        let u = v(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let w = v(&[0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(s.curvature_operator(&p, &u, &w).unwrap().norm() < 1e-15);
        assert_eq!(s.dimension(), 4);
        assert!((s.metric_at(&p).unwrap() - DMatrix::identity(4, 4)).abs().max() < 1e-14);
    }

    #[test]
    fn single_precision_closed_forms() {
        let s = RiemannianSpace::<f32>::round_sphere(2, 2.0);
        let p = DVector::from_column_slice(&[0.0f32, 0.0, 2.0]);
        let u = DVector::from_column_slice(&[1.0f32, 0.0, 0.0]);
        let w = DVector::from_column_slice(&[0.0f32, 1.0, 0.0]);
        let r = s.curvature_operator(&p, &u, &w).unwrap();
        assert!((r[0] - 0.25).abs() < 1e-6);
    }
}
