//! Jacobi fields along geodesics, in particular the Lagrangian family of
//! L-Jacobi fields along a normal geodesic of a submanifold.
//!
//! Fields are integrated as solutions of the linearized geodesic equation in
//! coordinates, so `(J, J')` stored per node are coordinate derivatives;
//! covariant derivatives and frame-normalized matrices are derived on demand.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geodesic::{hermite, locate, GeodesicTrace, DEFAULT_TOLERANCE};
use crate::geometry::{linalg, NormalVector, RiemannianSpace, SpaceKind, SubmanifoldPatch};
use crate::ode;
use crate::scalar::Real;

/// How a basis field was seeded at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedKind {
    /// `J(0) = e_i`, `∇J(0) = -S_v e_i`.
    Tangent(usize),
    /// `J(0) = 0`, `∇J(0) = n_j ⊥ v`.
    Normal(usize),
    /// Caller-supplied initial data.
    Custom(usize),
}

/// Initial data of one Jacobi field (covariant derivative).
#[derive(Debug, Clone)]
pub struct JacobiSeed<T: Real> {
    pub kind: SeedKind,
    pub value: DVector<T>,
    pub derivative: DVector<T>,
}

/// A family of Jacobi fields along one geodesic, sampled on its grid.
#[derive(Debug, Clone)]
pub struct JacobiBasisTrace<T: Real> {
    geodesic: GeodesicTrace<T>,
    seeds: Vec<JacobiSeed<T>>,
    values: Vec<DMatrix<T>>,
    rates: Vec<DMatrix<T>>,
}

impl<T: Real> JacobiBasisTrace<T> {
    /// Assembles a trace from sampled coordinate values and derivatives of
    /// known Jacobi fields (e.g. Killing fields restricted to a geodesic).
    pub fn from_samples(
        geodesic: GeodesicTrace<T>,
        seeds: Vec<JacobiSeed<T>>,
        values: Vec<DMatrix<T>>,
        rates: Vec<DMatrix<T>>,
    ) -> Result<Self> {
        if values.len() != geodesic.len() || rates.len() != geodesic.len() {
            return Err(Error::mismatch(geodesic.len(), values.len(), "samples per node"));
        }
        if values.iter().chain(&rates).any(|m| m.ncols() != seeds.len()) {
            return Err(Error::mismatch(seeds.len(), values[0].ncols(), "fields per node"));
        }
        Ok(Self {
            geodesic,
            seeds,
            values,
            rates,
        })
    }

    pub fn geodesic(&self) -> &GeodesicTrace<T> {
        &self.geodesic
    }

    pub fn space(&self) -> &RiemannianSpace<T> {
        self.geodesic.space()
    }

    pub fn seeds(&self) -> &[JacobiSeed<T>] {
        &self.seeds
    }

    /// Number of basis fields.
    pub fn count(&self) -> usize {
        self.seeds.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn times(&self) -> &[T] {
        self.geodesic.times()
    }

    /// Coordinate values, one column per field.
    pub fn coordinate_value(&self, k: usize) -> &DMatrix<T> {
        &self.values[k]
    }

    /// Coordinate derivatives `J'`.
    pub fn coordinate_rate(&self, k: usize) -> &DMatrix<T> {
        &self.rates[k]
    }

    /// Covariant derivatives in coordinates.
    pub fn coordinate_covariant(&self, k: usize) -> DMatrix<T> {
        let x = self.geodesic.position(k);
        let v = self.geodesic.velocity(k);
        let mut out = DMatrix::zeros(self.values[k].nrows(), self.count());
        for a in 0..self.count() {
            let j = self.values[k].column(a).into_owned();
            let jd = self.rates[k].column(a).into_owned();
            out.set_column(a, &self.space().covariant_from_coordinate(x, v, &j, &jd));
        }
        out
    }

    /// Values in an orthonormal frame: singular values of this matrix are
    /// metric-invariant.
    pub fn value(&self, k: usize) -> DMatrix<T> {
        self.space().frame_factor(self.geodesic.position(k)) * &self.values[k]
    }

    /// Covariant derivatives in an orthonormal frame.
    pub fn covariant(&self, k: usize) -> DMatrix<T> {
        self.space().frame_factor(self.geodesic.position(k)) * self.coordinate_covariant(k)
    }

    /// Frame-normalized coordinate derivative `F J'`.
    pub fn rate(&self, k: usize) -> DMatrix<T> {
        self.space().frame_factor(self.geodesic.position(k)) * &self.rates[k]
    }

    fn second_derivative(&self, k: usize) -> DMatrix<T> {
        let x = self.geodesic.position(k);
        let v = self.geodesic.velocity(k);
        let mut out = DMatrix::zeros(self.values[k].nrows(), self.count());
        for a in 0..self.count() {
            let j = self.values[k].column(a).into_owned();
            let jd = self.rates[k].column(a).into_owned();
            out.set_column(a, &self.space().accel_jvp(x, v, &j, &jd));
        }
        out
    }

    /// Coordinate `(J, J')` at an arbitrary time by Hermite interpolation.
    pub fn coordinate_at(&self, t: T) -> (DMatrix<T>, DMatrix<T>) {
        let times = self.times();
        let (k, s) = locate(times, t);
        let dt = times[k + 1] - times[k];
        let (j, _) = hermite(&self.values[k], &self.rates[k], &self.values[k + 1], &self.rates[k + 1], s, dt);
        let a0 = self.second_derivative(k);
        let a1 = self.second_derivative(k + 1);
        let (jd, _) = hermite(&self.rates[k], &a0, &self.rates[k + 1], &a1, s, dt);
        (j, jd)
    }

    /// Frame-normalized `(J, J')` at an arbitrary time.
    pub fn eval_at(&self, t: T) -> (DMatrix<T>, DMatrix<T>) {
        let (x, _) = self.geodesic.eval_at(t);
        let f = self.space().frame_factor(&x);
        let (j, jd) = self.coordinate_at(t);
        (&f * j, f * jd)
    }

    /// The fields `J C` for a coefficient matrix `C` (count x r).
    pub fn combine(&self, coeffs: &DMatrix<T>) -> Result<Self> {
        if coeffs.nrows() != self.count() {
            return Err(Error::mismatch(self.count(), coeffs.nrows(), "combination coefficients"));
        }
        let seeds = (0..coeffs.ncols())
            .map(|c| {
                let mut value = DVector::zeros(self.values[0].nrows());
                let mut derivative = DVector::zeros(self.values[0].nrows());
                for (a, s) in self.seeds.iter().enumerate() {
                    value += &s.value * coeffs[(a, c)];
                    derivative += &s.derivative * coeffs[(a, c)];
                }
                JacobiSeed {
                    kind: SeedKind::Custom(c),
                    value,
                    derivative,
                }
            })
            .collect();
        Ok(Self {
            geodesic: self.geodesic.clone(),
            seeds,
            values: self.values.iter().map(|m| m * coeffs).collect(),
            rates: self.rates.iter().map(|m| m * coeffs).collect(),
        })
    }

    /// Subfamily with the given columns.
    pub fn select(&self, cols: &[usize]) -> Result<Self> {
        let mut c = DMatrix::zeros(self.count(), cols.len());
        for (i, &a) in cols.iter().enumerate() {
            if a >= self.count() {
                return Err(Error::mismatch(self.count(), a + 1, "selected column"));
            }
            c[(a, i)] = T::one();
        }
        let mut out = self.combine(&c)?;
        for (i, &a) in cols.iter().enumerate() {
            out.seeds[i].kind = self.seeds[a].kind;
        }
        Ok(out)
    }

    /// Matrix of pairings `ω(J_a, J_b) = ⟨∇J_a, J_b⟩ − ⟨J_a, ∇J_b⟩` at node `k`.
    pub fn symplectic_matrix(&self, k: usize) -> DMatrix<T> {
        let v = self.value(k);
        let d = self.covariant(k);
        d.transpose() * &v - v.transpose() * d
    }

    /// Largest change of any pairing along the trace.
    pub fn symplectic_drift(&self) -> T {
        let w0 = self.symplectic_matrix(0);
        (0..self.len())
            .map(|k| (self.symplectic_matrix(k) - &w0).abs().max())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Largest norm of `∇²J + R(J, γ')γ'` over interior nodes, with `∇²J`
    /// re-derived by a five-point stencil of `∇J`.
    pub fn jacobi_residual(&self) -> T {
        let stride = 4;
        let n = self.len();
        if n <= 4 * stride {
            return T::zero();
        }
        let cov: Vec<DMatrix<T>> = (0..n).map(|k| self.coordinate_covariant(k)).collect();
        let times = self.times();
        let h = times[stride] - times[0];
        let twelve_h = T::lit(12.0) * h;
        let eight = T::lit(8.0);
        let space = self.space();
        let mut worst = T::zero();
        for k in (2 * stride..n - 2 * stride).step_by(stride) {
            let x = self.geodesic.position(k);
            let v = self.geodesic.velocity(k);
            let dd = (&cov[k - 2 * stride] - &cov[k + 2 * stride] + (&cov[k + stride] - &cov[k - stride]) * eight)
                / twelve_h;
            for a in 0..self.count() {
                let j = self.values[k].column(a).into_owned();
                let dj = cov[k].column(a).into_owned();
                let ddj = space.covariant_from_coordinate(x, v, &dj, &dd.column(a).into_owned());
                let r = ddj + space.curvature_unchecked(x, &j, v);
                worst = worst.max(space.norm(x, &r));
            }
        }
        worst
    }
}

fn jacobi_rhs<T: Real>(space: &RiemannianSpace<T>, na: usize, m: usize, y: &[T], dy: &mut [T]) {
    match space.kind() {
        SpaceKind::Euclidean { .. } => {
            for a in 0..=m {
                let o = 2 * a * na;
                dy[o..o + na].copy_from_slice(&y[o + na..o + 2 * na]);
                dy[o + na..o + 2 * na].fill(T::zero());
            }
            return;
        }
        SpaceKind::RoundSphere { radius, .. } => {
            // allocation-free form of geodesic_accel / accel_jvp
            let k = T::one() / (*radius * *radius);
            let (x, v) = (&y[..na], &y[na..2 * na]);
            let vv = v.iter().fold(T::zero(), |s, &c| s + c * c);
            for a in 0..=m {
                let o = 2 * a * na;
                dy[o..o + na].copy_from_slice(&y[o + na..o + 2 * na]);
                if a == 0 {
                    for i in 0..na {
                        dy[na + i] = -k * vv * x[i];
                    }
                } else {
                    let (j, jd) = (&y[o..o + na], &y[o + na..o + 2 * na]);
                    let vjd = v.iter().zip(jd).fold(T::zero(), |s, (&p, &q)| s + p * q);
                    let two = T::lit(2.0);
                    for i in 0..na {
                        dy[o + na + i] = -k * (two * vjd * x[i] + vv * j[i]);
                    }
                }
            }
            return;
        }
        _ => {}
    }
    let x = DVector::from_column_slice(&y[..na]);
    let v = DVector::from_column_slice(&y[na..2 * na]);
    dy[..na].copy_from_slice(&y[na..2 * na]);
    dy[na..2 * na].copy_from_slice(space.geodesic_accel(&x, &v).as_slice());
    for a in 0..m {
        let o = 2 * na + 2 * a * na;
        let j = DVector::from_column_slice(&y[o..o + na]);
        let jd = DVector::from_column_slice(&y[o + na..o + 2 * na]);
        dy[o..o + na].copy_from_slice(&y[o + na..o + 2 * na]);
        dy[o + na..o + 2 * na].copy_from_slice(space.accel_jvp(&x, &v, &j, &jd).as_slice());
    }
}

fn initial_state<T: Real>(
    space: &RiemannianSpace<T>,
    point: &DVector<T>,
    velocity: &DVector<T>,
    seeds: &[JacobiSeed<T>],
) -> Result<Vec<T>> {
    let na = space.ambient_dim();
    let mut y: Vec<T> = point.iter().chain(velocity.iter()).copied().collect();
    for s in seeds {
        if s.value.len() != na || s.derivative.len() != na {
            return Err(Error::mismatch(na, s.value.len(), "Jacobi seed length"));
        }
        space.check_tangent(point, &s.value)?;
        space.check_tangent(point, &s.derivative)?;
        let jd = space.coordinate_from_covariant(point, velocity, &s.value, &s.derivative);
        y.extend(s.value.iter().copied());
        y.extend(jd.iter().copied());
    }
    Ok(y)
}

/// Integrates the geodesic through `(point, velocity)` together with the
/// Jacobi fields seeded by `seeds`, on `grid`.
pub fn propagate_jacobi<T: Real>(
    space: &RiemannianSpace<T>,
    point: &DVector<T>,
    velocity: &DVector<T>,
    seeds: Vec<JacobiSeed<T>>,
    grid: &[T],
    tolerance: T,
    origin: Option<NormalVector<T>>,
) -> Result<JacobiBasisTrace<T>> {
    space.check_point(point)?;
    space.check_tangent(point, velocity)?;
    let na = space.ambient_dim();
    let m = seeds.len();
    let y0 = initial_state(space, point, velocity, &seeds)?;
    let rhs = |_t: T, y: &[T], dy: &mut [T]| jacobi_rhs(space, na, m, y, dy);
    let project = |y: &mut [T]| {
        let x = space.project_point(&DVector::from_column_slice(&y[..na]));
        let v = space.project_tangent(&x, &DVector::from_column_slice(&y[na..2 * na]));
        for a in 0..m {
            let o = 2 * na + 2 * a * na;
            let j = DVector::from_column_slice(&y[o..o + na]);
            let jd = DVector::from_column_slice(&y[o + na..o + 2 * na]);
            let (j, jd) = space.project_variation(&x, &v, &j, &jd);
            y[o..o + na].copy_from_slice(j.as_slice());
            y[o + na..o + 2 * na].copy_from_slice(jd.as_slice());
        }
        y[..na].copy_from_slice(x.as_slice());
        y[na..2 * na].copy_from_slice(v.as_slice());
    };
    let (states, steps) = ode::integrate_on_grid(rhs, &y0, grid, tolerance, project)?;
    let mut positions = Vec::with_capacity(states.len());
    let mut velocities = Vec::with_capacity(states.len());
    let mut values = Vec::with_capacity(states.len());
    let mut rates = Vec::with_capacity(states.len());
    for s in &states {
        positions.push(DVector::from_column_slice(&s[..na]));
        velocities.push(DVector::from_column_slice(&s[na..2 * na]));
        let mut jm = DMatrix::zeros(na, m);
        let mut dm = DMatrix::zeros(na, m);
        for a in 0..m {
            let o = 2 * na + 2 * a * na;
            jm.set_column(a, &DVector::from_column_slice(&s[o..o + na]));
            dm.set_column(a, &DVector::from_column_slice(&s[o + na..o + 2 * na]));
        }
        values.push(jm);
        rates.push(dm);
    }
    let geodesic = GeodesicTrace::from_parts(space.clone(), grid.to_vec(), positions, velocities, steps, origin);
    Ok(JacobiBasisTrace {
        geodesic,
        seeds,
        values,
        rates,
    })
}

/// Endpoint of the geodesic at time 1 and the coordinate values `J(1)`,
/// with free adaptive stepping.
pub fn jacobi_endpoint<T: Real>(
    space: &RiemannianSpace<T>,
    point: &DVector<T>,
    velocity: &DVector<T>,
    seeds: &[JacobiSeed<T>],
    tolerance: T,
) -> Result<(DVector<T>, DMatrix<T>)> {
    let na = space.ambient_dim();
    let m = seeds.len();
    let y0 = initial_state(space, point, velocity, seeds)?;
    let y = ode::integrate_to(
        |_t: T, y: &[T], dy: &mut [T]| jacobi_rhs(space, na, m, y, dy),
        &y0,
        T::zero(),
        T::one(),
        tolerance,
    )?;
    let x = space.project_point(&DVector::from_column_slice(&y[..na]));
    let mut jm = DMatrix::zeros(na, m);
    for a in 0..m {
        let o = 2 * na + 2 * a * na;
        jm.set_column(a, &space.project_tangent(&x, &DVector::from_column_slice(&y[o..o + na])));
    }
    Ok((x, jm))
}

/// Initial data of the L-Jacobi basis along the normal geodesic of `normal`.
///
/// Tangent-seeded fields `J(0) = e_i, ∇J(0) = −S_v e_i` come first, then
/// normal-seeded fields `J(0) = 0, ∇J(0) = n_j` with `n_j ⊥ v`.
pub fn l_jacobi_seeds<T: Real>(patch: &SubmanifoldPatch<T>, normal: &NormalVector<T>) -> Result<Vec<JacobiSeed<T>>> {
    let u = &normal.param;
    if u.len() != patch.param_dim() {
        return Err(Error::mismatch(patch.param_dim(), u.len(), "normal vector parameter"));
    }
    if normal.coeffs.len() != patch.codim() {
        return Err(Error::mismatch(patch.codim(), normal.coeffs.len(), "normal coefficients"));
    }
    let len = normal.length();
    if !(len > T::zero()) {
        return Err(Error::Precondition("L-Jacobi basis needs a non-zero normal vector".into()));
    }
    let e = patch.tangent_frame(u);
    let nf = patch.normal_frame(u);
    let unit = patch.ambient_normal(&normal.scaled(T::one() / len));
    let s = patch.shape_operator(u, &unit)? * len;
    let mut seeds = Vec::with_capacity(patch.parent().dimension() - 1);
    for i in 0..e.ncols() {
        seeds.push(JacobiSeed {
            kind: SeedKind::Tangent(i),
            value: e.column(i).into_owned(),
            derivative: -(&e * s.column(i)),
        });
    }
    // orthonormal complement of v in normal-coefficient space
    let c = patch.codim();
    let mut cands = vec![&normal.coeffs / len];
    cands.extend((0..c).map(|j| {
        let mut x = DVector::zeros(c);
        x[j] = T::one();
        x
    }));
    let basis = linalg::gram_schmidt(&cands, |a, b| a.dot(b), T::lit(1e-8));
    for (j, coef) in basis.iter().skip(1).enumerate() {
        seeds.push(JacobiSeed {
            kind: SeedKind::Normal(j),
            value: DVector::zeros(patch.parent().ambient_dim()),
            derivative: &nf * coef,
        });
    }
    Ok(seeds)
}

/// L-Jacobi basis along a normal geodesic of `patch`.
pub fn jacobi_basis<T: Real>(patch: &SubmanifoldPatch<T>, geodesic: &GeodesicTrace<T>) -> Result<JacobiBasisTrace<T>> {
    let normal = geodesic
        .origin()
        .ok_or_else(|| Error::Precondition("geodesic was not started from a normal vector".into()))?;
    let space = geodesic.space();
    if space.ambient_dim() != patch.parent().ambient_dim() || space.dimension() != patch.parent().dimension() {
        return Err(Error::mismatch(
            patch.parent().dimension(),
            space.dimension(),
            "geodesic space vs patch parent",
        ));
    }
    let p = patch.point(&normal.param);
    let off = (&p - geodesic.position(0)).norm();
    if off > T::lit(1e-9) {
        return Err(Error::domain("geodesic starts at the foot point", off.to_f64_lossy()));
    }
    let seeds = l_jacobi_seeds(patch, normal)?;
    propagate_jacobi(
        space,
        &p,
        geodesic.velocity(0),
        seeds,
        geodesic.times(),
        T::lit(DEFAULT_TOLERANCE),
        Some(normal.clone()),
    )
}

/// Normal geodesic and L-Jacobi basis on `[0, horizon]` in one integration.
pub fn l_jacobi_trace<T: Real>(
    patch: &SubmanifoldPatch<T>,
    normal: &NormalVector<T>,
    horizon: T,
) -> Result<JacobiBasisTrace<T>> {
    let p = patch.point(&normal.param);
    let v = patch.ambient_normal(normal);
    let seeds = l_jacobi_seeds(patch, normal)?;
    let grid = crate::geodesic::output_grid(horizon);
    propagate_jacobi(
        patch.parent(),
        &p,
        &v,
        seeds,
        &grid,
        T::lit(DEFAULT_TOLERANCE),
        Some(normal.clone()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic::normal_geodesic;
    use std::f64::consts::PI;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn point_source_on_two_sphere_is_sine() {
        let s = RiemannianSpace::<f64>::round_sphere(2, 1.0);
        let patch = SubmanifoldPatch::point_patch(s, v(&[0.0, 0.0, 1.0])).unwrap();
        let nv = NormalVector::new(DVector::zeros(0), v(&[1.0, 0.0]));
        let g = normal_geodesic(&patch, &nv, PI, 1e-12).unwrap();
        let b = jacobi_basis(&patch, &g).unwrap();
        assert_eq!(b.count(), 1);
        for k in (0..b.len()).step_by(101) {
            let t = b.times()[k];
            assert!((b.value(k).norm() - t.sin()).abs() < 1e-7);
        }
        assert!(b.value(b.len() - 1).norm() < 1e-7);
        assert!(b.symplectic_drift() < 1e-8);
        assert!(b.jacobi_residual() < 1e-6);
    }

    #[test]
    fn inward_circle_field_is_linear() {
        let c = SubmanifoldPatch::<f64>::sphere_in_euclidean(2, 1.0);
        let nv = NormalVector::new(v(&[0.4]), v(&[1.0]));
        let b = l_jacobi_trace(&c, &nv, 2.0).unwrap();
        assert_eq!(b.count(), 1);
        let e0 = b.value(0).column(0).into_owned();
        for k in (0..b.len()).step_by(77) {
            let t = b.times()[k];
            // flat space: parallel transport is the identity
            assert!((b.value(k).column(0) - &e0 * (1.0 - t)).norm() < 1e-9);
        }
    }

    #[test]
    fn hopf_fiber_rank_drops_at_quarter_period() {
        let p = v(&[1.0, 0.0, 0.0, 0.0]);
        let patch = SubmanifoldPatch::<f64>::hopf_fiber(p).unwrap();
        let nv = NormalVector::new(v(&[0.0]), v(&[1.0, 0.0]));
        let b = l_jacobi_trace(&patch, &nv, 2.0).unwrap();
        assert_eq!(b.count(), 2);
        let k = b.geodesic().nearest_node(PI / 2.0);
        let sv = b.value(k).singular_values();
        assert!(sv.min() < 1e-3);
        // oracle span {iγ(t), sin(t)·iγ'(t)}: every field lies in it
        for k in (0..b.len()).step_by(131) {
            let t = b.times()[k];
            let x = b.geodesic().position(k);
            let xd = b.geodesic().velocity(k);
            let o1 = crate::geometry::complex_i(x);
            let o2 = crate::geometry::complex_i(xd) * t.sin();
            let basis = linalg::columns(4, &[o1, o2]);
            let q = linalg::range_basis(&basis, 1e-12);
            for a in 0..2 {
                let col = b.value(k).column(a).into_owned();
                let res = &col - &q * (q.transpose() * &col);
                assert!(res.norm() < 1e-7, "t={t} residual {}", res.norm());
            }
        }
        assert!(b.symplectic_drift() < 1e-8);
    }

    #[test]
    fn zero_normal_is_rejected() {
        let c = SubmanifoldPatch::<f64>::sphere_in_euclidean(2, 1.0);
        let nv = NormalVector::new(v(&[0.4]), v(&[0.0]));
        assert!(l_jacobi_trace(&c, &nv, 1.0).is_err());
    }

    #[test]
    fn geodesic_without_origin_is_rejected() {
        let s = RiemannianSpace::<f64>::euclidean(2);
        let g = crate::geodesic::integrate_geodesic(&s, &v(&[0.0, 0.0]), &v(&[1.0, 0.0]), 1.0, 1e-12).unwrap();
        let c = SubmanifoldPatch::<f64>::sphere_in_euclidean(2, 1.0);
        assert!(jacobi_basis(&c, &g).is_err());
    }

    #[test]
    fn endpoint_matches_grid_trace() {
        let s = RiemannianSpace::<f64>::round_sphere(3, 1.0);
        let patch = SubmanifoldPatch::point_patch(s.clone(), v(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        let nv = NormalVector::new(DVector::zeros(0), v(&[0.3, 1.1, -0.4]));
        let b = l_jacobi_trace(&patch, &nv, 1.0).unwrap();
        let seeds = l_jacobi_seeds(&patch, &nv).unwrap();
        let (x, j) = jacobi_endpoint(&s, &patch.point(&nv.param), &patch.ambient_normal(&nv), &seeds, 1e-12).unwrap();
        assert!((x - b.geodesic().endpoint()).norm() < 1e-9);
        assert!((j - b.coordinate_value(b.len() - 1)).norm() < 1e-8);
    }
}
