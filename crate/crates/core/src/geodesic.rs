//! Geodesic traces and the normal exponential map.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{NormalVector, RiemannianSpace, SubmanifoldPatch};
use crate::ode::{self, StepRecord};
use crate::scalar::Real;

/// Output nodes per unit of the curve parameter.
pub const GRID_NODES_PER_UNIT: usize = 2048;

/// Default per-step error tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Uniform output grid on `[0, horizon]`.
pub fn output_grid<T: Real>(horizon: T) -> Vec<T> {
    let n = ((horizon.to_f64_lossy() * GRID_NODES_PER_UNIT as f64).ceil() as usize).max(16);
    let nn = T::from_usize(n).expect("grid size");
    (0..=n)
        .map(|k| horizon * T::from_usize(k).expect("grid index") / nn)
        .collect()
}

/// Locates `t` on a uniform grid: returns the interval start index and the
/// local coordinate `s ∈ [0, 1]` (values outside extrapolate).
pub(crate) fn locate<T: Real>(times: &[T], t: T) -> (usize, T) {
    let n = times.len() - 1;
    let t0 = times[0];
    let dt = times[1] - times[0];
    let raw = ((t - t0) / dt).to_f64_lossy().floor();
    let k = if raw < 0.0 { 0 } else { (raw as usize).min(n - 1) };
    (k, (t - times[k]) / dt)
}

/// Cubic Hermite value and derivative from endpoint values/derivatives.
pub(crate) fn hermite<T: Real>(
    y0: &DMatrix<T>,
    m0: &DMatrix<T>,
    y1: &DMatrix<T>,
    m1: &DMatrix<T>,
    s: T,
    dt: T,
) -> (DMatrix<T>, DMatrix<T>) {
    let (two, three, four, six) = (T::lit(2.0), T::lit(3.0), T::lit(4.0), T::lit(6.0));
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = two * s3 - three * s2 + T::one();
    let h10 = s3 - two * s2 + s;
    let h01 = -two * s3 + three * s2;
    let h11 = s3 - s2;
    let d00 = six * s2 - six * s;
    let d10 = three * s2 - four * s + T::one();
    let d01 = -six * s2 + six * s;
    let d11 = three * s2 - two * s;
    let val = y0 * h00 + m0 * (h10 * dt) + y1 * h01 + m1 * (h11 * dt);
    let der = (y0 * d00 + y1 * d01) / dt + m0 * d10 + m1 * d11;
    (val, der)
}

fn as_mat<T: Real>(v: &DVector<T>) -> DMatrix<T> {
    DMatrix::from_column_slice(v.len(), 1, v.as_slice())
}

/// A geodesic sampled on a fixed output grid.
#[derive(Debug, Clone)]
pub struct GeodesicTrace<T: Real> {
    space: RiemannianSpace<T>,
    times: Vec<T>,
    positions: Vec<DVector<T>>,
    velocities: Vec<DVector<T>>,
    steps: StepRecord,
    origin: Option<NormalVector<T>>,
}

impl<T: Real> GeodesicTrace<T> {
    pub(crate) fn from_parts(
        space: RiemannianSpace<T>,
        times: Vec<T>,
        positions: Vec<DVector<T>>,
        velocities: Vec<DVector<T>>,
        steps: StepRecord,
        origin: Option<NormalVector<T>>,
    ) -> Self {
        Self {
            space,
            times,
            positions,
            velocities,
            steps,
            origin,
        }
    }

    pub fn space(&self) -> &RiemannianSpace<T> {
        &self.space
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> T {
        *self.times.last().expect("non-empty trace")
    }

    pub fn position(&self, k: usize) -> &DVector<T> {
        &self.positions[k]
    }

    pub fn velocity(&self, k: usize) -> &DVector<T> {
        &self.velocities[k]
    }

    pub fn endpoint(&self) -> &DVector<T> {
        self.positions.last().expect("non-empty trace")
    }

    pub fn steps(&self) -> StepRecord {
        self.steps
    }

    /// Normal vector the geodesic was started from, when patch-sourced.
    pub fn origin(&self) -> Option<&NormalVector<T>> {
        self.origin.as_ref()
    }

    pub fn speed(&self, k: usize) -> T {
        self.space.norm(&self.positions[k], &self.velocities[k])
    }

    /// Largest relative deviation of the speed from its initial value.
    pub fn speed_deviation(&self) -> T {
        let s0 = self.speed(0);
        if s0 <= T::zero() {
            return (0..self.len()).map(|k| self.speed(k)).fold(T::zero(), |a, b| a.max(b));
        }
        (0..self.len())
            .map(|k| (self.speed(k) - s0).abs() / s0)
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn constraint_residual(&self) -> T {
        self.positions
            .iter()
            .map(|p| self.space.constraint_residual(p))
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Position and velocity at an arbitrary time (Hermite interpolation).
    pub fn eval_at(&self, t: T) -> (DVector<T>, DVector<T>) {
        let (k, s) = locate(&self.times, t);
        let dt = self.times[k + 1] - self.times[k];
        let (x0, x1) = (&self.positions[k], &self.positions[k + 1]);
        let (v0, v1) = (&self.velocities[k], &self.velocities[k + 1]);
        let a0 = self.space.geodesic_accel(x0, v0);
        let a1 = self.space.geodesic_accel(x1, v1);
        let (x, _) = hermite(&as_mat(x0), &as_mat(v0), &as_mat(x1), &as_mat(v1), s, dt);
        let (v, _) = hermite(&as_mat(v0), &as_mat(&a0), &as_mat(v1), &as_mat(&a1), s, dt);
        (x.column(0).into_owned(), v.column(0).into_owned())
    }

    /// Index of the node nearest to `t`.
    pub fn nearest_node(&self, t: T) -> usize {
        let (k, s) = locate(&self.times, t);
        if s > T::lit(0.5) {
            (k + 1).min(self.len() - 1)
        } else {
            k
        }
    }
}

/// Integrates the geodesic with initial data `(point, velocity)` on `[0, horizon]`.
pub fn integrate_geodesic<T: Real>(
    space: &RiemannianSpace<T>,
    point: &DVector<T>,
    velocity: &DVector<T>,
    horizon: T,
    tolerance: T,
) -> Result<GeodesicTrace<T>> {
    space.check_point(point)?;
    space.check_tangent(point, velocity)?;
    if !(horizon > T::zero()) {
        return Err(Error::Precondition(format!("horizon must be positive, got {horizon}")));
    }
    let na = space.ambient_dim();
    let grid = output_grid(horizon);
    let y0: Vec<T> = point.iter().chain(velocity.iter()).copied().collect();
    let rhs = |_t: T, y: &[T], dy: &mut [T]| {
        let x = DVector::from_column_slice(&y[..na]);
        let v = DVector::from_column_slice(&y[na..]);
        let a = space.geodesic_accel(&x, &v);
        dy[..na].copy_from_slice(&y[na..]);
        dy[na..].copy_from_slice(a.as_slice());
    };
    let project = |y: &mut [T]| {
        let x = space.project_point(&DVector::from_column_slice(&y[..na]));
        let v = space.project_tangent(&x, &DVector::from_column_slice(&y[na..]));
        y[..na].copy_from_slice(x.as_slice());
        y[na..].copy_from_slice(v.as_slice());
    };
    let (states, steps) = ode::integrate_on_grid(rhs, &y0, &grid, tolerance, project)?;
    let positions = states.iter().map(|s| DVector::from_column_slice(&s[..na])).collect();
    let velocities = states.iter().map(|s| DVector::from_column_slice(&s[na..])).collect();
    Ok(GeodesicTrace::from_parts(space.clone(), grid, positions, velocities, steps, None))
}

/// Geodesic `t ↦ exp(t v)` from the foot point of a normal vector.
pub fn normal_geodesic<T: Real>(
    patch: &SubmanifoldPatch<T>,
    normal: &NormalVector<T>,
    horizon: T,
    tolerance: T,
) -> Result<GeodesicTrace<T>> {
    let p = patch.point(&normal.param);
    let v = patch.ambient_normal(normal);
    let mut trace = integrate_geodesic(patch.parent(), &p, &v, horizon, tolerance)?;
    trace.origin = Some(normal.clone());
    Ok(trace)
}

/// Endpoint of the geodesic with initial data `(point, velocity)` at time 1.
pub fn exp_point<T: Real>(
    space: &RiemannianSpace<T>,
    point: &DVector<T>,
    velocity: &DVector<T>,
    tolerance: T,
) -> Result<DVector<T>> {
    let na = space.ambient_dim();
    let y0: Vec<T> = point.iter().chain(velocity.iter()).copied().collect();
    let y = ode::integrate_to(
        |_t: T, y: &[T], dy: &mut [T]| {
            let x = DVector::from_column_slice(&y[..na]);
            let v = DVector::from_column_slice(&y[na..]);
            let a = space.geodesic_accel(&x, &v);
            dy[..na].copy_from_slice(&y[na..]);
            dy[na..].copy_from_slice(a.as_slice());
        },
        &y0,
        T::zero(),
        T::one(),
        tolerance,
    )?;
    Ok(space.project_point(&DVector::from_column_slice(&y[..na])))
}

/// The normal exponential map `exp⊥(v)`.
pub fn normal_exp<T: Real>(patch: &SubmanifoldPatch<T>, normal: &NormalVector<T>) -> Result<DVector<T>> {
    let p = patch.point(&normal.param);
    let v = patch.ambient_normal(normal);
    exp_point(patch.parent(), &p, &v, T::lit(DEFAULT_TOLERANCE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn straight_line_in_the_plane() {
        let s = RiemannianSpace::<f64>::euclidean(2);
        let g = integrate_geodesic(&s, &v(&[0.0, 0.0]), &v(&[1.0, 0.0]), 3.0, 1e-12).unwrap();
        assert!((g.endpoint() - v(&[3.0, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn great_circle_closes() {
        let s = RiemannianSpace::<f64>::round_sphere(2, 1.0);
        let p = v(&[0.0, 0.0, 1.0]);
        let g = integrate_geodesic(&s, &p, &v(&[0.6, 0.8, 0.0]), 2.0 * PI, 1e-12).unwrap();
        assert!((g.endpoint() - &p).norm() < 1e-7);
        assert!(g.speed_deviation() < 1e-8);
        assert!(g.constraint_residual() < 1e-9);
    }

    #[test]
    fn three_sphere_closed_form() {
        let s = RiemannianSpace::<f64>::round_sphere(3, 1.0);
        let g = integrate_geodesic(&s, &v(&[1.0, 0.0, 0.0, 0.0]), &v(&[0.0, 0.0, 1.0, 0.0]), 3.0, 1e-12).unwrap();
        for k in (0..g.len()).step_by(97) {
            let t = g.times()[k];
            assert!((g.position(k) - v(&[t.cos(), 0.0, t.sin(), 0.0])).norm() < 1e-7);
        }
        let (x, _) = g.eval_at(1.2345);
        assert!((x - v(&[1.2345f64.cos(), 0.0, 1.2345f64.sin(), 0.0])).norm() < 1e-9);
    }

    #[test]
    fn non_positive_horizon_is_rejected() {
        let s = RiemannianSpace::<f64>::euclidean(2);
        assert!(integrate_geodesic(&s, &v(&[0.0, 0.0]), &v(&[1.0, 0.0]), 0.0, 1e-12).is_err());
    }

    #[test]
    fn normal_exp_examples() {
        let h = SubmanifoldPatch::<f64>::hyperplane(3, 5.0);
        let nv = NormalVector::new(v(&[0.5, -1.0]), v(&[2.0]));
        assert!((normal_exp(&h, &nv).unwrap() - v(&[0.5, -1.0, 2.0])).norm() < 1e-12);

        let c = SubmanifoldPatch::<f64>::sphere_in_euclidean(2, 1.0);
        let nv = NormalVector::new(v(&[1.3]), v(&[1.0]));
        assert!(normal_exp(&c, &nv).unwrap().norm() < 1e-12);

        let s = RiemannianSpace::<f64>::round_sphere(2, 1.0);
        let p = v(&[0.0, 0.0, 1.0]);
        let pt = SubmanifoldPatch::point_patch(s, p.clone()).unwrap();
        let nv = NormalVector::new(DVector::zeros(0), v(&[PI, 0.0]));
        assert!((normal_exp(&pt, &nv).unwrap() + &p).norm() < 1e-7);
    }

    #[test]
    fn chart_metric_geodesic_matches_sphere() {
        // the stereographic equator |x| = 1 is a great circle
        let s = RiemannianSpace::<f64>::stereographic_sphere();
        let x0 = v(&[1.0, 0.0]);
        // unit speed in g = I at |x| = 1
        let g = integrate_geodesic(&s, &x0, &v(&[0.0, 1.0]), PI, 1e-11).unwrap();
        assert!((g.endpoint() - v(&[-1.0, 0.0])).norm() < 1e-6);
        assert!(g.speed_deviation() < 1e-8);
    }
}
