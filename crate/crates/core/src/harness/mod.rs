//! Critical points of endpoint energies, Morse counting and the
//! Morse-Bott / fiber probes.

mod betti;
mod morse;
mod probes;
mod shooting;

pub use betti::{reference_betti, BettiTable};
pub use morse::{morse_polynomial, morse_report, perfectness_verdict, reliable_degree, MorsePolynomial, MorseReport, Verdict};
pub use probes::{
    build_saturated_preimage, fiber_integrability_probe, morse_bott_probe, solution_cloud, FiberProbe, FiberProbeOptions, FiberVerdict,
    MorseBottComponent, MorseBottReport, QuotientSubset,
};
pub use shooting::{shoot_critical_points, CriticalPoint, SeedFailure, ShootingOptions, ShootingReport};

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::geometry::SubmanifoldPatch;
use crate::jacobi::{jacobi_endpoint, JacobiSeed, SeedKind};

/// `exp⊥(N(u)c)` and its derivative in `(u, c)`, columns ordered params then
/// coefficients.
pub(crate) fn endpoint_jacobian(
    patch: &SubmanifoldPatch<f64>,
    u: &DVector<f64>,
    c: &DVector<f64>,
    tol: f64,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let p = patch.point(u);
    let nf = patch.normal_frame(u);
    let v = &nf * c;
    let dphi = patch.param_jacobian(u);
    let dxi = patch.normal_covariant_derivative(u, c);
    let mut seeds = Vec::with_capacity(dphi.ncols() + nf.ncols());
    for a in 0..dphi.ncols() {
        seeds.push(JacobiSeed {
            kind: SeedKind::Custom(a),
            value: dphi.column(a).into_owned(),
            derivative: dxi.column(a).into_owned(),
        });
    }
    for j in 0..nf.ncols() {
        seeds.push(JacobiSeed {
            kind: SeedKind::Custom(dphi.ncols() + j),
            value: DVector::zeros(p.len()),
            derivative: nf.column(j).into_owned(),
        });
    }
    jacobi_endpoint(patch.parent(), &p, &v, &seeds, tol)
}

/// Point of the normal bundle in ambient coordinates: foot point stacked on
/// the ambient normal vector.
pub(crate) fn bundle_point(patch: &SubmanifoldPatch<f64>, u: &DVector<f64>, c: &DVector<f64>) -> DVector<f64> {
    let p = patch.point(u);
    let v = patch.normal_frame(u) * c;
    let mut out = DVector::zeros(2 * p.len());
    out.rows_mut(0, p.len()).copy_from(&p);
    out.rows_mut(p.len(), p.len()).copy_from(&v);
    out
}

/// Derivative of [`bundle_point`] in `(u, c)` by central differences.
pub(crate) fn bundle_differential(patch: &SubmanifoldPatch<f64>, u: &DVector<f64>, c: &DVector<f64>) -> DMatrix<f64> {
    let h = 1e-6;
    let np = u.len();
    let nc = c.len();
    let na = patch.parent().ambient_dim();
    let mut m = DMatrix::zeros(2 * na, np + nc);
    for a in 0..np {
        let mut up = u.clone();
        let mut um = u.clone();
        up[a] += h;
        um[a] -= h;
        m.set_column(a, &((bundle_point(patch, &up, c) - bundle_point(patch, &um, c)) / (2.0 * h)));
    }
    let nf = patch.normal_frame(u);
    for j in 0..nc {
        m.view_mut((na, np + j), (na, 1)).copy_from(&nf.column(j));
    }
    m
}

/// ODE tolerance matched to the current residual.
pub(crate) fn adaptive_tolerance(residual: f64) -> f64 {
    (1e-3 * residual).clamp(1e-12, 1e-6)
}
