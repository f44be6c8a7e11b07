//! Closed-form oracles and random inputs shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use focal_forge::geometry::{NormalVector, RiemannianSpace, SubmanifoldPatch};
use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn dv(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    // Box-Muller keeps the oracle side free of the library's samplers
    DVector::from_fn(n, |_, _| {
        let u: f64 = rng.random_range(1e-12..1.0);
        let v: f64 = rng.random();
        (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
    })
}

pub fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    let g = gaussian(rng, n);
    &g / g.norm()
}

/// Unit vector orthogonal to `x`.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, x: &DVector<f64>) -> DVector<f64> {
    let g = gaussian(rng, x.len());
    let d = x / x.norm();
    let h = &g - &d * d.dot(&g);
    &h / h.norm()
}

/// Point of the unit sphere at arc distance `d` from `p` along `dir ⟂ p`.
pub fn along_great_circle(p: &DVector<f64>, dir: &DVector<f64>, d: f64) -> DVector<f64> {
    p * d.cos() + dir * d.sin()
}

/// Lengths of the geodesics between two points at distance `d` on the unit
/// sphere with energy at most `cap`: `d + 2πj` and `2π(j+1) − d`.
pub fn great_circle_lengths(d: f64, cap: f64) -> Vec<f64> {
    let top = cap.sqrt();
    let mut out = Vec::new();
    for j in 0.. {
        let a = d + 2.0 * PI * j as f64;
        let b = 2.0 * PI * (j as f64 + 1.0) - d;
        if a > top {
            break;
        }
        out.push(a);
        if b <= top {
            out.push(b);
        }
    }
    out
}

/// Morse index of a great-circle arc of length `l` on the unit `n`-sphere:
/// conjugate points at multiples of π, each of multiplicity `n − 1`.
pub fn great_circle_index(l: f64, n: usize) -> usize {
    (l / PI).floor() as usize * (n - 1)
}

pub fn point_source(n: usize, p: DVector<f64>) -> SubmanifoldPatch<f64> {
    SubmanifoldPatch::point_patch(RiemannianSpace::round_sphere(n, 1.0), p).unwrap()
}

/// Normal vector of the point patch pointing along ambient `dir`.
pub fn point_normal(patch: &SubmanifoldPatch<f64>, dir: &DVector<f64>, len: f64) -> NormalVector<f64> {
    let nv = patch.normal_from_ambient(&DVector::zeros(0), dir);
    nv.scaled(len / nv.length())
}
