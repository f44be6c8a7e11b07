use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{adaptive_tolerance, bundle_point, endpoint_jacobian};
use crate::error::{Error, Result};
use crate::focal::{index_and_nullity, FocalOptions, FocalRecord};
use crate::geometry::{NormalVector, SubmanifoldPatch};

/// Seeding and refinement settings for [`shoot_critical_points`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingOptions {
    /// Samples per parameter axis (doubled for one-parameter patches);
    /// directions and lengths scale with it.
    pub density: usize,
    /// Converged when `|exp⊥(v) − q|` drops below this.
    pub newton_tol: f64,
    pub max_iterations: usize,
    /// Normal-bundle distance below which two solutions are the same.
    pub dedup_tol: f64,
    pub focal: FocalOptions,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            density: 4,
            newton_tol: 1e-10,
            max_iterations: 60,
            dedup_tol: 1e-6,
            focal: FocalOptions::default(),
        }
    }
}

/// A normal geodesic from the patch ending at the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub param: Vec<f64>,
    pub coeffs: Vec<f64>,
    pub foot: Vec<f64>,
    /// Initial velocity in ambient coordinates.
    pub normal: Vec<f64>,
    pub residual: f64,
    pub energy: f64,
    pub index: usize,
    pub nullity: usize,
    pub focal: Vec<FocalRecord>,
}

impl CriticalPoint {
    pub fn length(&self) -> f64 {
        self.energy.sqrt()
    }

    pub fn normal_vector(&self) -> NormalVector<f64> {
        NormalVector::new(DVector::from_vec(self.param.clone()), DVector::from_vec(self.coeffs.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed: usize,
    pub reason: String,
}

/// Outcome of a shooting run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootingReport {
    pub critical_points: Vec<CriticalPoint>,
    pub seeds: usize,
    pub converged: usize,
    pub duplicates_collapsed: usize,
    pub above_cap: usize,
    pub failures: Vec<SeedFailure>,
}

fn param_grid(patch: &SubmanifoldPatch<f64>, density: usize) -> Vec<DVector<f64>> {
    let bounds = patch.param_box();
    // one axis is cheap; sample it twice as finely (4 starts miss solutions on an ellipse)
    let density = if bounds.len() == 1 { 2 * density } else { density };
    let mut out = vec![DVector::zeros(bounds.len())];
    for (a, &(lo, hi)) in bounds.iter().enumerate() {
        let mut next = Vec::with_capacity(out.len() * density);
        for u in &out {
            for i in 0..density {
                let mut w = u.clone();
                w[a] = lo + (i as f64 + 0.5) * (hi - lo) / density as f64;
                next.push(w);
            }
        }
        out = next;
    }
    out.into_iter()
        .filter(|u| u.is_empty() || u.norm() > 1e-3)
        .map(|u| patch.normalize_param(&u))
        .collect()
}

fn direction_grid(codim: usize, density: usize) -> Vec<DVector<f64>> {
    match codim {
        0 => Vec::new(),
        1 => vec![DVector::from_element(1, 1.0), DVector::from_element(1, -1.0)],
        2 => {
            let n = 2 * density;
            (0..n)
                .map(|k| {
                    let th = std::f64::consts::TAU * (k as f64 + 0.25) / n as f64;
                    DVector::from_vec(vec![th.cos(), th.sin()])
                })
                .collect()
        }
        3 => {
            // Fibonacci lattice
            let n = 2 * density * density;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * k as f64;
                    DVector::from_vec(vec![r * th.cos(), r * th.sin(), z])
                })
                .collect()
        }
        c => {
            let n = 2 * density.pow(c as u32 - 1);
            let mut rng = ChaCha8Rng::seed_from_u64(c as u64);
            (0..n)
                .map(|_| {
                    let g: DVector<f64> = DVector::from_fn(c, |_, _| StandardNormal.sample(&mut rng));
                    let len: f64 = g.norm();
                    g / len
                })
                .collect()
        }
    }
}

fn seed_grid(patch: &SubmanifoldPatch<f64>, cap: f64, density: usize) -> Vec<(DVector<f64>, DVector<f64>)> {
    let top = cap.sqrt();
    let count = ((density as f64 * top / std::f64::consts::TAU).ceil() as usize).max(density);
    let lengths: Vec<f64> = (0..count).map(|i| (i as f64 + 0.5) / count as f64 * top).collect();
    let dirs = direction_grid(patch.codim(), density);
    let mut out = Vec::new();
    for u in param_grid(patch, density) {
        for d in &dirs {
            for &l in &lengths {
                out.push((u.clone(), d * l));
            }
        }
    }
    out
}

struct Solution {
    param: DVector<f64>,
    coeffs: DVector<f64>,
    residual: f64,
}

/// Levenberg-Marquardt refinement of `exp⊥(N(u)c) = q`.
fn refine(
    patch: &SubmanifoldPatch<f64>,
    q: &DVector<f64>,
    mut u: DVector<f64>,
    mut c: DVector<f64>,
    escape: f64,
    opts: &ShootingOptions,
) -> std::result::Result<Solution, String> {
    let np = u.len();
    let eval = |u: &DVector<f64>, c: &DVector<f64>, tol: f64| -> std::result::Result<(DVector<f64>, DMatrix<f64>), String> {
        let (x, jac) = endpoint_jacobian(patch, u, c, tol).map_err(|e| e.to_string())?;
        Ok((x - q, jac))
    };
    let (mut f, mut jac) = eval(&u, &c, 1e-8)?;
    let mut r = f.norm();
    let mut lambda = -1.0;
    let mut tight = false;
    for _ in 0..opts.max_iterations {
        if r < opts.newton_tol {
            return Ok(Solution { param: u, coeffs: c, residual: r });
        }
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &f;
        if lambda < 0.0 {
            lambda = 1e-6 * jtj.diagonal().max().max(1e-12);
        }
        let mut accepted = false;
        for _ in 0..12 {
            let mut a = jtj.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += lambda;
            }
            let Some(step) = a.cholesky().map(|ch| ch.solve(&(-&g))) else {
                lambda *= 4.0;
                continue;
            };
            let u_new = patch.normalize_param(&(&u + step.rows(0, np)));
            let c_new = &c + step.rows(np, step.len() - np);
            if !c_new.iter().all(|x| x.is_finite()) || c_new.norm() > escape {
                lambda *= 4.0;
                continue;
            }
            let tol = if tight { 1e-12 } else { adaptive_tolerance(r) };
            let (f_new, jac_new) = eval(&u_new, &c_new, tol)?;
            let r_new = f_new.norm();
            if r_new < r {
                u = u_new;
                c = c_new;
                f = f_new;
                jac = jac_new;
                r = r_new;
                lambda = (lambda / 3.0).max(1e-18);
                accepted = true;
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            if tight {
                return Err(format!("stalled at residual {r:e}"));
            }
            // the residual may be limited by integration error; redo it tightly
            tight = true;
            (f, jac) = eval(&u, &c, 1e-12)?;
            r = f.norm();
            lambda = -1.0;
        }
    }
    if r < opts.newton_tol {
        Ok(Solution { param: u, coeffs: c, residual: r })
    } else {
        Err(format!("no convergence after {} iterations (residual {r:e})", opts.max_iterations))
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Normal geodesics from `patch` to `q` with energy at most `cap`, by
/// seeded shooting, with index and nullity attached. Sorted by energy.
pub fn shoot_critical_points(
    patch: &SubmanifoldPatch<f64>,
    q: &DVector<f64>,
    cap: f64,
    opts: &ShootingOptions,
) -> Result<ShootingReport> {
    if !(cap.is_finite() && cap > 0.0) {
        return Err(Error::Precondition(format!("energy cap must be finite and positive, got {cap}")));
    }
    if opts.density == 0 || !(opts.newton_tol > 0.0) {
        return Err(Error::Precondition("shooting needs density ≥ 1 and a positive tolerance".into()));
    }
    patch.parent().check_point(q)?;
    let seeds = seed_grid(patch, cap, opts.density);
    let escape = 3.0 * cap.sqrt() + 10.0;
    let outcomes: Vec<std::result::Result<Solution, String>> = seeds
        .par_iter()
        .map(|(u, c)| refine(patch, q, u.clone(), c.clone(), escape, opts))
        .collect();

    let mut failures = Vec::new();
    let mut found: Vec<(f64, DVector<f64>, Solution)> = Vec::new();
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(sol) => {
                let p = patch.point(&sol.param);
                let v = patch.normal_frame(&sol.param) * &sol.coeffs;
                let energy = patch.parent().inner(&p, &v, &v);
                if energy < 1e-16 {
                    return Err(Error::Precondition("target lies on the patch".into()));
                }
                found.push((energy, bundle_point(patch, &sol.param, &sol.coeffs), sol));
            }
            Err(reason) => failures.push(SeedFailure { seed: i, reason }),
        }
    }
    let converged = found.len();
    found.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| lex_cmp(a.1.as_slice(), b.1.as_slice())));
    let mut unique: Vec<(f64, DVector<f64>, Solution)> = Vec::new();
    let mut duplicates = 0;
    for item in found {
        if unique.iter().any(|k| (&k.1 - &item.1).norm() < opts.dedup_tol) {
            duplicates += 1;
        } else {
            unique.push(item);
        }
    }
    let before = unique.len();
    unique.retain(|k| k.0 <= cap);
    let above_cap = before - unique.len();

    let critical_points: Vec<CriticalPoint> = unique
        .par_iter()
        .map(|(energy, bp, sol)| {
            let nv = NormalVector::new(sol.param.clone(), sol.coeffs.clone());
            let (index, nullity, focal) = index_and_nullity(patch, &nv, &opts.focal)?;
            let na = patch.parent().ambient_dim();
            Ok(CriticalPoint {
                param: sol.param.iter().copied().collect(),
                coeffs: sol.coeffs.iter().copied().collect(),
                foot: bp.rows(0, na).iter().copied().collect(),
                normal: bp.rows(na, na).iter().copied().collect(),
                residual: sol.residual,
                energy: *energy,
                index,
                nullity,
                focal,
            })
        })
        .collect::<Result<_>>()?;

    Ok(ShootingReport {
        critical_points,
        seeds: seeds.len(),
        converged,
        duplicates_collapsed: duplicates,
        above_cap,
        failures,
    })
}
