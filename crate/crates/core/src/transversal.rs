//! Transversal Jacobi equation along horizontal geodesics.
//!
//! The vertical space `W` of Killing restrictions is completed at its zeros
//! by the derivatives of the vanishing fields, giving a rank-constant bundle
//! `W̃`. On its orthogonal complement `H` inside `γ'^⊥` the projected
//! L-Jacobi fields solve `(∇^H)²Y + R^H Y = 0` with
//! `R^H = P R(·, γ')γ' + 3 A A*` and `A(J) = P ∇J` for `J ∈ W`.
//!
//! Only embedded parents are supported, so coordinates are orthonormal.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::focal::{detect_focal, morse_index, FocalOptions, FocalRecord, SampledPath, ENDPOINT_TOLERANCE};
use crate::foliation::{vertical_jacobi_basis, w_focal_index, FoliationSpec};
use crate::geodesic::GeodesicTrace;
use crate::geometry::linalg::{self, max_principal_angle, pseudo_inverse, svd_ascending};
use crate::geometry::SubmanifoldPatch;
use crate::jacobi::{jacobi_basis, JacobiBasisTrace};

/// Relative singular-value level treated as a zero of a vertical field.
const ZERO_REL: f64 = 1e-6;

/// Orthonormal `W̃` basis at every node of a vertical Jacobi basis.
pub fn extend_vertical_bundle(w_basis: &JacobiBasisTrace<f64>) -> Result<Vec<DMatrix<f64>>> {
    let d = w_basis.count();
    let mut out = Vec::with_capacity(w_basis.len());
    for k in 0..w_basis.len() {
        let w = w_basis.value(k);
        let na = w.nrows();
        if d == 0 {
            out.push(DMatrix::zeros(na, 0));
            continue;
        }
        let wd = w_basis.covariant(k);
        let (sigma, u, v) = svd_ascending(&w);
        let scale = sigma.last().copied().unwrap_or(0.0).max(wd.norm());
        let zero = ZERO_REL * scale;
        let vanishing = sigma.iter().take_while(|&&s| s <= zero).count();
        let mut cols: Vec<DVector<f64>> = (vanishing..d).map(|i| u.column(i).into_owned()).collect();
        for i in 0..vanishing {
            // derivative of the vanishing combination, orthogonalized
            let mut c = &wd * v.column(i);
            for e in &cols {
                c -= e * e.dot(&c);
            }
            let norm = c.norm();
            if norm <= 1e-8 * scale {
                return Err(Error::NumericalDegeneracy {
                    reason: format!("extended vertical bundle loses rank at t = {}", w_basis.times()[k]),
                    spectrum: sigma.clone(),
                });
            }
            cols.push(c / norm);
        }
        out.push(linalg::columns(na, &cols));
    }
    Ok(out)
}

/// Per-node data of the transversal Jacobi equation.
#[derive(Debug, Clone)]
pub struct TransversalSystem {
    w_basis: JacobiBasisTrace<f64>,
    w_tilde: Vec<DMatrix<f64>>,
    h_frame: Vec<DMatrix<f64>>,
    /// `A` in (H-frame x W̃-basis) coordinates.
    a_tensor: Vec<DMatrix<f64>>,
    r_h: Vec<DMatrix<f64>>,
    /// `Ω_ij = ⟨E_i, E_j'⟩` of the H-frame.
    omega: Vec<DMatrix<f64>>,
    max_step_angle: f64,
}

/// `P W' W⁺` with the pseudo-inverse truncated at the zero level.
fn a_matrix(w: &DMatrix<f64>, wd: &DMatrix<f64>, p_h: &DMatrix<f64>) -> DMatrix<f64> {
    let na = w.nrows();
    if w.ncols() == 0 {
        return DMatrix::zeros(na, na);
    }
    let (sigma, _, _) = svd_ascending(w);
    let scale = sigma.last().copied().unwrap_or(0.0).max(wd.norm());
    let smax = sigma.last().copied().unwrap_or(0.0);
    let rel = if smax > 0.0 { ZERO_REL * scale / smax } else { 1.0 };
    p_h * wd * pseudo_inverse(w, rel)
}

fn procrustes_align(new: DMatrix<f64>, prev: &DMatrix<f64>) -> DMatrix<f64> {
    if new.ncols() == 0 {
        return new;
    }
    let m = new.transpose() * prev;
    let svd = m.svd(true, true);
    let r = svd.u.expect("u") * svd.v_t.expect("v_t");
    new * r
}

impl TransversalSystem {
    /// Builds the system along a horizontal geodesic of `foliation`.
    pub fn build(geodesic: &GeodesicTrace<f64>, foliation: &FoliationSpec) -> Result<Self> {
        let space = geodesic.space();
        if !space.is_embedded() {
            return Err(Error::Precondition("transversal system needs an embedded parent".into()));
        }
        let w_basis = vertical_jacobi_basis(geodesic, foliation)?;
        let w_tilde = extend_vertical_bundle(&w_basis)?;
        let n = geodesic.len();
        let na = space.ambient_dim();
        let m = space.dimension() - 1;
        let d = w_basis.count();
        let h = m.checked_sub(d).ok_or_else(|| {
            Error::Construction(format!("vertical rank {d} exceeds normal rank {m}"))
        })?;
        let mut h_frame: Vec<DMatrix<f64>> = Vec::with_capacity(n);
        let mut max_step_angle: f64 = 0.0;
        for k in 0..n {
            let x = geodesic.position(k);
            let v = geodesic.velocity(k);
            let mut existing = vec![v / v.norm()];
            existing.extend(linalg::column_vec(&w_tilde[k]));
            let basis = linalg::complete_basis(&existing, na, m + 1, |a, b| a.dot(b), |y| space.project_tangent(x, &y));
            let e = linalg::columns(na, &basis[existing.len()..]);
            if e.ncols() != h {
                return Err(Error::NumericalDegeneracy {
                    reason: format!("horizontal frame has rank {} instead of {h}", e.ncols()),
                    spectrum: Vec::new(),
                });
            }
            let e = match h_frame.last() {
                Some(prev) => procrustes_align(e, prev),
                None => e,
            };
            if k > 0 {
                max_step_angle = max_step_angle.max(max_principal_angle(&w_tilde[k], &w_tilde[k - 1]));
            }
            h_frame.push(e);
        }
        let times = geodesic.times();
        let mut omega = Vec::with_capacity(n);
        for k in 0..n {
            let (a, b) = if k == 0 {
                (0, 1)
            } else if k == n - 1 {
                (n - 2, n - 1)
            } else {
                (k - 1, k + 1)
            };
            let de = (&h_frame[b] - &h_frame[a]) / (times[b] - times[a]);
            omega.push(h_frame[k].transpose() * de);
        }
        let mut a_tensor = Vec::with_capacity(n);
        let mut r_h = Vec::with_capacity(n);
        for k in 0..n {
            let x = geodesic.position(k);
            let v = geodesic.velocity(k);
            let e = &h_frame[k];
            let p_h = e * e.transpose();
            let a_full = a_matrix(&w_basis.value(k), &w_basis.covariant(k), &p_h);
            let a = e.transpose() * &a_full * &w_tilde[k];
            let mut rr = DMatrix::zeros(h, h);
            for j in 0..h {
                let y = e.column(j).into_owned();
                let ry = space.curvature_unchecked(x, &y, v);
                rr.set_column(j, &(e.transpose() * ry));
            }
            let aa = &a * a.transpose();
            r_h.push(rr + aa * 3.0);
            a_tensor.push(a);
        }
        Ok(Self {
            w_basis,
            w_tilde,
            h_frame,
            a_tensor,
            r_h,
            omega,
            max_step_angle,
        })
    }

    pub fn geodesic(&self) -> &GeodesicTrace<f64> {
        self.w_basis.geodesic()
    }

    pub fn w_basis(&self) -> &JacobiBasisTrace<f64> {
        &self.w_basis
    }

    pub fn len(&self) -> usize {
        self.h_frame.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h_frame.is_empty()
    }

    /// Orthonormal `W̃` basis at node `k` (ambient x d).
    pub fn w_tilde(&self, k: usize) -> &DMatrix<f64> {
        &self.w_tilde[k]
    }

    /// Orthonormal H-frame at node `k` (ambient x h).
    pub fn h_frame(&self, k: usize) -> &DMatrix<f64> {
        &self.h_frame[k]
    }

    pub fn horizontal_rank(&self) -> usize {
        self.h_frame.first().map_or(0, |e| e.ncols())
    }

    /// Largest principal angle between `W̃` at consecutive nodes.
    pub fn max_step_angle(&self) -> f64 {
        self.max_step_angle
    }

    /// `R^H` in H-frame coordinates.
    pub fn r_h_matrix(&self, k: usize) -> &DMatrix<f64> {
        &self.r_h[k]
    }

    /// `A` in (H-frame x W̃-basis) coordinates.
    pub fn a_matrix(&self, k: usize) -> &DMatrix<f64> {
        &self.a_tensor[k]
    }

    /// `A` applied to the element of `W̃` with coefficients `coeffs`; ambient result in H.
    pub fn a_tensor_at(&self, k: usize, coeffs: &DVector<f64>) -> Result<DVector<f64>> {
        if coeffs.len() != self.w_tilde[k].ncols() {
            return Err(Error::mismatch(self.w_tilde[k].ncols(), coeffs.len(), "W̃ coefficients"));
        }
        Ok(&self.h_frame[k] * (&self.a_tensor[k] * coeffs))
    }

    /// Adjoint `A*(y)` from its defining formula `W⁺ᵀ (∇W)ᵀ y`, ambient result in W̃.
    pub fn a_adjoint_at(&self, k: usize, y: &DVector<f64>) -> DVector<f64> {
        let w = self.w_basis.value(k);
        if w.ncols() == 0 {
            return DVector::zeros(y.len());
        }
        let wd = self.w_basis.covariant(k);
        let (sigma, _, _) = svd_ascending(&w);
        let smax = sigma.last().copied().unwrap_or(0.0);
        let scale = smax.max(wd.norm());
        let rel = if smax > 0.0 { ZERO_REL * scale / smax } else { 1.0 };
        let e = &self.h_frame[k];
        let yh = e * (e.transpose() * y);
        pseudo_inverse(&w, rel).transpose() * (wd.transpose() * yh)
    }

    /// `R^H(y)` for an ambient `y` in H.
    pub fn transversal_curvature_at(&self, k: usize, y: &DVector<f64>) -> DVector<f64> {
        let e = &self.h_frame[k];
        e * (&self.r_h[k] * (e.transpose() * y))
    }

    fn interp(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        (a + b) * 0.5
    }

    /// Integrates `y' = z − Ωy, z' = −Ωz − R^H y` (H-frame coefficients)
    /// by classical Runge–Kutta on pairs of grid intervals.
    fn integrate(&self, y0: &DMatrix<f64>, z0: &DMatrix<f64>) -> Result<SampledPath> {
        let times = self.geodesic().times();
        let n = times.len();
        let f = |om: &DMatrix<f64>, rh: &DMatrix<f64>, y: &DMatrix<f64>, z: &DMatrix<f64>| {
            (z - om * y, -(om * z) - rh * y)
        };
        let mut ts = vec![times[0]];
        let mut ys = vec![y0.clone()];
        let mut rates = vec![z0 - &self.omega[0] * y0];
        let (mut y, mut z) = (y0.clone(), z0.clone());
        let mut k = 0;
        while k + 1 < n {
            let (mid_om, mid_rh, end) = if k + 2 < n {
                (self.omega[k + 1].clone(), self.r_h[k + 1].clone(), k + 2)
            } else {
                (
                    Self::interp(&self.omega[k], &self.omega[k + 1]),
                    Self::interp(&self.r_h[k], &self.r_h[k + 1]),
                    k + 1,
                )
            };
            let h = times[end] - times[k];
            let (k1y, k1z) = f(&self.omega[k], &self.r_h[k], &y, &z);
            let (k2y, k2z) = f(&mid_om, &mid_rh, &(&y + &k1y * (h / 2.0)), &(&z + &k1z * (h / 2.0)));
            let (k3y, k3z) = f(&mid_om, &mid_rh, &(&y + &k2y * (h / 2.0)), &(&z + &k2z * (h / 2.0)));
            let (k4y, k4z) = f(&self.omega[end], &self.r_h[end], &(&y + &k3y * h), &(&z + &k3z * h));
            y += (k1y + &k2y * 2.0 + &k3y * 2.0 + k4y) * (h / 6.0);
            z += (k1z + &k2z * 2.0 + &k3z * 2.0 + k4z) * (h / 6.0);
            if y.iter().chain(z.iter()).any(|c| !c.is_finite()) {
                return Err(Error::IntegrationFailure {
                    last_time: times[k],
                    reason: "non-finite transversal state".into(),
                });
            }
            ts.push(times[end]);
            rates.push(&z - &self.omega[end] * &y);
            ys.push(y.clone());
            k = end;
        }
        SampledPath::new(ts, ys, rates)
    }
}

/// How the complement of `W` in the L-Jacobi space is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Complement {
    /// Orthogonal to `W` in (value, derivative) phase space at `t = 0`.
    Orthogonal,
    /// The orthogonal complement shifted by a random element of `W`.
    Shifted(u64),
}

/// Horizontal index with diagnostics of both computation routes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizontalIndex {
    /// From the integrated transversal equation.
    pub index: usize,
    pub records: Vec<FocalRecord>,
    /// From H-projections of the complement fields.
    pub projection_index: usize,
    /// Largest gap between the two routes' matrices.
    pub route_gap: f64,
}

fn phase(value: &DVector<f64>, derivative: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(value.len() * 2, value.iter().chain(derivative.iter()).copied())
}

/// Coefficients (in the L-Jacobi basis) of a complement of `W`.
fn complement_coefficients(
    lambda: &JacobiBasisTrace<f64>,
    w_basis: &JacobiBasisTrace<f64>,
    choice: Complement,
) -> Result<DMatrix<f64>> {
    let na = lambda.geodesic().position(0).len();
    let l_cols: Vec<DVector<f64>> = lambda.seeds().iter().map(|s| phase(&s.value, &s.derivative)).collect();
    let w_cols: Vec<DVector<f64>> = w_basis.seeds().iter().map(|s| phase(&s.value, &s.derivative)).collect();
    let b = linalg::columns(2 * na, &l_cols);
    let bw = linalg::columns(2 * na, &w_cols);
    let b_pinv = pseudo_inverse(&b, 1e-12);
    let w_coeffs = &b_pinv * &bw;
    let resid = (&b * &w_coeffs - &bw).norm();
    if resid > 1e-6 * bw.norm().max(1.0) {
        return Err(Error::Precondition(format!(
            "vertical fields are not L-Jacobi fields of the patch (residual {resid:e})"
        )));
    }
    let q_w = linalg::gram_schmidt(&w_cols, |a, c| a.dot(c), 1e-10);
    let mut cands = q_w.clone();
    cands.extend(l_cols.iter().cloned());
    let all = linalg::gram_schmidt(&cands, |a, c| a.dot(c), 1e-8);
    let comp: Vec<DVector<f64>> = all[q_w.len()..].to_vec();
    let want = lambda.count() - w_basis.count();
    if comp.len() != want {
        return Err(Error::NumericalDegeneracy {
            reason: format!("complement has {} fields, expected {want}", comp.len()),
            spectrum: Vec::new(),
        });
    }
    let mut coeffs = &b_pinv * linalg::columns(2 * na, &comp);
    if let Complement::Shifted(seed) = choice {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = DMatrix::from_fn(w_basis.count(), want, |_, _| rng.random_range(-1.0..1.0));
        coeffs += &w_coeffs * r;
    }
    Ok(coeffs)
}

fn check_l_geodesic(geodesic: &GeodesicTrace<f64>) -> Result<()> {
    if geodesic.origin().is_none() {
        return Err(Error::Precondition("geodesic is not an L-geodesic of the patch".into()));
    }
    Ok(())
}

/// `ind_{Λ^L/W}`: focal count of the transversal equation on `(0, T)`.
pub fn horizontal_index(
    geodesic: &GeodesicTrace<f64>,
    foliation: &FoliationSpec,
    patch: &SubmanifoldPatch<f64>,
    choice: Complement,
    opts: &FocalOptions,
) -> Result<HorizontalIndex> {
    check_l_geodesic(geodesic)?;
    let lambda = jacobi_basis(patch, geodesic)?;
    horizontal_index_with(&lambda, foliation, choice, opts)
}

fn horizontal_index_with(
    lambda: &JacobiBasisTrace<f64>,
    foliation: &FoliationSpec,
    choice: Complement,
    opts: &FocalOptions,
) -> Result<HorizontalIndex> {
    let sys = TransversalSystem::build(lambda.geodesic(), foliation)?;
    let h = sys.horizontal_rank();
    if h == 0 {
        return Ok(HorizontalIndex {
            index: 0,
            records: Vec::new(),
            projection_index: 0,
            route_gap: 0.0,
        });
    }
    let coeffs = complement_coefficients(lambda, sys.w_basis(), choice)?;
    let comp = lambda.combine(&coeffs)?;
    let e0 = sys.h_frame(0);
    let j0 = comp.value(0);
    let dj0 = comp.covariant(0);
    let q0 = sys.w_tilde(0);
    let a0 = sys.h_frame(0) * (sys.a_matrix(0) * (q0.transpose() * &j0));
    let y0 = e0.transpose() * &j0;
    let z0 = e0.transpose() * (dj0 - a0);
    let path = sys.integrate(&y0, &z0)?;
    let horizon = lambda.geodesic().horizon();
    let records = detect_focal(&path, horizon, opts)?;
    let index = morse_index(&records, horizon);

    // projection route: Eᵀ J_C(t) at every node
    let times = lambda.times().to_vec();
    let n = times.len();
    let proj: Vec<DMatrix<f64>> = (0..n).map(|k| sys.h_frame(k).transpose() * comp.value(k)).collect();
    let rates: Vec<DMatrix<f64>> = (0..n)
        .map(|k| {
            let (a, b) = if k == 0 {
                (0, 1)
            } else if k == n - 1 {
                (n - 2, n - 1)
            } else {
                (k - 1, k + 1)
            };
            (&proj[b] - &proj[a]) / (times[b] - times[a])
        })
        .collect();
    let mut route_gap: f64 = 0.0;
    for (t, y) in path_nodes(&path) {
        let k = lambda.geodesic().nearest_node(t);
        route_gap = route_gap.max((y - &proj[k]).abs().max());
    }
    let proj_path = SampledPath::new(times, proj, rates)?;
    let proj_records = detect_focal(&proj_path, horizon, opts)?;
    Ok(HorizontalIndex {
        index,
        records,
        projection_index: morse_index(&proj_records, horizon),
        route_gap,
    })
}

fn path_nodes(path: &SampledPath) -> Vec<(f64, DMatrix<f64>)> {
    use crate::focal::MatrixPath;
    (0..path.times().len()).map(|k| (path.times()[k], path.value(k))).collect()
}

/// Outcome of the index-splitting check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingReport {
    pub ind_total: usize,
    pub ind_vertical: usize,
    pub ind_horizontal: usize,
    pub holds: bool,
}

/// Compares `ind_Λ` with `ind_W + ind_{Λ/W}` along an L-geodesic of a regular leaf.
pub fn verify_index_splitting(
    geodesic: &GeodesicTrace<f64>,
    foliation: &FoliationSpec,
    patch: &SubmanifoldPatch<f64>,
    opts: &FocalOptions,
) -> Result<SplittingReport> {
    check_l_geodesic(geodesic)?;
    let lambda = jacobi_basis(patch, geodesic)?;
    let horizon = geodesic.horizon();
    let total = detect_focal(&lambda, horizon, opts)?;
    if total.iter().any(|r| (r.time - horizon).abs() < ENDPOINT_TOLERANCE) {
        return Err(Error::Precondition("endpoint is focal; move the endpoint".into()));
    }
    let ind_total = morse_index(&total, horizon);
    let ind_vertical = w_focal_index(lambda.geodesic(), foliation, opts)?.index;
    let ind_horizontal = horizontal_index_with(&lambda, foliation, Complement::Orthogonal, opts)?.index;
    Ok(SplittingReport {
        ind_total,
        ind_vertical,
        ind_horizontal,
        holds: ind_total == ind_vertical + ind_horizontal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic::normal_geodesic;
    use crate::geometry::NormalVector;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn hopf_setup(len: f64) -> (SubmanifoldPatch<f64>, GeodesicTrace<f64>) {
        let patch = SubmanifoldPatch::hopf_fiber(v(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        let nv = NormalVector::new(v(&[0.0]), v(&[1.0, 0.0]));
        let g = normal_geodesic(&patch, &nv, len, 1e-12).unwrap();
        (patch, g)
    }

    #[test]
    fn hopf_transversal_curvature_is_four() {
        let (_, g) = hopf_setup(3.0);
        let sys = TransversalSystem::build(&g, &FoliationSpec::hopf()).unwrap();
        assert_eq!(sys.horizontal_rank(), 1);
        for k in (0..sys.len()).step_by(97) {
            assert!((sys.r_h_matrix(k)[(0, 0)] - 4.0).abs() < 1e-5);
            let a = sys.a_tensor_at(k, &v(&[1.0])).unwrap();
            assert!((a.norm() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn hopf_splitting() {
        let (patch, g) = hopf_setup(2.5);
        let f = FoliationSpec::hopf();
        let h = horizontal_index(&g, &f, &patch, Complement::Orthogonal, &FocalOptions::default()).unwrap();
        assert_eq!(h.index, 1);
        assert_eq!(h.projection_index, 1);
        let r = verify_index_splitting(&g, &f, &patch, &FocalOptions::default()).unwrap();
        assert_eq!((r.ind_total, r.ind_vertical, r.ind_horizontal, r.holds), (1, 0, 1, true));
    }

    #[test]
    fn adjoint_matches_transpose() {
        let (_, g) = hopf_setup(2.0);
        let sys = TransversalSystem::build(&g, &FoliationSpec::hopf()).unwrap();
        for k in [0, 100, 1000, 3000] {
            let w = sys.w_tilde(k).column(0).into_owned();
            let e = sys.h_frame(k).column(0).into_owned();
            let lhs = sys.a_tensor_at(k, &v(&[1.0])).unwrap().dot(&e);
            let rhs = w.dot(&sys.a_adjoint_at(k, &e));
            assert!((lhs - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn sphere_through_origin_splits_as_vertical() {
        let patch = SubmanifoldPatch::<f64>::sphere_in_euclidean(3, 1.0);
        let u = patch.normalize_param(&v(&[0.3, -0.4, 0.5]));
        let nv = NormalVector::new(u, v(&[1.0]));
        let g = normal_geodesic(&patch, &nv, 2.0 - 0.3, 1e-12).unwrap();
        let f = FoliationSpec::concentric_spheres(3);
        let r = verify_index_splitting(&g, &f, &patch, &FocalOptions::default()).unwrap();
        assert_eq!((r.ind_total, r.ind_vertical, r.ind_horizontal), (2, 2, 0));
        let w = extend_vertical_bundle(&vertical_jacobi_basis(&g, &f).unwrap()).unwrap();
        assert!(w.iter().all(|m| m.ncols() == 2));
    }

    #[test]
    fn point_foliation_recovers_full_index() {
        let s = crate::geometry::RiemannianSpace::round_sphere(2, 1.0);
        let patch = SubmanifoldPatch::point_patch(s.clone(), v(&[0.0, 0.0, 1.0])).unwrap();
        let nv = NormalVector::new(DVector::zeros(0), v(&[0.0, 1.0]));
        let g = normal_geodesic(&patch, &nv, 4.0, 1e-12).unwrap();
        let f = FoliationSpec::points(s);
        let sys = TransversalSystem::build(&g, &f).unwrap();
        assert!((sys.r_h_matrix(500)[(0, 0)] - 1.0).abs() < 1e-12);
        let h = horizontal_index(&g, &f, &patch, Complement::Orthogonal, &FocalOptions::default()).unwrap();
        assert_eq!(h.index, 1);
    }

    #[test]
    fn circles_times_line_crossing_the_axis() {
        let patch = SubmanifoldPatch::<f64>::horizontal_circle(1.0, 0.2);
        let nv = NormalVector::new(v(&[0.7]), v(&[0.8, 0.6]));
        let g = normal_geodesic(&patch, &nv, 1.6, 1e-12).unwrap();
        let f = FoliationSpec::circles_times_line();
        let r = verify_index_splitting(&g, &f, &patch, &FocalOptions::default()).unwrap();
        assert_eq!((r.ind_total, r.ind_vertical, r.ind_horizontal), (1, 1, 0));
        let shifted = horizontal_index(&g, &f, &patch, Complement::Shifted(3), &FocalOptions::default()).unwrap();
        assert_eq!(shifted.index, 0);
    }

    #[test]
    fn complement_choice_does_not_change_index() {
        let (patch, g) = hopf_setup(4.0);
        let f = FoliationSpec::hopf();
        let a = horizontal_index(&g, &f, &patch, Complement::Orthogonal, &FocalOptions::default()).unwrap();
        let b = horizontal_index(&g, &f, &patch, Complement::Shifted(11), &FocalOptions::default()).unwrap();
        assert_eq!(a.index, 2);
        assert_eq!(a.index, b.index);
    }
}
