//! Parametrized submanifolds with tangent and normal frames.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::linalg;
use super::space::RiemannianSpace;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub type PointMap<T> = Arc<dyn Fn(&DVector<T>) -> DVector<T> + Send + Sync>;
pub type FrameMap<T> = Arc<dyn Fn(&DVector<T>) -> DMatrix<T> + Send + Sync>;
/// `(parameter, ambient unit normal) -> shape operator in the tangent frame`.
pub type ShapeMap<T> = Arc<dyn Fn(&DVector<T>, &DVector<T>) -> DMatrix<T> + Send + Sync>;

/// Frame orthonormality tolerance.
pub const FRAME_TOLERANCE: f64 = 1e-10;

/// A normal vector `Σ c_j N_j(u)` at parameter `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalVector<T: Real> {
    pub param: DVector<T>,
    pub coeffs: DVector<T>,
}

impl<T: Real> NormalVector<T> {
    pub fn new(param: DVector<T>, coeffs: DVector<T>) -> Self {
        Self { param, coeffs }
    }

    /// Length in the normal frame (the frame is orthonormal).
    pub fn length(&self) -> T {
        self.coeffs.norm()
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            param: self.param.clone(),
            coeffs: &self.coeffs * s,
        }
    }
}

/// A parametrized submanifold `L ⊂ M`.
///
/// Parametrizations may be redundant (more parameters than `leaf_dim`); this
/// is how closed leaves such as round spheres avoid coordinate singularities.
/// Shooting and fiber solvers use pseudo-inverses and never rely on the
/// parametrization being an immersion.
#[derive(Clone)]
pub struct SubmanifoldPatch<T: Real> {
    parent: RiemannianSpace<T>,
    label: String,
    param_box: Vec<(T, T)>,
    leaf_dim: usize,
    parametrization: PointMap<T>,
    tangent_frame: FrameMap<T>,
    normal_frame: FrameMap<T>,
    shape: Option<ShapeMap<T>>,
    normalizer: Option<PointMap<T>>,
    fd_step: T,
}

impl<T: Real> fmt::Debug for SubmanifoldPatch<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubmanifoldPatch")
            .field("label", &self.label)
            .field("parent", &self.parent)
            .field("leaf_dim", &self.leaf_dim)
            .field("param_dim", &self.param_box.len())
            .finish_non_exhaustive()
    }
}

impl<T: Real> SubmanifoldPatch<T> {
    pub fn new(
        parent: RiemannianSpace<T>,
        label: impl Into<String>,
        param_box: Vec<(T, T)>,
        leaf_dim: usize,
        parametrization: PointMap<T>,
        tangent_frame: FrameMap<T>,
        normal_frame: FrameMap<T>,
    ) -> Self {
        Self {
            parent,
            label: label.into(),
            param_box,
            leaf_dim,
            parametrization,
            tangent_frame,
            normal_frame,
            shape: None,
            normalizer: None,
            fd_step: T::lit(1e-4),
        }
    }

    /// Supplies a closed-form shape operator instead of finite differences.
    pub fn with_shape_operator(mut self, shape: ShapeMap<T>) -> Self {
        self.shape = Some(shape);
        self
    }

    /// Map applied to parameters after each solver update (e.g. renormalizing
    /// a redundant direction parameter).
    pub fn with_param_normalizer(mut self, normalizer: PointMap<T>) -> Self {
        self.normalizer = Some(normalizer);
        self
    }

    pub fn parent(&self) -> &RiemannianSpace<T> {
        &self.parent
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn param_box(&self) -> &[(T, T)] {
        &self.param_box
    }

    pub fn param_dim(&self) -> usize {
        self.param_box.len()
    }

    pub fn leaf_dim(&self) -> usize {
        self.leaf_dim
    }

    pub fn codim(&self) -> usize {
        self.parent.dimension() - self.leaf_dim
    }

    pub fn point(&self, u: &DVector<T>) -> DVector<T> {
        (self.parametrization)(u)
    }

    pub fn tangent_frame(&self, u: &DVector<T>) -> DMatrix<T> {
        (self.tangent_frame)(u)
    }

    pub fn normal_frame(&self, u: &DVector<T>) -> DMatrix<T> {
        (self.normal_frame)(u)
    }

    pub fn normalize_param(&self, u: &DVector<T>) -> DVector<T> {
        match &self.normalizer {
            Some(f) => f(u),
            None => u.clone(),
        }
    }

    /// Ambient representation of a normal vector.
    pub fn ambient_normal(&self, nv: &NormalVector<T>) -> DVector<T> {
        self.normal_frame(&nv.param) * &nv.coeffs
    }

    /// Normal vector at `u` with the given ambient representation (projected
    /// onto the normal frame).
    pub fn normal_from_ambient(&self, u: &DVector<T>, v: &DVector<T>) -> NormalVector<T> {
        let p = self.point(u);
        let n = self.normal_frame(u);
        let coeffs = DVector::from_fn(n.ncols(), |j, _| self.parent.inner(&p, &n.column(j).into_owned(), v));
        NormalVector::new(u.clone(), coeffs)
    }

    /// Largest deviation of the Gram matrix of `[tangent | normal]` from the identity.
    pub fn frame_gram_deviation(&self, u: &DVector<T>) -> T {
        let p = self.point(u);
        let t = self.tangent_frame(u);
        let n = self.normal_frame(u);
        let cols: Vec<DVector<T>> = linalg::column_vec(&t).into_iter().chain(linalg::column_vec(&n)).collect();
        let mut dev = T::zero();
        for (i, a) in cols.iter().enumerate() {
            for (j, b) in cols.iter().enumerate() {
                let target = if i == j { T::one() } else { T::zero() };
                dev = dev.max((self.parent.inner(&p, a, b) - target).abs());
            }
        }
        dev
    }

    /// Checks frame dimensions and orthonormality at `u`.
    pub fn validate_frames(&self, u: &DVector<T>) -> Result<()> {
        let t = self.tangent_frame(u);
        let n = self.normal_frame(u);
        if t.ncols() + n.ncols() != self.parent.dimension() {
            return Err(Error::mismatch(
                self.parent.dimension(),
                t.ncols() + n.ncols(),
                "tangent + normal frame dimensions",
            ));
        }
        if t.ncols() != self.leaf_dim {
            return Err(Error::mismatch(self.leaf_dim, t.ncols(), "tangent frame dimension"));
        }
        let dev = self.frame_gram_deviation(u);
        if dev > T::lit(FRAME_TOLERANCE) {
            return Err(Error::domain("frame orthonormality", dev.to_f64_lossy()));
        }
        Ok(())
    }

    /// Coordinate differential of the parametrization (ambient x param).
    pub fn param_jacobian(&self, u: &DVector<T>) -> DMatrix<T> {
        let h = T::lit(1e-6);
        let two_h = h + h;
        let na = self.parent.ambient_dim();
        let mut m = DMatrix::zeros(na, self.param_dim());
        for a in 0..self.param_dim() {
            let mut up = u.clone();
            let mut um = u.clone();
            up[a] += h;
            um[a] -= h;
            m.set_column(a, &((self.point(&up) - self.point(&um)) / two_h));
        }
        m
    }

    /// Covariant derivatives `∇_{∂_a} ξ` of the normal field `ξ(u) = N(u) c`
    /// with fixed coefficients, one column per parameter.
    pub fn normal_covariant_derivative(&self, u: &DVector<T>, coeffs: &DVector<T>) -> DMatrix<T> {
        let h = T::lit(1e-6);
        let two_h = h + h;
        let p = self.point(u);
        let xi = self.normal_frame(u) * coeffs;
        let dphi = self.param_jacobian(u);
        let na = self.parent.ambient_dim();
        let mut m = DMatrix::zeros(na, self.param_dim());
        for a in 0..self.param_dim() {
            let mut up = u.clone();
            let mut um = u.clone();
            up[a] += h;
            um[a] -= h;
            let dxi = (self.normal_frame(&up) * coeffs - self.normal_frame(&um) * coeffs) / two_h;
            let cov = self
                .parent
                .covariant_from_coordinate(&p, &dphi.column(a).into_owned(), &xi, &dxi);
            m.set_column(a, &cov);
        }
        m
    }

    /// Shape operator `S_ξ` in the tangent frame, with `⟨S_ξ X, Y⟩ = ⟨II(X, Y), ξ⟩`.
    ///
    /// With this convention the sphere `S^{n-1}(r) ⊂ R^n` has `S = +(1/r) I`
    /// for the inward unit normal.
    pub fn shape_operator(&self, u: &DVector<T>, normal: &DVector<T>) -> Result<DMatrix<T>> {
        let p = self.point(u);
        let len = self.parent.norm(&p, normal);
        if (len - T::one()).abs() > T::lit(1e-9) {
            return Err(Error::domain("unit normal |ξ| = 1", (len - T::one()).abs().to_f64_lossy()));
        }
        let t = self.tangent_frame(u);
        let mut off = T::zero();
        for j in 0..t.ncols() {
            off = off.max(self.parent.inner(&p, &t.column(j).into_owned(), normal).abs());
        }
        if off > T::lit(1e-8) {
            return Err(Error::domain("normal orthogonal to the leaf", off.to_f64_lossy()));
        }
        let s = match &self.shape {
            Some(f) => f(u, normal),
            None => self.shape_operator_fd(u, normal),
        };
        Ok((&s + s.transpose()) * T::lit(0.5))
    }

    /// Finite-difference shape operator from second derivatives of the parametrization.
    pub fn shape_operator_fd(&self, u: &DVector<T>, normal: &DVector<T>) -> DMatrix<T> {
        let k = self.leaf_dim;
        let np = self.param_dim();
        if k == 0 {
            return DMatrix::zeros(0, 0);
        }
        let h = self.fd_step;
        let h2 = h * h;
        let four_h2 = T::lit(4.0) * h2;
        let two = T::lit(2.0);
        let p = self.point(u);
        let dphi = self.param_jacobian(u);
        let shifted = |shifts: &[(usize, T)]| {
            let mut w = u.clone();
            for &(i, s) in shifts {
                w[i] += s;
            }
            self.point(&w)
        };
        let mut second = DMatrix::zeros(np, np);
        for a in 0..np {
            for b in a..np {
                let d2 = if a == b {
                    (shifted(&[(a, h)]) - &p * two + shifted(&[(a, -h)])) / h2
                } else {
                    (shifted(&[(a, h), (b, h)]) - shifted(&[(a, h), (b, -h)]) - shifted(&[(a, -h), (b, h)])
                        + shifted(&[(a, -h), (b, -h)]))
                        / four_h2
                };
                let cov = d2
                    - self
                        .parent
                        .polar_accel(&p, &dphi.column(a).into_owned(), &dphi.column(b).into_owned());
                let val = self.parent.inner(&p, &cov, normal);
                second[(a, b)] = val;
                second[(b, a)] = val;
            }
        }
        // tangent frame E = dphi * C
        let e = self.tangent_frame(u);
        let c = pinv_generic(&dphi) * &e;
        debug_assert_eq!(c.nrows(), np);
        c.transpose() * second * c
    }

    // ---- built-ins -------------------------------------------------------

    /// A single point `{p}`; the normal frame is an orthonormal basis of `T_p M`.
    pub fn point_patch(parent: RiemannianSpace<T>, p: DVector<T>) -> Result<Self> {
        parent.check_point(&p)?;
        let n = parent.dimension();
        let basis = parent.tangent_basis(&p);
        let space = parent.clone();
        let pp = p.clone();
        let ortho = linalg::gram_schmidt(&linalg::column_vec(&basis), |a, b| space.inner(&pp, a, b), T::lit(1e-12));
        let na = parent.ambient_dim();
        let normal = linalg::columns(na, &ortho);
        debug_assert_eq!(normal.ncols(), n);
        let p_map = p.clone();
        Ok(Self::new(
            parent,
            "point",
            Vec::new(),
            0,
            Arc::new(move |_| p_map.clone()),
            Arc::new(move |_| DMatrix::zeros(na, 0)),
            Arc::new(move |_| normal.clone()),
        )
        .with_shape_operator(Arc::new(|_, _| DMatrix::zeros(0, 0))))
    }

    /// Coordinate hyperplane `{x_n = 0}` in `R^n`, parameters in `[-extent, extent]^(n-1)`.
    pub fn hyperplane(n: usize, extent: T) -> Self {
        let k = n - 1;
        Self::new(
            RiemannianSpace::euclidean(n),
            "hyperplane",
            vec![(-extent, extent); k],
            k,
            Arc::new(move |u: &DVector<T>| DVector::from_fn(n, |i, _| if i < k { u[i] } else { T::zero() })),
            Arc::new(move |_| DMatrix::identity(n, k)),
            Arc::new(move |_| DMatrix::from_fn(n, 1, |i, _| if i == k { T::one() } else { T::zero() })),
        )
        .with_shape_operator(Arc::new(move |_, _| DMatrix::zeros(k, k)))
    }

    /// Round sphere `S^{n-1}(radius) ⊂ R^n` centered at the origin.
    ///
    /// The circle (`n = 2`) is parametrized by angle; higher spheres use a
    /// redundant direction parameter `u ∈ [-1,1]^n`, `φ(u) = r u/|u|`.
    /// The normal frame is the inward unit normal.
    pub fn sphere_in_euclidean(n: usize, radius: T) -> Self {
        let shape = Arc::new(move |u: &DVector<T>, xi: &DVector<T>| {
            let k = n - 1;
            let inward = if n == 2 {
                DVector::from_column_slice(&[-u[0].cos(), -u[0].sin()])
            } else {
                -u / u.norm()
            };
            DMatrix::identity(k, k) * (xi.dot(&inward) / radius)
        });
        if n == 2 {
            return Self::new(
                RiemannianSpace::euclidean(2),
                "circle",
                vec![(T::zero(), T::two_pi())],
                1,
                Arc::new(move |u: &DVector<T>| DVector::from_column_slice(&[radius * u[0].cos(), radius * u[0].sin()])),
                Arc::new(|u: &DVector<T>| DMatrix::from_column_slice(2, 1, &[-u[0].sin(), u[0].cos()])),
                Arc::new(|u: &DVector<T>| DMatrix::from_column_slice(2, 1, &[-u[0].cos(), -u[0].sin()])),
            )
            .with_shape_operator(shape)
            .with_param_normalizer(wrap_angle());
        }
        let tangent = move |u: &DVector<T>| {
            let d = u / u.norm();
            let basis = linalg::complete_basis(std::slice::from_ref(&d), n, n, |a, b| a.dot(b), |v| v);
            linalg::columns(n, &basis[1..])
        };
        Self::new(
            RiemannianSpace::euclidean(n),
            "sphere",
            vec![(-T::one(), T::one()); n],
            n - 1,
            Arc::new(move |u: &DVector<T>| u * (radius / u.norm())),
            Arc::new(tangent),
            Arc::new(move |u: &DVector<T>| DMatrix::from_column_slice(n, 1, (-u / u.norm()).as_slice())),
        )
        .with_shape_operator(shape)
        .with_param_normalizer(Arc::new(|u: &DVector<T>| u / u.norm()))
    }

    /// Horizontal circle `{x² + y² = r², z = height}` in `R^3`.
    ///
    /// Normal frame: inward radial direction, then `e_z`.
    pub fn horizontal_circle(radius: T, height: T) -> Self {
        Self::new(
            RiemannianSpace::euclidean(3),
            "horizontal-circle",
            vec![(T::zero(), T::two_pi())],
            1,
            Arc::new(move |u: &DVector<T>| DVector::from_column_slice(&[radius * u[0].cos(), radius * u[0].sin(), height])),
            Arc::new(|u: &DVector<T>| DMatrix::from_column_slice(3, 1, &[-u[0].sin(), u[0].cos(), T::zero()])),
            Arc::new(|u: &DVector<T>| {
                DMatrix::from_column_slice(
                    3,
                    2,
                    &[-u[0].cos(), -u[0].sin(), T::zero(), T::zero(), T::zero(), T::one()],
                )
            }),
        )
        .with_shape_operator(Arc::new(move |u: &DVector<T>, xi: &DVector<T>| {
            let inward = DVector::from_column_slice(&[-u[0].cos(), -u[0].sin(), T::zero()]);
            DMatrix::from_element(1, 1, xi.dot(&inward) / radius)
        }))
        .with_param_normalizer(wrap_angle())
    }

    /// Ellipse `(a cos θ, b sin θ)` in `R^2` with inward normal; shape operator
    /// by finite differences.
    pub fn ellipse(a: T, b: T) -> Self {
        let tangent = move |u: &DVector<T>| {
            let t = DVector::from_column_slice(&[-a * u[0].sin(), b * u[0].cos()]);
            let t = &t / t.norm();
            DMatrix::from_column_slice(2, 1, t.as_slice())
        };
        Self::new(
            RiemannianSpace::euclidean(2),
            "ellipse",
            vec![(T::zero(), T::two_pi())],
            1,
            Arc::new(move |u: &DVector<T>| DVector::from_column_slice(&[a * u[0].cos(), b * u[0].sin()])),
            Arc::new(tangent),
            Arc::new(move |u: &DVector<T>| {
                let t = tangent(u);
                // rotate tangent by +90°: inward for a counter-clockwise curve
                DMatrix::from_column_slice(2, 1, &[-t[(1, 0)], t[(0, 0)]])
            }),
        )
        .with_param_normalizer(wrap_angle())
    }

    /// The Hopf circle `{e^{iθ} p}` through `p ∈ S^3(1) ⊂ C^2 = R^4`.
    ///
    /// Normal frame `(−w̄, z̄)` and `i(−w̄, z̄)` for `p = (z, w)`.
    pub fn hopf_fiber(p: DVector<T>) -> Result<Self> {
        let parent = RiemannianSpace::round_sphere(3, T::one());
        parent.check_point(&p)?;
        let base = p.clone();
        let point = move |u: &DVector<T>| hopf_rotate(&base, u[0]);
        let pt = point.clone();
        let pn = point.clone();
        Ok(Self::new(
            parent,
            "hopf-fiber",
            vec![(T::zero(), T::two_pi())],
            1,
            Arc::new(point),
            Arc::new(move |u: &DVector<T>| DMatrix::from_column_slice(4, 1, complex_i(&pt(u)).as_slice())),
            Arc::new(move |u: &DVector<T>| {
                let q = pn(u);
                let n1 = quaternion_j(&q);
                let n2 = complex_i(&n1);
                linalg::columns(4, &[n1, n2])
            }),
        )
        .with_shape_operator(Arc::new(|_, _| DMatrix::zeros(1, 1)))
        .with_param_normalizer(wrap_angle()))
    }
}

/// Reduces a single angle parameter to `[0, 2π)`.
fn wrap_angle<T: Real>() -> PointMap<T> {
    Arc::new(|u: &DVector<T>| u.map(|a| a - T::two_pi() * (a / T::two_pi()).floor()))
}

/// Multiplication by `i` on `C^2 ≅ R^4`, coordinates `(Re z, Im z, Re w, Im w)`.
pub fn complex_i<T: Real>(x: &DVector<T>) -> DVector<T> {
    DVector::from_column_slice(&[-x[1], x[0], -x[3], x[2]])
}

/// `(z, w) ↦ (−w̄, z̄)`, orthogonal to both `x` and `i x`.
pub fn quaternion_j<T: Real>(x: &DVector<T>) -> DVector<T> {
    DVector::from_column_slice(&[-x[2], x[3], x[0], -x[1]])
}

/// `e^{iθ} x` on `C^2`.
pub fn hopf_rotate<T: Real>(x: &DVector<T>, theta: T) -> DVector<T> {
    let (s, c) = theta.sin_cos();
    x * c + complex_i(x) * s
}

fn pinv_generic<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(c, r);
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    svd.pseudo_inverse(smax * T::lit(1e-10))
        .unwrap_or_else(|_| DMatrix::zeros(c, r))
}
