//! Finite-difference connection and curvature for metrics given in a chart.
//!
//! Christoffel symbols use central differences of the metric with step
//! `christoffel_step`. Curvature needs derivatives of the Christoffel symbols;
//! those are assembled from first and second central differences of the metric
//! with the larger `curvature_step`, which balances truncation against
//! round-off for second derivatives.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::scalar::Real;

/// Metric field `g(x)` in chart coordinates.
pub type MetricFn<T> = Arc<dyn Fn(&DVector<T>) -> DMatrix<T> + Send + Sync>;

/// Step sizes for the chart-metric finite differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDifference<T> {
    pub christoffel_step: T,
    pub curvature_step: T,
}

impl<T: Real> Default for FiniteDifference<T> {
    fn default() -> Self {
        Self {
            christoffel_step: T::lit(1e-5),
            curvature_step: T::lit(1e-4),
        }
    }
}

/// Christoffel symbols, indexed as `gamma[l][(j, k)] = Γ^l_{jk}`.
#[derive(Debug, Clone)]
pub struct Christoffel<T: Real> {
    pub gamma: Vec<DMatrix<T>>,
}

impl<T: Real> Christoffel<T> {
    /// `Γ(u, w)^l = Γ^l_{jk} u^j w^k`.
    pub fn contract(&self, u: &DVector<T>, w: &DVector<T>) -> DVector<T> {
        DVector::from_fn(self.gamma.len(), |l, _| (u.transpose() * &self.gamma[l] * w)[(0, 0)])
    }
}

/// Metric given in a single chart of `R^n`.
#[derive(Clone)]
pub struct ChartMetric<T: Real> {
    pub(crate) dim: usize,
    pub(crate) metric: MetricFn<T>,
    pub(crate) steps: FiniteDifference<T>,
}

impl<T: Real> fmt::Debug for ChartMetric<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartMetric")
            .field("dim", &self.dim)
            .field("steps", &self.steps)
            .finish_non_exhaustive()
    }
}

impl<T: Real> ChartMetric<T> {
    pub fn new(dim: usize, metric: MetricFn<T>) -> Self {
        Self {
            dim,
            metric,
            steps: FiniteDifference::default(),
        }
    }

    pub fn with_steps(mut self, steps: FiniteDifference<T>) -> Self {
        self.steps = steps;
        self
    }

    pub fn steps(&self) -> FiniteDifference<T> {
        self.steps
    }

    pub fn metric(&self, x: &DVector<T>) -> DMatrix<T> {
        (self.metric)(x)
    }

    fn shifted(&self, x: &DVector<T>, shifts: &[(usize, T)]) -> DMatrix<T> {
        let mut y = x.clone();
        for &(i, s) in shifts {
            y[i] += s;
        }
        (self.metric)(&y)
    }

    fn first_derivatives(&self, x: &DVector<T>, h: T) -> Vec<DMatrix<T>> {
        let two_h = h + h;
        (0..self.dim)
            .map(|i| (self.shifted(x, &[(i, h)]) - self.shifted(x, &[(i, -h)])) / two_h)
            .collect()
    }

    /// `dd[i][j] = ∂_i ∂_j g`.
    fn second_derivatives(&self, x: &DVector<T>, h: T) -> Vec<Vec<DMatrix<T>>> {
        let n = self.dim;
        let g0 = (self.metric)(x);
        let h2 = h * h;
        let four_h2 = T::lit(4.0) * h2;
        let two = T::lit(2.0);
        let mut dd = vec![vec![DMatrix::zeros(n, n); n]; n];
        for i in 0..n {
            dd[i][i] = (self.shifted(x, &[(i, h)]) - &g0 * two + self.shifted(x, &[(i, -h)])) / h2;
            for j in (i + 1)..n {
                let m = (self.shifted(x, &[(i, h), (j, h)]) - self.shifted(x, &[(i, h), (j, -h)])
                    - self.shifted(x, &[(i, -h), (j, h)])
                    + self.shifted(x, &[(i, -h), (j, -h)]))
                    / four_h2;
                dd[i][j] = m.clone();
                dd[j][i] = m;
            }
        }
        dd
    }

    fn assemble(g_inv: &DMatrix<T>, dg: &[DMatrix<T>]) -> Christoffel<T> {
        let n = g_inv.nrows();
        let half = T::lit(0.5);
        // S_m(j,k) = ∂_j g_{mk} + ∂_k g_{mj} - ∂_m g_{jk}
        let lowered: Vec<DMatrix<T>> = (0..n)
            .map(|m| DMatrix::from_fn(n, n, |j, k| dg[j][(m, k)] + dg[k][(m, j)] - dg[m][(j, k)]))
            .collect();
        let gamma = (0..n)
            .map(|l| {
                let mut acc = DMatrix::zeros(n, n);
                for (m, s) in lowered.iter().enumerate() {
                    acc += s * (g_inv[(l, m)] * half);
                }
                acc
            })
            .collect();
        Christoffel { gamma }
    }

    fn inverse(&self, g: &DMatrix<T>) -> DMatrix<T> {
        g.clone()
            .try_inverse()
            .unwrap_or_else(|| DMatrix::identity(self.dim, self.dim))
    }

    pub fn christoffel(&self, x: &DVector<T>) -> Christoffel<T> {
        let g = (self.metric)(x);
        let g_inv = self.inverse(&g);
        let dg = self.first_derivatives(x, self.steps.christoffel_step);
        Self::assemble(&g_inv, &dg)
    }

    /// Christoffel symbols and their derivatives, `dgamma[i][l][(j,k)] = ∂_i Γ^l_{jk}`,
    /// both computed with `step`.
    pub fn christoffel_with_derivative(
        &self,
        x: &DVector<T>,
        step: T,
    ) -> (Christoffel<T>, Vec<Vec<DMatrix<T>>>) {
        let n = self.dim;
        let half = T::lit(0.5);
        let g = (self.metric)(x);
        let g_inv = self.inverse(&g);
        let dg = self.first_derivatives(x, step);
        let ddg = self.second_derivatives(x, step);
        let gamma = Self::assemble(&g_inv, &dg);
        let lowered: Vec<DMatrix<T>> = (0..n)
            .map(|m| DMatrix::from_fn(n, n, |j, k| dg[j][(m, k)] + dg[k][(m, j)] - dg[m][(j, k)]))
            .collect();
        let mut dgamma = Vec::with_capacity(n);
        for i in 0..n {
            // ∂_i g^{-1} = -g^{-1} (∂_i g) g^{-1}
            let dg_inv = -(&g_inv * &dg[i] * &g_inv);
            let dlowered: Vec<DMatrix<T>> = (0..n)
                .map(|m| {
                    DMatrix::from_fn(n, n, |j, k| {
                        ddg[i][j][(m, k)] + ddg[i][k][(m, j)] - ddg[i][m][(j, k)]
                    })
                })
                .collect();
            let per_l = (0..n)
                .map(|l| {
                    let mut acc = DMatrix::zeros(n, n);
                    for m in 0..n {
                        acc += &lowered[m] * (dg_inv[(l, m)] * half);
                        acc += &dlowered[m] * (g_inv[(l, m)] * half);
                    }
                    acc
                })
                .collect();
            dgamma.push(per_l);
        }
        (gamma, dgamma)
    }

    /// `R(u, w)w` with `R_{ijk}^l = ∂_iΓ^l_{jk} − ∂_jΓ^l_{ik} + Γ^m_{jk}Γ^l_{im} − Γ^m_{ik}Γ^l_{jm}`.
    pub fn curvature(&self, x: &DVector<T>, u: &DVector<T>, w: &DVector<T>, step: T) -> DVector<T> {
        let n = self.dim;
        let (gamma, dgamma) = self.christoffel_with_derivative(x, step);
        let g = &gamma.gamma;
        let mut out = DVector::zeros(n);
        for l in 0..n {
            let mut acc = T::zero();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut r = dgamma[i][l][(j, k)] - dgamma[j][l][(i, k)];
                        for m in 0..n {
                            r += g[m][(j, k)] * g[l][(i, m)] - g[m][(i, k)] * g[l][(j, m)];
                        }
                        acc += u[i] * w[j] * w[k] * r;
                    }
                }
            }
            out[l] = acc;
        }
        out
    }

    /// Directional derivative of `Γ(v, v)` along `dx`: `(∂_i Γ^l_{jk}) dx^i v^j v^k`.
    pub fn gamma_derivative_contract(
        dgamma: &[Vec<DMatrix<T>>],
        dx: &DVector<T>,
        v: &DVector<T>,
    ) -> DVector<T> {
        let n = v.len();
        DVector::from_fn(n, |l, _| {
            let mut acc = T::zero();
            for i in 0..n {
                acc += dx[i] * (v.transpose() * &dgamma[i][l] * v)[(0, 0)];
            }
            acc
        })
    }
}
