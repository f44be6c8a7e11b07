//! Small dense linear-algebra helpers shared by the geometric layers.

use nalgebra::{DMatrix, DVector};

use crate::scalar::Real;

/// Modified Gram-Schmidt under an arbitrary inner product.
///
/// Candidates whose residual norm falls below `drop_tol` (relative to their
/// original norm) are skipped, so the output may be shorter than the input.
pub fn gram_schmidt<T, F>(candidates: &[DVector<T>], inner: F, drop_tol: T) -> Vec<DVector<T>>
where
    T: Real,
    F: Fn(&DVector<T>, &DVector<T>) -> T,
{
    let mut out: Vec<DVector<T>> = Vec::with_capacity(candidates.len());
    for c in candidates {
        let norm0 = inner(c, c).sqrt();
        if norm0 <= T::zero() {
            continue;
        }
        let mut r = c.clone();
        // two passes keep the result orthogonal to working precision
        for _ in 0..2 {
            for q in &out {
                let proj = inner(q, &r);
                r.axpy(-proj, q, T::one());
            }
        }
        let norm = inner(&r, &r).sqrt();
        if norm > drop_tol * norm0 {
            out.push(r / norm);
        }
    }
    out
}

/// Completes `existing` (orthonormal under `inner`) with vectors drawn from
/// projected standard basis vectors until `target` vectors are reached.
///
/// Candidates are chosen greedily by largest residual, which makes the result
/// deterministic and well conditioned.
pub fn complete_basis<T, F, P>(
    existing: &[DVector<T>],
    ambient: usize,
    target: usize,
    inner: F,
    project: P,
) -> Vec<DVector<T>>
where
    T: Real,
    F: Fn(&DVector<T>, &DVector<T>) -> T,
    P: Fn(DVector<T>) -> DVector<T>,
{
    let mut basis: Vec<DVector<T>> = existing.to_vec();
    while basis.len() < target {
        let mut best: Option<(T, DVector<T>)> = None;
        for i in 0..ambient {
            let mut r = project(DVector::from_fn(ambient, |k, _| {
                if k == i {
                    T::one()
                } else {
                    T::zero()
                }
            }));
            for _ in 0..2 {
                for q in &basis {
                    let proj = inner(q, &r);
                    r.axpy(-proj, q, T::one());
                }
            }
            let n = inner(&r, &r).sqrt();
            if best.as_ref().is_none_or(|(bn, _)| n > *bn) {
                best = Some((n, r));
            }
        }
        match best {
            Some((n, r)) if n > T::lit(1e-8) => basis.push(r / n),
            _ => break,
        }
    }
    basis
}

/// Stacks column vectors into a matrix with `rows` rows (allows zero columns).
pub fn columns<T: Real>(rows: usize, cols: &[DVector<T>]) -> DMatrix<T> {
    let mut m = DMatrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

pub fn column_vec<T: Real>(m: &DMatrix<T>) -> Vec<DVector<T>> {
    (0..m.ncols()).map(|j| m.column(j).into_owned()).collect()
}

/// Singular values and vectors sorted by ascending singular value.
///
/// Returns `(sigma, u, v)` where column `i` of `u`/`v` pairs with `sigma[i]`.
/// For a tall `r x c` matrix all `c` singular values are returned.
pub fn svd_ascending(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>, DMatrix<f64>) {
    let (rows, cols) = m.shape();
    if cols == 0 || rows == 0 {
        return (Vec::new(), DMatrix::zeros(rows, 0), DMatrix::zeros(cols, 0));
    }
    if rows < cols {
        // pad so every column receives a singular value (extra ones are zero)
        let mut padded = DMatrix::zeros(cols, cols);
        padded.view_mut((0, 0), (rows, cols)).copy_from(m);
        let (s, u, v) = svd_ascending(&padded);
        let u = u.rows(0, rows).into_owned();
        return (s, u, v);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[a]
            .partial_cmp(&svd.singular_values[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut uo = DMatrix::zeros(rows, order.len());
    let mut vo = DMatrix::zeros(cols, order.len());
    for (j, &i) in order.iter().enumerate() {
        uo.set_column(j, &u.column(i));
        vo.set_column(j, &vt.row(i).transpose());
    }
    (sigma, uo, vo)
}

/// Orthonormal basis of the column range, keeping directions whose singular
/// value exceeds `rel_tol * sigma_max`.
pub fn range_basis(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (sigma, u, _) = svd_ascending(m);
    let smax = sigma.last().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..sigma.len())
        .filter(|&i| smax > 0.0 && sigma[i] > rel_tol * smax)
        .collect();
    let mut out = DMatrix::zeros(m.nrows(), keep.len());
    // largest first
    for (j, &i) in keep.iter().rev().enumerate() {
        out.set_column(j, &u.column(i));
    }
    out
}

/// Largest principal angle (radians) between the column spans of two
/// matrices with orthonormal columns.
///
/// Computed from the sine (residual of projecting `b` onto span `a`), which
/// stays accurate for nearly equal subspaces.
pub fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() == 0 && b.ncols() == 0 {
        return 0.0;
    }
    if a.ncols() != b.ncols() {
        return std::f64::consts::FRAC_PI_2;
    }
    let resid = b - a * (a.transpose() * b);
    let s = resid.singular_values().max().clamp(0.0, 1.0);
    s.asin()
}

/// Moore-Penrose pseudo-inverse with relative singular-value cutoff.
pub fn pseudo_inverse(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(cols, rows);
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = (rel_tol * smax).max(f64::MIN_POSITIVE);
    svd.pseudo_inverse(cutoff).unwrap_or_else(|_| DMatrix::zeros(cols, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_schmidt_drops_dependent_vectors() {
        let a = DVector::from_vec(vec![1.0f64, 0.0, 0.0]);
        let b = DVector::from_vec(vec![2.0, 0.0, 0.0]);
        let c = DVector::from_vec(vec![1.0, 1.0, 0.0]);
        let out = gram_schmidt(&[a, b, c], |x, y| x.dot(y), 1e-10);
        assert_eq!(out.len(), 2);
        assert!((out[1][1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn svd_ascending_orders_and_pads() {
        let m = DMatrix::from_row_slice(3, 2, &[3.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let (s, u, v) = svd_ascending(&m);
        assert!((s[0] - 1.0).abs() < 1e-14 && (s[1] - 3.0).abs() < 1e-14);
        let rebuilt = &u * DMatrix::from_diagonal(&DVector::from_vec(s.clone())) * v.transpose();
        assert!((rebuilt - &m).abs().max() < 1e-13);

        let wide = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let (s, _, _) = svd_ascending(&wide);
        assert_eq!(s.len(), 2);
        assert!(s[0].abs() < 1e-14);
    }

    #[test]
    fn principal_angle_of_rotated_line() {
        let a = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let th: f64 = 0.3;
        let b = DMatrix::from_column_slice(2, 1, &[th.cos(), th.sin()]);
        assert!((max_principal_angle(&a, &b) - 0.3).abs() < 1e-12);
    }
}
