//! Dormand–Prince 5(4) integration with embedded error control.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Average substeps per output interval before integration gives up.
const STEPS_PER_NODE: usize = 64;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

// difference between the 5th and embedded 4th order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Statistics of an adaptive run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepRecord {
    pub accepted: usize,
    pub rejected: usize,
    pub min_step: f64,
    pub max_step: f64,
}

impl StepRecord {
    fn note(&mut self, h: f64) {
        if self.accepted == 0 {
            self.min_step = h;
            self.max_step = h;
        } else {
            self.min_step = self.min_step.min(h);
            self.max_step = self.max_step.max(h);
        }
        self.accepted += 1;
    }
}

/// Reusable stage storage for one system size.
struct Stepper<T: Real> {
    k: Vec<Vec<T>>,
    tmp: Vec<T>,
    out: Vec<T>,
    err: Vec<T>,
}

impl<T: Real> Stepper<T> {
    fn new(n: usize) -> Self {
        Self {
            k: vec![vec![T::zero(); n]; 7],
            tmp: vec![T::zero(); n],
            out: vec![T::zero(); n],
            err: vec![T::zero(); n],
        }
    }

    /// One trial step; returns the scaled error norm (accept when <= 1).
    fn try_step<F>(&mut self, rhs: &mut F, t: T, y: &[T], h: T, tol: T) -> T
    where
        F: FnMut(T, &[T], &mut [T]),
    {
        let n = y.len();
        rhs(t, y, &mut self.k[0]);
        for s in 1..7 {
            for i in 0..n {
                let mut acc = T::zero();
                for j in 0..s {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += T::lit(a) * self.k[j][i];
                    }
                }
                self.tmp[i] = y[i] + h * acc;
            }
            let ts = t + T::lit(C[s]) * h;
            rhs(ts, &self.tmp, &mut self.k[s]);
        }
        // stage 7 evaluates the 5th-order solution itself (FSAL)
        self.out.copy_from_slice(&self.tmp);
        let mut worst = T::zero();
        for i in 0..n {
            let mut e = T::zero();
            for s in 0..7 {
                if E[s] != 0.0 {
                    e += T::lit(E[s]) * self.k[s][i];
                }
            }
            self.err[i] = h * e;
            let scale = tol * (T::one() + y[i].abs().max(self.out[i].abs()));
            worst = worst.max(self.err[i].abs() / scale);
        }
        worst
    }
}

fn grow_factor<T: Real>(err: T) -> T {
    if err <= T::zero() {
        return T::lit(5.0);
    }
    let f = T::lit(0.9) * err.powf(T::lit(-0.2));
    f.min(T::lit(5.0)).max(T::lit(0.2))
}

/// Integrates `y' = f(t, y)` and returns the state at every node of `grid`.
///
/// Adaptive substeps are taken inside each grid interval; `project` runs on
/// the state after each interval (constraint re-projection hook).
pub fn integrate_on_grid<T, F, P>(
    mut rhs: F,
    y0: &[T],
    grid: &[T],
    tol: T,
    mut project: P,
) -> Result<(Vec<Vec<T>>, StepRecord)>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]),
    P: FnMut(&mut [T]),
{
    let n = y0.len();
    let mut stepper = Stepper::new(n);
    let mut record = StepRecord::default();
    let mut states = Vec::with_capacity(grid.len());
    let mut y = y0.to_vec();
    states.push(y.clone());
    let mut h_guess: Option<T> = None;
    // coordinates running off to infinity (e.g. through a chart's pole) show up as step explosion
    let budget = STEPS_PER_NODE * grid.len() + 10_000;
    let mut attempts = 0usize;
    for w in grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let mut t = t0;
        let mut h = h_guess.unwrap_or(t1 - t0).min(t1 - t0);
        while t < t1 {
            let remaining = t1 - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            attempts += 1;
            if attempts > budget {
                return Err(Error::IntegrationFailure {
                    last_time: t.to_f64_lossy(),
                    reason: format!("step budget of {budget} exhausted"),
                });
            }
            let err = stepper.try_step(&mut rhs, t, &y, step, tol);
            if err <= T::one() {
                y.copy_from_slice(&stepper.out);
                t = if last { t1 } else { t + step };
                record.note(step.to_f64_lossy());
                let g = grow_factor(err);
                h = step * g;
                if !last || g < T::one() {
                    h_guess = Some(h);
                }
            } else {
                record.rejected += 1;
                h = step * grow_factor(err);
                if h < T::lit(1e-14) * (T::one() + t.abs()) {
                    return Err(Error::IntegrationFailure {
                        last_time: t.to_f64_lossy(),
                        reason: "step size underflow".into(),
                    });
                }
            }
            if y.iter().any(|c| !c.is_finite()) {
                return Err(Error::IntegrationFailure {
                    last_time: t.to_f64_lossy(),
                    reason: "non-finite state".into(),
                });
            }
        }
        project(&mut y);
        states.push(y.clone());
    }
    Ok((states, record))
}

/// Integrates from `t0` to `t1` with free adaptive steps, returning the final state.
pub fn integrate_to<T, F>(mut rhs: F, y0: &[T], t0: T, t1: T, tol: T) -> Result<Vec<T>>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]),
{
    let n = y0.len();
    let mut stepper = Stepper::new(n);
    let mut y = y0.to_vec();
    let mut t = t0;
    let span = t1 - t0;
    if span <= T::zero() {
        return Ok(y);
    }
    let mut h = span * T::lit(0.01);
    let mut steps = 0usize;
    while t < t1 {
        let remaining = t1 - t;
        let last = h >= remaining;
        let step = if last { remaining } else { h };
        let err = stepper.try_step(&mut rhs, t, &y, step, tol);
        if err <= T::one() {
            y.copy_from_slice(&stepper.out);
            t = if last { t1 } else { t + step };
            h = step * grow_factor(err);
        } else {
            h = step * grow_factor(err);
            if h < T::lit(1e-14) * (T::one() + t.abs()) {
                return Err(Error::IntegrationFailure {
                    last_time: t.to_f64_lossy(),
                    reason: "step size underflow".into(),
                });
            }
        }
        steps += 1;
        if steps > 2_000_000 || y.iter().any(|c| !c.is_finite()) {
            return Err(Error::IntegrationFailure {
                last_time: t.to_f64_lossy(),
                reason: "no convergence".into(),
            });
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_on_grid() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.05).collect();
        let (states, rec) = integrate_on_grid(
            |_t, y: &[f64], dy: &mut [f64]| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            &[0.0, 1.0],
            &grid,
            1e-12,
            |_| {},
        )
        .unwrap();
        for (t, s) in grid.iter().zip(&states) {
            assert!((s[0] - t.sin()).abs() < 1e-10);
        }
        assert!(rec.accepted >= 100);
    }

    #[test]
    fn free_adaptive_exponential() {
        let y = integrate_to(|_t, y: &[f64], dy: &mut [f64]| dy[0] = y[0], &[1.0], 0.0, 2.0, 1e-12).unwrap();
        assert!((y[0] - 2f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn blow_up_reports_failure_time() {
        // y' = y², y(0) = 1 blows up at t = 1
        let res = integrate_to(|_t, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0], &[1.0], 0.0, 2.0, 1e-10);
        match res {
            Err(Error::IntegrationFailure { last_time, .. }) => assert!(last_time < 1.0 && last_time > 0.9),
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
