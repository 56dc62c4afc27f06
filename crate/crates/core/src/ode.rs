//! Dormand–Prince 5(4) with adaptive step size control.

use crate::error::{Error, Result};
use nalgebra::DVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            initial_step: 1e-2,
            max_steps: 100_000,
        }
    }
}

/// Accepted steps `(x, y)`, including the initial point.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub xs: Vec<f64>,
    pub ys: Vec<DVector<f64>>,
    pub evaluations: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(x, y)` from `x0` to `x1`, landing exactly on each of
/// the increasing `stops` in between (and on `x1`).
pub fn integrate<F>(mut f: F, x0: f64, y0: &DVector<f64>, x1: f64, stops: &[f64], opts: &OdeOptions) -> Result<Trajectory>
where
    F: FnMut(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    let dir = if x1 >= x0 { 1.0 } else { -1.0 };
    let mut targets: Vec<f64> = stops.iter().copied().filter(|s| dir * (s - x0) > 0.0 && dir * (x1 - s) > 0.0).collect();
    targets.push(x1);
    let mut traj = Trajectory {
        xs: vec![x0],
        ys: vec![y0.clone()],
        evaluations: 0,
    };
    let (mut x, mut y) = (x0, y0.clone());
    let mut h = opts.initial_step.abs().min((x1 - x0).abs().max(f64::MIN_POSITIVE)) * dir;
    let mut k1 = f(x, &y)?;
    traj.evaluations += 1;
    let mut steps = 0;
    for &target in &targets {
        while dir * (target - x) > 1e-14 * (1.0 + x.abs()) {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::InvalidInput("ODE integration exceeded the step budget".into()));
            }
            let last = dir * (x + h - target) >= 0.0;
            let hs = if last { target - x } else { h };
            let mut k: Vec<DVector<f64>> = vec![k1.clone()];
            for s in 1..7 {
                let mut ys = y.clone();
                for (j, kj) in k.iter().enumerate() {
                    if A[s][j] != 0.0 {
                        ys.axpy(hs * A[s][j], kj, 1.0);
                    }
                }
                k.push(f(x + C[s] * hs, &ys)?);
                traj.evaluations += 1;
            }
            let mut y5 = y.clone();
            let mut err = DVector::zeros(y.len());
            for s in 0..7 {
                y5.axpy(hs * B5[s], &k[s], 1.0);
                err.axpy(hs * (B5[s] - B4[s]), &k[s], 1.0);
            }
            let mut enorm: f64 = 0.0;
            for i in 0..y.len() {
                let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y5[i].abs());
                enorm = enorm.max((err[i] / sc).abs());
            }
            let factor = if enorm == 0.0 { 5.0 } else { (0.9 * enorm.powf(-0.2)).clamp(0.2, 5.0) };
            if enorm <= 1.0 {
                x = if last { target } else { x + hs };
                y = y5;
                k1 = k.pop().expect("seven stages");
                traj.xs.push(x);
                traj.ys.push(y.clone());
                if !last || factor < 1.0 {
                    h = hs * factor;
                }
            } else {
                h = hs * factor;
            }
            if h.abs() < 1e-14 * (1.0 + x.abs()) {
                return Err(Error::InvalidInput("ODE step size underflow".into()));
            }
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let y0 = DVector::from_vec(vec![1.0, 0.0]);
        let f = |_x: f64, y: &DVector<f64>| Ok(DVector::from_vec(vec![y[1], -y[0]]));
        let t = integrate(f, 0.0, &y0, 2.0 * std::f64::consts::PI, &[1.0], &OdeOptions::default()).unwrap();
        let end = t.ys.last().unwrap();
        assert!((end[0] - 1.0).abs() < 1e-8 && end[1].abs() < 1e-8);
        assert!(t.xs.contains(&1.0));
        let i = t.xs.iter().position(|x| *x == 1.0).unwrap();
        assert!((t.ys[i][0] - 1f64.cos()).abs() < 1e-9);
    }

    #[test]
    fn exponential_growth_meets_tolerance() {
        let y0 = DVector::from_element(1, 1.0);
        let t = integrate(|_, y| Ok(y.clone()), 0.0, &y0, 3.0, &[], &OdeOptions::default()).unwrap();
        let rel = (t.ys.last().unwrap()[0] / 3f64.exp() - 1.0).abs();
        assert!(rel < 1e-9, "{rel}");
        let back = integrate(|_, y| Ok(y.clone()), 3.0, t.ys.last().unwrap(), 0.0, &[], &OdeOptions::default()).unwrap();
        assert!((back.ys.last().unwrap()[0] - 1.0).abs() < 1e-9);
    }
}
