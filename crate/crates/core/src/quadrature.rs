//! Quadrature rules and one-dimensional minimisation shared by the modules.

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

/// Values that adaptive quadrature can accumulate.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            if n == 1 {
                p1 = x;
                p0 = 1.0;
            } else {
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// A Gauss–Legendre rule mapped onto an interval.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights on `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<T: QuadValue>(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> T) -> T {
        let mut acc = T::zero();
        for (x, w) in self.on(a, b) {
            acc = acc + f(x) * w;
        }
        acc
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS_K: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const GK_WEIGHTS_G: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 7/15 panel: returns the Kronrod estimate and the
/// difference to the embedded Gauss estimate.
pub fn gk15<T: QuadValue>(a: f64, b: f64, f: &mut impl FnMut(f64) -> T) -> (T, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kron = fc * GK_WEIGHTS_K[7];
    let mut gauss = fc * GK_WEIGHTS_G[3];
    for i in 0..7 {
        let dx = half * GK_NODES[i];
        let s = f(mid - dx) + f(mid + dx);
        kron = kron + s * GK_WEIGHTS_K[i];
        if i % 2 == 1 {
            gauss = gauss + s * GK_WEIGHTS_G[i / 2];
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    let err = (kron - gauss).magnitude();
    (kron, err)
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral<T> {
    pub value: T,
    pub error: f64,
    pub panels: usize,
    pub converged: bool,
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Panels with the largest error estimate are bisected until the summed
/// estimate drops below `abs_tol` or `max_panels` is reached.
pub fn adaptive_gk<T: QuadValue>(
    a: f64,
    b: f64,
    abs_tol: f64,
    max_panels: usize,
    mut f: impl FnMut(f64) -> T,
) -> Integral<T> {
    let (v, e) = gk15(a, b, &mut f);
    let mut panels: Vec<(f64, f64, T, f64)> = vec![(a, b, v, e)];
    loop {
        let total_err: f64 = panels.iter().map(|p| p.3).sum();
        if total_err <= abs_tol || panels.len() >= max_panels {
            let value = panels.iter().fold(T::zero(), |acc, p| acc + p.2);
            return Integral {
                value,
                error: total_err,
                panels: panels.len(),
                converged: total_err <= abs_tol,
            };
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty panel list");
        let (lo, hi, _, _) = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            let value = panels.iter().fold(T::zero(), |acc, p| acc + p.2);
            return Integral {
                value,
                error: total_err,
                panels: panels.len(),
                converged: false,
            };
        }
        let (v1, e1) = gk15(lo, mid, &mut f);
        let (v2, e2) = gk15(mid, hi, &mut f);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
/// Returns `(argmin, min)`.
pub fn golden_section(mut a: f64, mut b: f64, tol: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a).abs() > tol && iterations < 200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    let mut best = (x, fx);
    if fc < best.1 {
        best = (c, fc);
    }
    if fd < best.1 {
        best = (d, fd);
    }
    best
}

/// Samples `f` on a uniform grid of `[a, b]` and refines every interior
/// local minimum with golden-section search. Results are sorted by
/// position.
pub fn local_minima(
    a: f64,
    b: f64,
    samples: usize,
    tol: f64,
    mut f: impl FnMut(f64) -> f64,
) -> Vec<(f64, f64)> {
    let n = samples.max(3);
    let step = (b - a) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| a + step * i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut out = Vec::new();
    for i in 0..n {
        let left = if i == 0 { f64::INFINITY } else { ys[i - 1] };
        let right = if i + 1 == n { f64::INFINITY } else { ys[i + 1] };
        if ys[i] <= left && ys[i] < right {
            let lo = if i == 0 { xs[0] } else { xs[i - 1] };
            let hi = if i + 1 == n { xs[n - 1] } else { xs[i + 1] };
            out.push(golden_section(lo, hi, tol, &mut f));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussRule::new(6);
        // degree 11 is the highest exact degree for six nodes
        let v = rule.integrate(-1.0, 2.0, |x: f64| x.powi(11));
        let exact = (2f64.powi(12) - 1.0) / 12.0;
        assert!((v - exact).abs() < 1e-10 * exact);
        let (_, w) = gauss_legendre(9);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gk_adaptive_handles_kinks_and_complex_values() {
        let r = adaptive_gk(-1.0, 2.0, 1e-12, 500, |x: f64| x.abs());
        assert!(r.converged);
        assert!((r.value - 2.5).abs() < 1e-11);
        let c = adaptive_gk(0.0, std::f64::consts::PI, 1e-12, 500, |x: f64| {
            Complex64::new(0.0, x).exp()
        });
        assert!((c.value - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn golden_section_finds_v_shaped_minimum() {
        let (x, y) = golden_section(0.0, 3.0, 1e-12, |x| (x - 1.234567).abs());
        assert!((x - 1.234567).abs() < 1e-10);
        assert!(y < 1e-10);
        let mins = local_minima(-4.0, 4.0, 81, 1e-10, |x| (x * x - 1.0).abs());
        assert_eq!(mins.len(), 2);
        assert!((mins[0].0 + 1.0).abs() < 1e-8 && (mins[1].0 - 1.0).abs() < 1e-8);
    }
}
