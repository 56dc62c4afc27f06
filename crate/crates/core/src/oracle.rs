//! Brute-force grid discretisations of inhomogeneous operators
//! `T u = A(xi) u + \int K(xi - y; xi) u(y) dy`, singular-value based
//! kernel/cokernel counts, and Weyl sequences for the two ways in which
//! Fredholm properties fail.

use crate::error::{Error, Result};
use crate::kernel::KernelModel;
use crate::linalg::{complex_singular_values, sorted_svd, to_complex, CMatrix, RMatrix};
use crate::quadrature::{adaptive_gk, golden_section, GaussRule};
use crate::symbol::{hyperbolicity_check, CharacteristicFunction};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

type MatrixMap = Arc<dyn Fn(f64) -> RMatrix + Send + Sync>;
type KernelMap = Arc<dyn Fn(f64) -> KernelModel + Send + Sync>;

/// An operator with spatially varying principal part and kernel, and the
/// constant-coefficient operators it approaches at `-infinity` and
/// `+infinity`.
#[derive(Clone)]
pub struct InhomogeneousOperator {
    dimension: usize,
    principal: MatrixMap,
    kernel: KernelMap,
    minus: (RMatrix, KernelModel),
    plus: (RMatrix, KernelModel),
}

impl std::fmt::Debug for InhomogeneousOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InhomogeneousOperator")
            .field("dimension", &self.dimension)
            .field("minus", &self.minus)
            .field("plus", &self.plus)
            .finish()
    }
}

/// Which end of the real line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Minus,
    Plus,
}

impl InhomogeneousOperator {
    pub fn new<P, K>(principal: P, kernel: K, minus: (RMatrix, KernelModel), plus: (RMatrix, KernelModel)) -> Result<Self>
    where
        P: Fn(f64) -> RMatrix + Send + Sync + 'static,
        K: Fn(f64) -> KernelModel + Send + Sync + 'static,
    {
        let n = minus.1.dimension();
        for (a, k) in [&minus, &plus] {
            if a.nrows() != n || a.ncols() != n || k.dimension() != n {
                return Err(Error::InvalidInput("limit operators have inconsistent dimensions".into()));
            }
        }
        let a0 = principal(0.0);
        if a0.nrows() != n || a0.ncols() != n || kernel(0.0).dimension() != n {
            return Err(Error::InvalidInput("principal part or kernel has the wrong dimension".into()));
        }
        Ok(Self {
            dimension: n,
            principal: Arc::new(principal),
            kernel: Arc::new(kernel),
            minus,
            plus,
        })
    }

    /// `T u = A u + k * u` with constant coefficients.
    pub fn constant(a: RMatrix, kernel: KernelModel) -> Result<Self> {
        let (a2, k2) = (a.clone(), kernel.clone());
        Self::new(
            move |_| a2.clone(),
            move |_| k2.clone(),
            (a.clone(), kernel.clone()),
            (a, kernel),
        )
    }

    /// Steady-state operator `T u = -u + k * (a(xi) u)`, written with the
    /// kernel `K(x; xi) = k(x) a(xi)`.
    pub fn steady_state<F>(kernel: KernelModel, coefficient: F, a_minus: RMatrix, a_plus: RMatrix) -> Result<Self>
    where
        F: Fn(f64) -> RMatrix + Send + Sync + 'static,
    {
        let n = kernel.dimension();
        let k2 = kernel.clone();
        Self::new(
            move |_| -RMatrix::identity(n, n),
            move |xi| k2.right_mul(&coefficient(xi)),
            (-RMatrix::identity(n, n), kernel.right_mul(&a_minus)),
            (-RMatrix::identity(n, n), kernel.right_mul(&a_plus)),
        )
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn principal_at(&self, xi: f64) -> RMatrix {
        (self.principal)(xi)
    }

    pub fn kernel_at(&self, xi: f64) -> KernelModel {
        (self.kernel)(xi)
    }

    pub fn limit(&self, side: Side) -> &(RMatrix, KernelModel) {
        match side {
            Side::Minus => &self.minus,
            Side::Plus => &self.plus,
        }
    }

    /// Characteristic function `det(A^pm + K^pm(nu))` of a limit operator.
    pub fn limit_characteristic(&self, side: Side) -> Result<CharacteristicFunction> {
        let (a, k) = self.limit(side);
        CharacteristicFunction::principal_plus_kernel(a.clone(), k.clone())
    }

    /// Distances between the operator at `+-half_length` and its limits.
    pub fn verify_limits(&self, half_length: f64) -> LimitReport {
        let gap = |xi: f64, side: Side| {
            let (a, k) = self.limit(side);
            let principal = (self.principal_at(xi) - a).norm();
            let kx = self.kernel_at(xi);
            let (l1, h1) = kx.support();
            let (l2, h2) = k.support();
            let (lo, hi) = (l1.min(l2), h1.max(h2));
            let n = self.dimension;
            let mut kernel: f64 = 0.0;
            if hi > lo {
                for r in 0..n {
                    for c in 0..n {
                        let v = adaptive_gk(lo, 0.0, 1e-12, 2000, |x: f64| (kx.evaluate(x)[(r, c)] - k.evaluate(x)[(r, c)]).abs()).value
                            + adaptive_gk(0.0, hi, 1e-12, 2000, |x: f64| (kx.evaluate(x)[(r, c)] - k.evaluate(x)[(r, c)]).abs()).value;
                        kernel = kernel.max(v);
                    }
                }
            }
            (principal, kernel)
        };
        let (pm, km) = gap(-half_length, Side::Minus);
        let (pp, kp) = gap(half_length, Side::Plus);
        LimitReport {
            principal_gap_minus: pm,
            principal_gap_plus: pp,
            kernel_gap_minus: km,
            kernel_gap_plus: kp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub principal_gap_minus: f64,
    pub principal_gap_plus: f64,
    pub kernel_gap_minus: f64,
    pub kernel_gap_plus: f64,
}

/// Dense collocation matrix of an operator on `[-L, L]`.
///
/// Unknown `(i, c)` (grid point `i`, component `c`) sits at index
/// `i * dimension + c`.
#[derive(Debug, Clone)]
pub struct GridOperator {
    pub half_length: f64,
    pub points: usize,
    pub dimension: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub matrix: RMatrix,
    /// Rate `eta` of the conjugating weight `e^{eta sqrt(1 + xi^2)}`, if any.
    pub weight_rate: Option<f64>,
}

impl GridOperator {
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / (self.points - 1) as f64
    }

    /// Applies the matrix to a field given as `points x dimension` samples.
    pub fn apply(&self, field: &RMatrix) -> RMatrix {
        let n = self.dimension;
        let flat = DVector::from_fn(self.points * n, |k, _| field[(k / n, k % n)]);
        let out = &self.matrix * flat;
        RMatrix::from_fn(self.points, n, |i, c| out[i * n + c])
    }
}

/// Smoothed weight exponent `eta sqrt(1 + xi^2)`.
pub fn weight_exponent(eta: f64, xi: f64) -> f64 {
    eta * (1.0 + xi * xi).sqrt()
}

/// Trapezoidal collocation of `op` on `N` equispaced points of `[-L, L]`.
pub fn assemble(op: &InhomogeneousOperator, half_length: f64, points: usize) -> Result<GridOperator> {
    assemble_impl(op, half_length, points, None)
}

/// Collocation of the conjugated operator `e^{-W} T e^{W}` with
/// `W(xi) = eta sqrt(1 + xi^2)`; `eta` may be negative.
pub fn assemble_weighted(op: &InhomogeneousOperator, half_length: f64, points: usize, eta: f64) -> Result<GridOperator> {
    assemble_impl(op, half_length, points, Some(eta))
}

fn assemble_impl(op: &InhomogeneousOperator, half_length: f64, points: usize, eta: Option<f64>) -> Result<GridOperator> {
    if !(half_length > 0.0) || points < 2 {
        return Err(Error::InvalidInput(format!("bad grid: L = {half_length}, N = {points}")));
    }
    let h = 2.0 * half_length / (points - 1) as f64;
    let n = op.dimension;
    let nodes: Vec<f64> = (0..points).map(|i| -half_length + h * i as f64).collect();
    let weights: Vec<f64> = (0..points)
        .map(|i| if i == 0 || i == points - 1 { 0.5 * h } else { h })
        .collect();
    let mut matrix = RMatrix::zeros(points * n, points * n);
    for i in 0..points {
        let xi = nodes[i];
        let k = op.kernel_at(xi);
        let scale = k.inverse_length();
        if scale > 0.0 && h >= 1.0 / (4.0 * scale) {
            return Err(Error::GridTooCoarse {
                spacing: h,
                limit: 1.0 / (4.0 * scale),
            });
        }
        let a = op.principal_at(xi);
        for r in 0..n {
            for c in 0..n {
                matrix[(i * n + r, i * n + c)] += a[(r, c)];
            }
        }
        let (lo, hi) = k.support();
        let wi = eta.map(|e| weight_exponent(e, xi));
        for j in 0..points {
            let x = xi - nodes[j];
            if x < lo || x > hi {
                continue;
            }
            let kv = k.evaluate(x);
            let mut w = weights[j];
            if let (Some(e), Some(wi)) = (eta, wi) {
                w *= (weight_exponent(e, nodes[j]) - wi).exp();
            }
            for r in 0..n {
                for c in 0..n {
                    matrix[(i * n + r, j * n + c)] += w * kv[(r, c)];
                }
            }
        }
    }
    Ok(GridOperator {
        half_length,
        points,
        dimension: n,
        nodes,
        weights,
        matrix,
        weight_rate: eta,
    })
}

/// Singular values within this factor of the threshold make the cut
/// ambiguous.
pub const GAP_MARGIN: f64 = 10.0;
/// Default ratio `sigma_max / threshold`.
pub const DEFAULT_GAP_FACTOR: f64 = 1e6;

/// Kernel and cokernel dimensions read off the grid matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub dim_ker: usize,
    pub dim_coker: usize,
    pub index: i64,
    pub threshold: f64,
    pub near_null: usize,
    /// Smallest singular values, increasing.
    pub smallest_singular_values: Vec<f64>,
    pub largest_singular_value: f64,
}

/// Counts near-null singular directions of the truncated operator.
///
/// Singular values below `sigma_max / gap_factor` are near-null. Truncation
/// to `[-L, L]` makes the matrix square, so every near-null singular value
/// has both a right and a left vector; those concentrated near the
/// truncation boundary are artefacts. A near-null right (left) direction
/// counts towards the kernel (cokernel) when most of its mass lies in
/// `|xi| < L / 2`.
pub fn numerical_index(gop: &GridOperator, gap_factor: f64) -> Result<IndexReport> {
    if !(gap_factor > 1.0) {
        return Err(Error::InvalidInput("gap factor must exceed 1".into()));
    }
    let svd = sorted_svd(&gop.matrix);
    let smax = svd.sigma[0];
    let threshold = smax / gap_factor;
    if svd
        .sigma
        .iter()
        .any(|&s| s > threshold / GAP_MARGIN && s < threshold * GAP_MARGIN)
    {
        return Err(Error::NoSpectralGap { threshold });
    }
    let total = svd.sigma.len();
    let k = svd.sigma.iter().filter(|&&s| s < threshold).count();
    let n = gop.dimension;
    let interior: Vec<bool> = (0..gop.points * n)
        .map(|idx| gop.nodes[idx / n].abs() < 0.5 * gop.half_length)
        .collect();
    let count_interior = |vectors: &RMatrix| -> usize {
        if k == 0 {
            return 0;
        }
        let cols = vectors.columns(total - k, k);
        let p = RMatrix::from_fn(k, k, |a, b| {
            (0..cols.nrows())
                .filter(|&r| interior[r])
                .map(|r| cols[(r, a)] * cols[(r, b)])
                .sum()
        });
        SymmetricEigen::new(p).eigenvalues.iter().filter(|&&e| e > 0.5).count()
    };
    let dim_ker = count_interior(&svd.v);
    let dim_coker = count_interior(&svd.u);
    let smallest: Vec<f64> = svd.sigma.iter().rev().take(12).copied().collect();
    Ok(IndexReport {
        dim_ker,
        dim_coker,
        index: dim_ker as i64 - dim_coker as i64,
        threshold,
        near_null: k,
        smallest_singular_values: smallest,
        largest_singular_value: smax,
    })
}

/// One row of a Weyl-sequence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylRow {
    pub n: usize,
    pub residual_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylTable {
    /// Location of the degeneracy (the zero of `A`, or the packet frequency).
    pub location: f64,
    pub rows: Vec<WeylRow>,
}

impl WeylTable {
    /// Strictly decreasing beyond the first entry.
    pub fn strictly_decreasing(&self) -> bool {
        self.rows
            .iter()
            .skip(1)
            .zip(self.rows.iter().skip(2))
            .all(|(a, b)| b.residual_sup < a.residual_sup)
    }
}

fn smin(a: &RMatrix) -> f64 {
    let s = a.clone().singular_values();
    s.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `exp(1 - 1 / (1 - t^2))` on `|t| < 1`, zero outside; peak value 1.
pub fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// Weyl sequence concentrating at a zero of the principal part.
///
/// `search_half_width` bounds the interval scanned for the zero of `A`.
pub fn weyl_demo_principal(op: &InhomogeneousOperator, ns: &[usize], search_half_width: f64) -> Result<WeylTable> {
    let samples = 4001;
    let step = 2.0 * search_half_width / (samples - 1) as f64;
    let (k_best, s_best) = (0..samples)
        .map(|k| (k, smin(&op.principal_at(-search_half_width + step * k as f64))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty scan");
    let centre = -search_half_width + step * k_best as f64;
    let (xi_star, s_star) = golden_section(centre - step, centre + step, 1e-13, |x| smin(&op.principal_at(x)));
    let (xi_star, s_star) = if s_star <= s_best { (xi_star, s_star) } else { (centre, s_best) };
    if s_star > 1e-6 {
        return Err(Error::PrincipalPartInvertible { min_sigma: s_star });
    }
    let svd = sorted_svd(&op.principal_at(xi_star));
    let mut v0 = svd.v.column(op.dimension - 1).into_owned();
    v0 /= v0.amax();
    let rule = GaussRule::new(48);
    let mut rows = Vec::new();
    for &n in ns {
        let width = 1.0 / n as f64;
        let field = |y: f64| bump((y - xi_star) * n as f64);
        let apply = |xi: f64| -> DVector<f64> {
            let k = op.kernel_at(xi);
            let mut acc = DVector::zeros(op.dimension);
            let (a, b) = (xi_star - width, xi_star + width);
            let mut pieces = vec![a, b];
            if xi > a && xi < b {
                pieces.insert(1, xi);
            }
            for w in pieces.windows(2) {
                for (y, wt) in rule.on(w[0], w[1]) {
                    acc += k.evaluate(xi - y) * &v0 * (wt * field(y));
                }
            }
            acc + op.principal_at(xi) * &v0 * field(xi)
        };
        let (lo, hi) = op.kernel_at(xi_star).support();
        let mut sup: f64 = 0.0;
        for k in 0..=800 {
            let xi = xi_star - width + 2.0 * width * k as f64 / 800.0;
            sup = sup.max(apply(xi).amax());
        }
        for k in 0..=1200 {
            let xi = xi_star - width + lo + (hi - lo + 2.0 * width) * k as f64 / 1200.0;
            sup = sup.max(apply(xi).amax());
        }
        rows.push(WeylRow { n, residual_sup: sup });
    }
    Ok(WeylTable { location: xi_star, rows })
}

/// Root frequency and null vector of a non-hyperbolic limit operator.
fn degenerate_limit(op: &InhomogeneousOperator) -> Result<(Side, f64, DVector<Complex64>)> {
    for side in [Side::Plus, Side::Minus] {
        let cf = op.limit_characteristic(side)?;
        let ell_max = cf.auto_ell_max()?;
        let report = hyperbolicity_check(&cf, ell_max, 4001)?;
        if !report.hyperbolic {
            let m = report.argmin;
            let (a, k) = op.limit(side);
            let mat: CMatrix = to_complex(a) + k.symbol(Complex64::new(0.0, m))?;
            let svd = mat.clone().svd(false, true);
            let vt = svd.v_t.expect("right vectors requested");
            let (idx, _) = svd
                .singular_values
                .iter()
                .enumerate()
                .min_by(|x, y| x.1.total_cmp(y.1))
                .expect("non-empty");
            let mut v = vt.row(idx).transpose().map(|z| z.conj());
            let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            v /= Complex64::new(scale, 0.0);
            return Ok((side, m, v));
        }
    }
    Err(Error::LimitsHyperbolic)
}

/// Gaussian wave packets escaping to the non-hyperbolic end.
///
/// `u_N(xi) = exp(-(xi - c_N)^2 / (4 N^2)) e^{i m (xi - c_N)} v` with
/// `c_N = +-N^2`; only the envelope is stretched, so the Fourier transform
/// concentrates at the root frequency `m`.
pub fn weyl_demo_infinity(op: &InhomogeneousOperator, ns: &[usize]) -> Result<WeylTable> {
    let (side, m, v) = degenerate_limit(op)?;
    let sign = if side == Side::Plus { 1.0 } else { -1.0 };
    let rule = GaussRule::new(16);
    let mut rows = Vec::new();
    for &n in ns {
        let nf = n as f64;
        let c = sign * nf * nf;
        let reach = 12.0 * nf;
        let packet = |y: f64| -> Complex64 {
            let t = y - c;
            Complex64::new(0.0, m * t).exp() * (-(t * t) / (4.0 * nf * nf)).exp()
        };
        let spacing = 0.25_f64.min(std::f64::consts::PI / (8.0 * m.abs().max(1e-3)));
        let count = (2.0 * reach / spacing).ceil() as usize;
        let mut sup: f64 = 0.0;
        for p in 0..=count {
            let xi = c - reach + 2.0 * reach * p as f64 / count as f64;
            let k = op.kernel_at(xi);
            let (lo, hi) = k.support();
            let a = (xi - hi).max(c - reach);
            let b = (xi - lo).min(c + reach);
            let mut conv = DVector::<Complex64>::zeros(op.dimension);
            if b > a {
                let mut breaks = vec![a];
                let panels = ((b - a) / 0.5).ceil() as usize;
                for q in 1..panels {
                    breaks.push(a + (b - a) * q as f64 / panels as f64);
                }
                breaks.push(b);
                if xi > a && xi < b {
                    breaks.push(xi);
                    breaks.sort_by(f64::total_cmp);
                }
                for w in breaks.windows(2) {
                    for (y, wt) in rule.on(w[0], w[1]) {
                        let kc = to_complex(&k.evaluate(xi - y));
                        conv += kc * &v * (packet(y) * wt);
                    }
                }
            }
            let total = to_complex(&op.principal_at(xi)) * &v * packet(xi) + conv;
            sup = sup.max(total.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        rows.push(WeylRow { n, residual_sup: sup });
    }
    Ok(WeylTable { location: m, rows })
}

/// Fraction of the Fourier mass `\int |u_N^(l)|^2 dl` of the scalar packet
/// `exp(-t^2 / (4 N^2)) e^{i m t}` lying in `|l - m| < N^{-1/2}`, computed
/// by quadrature of the transform.
pub fn packet_fourier_concentration(n: usize, m: f64) -> f64 {
    let nf = n as f64;
    let reach = 12.0 * nf;
    let rule = GaussRule::new(24);
    let panels = (2.0 * reach / 0.5).ceil() as usize;
    let transform = |l: f64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for q in 0..panels {
            let a = -reach + 2.0 * reach * q as f64 / panels as f64;
            let b = a + 2.0 * reach / panels as f64;
            for (t, w) in rule.on(a, b) {
                acc += Complex64::new(0.0, (m - l) * t).exp() * ((-(t * t) / (4.0 * nf * nf)).exp() * w);
            }
        }
        acc
    };
    let width = 10.0 / nf;
    let window = nf.powf(-0.5);
    let mass = |a: f64, b: f64| adaptive_gk(a, b, 1e-10 * nf, 200, |l: f64| transform(l).norm_sqr()).value;
    let inside = mass(m - window.min(width), m + window.min(width));
    let total = inside + mass(m - width.max(window) - 1.0, m - window.min(width)) + mass(m + window.min(width), m + width.max(window) + 1.0);
    inside / total
}

/// Minimum singular value of the `n x n` complex matrix, exposed for
/// diagnostics of limit operators.
pub fn limit_min_singular_value(op: &InhomogeneousOperator, side: Side, ell: f64) -> Result<f64> {
    let (a, k) = op.limit(side);
    let m = to_complex(a) + k.symbol(Complex64::new(0.0, ell))?;
    Ok(complex_singular_values(&m).last().copied().unwrap_or(0.0))
}

/// Sampled field `points x dimension` from a closure.
pub fn sample(gop: &GridOperator, f: impl Fn(f64, usize) -> f64) -> RMatrix {
    DMatrix::from_fn(gop.points, gop.dimension, |i, c| f(gop.nodes[i], c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{BaseKernel, SampledField};

    fn exp1() -> KernelModel {
        KernelModel::scalar(BaseKernel::TwoSidedExponential { rate: 1.0 }, 1.0).unwrap()
    }
    fn s(a: f64) -> RMatrix {
        RMatrix::from_element(1, 1, a)
    }

    #[test]
    fn identity_assembles_to_identity() {
        let op = InhomogeneousOperator::constant(RMatrix::identity(2, 2), KernelModel::zero(2)).unwrap();
        let g = assemble(&op, 5.0, 51).unwrap();
        assert_eq!(g.matrix, RMatrix::identity(102, 102));
        let r = numerical_index(&g, DEFAULT_GAP_FACTOR).unwrap();
        assert_eq!((r.dim_ker, r.dim_coker, r.index), (0, 0, 0));
    }

    #[test]
    fn constant_operator_on_cosine() {
        let op = InhomogeneousOperator::constant(s(2.0), exp1()).unwrap();
        let g = assemble(&op, 60.0, 6001).unwrap();
        let out = g.apply(&sample(&g, |x, _| x.cos()));
        for i in (2000..4000).step_by(37) {
            assert!((out[(i, 0)] - 2.5 * g.nodes[i].cos()).abs() < 1e-3);
        }
    }

    #[test]
    fn assembly_matches_convolve_grid() {
        let op = InhomogeneousOperator::constant(s(2.0), exp1()).unwrap();
        let g = assemble(&op, 10.0, 401).unwrap();
        let f = sample(&g, |x, _| (-x * x).exp());
        let field = SampledField {
            start: -10.0,
            spacing: g.spacing(),
            values: f.clone(),
        };
        let conv = exp1().convolve_grid(&field);
        let out = g.apply(&f);
        for i in 0..g.points {
            assert!((out[(i, 0)] - (2.0 * f[(i, 0)] + conv.values[(i, 0)])).abs() < 1e-10);
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let op = InhomogeneousOperator::constant(s(2.0), exp1()).unwrap();
        assert!(matches!(assemble(&op, 10.0, 41), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn hyperbolic_constant_steady_state_has_index_zero() {
        let op = InhomogeneousOperator::steady_state(exp1(), |_| s(0.5), s(0.5), s(0.5)).unwrap();
        let g = assemble(&op, 20.0, 401).unwrap();
        let r = numerical_index(&g, DEFAULT_GAP_FACTOR).unwrap();
        assert_eq!((r.dim_ker, r.dim_coker, r.index), (0, 0, 0));
        assert!(r.smallest_singular_values[0] > 0.1);
    }

    #[test]
    fn principal_weyl_requires_a_zero() {
        let op = InhomogeneousOperator::new(|_| s(1.0), |_| exp1(), (s(1.0), exp1()), (s(1.0), exp1())).unwrap();
        assert!(matches!(
            weyl_demo_principal(&op, &[4, 8], 5.0),
            Err(Error::PrincipalPartInvertible { .. })
        ));
    }

    #[test]
    fn infinity_weyl_requires_degenerate_limit() {
        let op = InhomogeneousOperator::steady_state(exp1(), |_| s(0.5), s(0.5), s(0.5)).unwrap();
        assert!(matches!(weyl_demo_infinity(&op, &[2]), Err(Error::LimitsHyperbolic)));
    }

    #[test]
    fn packet_concentrates() {
        let c4 = packet_fourier_concentration(4, 1.0);
        let c16 = packet_fourier_concentration(16, 1.0);
        assert!(c16 > c4);
        assert!(c16 > 1.0 - 1e-6);
    }

    #[test]
    fn bump_profile() {
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.0), 0.0);
        assert!(bump(0.5) > 0.0 && bump(0.5) < 1.0);
    }
}
