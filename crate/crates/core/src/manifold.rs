//! A numerical centre manifold for `-v + K*v + K*g(v) = 0`.
//!
//! The wave-train equation `0 = -u + k*(A u + N(u))` is the special case
//! `v = u`, `K = k A`, `g = A^{-1} N`. The kernel `E0` of `T = -I + K*` is
//! spanned by `cos(omega_* xi) v_*` and `sin(omega_* xi) v_*`. On a truncated,
//! exponentially weighted grid the bordered system `(T v, Q v) = (f, v0)` is
//! factorised once; the manifold `Phi(v0)` is the fixed point of
//! `v = T~^{-1}(-K*g^eps(v), v0)` and the reduced vector field is
//! `h(v0) = Q(K' * (v + g^eps(v)))` evaluated at `v = Phi(v0)`.
//!
//! Convolutions use product integration: on each panel of
//! [`PANEL_DEGREE`] cells the density is replaced by its interpolating
//! polynomial and integrated against the kernel with Gauss–Legendre rules on
//! every cell, split at the kernel's kinks.

use crate::error::{Error, Result};
use crate::flow::smoothstep;
use crate::kernel::{BaseKernel, KernelModel};
use crate::linalg::RMatrix;
use crate::nonlinearity::Nonlinearity;
use crate::ode::{integrate, OdeOptions, Trajectory};
use crate::quadrature::GaussRule;
use crate::wavetrain::{evaluate, ReducedData, WaveProblem};
use nalgebra::{DVector, Matrix2, Vector2, LU};
use std::f64::consts::PI;

pub const PANEL_DEGREE: usize = 6;
const CELL_NODES: usize = 10;
/// Minimal domain length in periods of the kernel modes.
pub const MIN_PERIODS: f64 = 8.0;

/// The equation in `v` form: kernel `K = k A` and nonlinearity `g`.
#[derive(Debug, Clone)]
pub struct VForm {
    pub kernel: KernelModel,
    pub g: Nonlinearity,
}

impl VForm {
    pub fn new(kernel: KernelModel, g: Nonlinearity) -> Self {
        Self { kernel, g }
    }

    pub fn from_wave_problem(p: &WaveProblem) -> Result<Self> {
        let inv = p
            .principal()
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("A must be invertible".into()))?;
        Ok(Self {
            kernel: p.kernel().right_mul(p.principal()),
            g: p.nonlinearity().premultiplied(inv),
        })
    }

    pub fn dimension(&self) -> usize {
        self.kernel.dimension()
    }
}

/// Uniform grid on `[-L, L]` with weight `exp(-eta sqrt(1 + xi^2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGrid {
    pub half_length: f64,
    pub points: usize,
    pub eta: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl WeightedGrid {
    /// `points - 1` must be a multiple of [`PANEL_DEGREE`].
    pub fn new(half_length: f64, points: usize, eta: f64) -> Result<Self> {
        if !(half_length > 0.0 && eta > 0.0) || points < 2 * PANEL_DEGREE + 1 || !(points - 1).is_multiple_of(PANEL_DEGREE) {
            return Err(Error::InvalidInput(format!(
                "grid needs L > 0, eta > 0 and points = 1 mod {PANEL_DEGREE} (got L = {half_length}, N = {points}, eta = {eta})"
            )));
        }
        let h = 2.0 * half_length / (points - 1) as f64;
        let nodes: Vec<f64> = (0..points).map(|i| -half_length + h * i as f64).collect();
        let weights = nodes.iter().map(|x| (-eta * (1.0 + x * x).sqrt()).exp()).collect();
        Ok(Self {
            half_length,
            points,
            eta,
            nodes,
            weights,
        })
    }

    /// Grid covering `periods` periods of `cos(omega_* xi)` with roughly the
    /// requested number of points (rounded up to a panel multiple).
    pub fn for_frequency(omega_star: f64, periods: f64, points: usize, eta: f64) -> Result<Self> {
        if periods < MIN_PERIODS {
            return Err(Error::InvalidInput(format!("at least {MIN_PERIODS} periods are required")));
        }
        let n = (points.max(2) - 1).div_ceil(PANEL_DEGREE) * PANEL_DEGREE + 1;
        Self::new(periods * 2.0 * PI / omega_star, n, eta)
    }

    pub fn spacing(&self) -> f64 {
        self.nodes[1] - self.nodes[0]
    }

    /// `max_i |v(xi_i)| w(xi_i)` for a field stored point-major.
    pub fn weighted_norm(&self, field: &DVector<f64>) -> f64 {
        let n = field.len() / self.points;
        (0..field.len()).fold(0.0_f64, |m, k| m.max(field[k].abs() * self.weights[k / n]))
    }
}

/// Lagrange basis of a panel (nodes `0..=PANEL_DEGREE`) at local coordinate `s`.
fn lagrange(s: f64) -> [f64; PANEL_DEGREE + 1] {
    let mut out = [1.0; PANEL_DEGREE + 1];
    for (m, o) in out.iter_mut().enumerate() {
        for j in 0..=PANEL_DEGREE {
            if j != m {
                *o *= (s - j as f64) / (m as f64 - j as f64);
            }
        }
    }
    out
}

/// Product-integration weights `W[i, j]` with
/// `int_{-L}^{L} k(t - y) f(y) dy ~ sum_j W[i, j] f(xi_j)` at `t = targets[i]`
/// (or with `k'` when `derivative` is set).
pub fn product_weights(grid: &WeightedGrid, base: &BaseKernel, derivative: bool, targets: &[f64]) -> RMatrix {
    let n = grid.points;
    let h = grid.spacing();
    let rule = GaussRule::new(CELL_NODES);
    let unit: Vec<(f64, f64)> = rule.on(0.0, 1.0).collect();
    let table: Vec<Vec<[f64; PANEL_DEGREE + 1]>> = (0..PANEL_DEGREE)
        .map(|lc| unit.iter().map(|(s, _)| lagrange(lc as f64 + s)).collect())
        .collect();
    let kval = |x: f64| if derivative { base.derivative(x) } else { base.value(x) };
    let (lo, hi) = base.support();
    let mut w = RMatrix::zeros(targets.len(), n);
    for (i, &t) in targets.iter().enumerate() {
        let ymin = (t - hi).max(-grid.half_length);
        let ymax = (t - lo).min(grid.half_length);
        if ymin >= ymax {
            continue;
        }
        let c0 = (((ymin + grid.half_length) / h).floor() as usize).min(n - 2);
        let c1 = (((ymax + grid.half_length) / h).ceil() as usize).min(n - 1);
        for c in c0..c1 {
            let (p, lc) = (c / PANEL_DEGREE, c % PANEL_DEGREE);
            let first = p * PANEL_DEGREE;
            let (a, b) = (grid.nodes[c], grid.nodes[c + 1]);
            let mut cuts: Vec<f64> = base
                .kinks()
                .iter()
                .map(|k| t - k)
                .filter(|y| *y > a + 1e-12 * h && *y < b - 1e-12 * h)
                .collect();
            if cuts.is_empty() {
                for (g, (s, wg)) in unit.iter().enumerate() {
                    let f = h * wg * kval(t - (a + h * s));
                    let l = &table[lc][g];
                    for m in 0..=PANEL_DEGREE {
                        w[(i, first + m)] += f * l[m];
                    }
                }
            } else {
                cuts.sort_by(f64::total_cmp);
                let mut edges = vec![a];
                edges.extend(cuts);
                edges.push(b);
                for pair in edges.windows(2) {
                    for (y, wg) in rule.on(pair[0], pair[1]) {
                        let l = lagrange((y - grid.nodes[first]) / h);
                        let f = wg * kval(t - y);
                        for m in 0..=PANEL_DEGREE {
                            w[(i, first + m)] += f * l[m];
                        }
                    }
                }
            }
        }
    }
    w
}

/// Matrix of `v -> K * v` (or `K' * v`) on the grid, point-major layout.
pub fn convolution_matrix(grid: &WeightedGrid, kernel: &KernelModel, derivative: bool) -> RMatrix {
    let n = kernel.dimension();
    let np = grid.points;
    let mut out = RMatrix::zeros(np * n, np * n);
    for (coef, base) in kernel.terms() {
        let w = product_weights(grid, base, derivative, &grid.nodes);
        if n == 1 {
            out += w * coef[(0, 0)];
            continue;
        }
        for i in 0..np {
            for j in 0..np {
                let wij = w[(i, j)];
                if wij == 0.0 {
                    continue;
                }
                for a in 0..n {
                    for b in 0..n {
                        out[(i * n + a, j * n + b)] += wij * coef[(a, b)];
                    }
                }
            }
        }
    }
    out
}

/// Basis `e0 = cos(omega_* xi) v_*`, `e1 = sin(omega_* xi) v_*` of the kernel
/// and biorthogonal functionals `q0`, `q1`.
///
/// The functionals are trapezoidal discretisations of
/// `v -> int G(xi) trig(omega_* xi) <v_ad, v(xi)> dxi` with a Gaussian window
/// `G`, multiplied by the inverse Gram matrix so that `q_i(e_j) = delta_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBasisE0 {
    pub omega_star: f64,
    pub v_star: DVector<f64>,
    pub v_ad: DVector<f64>,
    pub window_scale: f64,
    pub e: [DVector<f64>; 2],
    pub q: RMatrix,
    gram_inverse: Matrix2<f64>,
    nodes: Vec<f64>,
    trapezoid: Vec<f64>,
}

impl KernelBasisE0 {
    /// `window_scale` defaults to `L / 7`.
    pub fn new(grid: &WeightedGrid, rd: &ReducedData, window_scale: Option<f64>) -> Result<Self> {
        let n = rd.v_star.len();
        let s = window_scale.unwrap_or(grid.half_length / 7.0);
        if !(s > 0.0) {
            return Err(Error::InvalidInput("window scale must be positive".into()));
        }
        let w = rd.omega_star;
        let field = |f: &dyn Fn(f64) -> f64| {
            DVector::from_fn(grid.points * n, |k, _| f(grid.nodes[k / n]) * rd.v_star[k % n])
        };
        let e = [field(&|x| (w * x).cos()), field(&|x| (w * x).sin())];
        let h = grid.spacing();
        let trapezoid: Vec<f64> = (0..grid.points)
            .map(|i| if i == 0 || i == grid.points - 1 { 0.5 * h } else { h })
            .collect();
        let mut basis = Self {
            omega_star: w,
            v_star: rd.v_star.clone(),
            v_ad: rd.v_ad.clone(),
            window_scale: s,
            e,
            q: RMatrix::zeros(2, grid.points * n),
            gram_inverse: Matrix2::identity(),
            nodes: grid.nodes.clone(),
            trapezoid,
        };
        let raw = basis.raw_functionals(0.0);
        let gram = Matrix2::from_fn(|k, l| raw.row(k).dot(&basis.e[l].transpose()));
        basis.gram_inverse = gram
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("kernel basis is not resolved by the window".into()))?;
        basis.q = basis.apply_gram(&raw);
        Ok(basis)
    }

    fn raw_functionals(&self, shift: f64) -> RMatrix {
        let n = self.v_ad.len();
        let (w, s) = (self.omega_star, self.window_scale);
        RMatrix::from_fn(2, self.nodes.len() * n, |k, idx| {
            let x = self.nodes[idx / n] - shift;
            let window = (-0.5 * (x / s).powi(2)).exp();
            let trig = if k == 0 { (w * x).cos() } else { (w * x).sin() };
            self.trapezoid[idx / n] * window * trig * self.v_ad[idx % n]
        })
    }

    fn apply_gram(&self, raw: &RMatrix) -> RMatrix {
        let mut q = RMatrix::zeros(2, raw.ncols());
        for k in 0..2 {
            for l in 0..2 {
                let mut row = q.row_mut(k);
                row += raw.row(l) * self.gram_inverse[(k, l)];
            }
        }
        q
    }

    pub fn project(&self, field: &DVector<f64>) -> Vector2<f64> {
        let r = &self.q * field;
        Vector2::new(r[0], r[1])
    }

    /// `Q(tau_x v)` with `(tau_x v)(xi) = v(xi + x)`, evaluated by shifting
    /// the functionals instead of the field.
    pub fn project_shifted(&self, field: &DVector<f64>, x: f64) -> Vector2<f64> {
        let r = self.apply_gram(&self.raw_functionals(x)) * field;
        Vector2::new(r[0], r[1])
    }

    pub fn embed(&self, v0: &Vector2<f64>) -> DVector<f64> {
        &self.e[0] * v0[0] + &self.e[1] * v0[1]
    }

    /// Rotation of `E0` coordinates induced by the translation `tau_{theta / omega_*}`.
    pub fn rotation(theta: f64) -> Matrix2<f64> {
        let (s, c) = theta.sin_cos();
        Matrix2::new(c, s, -s, c)
    }
}

/// Smooth indicator: `1` on `[0, 1]`, `0` on `[2, inf)` and
/// `1 - S(S(r - 1))` in between, `S(t) = 3t^2 - 2t^3`.
pub fn cutoff_chi(r: f64) -> f64 {
    1.0 - smoothstep(smoothstep((r - 1.0).clamp(0.0, 1.0)))
}

fn cutoff_chi_derivative(r: f64) -> f64 {
    if r <= 1.0 || r >= 2.0 {
        return 0.0;
    }
    let t = r - 1.0;
    let s = smoothstep(t);
    -(6.0 * s * (1.0 - s)) * (6.0 * t * (1.0 - t))
}

/// `g^eps(v) = g(chi(|v| / eps) v)`.
#[derive(Debug, Clone)]
pub struct CutoffNonlinearity {
    pub g: Nonlinearity,
    pub epsilon: f64,
}

impl CutoffNonlinearity {
    pub fn new(g: Nonlinearity, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidInput("cutoff scale must be positive".into()));
        }
        Ok(Self { g, epsilon })
    }

    pub fn value(&self, v: &DVector<f64>) -> DVector<f64> {
        let r = v.norm() / self.epsilon;
        if r <= 1.0 {
            self.g.value(v)
        } else {
            self.g.value(&(v * cutoff_chi(r)))
        }
    }

    pub fn jacobian(&self, v: &DVector<f64>) -> RMatrix {
        let norm = v.norm();
        let r = norm / self.epsilon;
        if r <= 1.0 {
            return self.g.jacobian(v);
        }
        let chi = cutoff_chi(r);
        let n = v.len();
        let dchi = cutoff_chi_derivative(r) / (self.epsilon * norm);
        let inner = RMatrix::identity(n, n) * chi + v * v.transpose() * dchi;
        self.g.jacobian(&(v * chi)) * inner
    }

    /// Applies the cutoff nonlinearity pointwise to a point-major field.
    pub fn apply_field(&self, field: &DVector<f64>, n: usize) -> DVector<f64> {
        let mut out = DVector::zeros(field.len());
        for p in 0..field.len() / n {
            let v = field.rows(p * n, n).into_owned();
            out.rows_mut(p * n, n).copy_from(&self.value(&v));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BorderedReport {
    pub size: usize,
    /// Weighted sup norm of `T e_k` over the whole grid.
    pub kernel_residual_weighted: f64,
    /// Sup norm of `T e_k` where the truncated convolution is complete.
    pub kernel_residual_interior: f64,
    /// Normwise backward error `|B x - b| / (|B| |x| + |b|)` of a test solve.
    pub solve_residual: f64,
}

/// The factorised bordered matrix
/// `[W M W^{-1}, Y; Q W^{-1}, 0]` in weighted unknowns `W v`.
///
/// `M` is the grid matrix of `T`; the two columns `Y` span the boundary
/// residuals `M e_k` (weighted, orthonormalised) and absorb the
/// truncation defect, so that the kernel fields solve the homogeneous
/// bordered equation exactly up to interior quadrature error.
pub struct BorderedSolve {
    pub grid: WeightedGrid,
    pub basis: KernelBasisE0,
    pub dimension: usize,
    pub kmat: RMatrix,
    pub dmat: RMatrix,
    pub report: BorderedReport,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    interior: f64,
}

impl std::fmt::Debug for BorderedSolve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BorderedSolve").field("report", &self.report).finish()
    }
}

pub fn build_bordered(vf: &VForm, grid: &WeightedGrid, basis: &KernelBasisE0) -> Result<BorderedSolve> {
    let n = vf.dimension();
    let np = grid.points;
    let size = np * n;
    if basis.e[0].len() != size {
        return Err(Error::InvalidInput("basis and grid do not match".into()));
    }
    let eta0 = vf.kernel.decay_rate();
    if grid.eta >= eta0 {
        return Err(Error::InvalidInput(format!(
            "weight exponent {} must be below the kernel decay rate {eta0}",
            grid.eta
        )));
    }
    let (lo, hi) = vf.kernel.support();
    let reach = lo.abs().max(hi.abs());
    let interior = grid.half_length - reach;
    if interior < 0.25 * grid.half_length {
        return Err(Error::InvalidInput(format!(
            "domain half-length {} is too short for the kernel reach {reach}",
            grid.half_length
        )));
    }
    let h = grid.spacing();
    let limit = 0.25 / vf.kernel.inverse_length();
    if h >= limit {
        return Err(Error::GridTooCoarse { spacing: h, limit });
    }
    let kmat = convolution_matrix(grid, &vf.kernel, false);
    let dmat = convolution_matrix(grid, &vf.kernel, true);
    let mut y = RMatrix::zeros(size, 2);
    let (mut res_w, mut res_i): (f64, f64) = (0.0, 0.0);
    for k in 0..2 {
        let r = &kmat * &basis.e[k] - &basis.e[k];
        res_w = res_w.max(grid.weighted_norm(&r));
        for idx in 0..size {
            let x = grid.nodes[idx / n];
            if x.abs() <= interior {
                res_i = res_i.max(r[idx].abs());
            } else {
                y[(idx, k)] = r[idx] * grid.weights[idx / n];
            }
        }
    }
    // orthonormalise the boundary columns
    for k in 0..2 {
        for l in 0..k {
            let proj = y.column(l).dot(&y.column(k));
            let cl = y.column(l).into_owned();
            y.column_mut(k).axpy(-proj, &cl, 1.0);
        }
        let norm = y.column(k).norm();
        if norm < 1e-14 {
            return Err(Error::BorderedSingular { residual: norm });
        }
        y.column_mut(k).scale_mut(1.0 / norm);
    }
    let mut b = RMatrix::zeros(size + 2, size + 2);
    for i in 0..size {
        let wi = grid.weights[i / n];
        for j in 0..size {
            let m = kmat[(i, j)] - if i == j { 1.0 } else { 0.0 };
            if m != 0.0 {
                b[(i, j)] = m * wi / grid.weights[j / n];
            }
        }
        b[(i, size)] = y[(i, 0)];
        b[(i, size + 1)] = y[(i, 1)];
    }
    for k in 0..2 {
        for j in 0..size {
            b[(size + k, j)] = basis.q[(k, j)] / grid.weights[j / n];
        }
    }
    let test_rhs = DVector::from_fn(size + 2, |i, _| 1.0 + 0.5 * ((i as f64) * 0.37).sin());
    let lu = b.clone().lu();
    let sol = lu.solve(&test_rhs).ok_or(Error::BorderedSingular { residual: f64::INFINITY })?;
    let b_norm = b.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let solve_residual = (&b * &sol - &test_rhs).amax() / (b_norm * sol.amax() + test_rhs.amax());
    if !solve_residual.is_finite() || solve_residual > 1e-11 {
        return Err(Error::BorderedSingular { residual: solve_residual });
    }
    Ok(BorderedSolve {
        grid: grid.clone(),
        basis: basis.clone(),
        dimension: n,
        kmat,
        dmat,
        report: BorderedReport {
            size: size + 2,
            kernel_residual_weighted: res_w,
            kernel_residual_interior: res_i,
            solve_residual,
        },
        lu,
        interior,
    })
}

impl BorderedSolve {
    /// Solves `T v + (boundary correction) = f`, `Q v = v0`.
    pub fn solve(&self, f: &DVector<f64>, v0: &Vector2<f64>) -> Result<DVector<f64>> {
        let size = f.len();
        let n = self.dimension;
        let mut rhs = DVector::zeros(size + 2);
        for i in 0..size {
            rhs[i] = f[i] * self.grid.weights[i / n];
        }
        rhs[size] = v0[0];
        rhs[size + 1] = v0[1];
        let x = self.lu.solve(&rhs).ok_or(Error::BorderedSingular { residual: f64::INFINITY })?;
        Ok(DVector::from_fn(size, |i, _| x[i] / self.grid.weights[i / n]))
    }

    /// Half-width of the region where the truncated convolution is complete.
    pub fn interior_half_width(&self) -> f64 {
        self.interior
    }

    /// Weighted-norm bound `max_i sum_j |(W T~^{-1} W^{-1})_{ij}|` of the
    /// inverse restricted to the field block (dense, use on small grids).
    pub fn inverse_norm(&self) -> f64 {
        let size = self.grid.points * self.dimension;
        let mut worst: f64 = 0.0;
        let mut rows = vec![0.0; size];
        for j in 0..size {
            let mut e = DVector::zeros(size + 2);
            e[j] = 1.0;
            let col = self.lu.solve(&e).expect("factorisation checked on construction");
            for i in 0..size {
                rows[i] += col[i].abs();
            }
        }
        for r in rows {
            worst = worst.max(r);
        }
        worst
    }

    /// Fields sampled at the grid nodes.
    pub fn sample(&self, f: impl Fn(f64) -> DVector<f64>) -> DVector<f64> {
        let n = self.dimension;
        let mut out = DVector::zeros(self.grid.points * n);
        for (i, &x) in self.grid.nodes.iter().enumerate() {
            out.rows_mut(i * n, n).copy_from(&f(x));
        }
        out
    }
}

/// A point `Phi(v0)` of the manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiSolution {
    pub v0: Vector2<f64>,
    pub field: DVector<f64>,
    pub iterations: usize,
    /// Largest observed ratio of successive Picard updates.
    pub contraction_ratio: f64,
}

impl PhiSolution {
    /// `Psi(v0) = Phi(v0) - v0`.
    pub fn psi(&self, basis: &KernelBasisE0) -> DVector<f64> {
        &self.field - basis.embed(&self.v0)
    }
}

/// Picard iteration of `v <- T~^{-1}(-K*g^eps(v), v0)`.
pub fn fixed_point_phi(bs: &BorderedSolve, geps: &CutoffNonlinearity, v0: &Vector2<f64>, guess: Option<&DVector<f64>>) -> Result<PhiSolution> {
    let size = bs.grid.points * bs.dimension;
    if v0.norm() == 0.0 {
        return Ok(PhiSolution {
            v0: *v0,
            field: DVector::zeros(size),
            iterations: 0,
            contraction_ratio: 0.0,
        });
    }
    let mut v = match guess {
        Some(g) => g.clone(),
        None => bs.basis.embed(v0),
    };
    let mut prev: Option<f64> = None;
    let mut ratio_max: f64 = 0.0;
    let mut bad = 0;
    for it in 1..=300 {
        let rhs = -(&bs.kmat * geps.apply_field(&v, bs.dimension));
        let next = bs.solve(&rhs, v0)?;
        let change = bs.grid.weighted_norm(&(&next - &v));
        let scale = bs.grid.weighted_norm(&next);
        v = next;
        if change <= 1e-14 * scale {
            return Ok(PhiSolution {
                v0: *v0,
                field: v,
                iterations: it,
                contraction_ratio: ratio_max,
            });
        }
        if let Some(p) = prev {
            if p > 1e-12 * scale {
                let ratio = change / p;
                ratio_max = ratio_max.max(ratio);
                if ratio >= 1.0 {
                    bad += 1;
                    if bad >= 3 {
                        return Err(Error::NotContracting { ratio });
                    }
                } else {
                    bad = 0;
                }
            } else if change >= p {
                // stagnation at round-off level
                return Ok(PhiSolution {
                    v0: *v0,
                    field: v,
                    iterations: it,
                    contraction_ratio: ratio_max,
                });
            }
        }
        prev = Some(change);
    }
    Err(Error::NotContracting { ratio: ratio_max })
}

/// `Phi'` from the smoothing representation `K' * (Id + g^eps)(Phi)`.
pub fn phi_derivative(bs: &BorderedSolve, geps: &CutoffNonlinearity, phi: &DVector<f64>) -> DVector<f64> {
    &bs.dmat * (phi + geps.apply_field(phi, bs.dimension))
}

/// `h(v0) = Q Phi'(v0)`; returns the manifold point as well.
pub fn reduced_vector_field(
    bs: &BorderedSolve,
    geps: &CutoffNonlinearity,
    v0: &Vector2<f64>,
    guess: Option<&DVector<f64>>,
) -> Result<(Vector2<f64>, PhiSolution)> {
    let phi = fixed_point_phi(bs, geps, v0, guess)?;
    Ok((bs.basis.project(&phi_derivative(bs, geps, &phi.field)), phi))
}

/// Central finite-difference Jacobian of `h` at the origin.
pub fn linearization(bs: &BorderedSolve, geps: &CutoffNonlinearity, delta: f64) -> Result<Matrix2<f64>> {
    let mut jac = Matrix2::zeros();
    for k in 0..2 {
        let mut e = Vector2::zeros();
        e[k] = delta;
        let hp = reduced_vector_field(bs, geps, &e, None)?.0;
        let hm = reduced_vector_field(bs, geps, &(-e), None)?.0;
        jac.set_column(k, &((hp - hm) / (2.0 * delta)));
    }
    Ok(jac)
}

/// Eigenvalues of a real 2x2 matrix as `(re, im)` pairs.
pub fn eigenvalues_2x2(m: &Matrix2<f64>) -> [(f64, f64); 2] {
    let tr = m.trace();
    let det = m.determinant();
    let disc = 0.25 * tr * tr - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [(0.5 * tr + r, 0.0), (0.5 * tr - r, 0.0)]
    } else {
        let r = (-disc).sqrt();
        [(0.5 * tr, r), (0.5 * tr, -r)]
    }
}

/// `max |h(R_theta v) - R_theta h(v)|` over the given points and angles.
pub fn equivariance_error(bs: &BorderedSolve, geps: &CutoffNonlinearity, points: &[Vector2<f64>], angles: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for v in points {
        let (hv, phi) = reduced_vector_field(bs, geps, v, None)?;
        for &theta in angles {
            let r = KernelBasisE0::rotation(theta);
            let (hr, _) = reduced_vector_field(bs, geps, &(r * v), Some(&phi.field))?;
            worst = worst.max((hr - r * hv).amax());
        }
    }
    Ok(worst)
}

/// Integrates `v' = h(v)` from `v0` over `[0, x_end]` with warm-started
/// fixed-point solves.
pub fn reduced_orbit(
    bs: &BorderedSolve,
    geps: &CutoffNonlinearity,
    v0: &Vector2<f64>,
    x_end: f64,
    stops: &[f64],
    opts: &OdeOptions,
) -> Result<Trajectory> {
    let mut cache: Option<(Vector2<f64>, DVector<f64>)> = None;
    let rhs = |_x: f64, y: &DVector<f64>| -> Result<DVector<f64>> {
        let v = Vector2::new(y[0], y[1]);
        let guess = cache.as_ref().map(|(w, phi)| phi + bs.basis.embed(&(v - w)));
        let (h, phi) = reduced_vector_field(bs, geps, &v, guess.as_ref())?;
        cache = Some((v, phi.field));
        Ok(DVector::from_vec(vec![h[0], h[1]]))
    };
    integrate(rhs, 0.0, &DVector::from_vec(vec![v0[0], v0[1]]), x_end, stops, opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSample {
    pub x: f64,
    pub ode: Vector2<f64>,
    pub shifted: Vector2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowCheck {
    pub samples: Vec<FlowSample>,
    pub max_discrepancy: f64,
    pub evaluations: usize,
}

/// Compares the reduced flow from `v0` with `Q(tau_x Phi(v0))` at the
/// (increasing, positive) sample positions `xs`.
pub fn reduced_flow_check(bs: &BorderedSolve, geps: &CutoffNonlinearity, v0: &Vector2<f64>, xs: &[f64], opts: &OdeOptions) -> Result<FlowCheck> {
    let phi = fixed_point_phi(bs, geps, v0, None)?;
    let x_end = xs.iter().copied().fold(0.0, f64::max);
    let traj = if x_end > 0.0 {
        reduced_orbit(bs, geps, v0, x_end, xs, opts)?
    } else {
        Trajectory {
            xs: vec![0.0],
            ys: vec![DVector::from_vec(vec![v0[0], v0[1]])],
            evaluations: 0,
        }
    };
    compare_flow(bs, &phi, &traj, xs)
}

fn compare_flow(bs: &BorderedSolve, phi: &PhiSolution, traj: &Trajectory, xs: &[f64]) -> Result<FlowCheck> {
    let mut samples = Vec::new();
    let mut worst: f64 = 0.0;
    for &x in xs {
        let idx = traj
            .xs
            .iter()
            .position(|t| *t == x)
            .ok_or_else(|| Error::InvalidInput(format!("sample position {x} was not reached")))?;
        let y = &traj.ys[idx];
        let ode = Vector2::new(y[0], y[1]);
        let shifted = bs.basis.project_shifted(&phi.field, x);
        worst = worst.max((ode - shifted).amax());
        samples.push(FlowSample { x, ode, shifted });
    }
    Ok(FlowCheck {
        samples,
        max_discrepancy: worst,
        evaluations: traj.evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitPeriod {
    pub period: f64,
    pub omega: f64,
    pub evaluations: usize,
}

/// Period of the `h`-orbit through `v0` (the first return of the polar
/// angle after a full turn), located by secant iteration on the unwrapped angle.
pub fn orbit_period(bs: &BorderedSolve, geps: &CutoffNonlinearity, v0: &Vector2<f64>, opts: &OdeOptions) -> Result<OrbitPeriod> {
    if v0.norm() == 0.0 {
        return Err(Error::InvalidInput("the origin is an equilibrium".into()));
    }
    let guess = 2.0 * PI / bs.basis.omega_star;
    let traj = reduced_orbit(bs, geps, v0, 1.25 * guess, &[], opts)?;
    period_from_trajectory(bs, geps, &traj, opts)
}

fn period_from_trajectory(bs: &BorderedSolve, geps: &CutoffNonlinearity, traj: &Trajectory, opts: &OdeOptions) -> Result<OrbitPeriod> {
    let mut evaluations = traj.evaluations;
    let angle = |y: &DVector<f64>| y[1].atan2(y[0]);
    let wrap = |d: f64| (d + PI).rem_euclid(2.0 * PI) - PI;
    let mut unwrapped = vec![angle(&traj.ys[0])];
    for k in 1..traj.ys.len() {
        let prev = unwrapped[k - 1];
        unwrapped.push(prev + wrap(angle(&traj.ys[k]) - angle(&traj.ys[k - 1])));
    }
    let turn = |u: f64| (u - unwrapped[0]).abs() - 2.0 * PI;
    let k = (1..unwrapped.len())
        .find(|&k| turn(unwrapped[k]) >= 0.0)
        .ok_or_else(|| Error::InvalidInput("orbit did not close on the integration interval".into()))?;
    let (x_base, y_base, u_base) = (traj.xs[k - 1], traj.ys[k - 1].clone(), unwrapped[k - 1]);
    let mut eval = |x: f64| -> Result<f64> {
        let v = Vector2::new(y_base[0], y_base[1]);
        let t = reduced_orbit(bs, geps, &v, x - x_base, &[], opts)?;
        evaluations += t.evaluations;
        let y = t.ys.last().expect("non-empty trajectory");
        Ok(turn(u_base + wrap(angle(y) - angle(&y_base))))
    };
    let (mut x0, mut x1) = (x_base, traj.xs[k]);
    let (mut f0, mut f1) = (turn(u_base), turn(unwrapped[k]));
    for _ in 0..40 {
        if f1.abs() < 1e-13 || f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        let f2 = eval(x2)?;
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
    }
    Ok(OrbitPeriod {
        period: x1,
        omega: 2.0 * PI / x1,
        evaluations,
    })
}

/// Flow comparison at `samples` equispaced points of one linear period and
/// the orbit period, from a single integration of the reduced equation.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitAnalysis {
    pub flow: FlowCheck,
    pub period: OrbitPeriod,
}

pub fn orbit_analysis(bs: &BorderedSolve, geps: &CutoffNonlinearity, v0: &Vector2<f64>, samples: usize, opts: &OdeOptions) -> Result<OrbitAnalysis> {
    if v0.norm() == 0.0 || samples == 0 {
        return Err(Error::InvalidInput("orbit analysis needs v0 != 0 and at least one sample".into()));
    }
    let linear = 2.0 * PI / bs.basis.omega_star;
    let xs: Vec<f64> = (1..=samples).map(|k| linear * k as f64 / samples as f64).collect();
    let phi = fixed_point_phi(bs, geps, v0, None)?;
    let traj = reduced_orbit(bs, geps, v0, 1.25 * linear, &xs, opts)?;
    let flow = compare_flow(bs, &phi, &traj, &xs)?;
    let period = period_from_trajectory(bs, geps, &traj, opts)?;
    Ok(OrbitAnalysis { flow, period })
}

/// Samples the wave train `u(omega xi)` with cosine coefficients `coeffs`.
pub fn sample_wavetrain(bs: &BorderedSolve, omega: f64, coeffs: &RMatrix) -> DVector<f64> {
    bs.sample(|x| evaluate(coeffs, omega * x))
}

/// `max |a(xi) - b(xi)|` over `|xi| <= half_width`.
pub fn window_difference(grid: &WeightedGrid, a: &DVector<f64>, b: &DVector<f64>, half_width: f64) -> f64 {
    let n = a.len() / grid.points;
    (0..a.len())
        .filter(|k| grid.nodes[k / n].abs() <= half_width)
        .fold(0.0_f64, |m, k| m.max((a[k] - b[k]).abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    UToV,
    VToU,
}

/// The pointwise change of variables `v = u - f(u)` and its inverse.
pub fn original_coordinates(field: &DVector<f64>, n: usize, direction: Direction, f: &Nonlinearity) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(field.len());
    for p in 0..field.len() / n {
        let x = field.rows(p * n, n).into_owned();
        let y = match direction {
            Direction::UToV => &x - f.value(&x),
            Direction::VToU => {
                let mut u = x.clone();
                let mut done = false;
                for _ in 0..50 {
                    let res = &u - f.value(&u) - &x;
                    if res.amax() < 1e-13 * (1.0 + x.amax()) {
                        done = true;
                        break;
                    }
                    let df = f.jacobian(&u);
                    if df.norm() >= 0.5 {
                        break;
                    }
                    let jac = RMatrix::identity(n, n) - df;
                    match jac.lu().solve(&res) {
                        Some(step) => u -= step,
                        None => break,
                    }
                }
                if !done {
                    return Err(Error::InversionFailed { index: p });
                }
                u
            }
        };
        out.rows_mut(p * n, n).copy_from(&y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavetrain::{fixed_point_omega, ReducedData};

    fn problem() -> (WaveProblem, ReducedData) {
        let k = KernelModel::scalar(BaseKernel::TwoSidedExponential { rate: 1.0 }, 1.0).unwrap();
        let p = WaveProblem::new(RMatrix::from_element(1, 1, 2.0), k, Nonlinearity::quadratic(), 24).unwrap();
        let rd = ReducedData::compute(&p, (0.5, 1.5)).unwrap();
        (p, rd)
    }

    fn setup(points: usize) -> (WaveProblem, ReducedData, BorderedSolve) {
        let (p, rd) = problem();
        let grid = WeightedGrid::for_frequency(rd.omega_star, 8.0, points, 0.4).unwrap();
        let basis = KernelBasisE0::new(&grid, &rd, None).unwrap();
        let bs = build_bordered(&VForm::from_wave_problem(&p).unwrap(), &grid, &basis).unwrap();
        (p, rd, bs)
    }

    #[test]
    fn product_weights_are_exact_on_smooth_densities() {
        let grid = WeightedGrid::new(40.0, 2401, 0.2).unwrap();
        let base = BaseKernel::TwoSidedExponential { rate: 1.0 };
        let t = [0.0, 0.3, 0.0123];
        let w = product_weights(&grid, &base, false, &t);
        // int_{-40}^{40} e^{-|t-y|}/2 dy
        for (i, &x) in t.iter().enumerate() {
            let exact = 1.0 - 0.5 * ((-(40.0 - x)).exp() + (-(40.0 + x)).exp());
            assert!((w.row(i).sum() - exact).abs() < 1e-13);
        }
        let dw = product_weights(&grid, &base, true, &t);
        // int k'(t - y) cos(y) dy = d/dt (k * cos)(t) = -sin(t)/2 away from the ends
        for (i, &x) in t.iter().enumerate() {
            let val: f64 = (0..grid.points).map(|j| dw[(i, j)] * grid.nodes[j].cos()).sum();
            assert!((val + 0.5 * x.sin()).abs() < 1e-8, "{val}");
        }
    }

    #[test]
    fn cutoff_indicator() {
        assert_eq!(cutoff_chi(0.3), 1.0);
        assert_eq!(cutoff_chi(1.0), 1.0);
        assert_eq!(cutoff_chi(2.0), 0.0);
        assert_eq!(cutoff_chi(5.0), 0.0);
        let h = 1e-6;
        for r in [1.2, 1.5, 1.9] {
            let fd = (cutoff_chi(r + h) - cutoff_chi(r - h)) / (2.0 * h);
            assert!((fd - cutoff_chi_derivative(r)).abs() < 1e-6);
        }
        let c = CutoffNonlinearity::new(Nonlinearity::quadratic(), 0.1).unwrap();
        let v = DVector::from_element(1, 0.05);
        assert!((c.value(&v)[0] - 0.0025).abs() < 1e-18);
        assert_eq!(c.value(&DVector::from_element(1, 0.3))[0], 0.0);
        let v = DVector::from_element(1, 0.15);
        let fd = (c.value(&DVector::from_element(1, 0.15 + h))[0] - c.value(&DVector::from_element(1, 0.15 - h))[0]) / (2.0 * h);
        assert!((fd - c.jacobian(&v)[(0, 0)]).abs() < 1e-6);
    }

    #[test]
    fn bordered_system_laws() {
        let (_, _, bs) = setup(601);
        assert!(bs.report.kernel_residual_weighted < 1e-8, "{:?}", bs.report);
        assert!(bs.report.solve_residual < 1e-11);
        let q = &bs.basis;
        for k in 0..2 {
            let p = q.project(&q.e[k]);
            assert!((p[k] - 1.0).abs() < 1e-12 && p[1 - k].abs() < 1e-12);
        }
        let size = bs.grid.points;
        assert_eq!(bs.solve(&DVector::zeros(size), &Vector2::zeros()).unwrap().amax(), 0.0);
        let v = bs.solve(&DVector::zeros(size), &Vector2::new(1.0, 0.0)).unwrap();
        let err = window_difference(&bs.grid, &v, &q.e[0], bs.interior_half_width());
        assert!(err < 1e-6, "{err}");
        // projection law Q^2 = Q on an arbitrary field
        let f = bs.sample(|x| DVector::from_element(1, (0.3 * x).sin() + 0.1 * x));
        let p1 = q.project(&f);
        assert!((q.project(&q.embed(&p1)) - p1).amax() < 1e-12);
    }

    #[test]
    fn inverse_bound_is_stable_under_refinement() {
        let (_, _, coarse) = setup(601);
        let (_, _, fine) = setup(1201);
        let (a, b) = (coarse.inverse_norm(), fine.inverse_norm());
        assert!((a / b - 1.0).abs() < 0.2, "{a} {b}");
    }

    #[test]
    fn manifold_tangency_and_linearization() {
        let (_, rd, bs) = setup(601);
        let geps = CutoffNonlinearity::new(VForm::from_wave_problem(&problem().0).unwrap().g, 0.2).unwrap();
        assert_eq!(fixed_point_phi(&bs, &geps, &Vector2::zeros(), None).unwrap().field.amax(), 0.0);
        let t = 1e-3;
        let phi = fixed_point_phi(&bs, &geps, &Vector2::new(t, 0.0), None).unwrap();
        let slope = bs.grid.weighted_norm(&phi.psi(&bs.basis)) / t;
        assert!(slope < 1e-3 && slope > 0.0, "{slope}");
        assert!(phi.contraction_ratio < 0.5);
        assert_eq!(reduced_vector_field(&bs, &geps, &Vector2::zeros(), None).unwrap().0, Vector2::zeros());
        let dh = linearization(&bs, &geps, 1e-6).unwrap();
        for (re, im) in eigenvalues_2x2(&dh) {
            assert!(re.abs() < 1e-4 && (im.abs() - rd.omega_star).abs() < 1e-4, "{dh}");
        }
    }

    #[test]
    fn manifold_matches_wave_train() {
        let (p, rd, bs) = setup(601);
        let vf = VForm::from_wave_problem(&p).unwrap();
        let a = 0.02;
        let fp = fixed_point_omega(&p, &rd, a, 1e-14).unwrap();
        let mut coeffs = fp.psi.clone();
        coeffs[(1, 0)] += a;
        let u = sample_wavetrain(&bs, fp.omega, &coeffs);
        let v0 = bs.basis.project(&u);
        let geps = CutoffNonlinearity::new(vf.g.clone(), 10.0 * a).unwrap();
        let phi = fixed_point_phi(&bs, &geps, &v0, None).unwrap();
        let err = window_difference(&bs.grid, &phi.field, &u, bs.interior_half_width());
        assert!(err < 1e-4, "{err}");
        // locality of the cutoff
        let wide = CutoffNonlinearity::new(vf.g, 20.0 * a).unwrap();
        let phi2 = fixed_point_phi(&bs, &wide, &v0, None).unwrap();
        assert!(window_difference(&bs.grid, &phi.field, &phi2.field, bs.interior_half_width()) < 1e-14);
        let eq = equivariance_error(&bs, &geps, &[v0], &[0.7, 2.0]).unwrap();
        assert!(eq < 1e-6, "{eq}");
    }

    #[test]
    fn change_of_variables() {
        let f = Nonlinearity::quadratic();
        let u = DVector::from_vec(vec![0.01, 0.0, -0.02]);
        let v = original_coordinates(&u, 1, Direction::UToV, &f).unwrap();
        assert!((v[0] - (0.01 - 0.0001)).abs() < 1e-16);
        assert_eq!(v[1], 0.0);
        let back = original_coordinates(&v, 1, Direction::VToU, &f).unwrap();
        assert!((back - &u).amax() < 1e-12);
        let far = DVector::from_element(1, 0.5);
        assert_eq!(original_coordinates(&far, 1, Direction::VToU, &f), Err(Error::InversionFailed { index: 0 }));
    }
}
