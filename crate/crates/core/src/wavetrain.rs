//! Small-amplitude periodic wave trains of `0 = -u + k * (A u + N(u))`.
//!
//! Solutions are sought as even `2 pi`-periodic functions of `y = omega x`,
//! `u(y) = sum_{j=0}^{M} c_j cos(j y)`. In these variables the convolution
//! acts diagonally: mode `j` is multiplied by `K(i j omega)`.
//!
//! The Lyapunov–Schmidt route splits `u = a v_* cos y + psi`, solves the
//! complement equation for `psi(omega, a)` and iterates the scalar reduced
//! equation `omega = omega_* + R(omega, a)`. An independent Newton solve of
//! the full Galerkin system serves as the oracle.

use crate::error::{Error, Result};
use crate::kernel::{KernelModel, SampledField};
use crate::linalg::{normalize_sign, orthonormal_complement, sorted_svd, RMatrix};
use crate::nonlinearity::Nonlinearity;
use crate::symbol::{axis_minima, roots_in_rectangle, CharacteristicFunction, Rectangle};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Tolerance for `|d(i omega)|` at an accepted root.
pub const ROOT_TOL: f64 = 1e-10;
/// Smallest accepted `|d'(i omega_*)|`.
pub const SIMPLE_ROOT_MIN_DERIVATIVE: f64 = 1e-6;
/// Newton solves stop once the max-norm residual is below this.
pub const NEWTON_TOL: f64 = 1e-13;

/// Problem data: `A`, an even kernel, the nonlinearity and the number of
/// cosine modes beyond the mean.
#[derive(Debug, Clone)]
pub struct WaveProblem {
    a: RMatrix,
    kernel: KernelModel,
    nonlinearity: Nonlinearity,
    modes: usize,
}

impl WaveProblem {
    pub fn new(a: RMatrix, kernel: KernelModel, nonlinearity: Nonlinearity, modes: usize) -> Result<Self> {
        let n = kernel.dimension();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::InvalidInput("A and kernel dimensions differ".into()));
        }
        if !kernel.is_even() {
            return Err(Error::InvalidInput("wave-train problems need an even kernel".into()));
        }
        if modes < 2 {
            return Err(Error::InvalidInput("at least two cosine modes are needed".into()));
        }
        let smin = sorted_svd(&a).sigma.last().copied().unwrap_or(0.0);
        if smin < 1e-12 * a.norm().max(1.0) {
            return Err(Error::InvalidInput("A must be invertible".into()));
        }
        Ok(Self {
            a,
            kernel,
            nonlinearity,
            modes,
        })
    }

    pub fn with_modes(&self, modes: usize) -> Result<Self> {
        Self::new(self.a.clone(), self.kernel.clone(), self.nonlinearity.clone(), modes)
    }

    pub fn dimension(&self) -> usize {
        self.a.nrows()
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn principal(&self) -> &RMatrix {
        &self.a
    }

    pub fn kernel(&self) -> &KernelModel {
        &self.kernel
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    pub fn condition_number(&self) -> f64 {
        let s = sorted_svd(&self.a).sigma;
        s[0] / s[s.len() - 1]
    }

    /// `d(nu) = det(-I + K(nu) A)`.
    pub fn characteristic(&self) -> CharacteristicFunction {
        CharacteristicFunction::steady_state(self.a.clone(), self.kernel.clone()).expect("dimensions checked on construction")
    }

    /// `K(i omega)` (real for even kernels).
    pub fn symbol_on_axis(&self, omega: f64) -> RMatrix {
        self.kernel
            .symbol(Complex64::new(0.0, omega))
            .expect("imaginary axis lies in the strip")
            .map(|z| z.re)
    }

    /// `d/d omega K(i omega) = i K'(i omega)`.
    pub fn symbol_axis_derivative(&self, omega: f64) -> RMatrix {
        self.kernel
            .symbol_derivative(Complex64::new(0.0, omega))
            .expect("imaginary axis lies in the strip")
            .map(|z| (Complex64::new(0.0, 1.0) * z).re)
    }
}

/// Data of the reduction at the bifurcation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedData {
    pub omega_star: f64,
    pub v_star: DVector<f64>,
    pub v_ad: DVector<f64>,
    pub alpha: f64,
}

impl ReducedData {
    /// Locates `omega_*` in `search` and computes the kernel vectors and `alpha`.
    pub fn compute(p: &WaveProblem, search: (f64, f64)) -> Result<Self> {
        let omega_star = find_omega_star(p, search)?;
        let (v_star, v_ad) = kernel_vectors(p, omega_star)?;
        let mut rd = Self {
            omega_star,
            v_star,
            v_ad,
            alpha: 0.0,
        };
        rd.alpha = alpha_coefficient(p, &rd)?;
        Ok(rd)
    }
}

/// The unique simple root `i omega_*` of `cf` with `omega_*` in `search`,
/// after checking that no other positive axis root exists and that
/// `d(i j omega_*) != 0` for `j = 0` and `2 <= j <= resonance_modes`.
pub fn find_axis_root(cf: &CharacteristicFunction, search: (f64, f64), resonance_modes: usize) -> Result<f64> {
    let (lo, hi) = search;
    if !(0.0 < lo && lo < hi) {
        return Err(Error::InvalidInput(format!("bad search interval {search:?}")));
    }
    let width = (0.5 * cf.strip_half_width()).min(0.05);
    let rect = Rectangle::new(-width, width, lo, hi)?;
    let roots = roots_in_rectangle(cf, &rect, 1e-12)?;
    let axis: Vec<_> = roots.iter().filter(|r| r.nu.re.abs() < 1e-8).collect();
    let root = match axis.len() {
        0 => return Err(Error::NoRoot),
        1 => axis[0],
        k => return Err(Error::MultipleAxisRoots { count: k }),
    };
    let omega = root.nu.im;
    let derivative = cf.eval_d_derivative(Complex64::new(0.0, omega))?.norm();
    if root.multiplicity > 1 || derivative < SIMPLE_ROOT_MIN_DERIVATIVE {
        return Err(Error::NonSimpleRoot { derivative });
    }
    if cf.eval_d(Complex64::new(0.0, omega))?.norm() > ROOT_TOL {
        return Err(Error::NonSimpleRoot { derivative });
    }
    // no further roots on the positive imaginary axis
    let ell_max = cf.auto_ell_max()?.max(2.0 * hi);
    let samples = ((ell_max / 0.01) as usize).clamp(2001, 200_001);
    let others = axis_minima(cf, ell_max, samples)?
        .into_iter()
        .filter(|(l, v)| *l > 1e-9 && (l - omega).abs() > 1e-6 && *v < 1e-8)
        .count();
    if others > 0 {
        return Err(Error::MultipleAxisRoots { count: others + 1 });
    }
    for j in std::iter::once(0).chain(2..=resonance_modes) {
        if cf.eval_d(Complex64::new(0.0, j as f64 * omega))?.norm() < 1e-8 {
            return Err(Error::ResonanceDetected { mode: j });
        }
    }
    Ok(omega)
}

pub fn find_omega_star(p: &WaveProblem, search: (f64, f64)) -> Result<f64> {
    find_axis_root(&p.characteristic(), search, p.modes)
}

/// Unit null vectors of `-I + K(i omega_*) A` and of its transpose.
pub fn kernel_vectors(p: &WaveProblem, omega_star: f64) -> Result<(DVector<f64>, DVector<f64>)> {
    let n = p.dimension();
    let m = &p.symbol_on_axis(omega_star) * &p.a - RMatrix::identity(n, n);
    let svd = sorted_svd(&m);
    if n > 1 {
        let (smallest, next) = (svd.sigma[n - 1], svd.sigma[n - 2]);
        if next < 1e3 * smallest {
            return Err(Error::NumericalRankAmbiguous { smallest, next });
        }
    }
    let mut v = svd.v.column(n - 1).into_owned();
    let mut w = svd.u.column(n - 1).into_owned();
    normalize_sign(&mut v);
    normalize_sign(&mut w);
    Ok((v, w))
}

/// `alpha = <v_ad, (d/d omega K(i omega))|_{omega_*} A v_*>`.
pub fn alpha_coefficient(p: &WaveProblem, rd: &ReducedData) -> Result<f64> {
    let dk = p.symbol_axis_derivative(rd.omega_star);
    let alpha = rd.v_ad.dot(&(dk * &p.a * &rd.v_star));
    if alpha.abs() < 1e-8 {
        return Err(Error::AlphaVanishes { alpha });
    }
    Ok(alpha)
}

/// Cosine collocation on `P` midpoints of `(0, pi)`.
struct Galerkin {
    m1: usize,
    n: usize,
    cos: RMatrix,
    weights: Vec<f64>,
}

impl Galerkin {
    fn new(modes: usize, n: usize, degree: Option<usize>) -> Self {
        let m1 = modes + 1;
        // enough points that products up to the polynomial degree do not alias
        let pts = match degree {
            Some(d) => (4 * m1).max((d + 1) * m1 / 2 + 1),
            None => 4 * m1,
        };
        let cos = RMatrix::from_fn(pts, m1, |p, j| (j as f64 * PI * (p as f64 + 0.5) / pts as f64).cos());
        let weights = (0..m1).map(|j| if j == 0 { 1.0 } else { 2.0 } / pts as f64).collect();
        Self { m1, n, cos, weights }
    }

    fn synth(&self, c: &RMatrix) -> RMatrix {
        &self.cos * c
    }

    fn analyze(&self, vals: &RMatrix) -> RMatrix {
        let mut out = self.cos.transpose() * vals;
        for j in 0..self.m1 {
            out.row_mut(j).scale_mut(self.weights[j]);
        }
        out
    }

    fn nhat(&self, nl: &Nonlinearity, c: &RMatrix) -> RMatrix {
        let vals = self.synth(c);
        let mut nv = RMatrix::zeros(vals.nrows(), self.n);
        for p in 0..vals.nrows() {
            let u = vals.row(p).transpose();
            nv.set_row(p, &nl.value(&u).transpose());
        }
        self.analyze(&nv)
    }

    /// `d N_hat / d c` with index `j * n + a`.
    fn dnhat(&self, nl: &Nonlinearity, c: &RMatrix) -> RMatrix {
        let (m1, n) = (self.m1, self.n);
        let vals = self.synth(c);
        let mut out = RMatrix::zeros(m1 * n, m1 * n);
        for p in 0..vals.nrows() {
            let jp = nl.jacobian(&vals.row(p).transpose());
            for j in 0..m1 {
                let cj = self.weights[j] * self.cos[(p, j)];
                for k in 0..m1 {
                    let f = cj * self.cos[(p, k)];
                    for a in 0..n {
                        for b in 0..n {
                            out[(j * n + a, k * n + b)] += f * jp[(a, b)];
                        }
                    }
                }
            }
        }
        out
    }
}

/// Galerkin residual machinery for a given number of modes.
struct System<'a> {
    p: &'a WaveProblem,
    g: Galerkin,
}

impl<'a> System<'a> {
    fn new(p: &'a WaveProblem, modes: usize) -> Self {
        Self {
            p,
            g: Galerkin::new(modes, p.dimension(), p.nonlinearity.degree()),
        }
    }

    fn symbols(&self, omega: f64) -> Vec<RMatrix> {
        (0..self.g.m1).map(|j| self.p.symbol_on_axis(j as f64 * omega)).collect()
    }

    fn symbol_derivatives(&self, omega: f64) -> Vec<RMatrix> {
        (0..self.g.m1)
            .map(|j| self.p.symbol_axis_derivative(j as f64 * omega) * j as f64)
            .collect()
    }

    /// `F_j = -c_j + K(i j omega) (A c_j + N_j)` as a `(M+1) x n` matrix.
    fn residual(&self, omega: f64, c: &RMatrix) -> RMatrix {
        let nh = self.g.nhat(&self.p.nonlinearity, c);
        let s = self.symbols(omega);
        let mut f = -c.clone();
        for j in 0..self.g.m1 {
            let inner = &self.p.a * c.row(j).transpose() + nh.row(j).transpose();
            let row = (&s[j] * inner).transpose();
            let mut fr = f.row_mut(j);
            fr += row;
        }
        f
    }

    fn d_omega(&self, omega: f64, c: &RMatrix) -> RMatrix {
        let nh = self.g.nhat(&self.p.nonlinearity, c);
        let ds = self.symbol_derivatives(omega);
        let mut out = RMatrix::zeros(self.g.m1, self.g.n);
        for j in 0..self.g.m1 {
            let inner = &self.p.a * c.row(j).transpose() + nh.row(j).transpose();
            out.set_row(j, &(&ds[j] * inner).transpose());
        }
        out
    }

    fn jacobian(&self, omega: f64, c: &RMatrix) -> RMatrix {
        let (m1, n) = (self.g.m1, self.g.n);
        let s = self.symbols(omega);
        let mut b = self.g.dnhat(&self.p.nonlinearity, c);
        for j in 0..m1 {
            let mut blk = b.view_mut((j * n, j * n), (n, n));
            blk += &self.p.a;
        }
        let mut jac = RMatrix::zeros(m1 * n, m1 * n);
        for j in 0..m1 {
            let rows = &s[j] * b.rows(j * n, n);
            jac.rows_mut(j * n, n).copy_from(&rows);
        }
        jac - RMatrix::identity(m1 * n, m1 * n)
    }
}

fn flatten(c: &RMatrix) -> DVector<f64> {
    DVector::from_fn(c.nrows() * c.ncols(), |k, _| c[(k / c.ncols(), k % c.ncols())])
}

fn unflatten(v: &DVector<f64>, n: usize) -> RMatrix {
    RMatrix::from_fn(v.len() / n, n, |j, a| v[j * n + a])
}

fn max_abs(m: &RMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

fn kernel_mode(p: &WaveProblem, rd: &ReducedData, a: f64) -> RMatrix {
    let mut c = RMatrix::zeros(p.modes + 1, p.dimension());
    c.set_row(1, &(rd.v_star.transpose() * a));
    c
}

/// Solves the complement equation for `psi(omega, a)`; returns its cosine
/// coefficients (`(M+1) x n`).
pub fn solve_psi(p: &WaveProblem, rd: &ReducedData, omega: f64, a: f64) -> Result<RMatrix> {
    let (m1, n) = (p.modes + 1, p.dimension());
    if a == 0.0 {
        return Ok(RMatrix::zeros(m1, n));
    }
    let sys = System::new(p, p.modes);
    let bperp = orthonormal_complement(&rd.v_star);
    let cperp = orthonormal_complement(&rd.v_ad);
    let size = m1 * n - 1;
    // unknowns -> full coefficient vector, and equation selection
    let mut s_unk = RMatrix::zeros(m1 * n, size);
    let mut s_eq = RMatrix::zeros(size, m1 * n);
    let mut col = 0;
    for j in 0..m1 {
        if j == 1 {
            for q in 0..n - 1 {
                for r in 0..n {
                    s_unk[(n + r, col + q)] = bperp[(r, q)];
                    s_eq[(col + q, n + r)] = cperp[(r, q)];
                }
            }
            col += n - 1;
        } else {
            for r in 0..n {
                s_unk[(j * n + r, col + r)] = 1.0;
                s_eq[(col + r, j * n + r)] = 1.0;
            }
            col += n;
        }
    }
    let base = kernel_mode(p, rd, a);
    let mut z = DVector::<f64>::zeros(size);
    let mut last = f64::INFINITY;
    for _ in 0..25 {
        let psi = unflatten(&(&s_unk * &z), n);
        let c = &base + &psi;
        let r = &s_eq * flatten(&sys.residual(omega, &c));
        let rn = r.amax();
        if rn < NEWTON_TOL || (rn < 1e-12 && rn >= 0.5 * last) {
            return Ok(psi);
        }
        if !rn.is_finite() || rn > 1e3 * last.min(1e3) {
            break;
        }
        last = rn;
        let jr = &s_eq * sys.jacobian(omega, &c) * &s_unk;
        let step = jr.lu().solve(&(-r)).ok_or_else(|| Error::NewtonDiverged {
            reason: "singular complement Jacobian".into(),
        })?;
        z += step;
    }
    Err(Error::NewtonDiverged {
        reason: format!("complement equation at omega = {omega}, a = {a}"),
    })
}

/// The reduced map `R(omega, a)` of `omega - omega_* = R(omega, a)`.
pub fn reduced_r(p: &WaveProblem, rd: &ReducedData, omega: f64, a: f64) -> Result<f64> {
    if a == 0.0 {
        return Err(Error::InvalidInput("R is evaluated for a != 0 only".into()));
    }
    let psi = solve_psi(p, rd, omega, a)?;
    let sys = System::new(p, p.modes);
    let c = kernel_mode(p, rd, a) + &psi;
    let nh = sys.g.nhat(&p.nonlinearity, &c);
    let s1 = p.symbol_on_axis(omega);
    let s1_star = p.symbol_on_axis(rd.omega_star);
    let ds1_star = p.symbol_axis_derivative(rd.omega_star);
    let diff = &s1 - &s1_star;
    let psi1 = psi.row(1).transpose();
    let n1 = nh.row(1).transpose();
    let nonlinear = rd.v_ad.dot(&(&diff * &p.a * psi1 + &s1 * n1)) / a;
    let linear = rd.v_ad.dot(&((&diff - ds1_star * (omega - rd.omega_star)) * &p.a * &rd.v_star));
    Ok(-(nonlinear + linear) / rd.alpha)
}

/// Outcome of the frequency iteration at one amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub omega: f64,
    pub iterations: usize,
    /// Largest observed ratio of successive frequency updates.
    pub contraction_ratio: f64,
    pub psi: RMatrix,
}

/// Iterates `omega <- omega_* + R(omega, a)` from `omega_*`.
pub fn fixed_point_omega(p: &WaveProblem, rd: &ReducedData, a: f64, tol: f64) -> Result<FixedPoint> {
    if a == 0.0 {
        return Ok(FixedPoint {
            omega: rd.omega_star,
            iterations: 0,
            contraction_ratio: 0.0,
            psi: RMatrix::zeros(p.modes + 1, p.dimension()),
        });
    }
    let mut omega = rd.omega_star;
    let mut prev_step: Option<f64> = None;
    let mut ratio_max: f64 = 0.0;
    let mut bad = 0;
    for it in 1..=100 {
        let next = rd.omega_star + reduced_r(p, rd, omega, a)?;
        let step = (next - omega).abs();
        if let Some(ps) = prev_step {
            // ratios of updates at round-off level carry no information
            if ps > 1e3 * tol.max(1e-15) {
                let ratio = step / ps;
                ratio_max = ratio_max.max(ratio);
                if ratio >= 1.0 {
                    bad += 1;
                    if bad >= 3 {
                        return Err(Error::NotContracting { ratio });
                    }
                } else {
                    bad = 0;
                }
            }
        }
        omega = next;
        if step < tol {
            return Ok(FixedPoint {
                omega,
                iterations: it,
                contraction_ratio: ratio_max,
                psi: solve_psi(p, rd, omega, a)?,
            });
        }
        prev_step = Some(step);
    }
    Err(Error::NotContracting { ratio: ratio_max })
}

/// Full Galerkin solution with its frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectSolution {
    pub omega: f64,
    pub coeffs: RMatrix,
    pub residual: f64,
    pub iterations: usize,
    /// Set for `a = 0`, where the frequency is undetermined.
    pub degenerate: bool,
}

/// Newton on all cosine coefficients and `omega`, with the amplitude
/// constraint `<v_*, c_1> = a`.
pub fn direct_newton(p: &WaveProblem, rd: &ReducedData, a: f64, guess: (f64, &RMatrix)) -> Result<DirectSolution> {
    let (m1, n) = (p.modes + 1, p.dimension());
    if a == 0.0 {
        return Ok(DirectSolution {
            omega: guess.0,
            coeffs: RMatrix::zeros(m1, n),
            residual: 0.0,
            iterations: 0,
            degenerate: true,
        });
    }
    if guess.1.nrows() != m1 || guess.1.ncols() != n {
        return Err(Error::InvalidInput("initial guess has the wrong shape".into()));
    }
    let sys = System::new(p, p.modes);
    let (mut omega, mut c) = (guess.0, guess.1.clone());
    let size = m1 * n;
    let mut last = f64::INFINITY;
    for it in 0..30 {
        let f = sys.residual(omega, &c);
        let constraint = rd.v_star.dot(&c.row(1).transpose()) - a;
        let rn = max_abs(&f).max(constraint.abs());
        if rn < NEWTON_TOL || (rn < 1e-12 && rn >= 0.5 * last) {
            return Ok(DirectSolution {
                omega,
                residual: max_abs(&f),
                coeffs: c,
                iterations: it,
                degenerate: false,
            });
        }
        if !rn.is_finite() {
            break;
        }
        last = rn;
        let mut jac = RMatrix::zeros(size + 1, size + 1);
        jac.view_mut((0, 0), (size, size)).copy_from(&sys.jacobian(omega, &c));
        jac.view_mut((0, size), (size, 1)).copy_from(&flatten(&sys.d_omega(omega, &c)));
        for r in 0..n {
            jac[(size, n + r)] = rd.v_star[r];
        }
        let mut rhs = DVector::zeros(size + 1);
        rhs.rows_mut(0, size).copy_from(&(-flatten(&f)));
        rhs[size] = -constraint;
        let step = jac.lu().solve(&rhs).ok_or_else(|| Error::NewtonDiverged {
            reason: "singular bordered Galerkin Jacobian".into(),
        })?;
        c += unflatten(&step.rows(0, size).into_owned(), n);
        omega += step[size];
    }
    Err(Error::NewtonDiverged {
        reason: format!("direct Galerkin Newton at a = {a}"),
    })
}

/// Values `u(y)` of a cosine series at `y`.
pub fn evaluate(coeffs: &RMatrix, y: f64) -> DVector<f64> {
    let mut out = DVector::zeros(coeffs.ncols());
    for j in 0..coeffs.nrows() {
        out += coeffs.row(j).transpose() * (j as f64 * y).cos();
    }
    out
}

/// Sup norm of a cosine series, sampled on a fine grid of `[0, pi]`.
pub fn sup_norm(coeffs: &RMatrix) -> f64 {
    let pts = 16 * coeffs.nrows() + 1;
    (0..pts)
        .map(|k| evaluate(coeffs, PI * k as f64 / (pts - 1) as f64).amax())
        .fold(0.0, f64::max)
}

/// Coefficients of `u(y + pi)`.
pub fn shift_half_period(coeffs: &RMatrix) -> RMatrix {
    let mut out = coeffs.clone();
    for j in (1..coeffs.nrows()).step_by(2) {
        out.row_mut(j).neg_mut();
    }
    out
}

/// Sup norm of the equation residual with the nonlinearity resolved on
/// twice as many modes as the solution carries.
pub fn residual_sup(p: &WaveProblem, omega: f64, coeffs: &RMatrix) -> f64 {
    let big = 2 * (coeffs.nrows() - 1);
    let sys = System::new(p, big);
    let mut c = RMatrix::zeros(big + 1, coeffs.ncols());
    c.rows_mut(0, coeffs.nrows()).copy_from(coeffs);
    sup_norm(&sys.residual(omega, &c))
}

/// Residual of `-U + k * (A U + N(U))` for `U(x) = u(omega x)` evaluated
/// with trapezoidal grid convolution of spacing `h` over one period.
pub fn grid_residual(p: &WaveProblem, omega: f64, coeffs: &RMatrix, h: f64) -> f64 {
    let (lo, hi) = p.kernel.support();
    let period = 2.0 * PI / omega;
    let reach = lo.abs().max(hi.abs()) + period + 1.0;
    let len = (2.0 * reach / h).ceil() as usize + 1;
    let start = -h * ((len - 1) / 2) as f64;
    let n = p.dimension();
    let u = RMatrix::from_fn(len, n, |i, c| evaluate(coeffs, omega * (start + h * i as f64))[c]);
    let mut f = RMatrix::zeros(len, n);
    for i in 0..len {
        let ui = u.row(i).transpose();
        f.set_row(i, &(&p.a * &ui + p.nonlinearity.value(&ui)).transpose());
    }
    let field = SampledField {
        start,
        spacing: h,
        values: f,
    };
    let idx: Vec<usize> = (0..len)
        .filter(|&i| (start + h * i as f64).abs() <= 0.5 * period)
        .step_by(7)
        .collect();
    let conv = p.kernel.convolve_grid_at(&field, &idx);
    let mut worst: f64 = 0.0;
    for (row, &i) in idx.iter().enumerate() {
        for c in 0..n {
            worst = worst.max((conv[(row, c)] - u[(i, c)]).abs());
        }
    }
    worst
}

/// One amplitude on the branch, computed both ways.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    pub a: f64,
    pub omega_ls: f64,
    pub omega_direct: f64,
    pub coeffs_ls: RMatrix,
    pub coeffs_direct: RMatrix,
    pub sup_norm: f64,
    pub residual_ls: f64,
    pub residual_direct: f64,
    /// Max difference of coefficients and frequencies between the two routes.
    pub discrepancy: f64,
    pub contraction_ratio: f64,
    pub psi_sup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveBranch {
    pub points: Vec<BranchPoint>,
    /// Reason the continuation stopped early, if it did.
    pub failure: Option<String>,
}

/// Computes the branch point at amplitude `a` by both routes.
pub fn branch_point(p: &WaveProblem, rd: &ReducedData, a: f64, guess: Option<(f64, &RMatrix)>) -> Result<BranchPoint> {
    let fp = fixed_point_omega(p, rd, a, 1e-14)?;
    let coeffs_ls = kernel_mode(p, rd, a) + &fp.psi;
    let direct = match guess {
        Some(g) => direct_newton(p, rd, a, g)?,
        None => direct_newton(p, rd, a, (rd.omega_star, &kernel_mode(p, rd, a)))?,
    };
    let discrepancy = max_abs(&(&coeffs_ls - &direct.coeffs)).max((fp.omega - direct.omega).abs());
    Ok(BranchPoint {
        a,
        omega_ls: fp.omega,
        omega_direct: direct.omega,
        sup_norm: sup_norm(&coeffs_ls),
        residual_ls: residual_sup(p, fp.omega, &coeffs_ls),
        residual_direct: residual_sup(p, direct.omega, &direct.coeffs),
        coeffs_direct: direct.coeffs,
        discrepancy,
        contraction_ratio: fp.contraction_ratio,
        psi_sup: sup_norm(&fp.psi),
        coeffs_ls,
    })
}

/// Amplitudes `a_max k / steps`, `k = 1..=steps`.
pub fn continue_branch(p: &WaveProblem, rd: &ReducedData, a_max: f64, steps: usize) -> WaveBranch {
    let mut points: Vec<BranchPoint> = Vec::new();
    for k in 1..=steps {
        let a = a_max * k as f64 / steps as f64;
        let guess = points.last().map(|b| {
            let scaled = &b.coeffs_direct * (a / b.a);
            (b.omega_direct, scaled)
        });
        let res = match &guess {
            Some((w, c)) => branch_point(p, rd, a, Some((*w, c))),
            None => branch_point(p, rd, a, None),
        };
        match res {
            Ok(bp) => points.push(bp),
            Err(e) => {
                return WaveBranch {
                    points,
                    failure: Some(format!("a = {a}: {e}")),
                }
            }
        }
    }
    WaveBranch { points, failure: None }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessTrial {
    pub base_amplitude: f64,
    pub converged: bool,
    pub amplitude: f64,
    pub distance: f64,
    pub returned: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub trials: Vec<UniquenessTrial>,
    pub returned: usize,
    pub fraction: f64,
}

/// Perturbs branch points by random even periodic noise of sup norm at
/// most `noise_factor * a`, solves the Galerkin system with frequency and
/// amplitude free (minimum-norm Newton) and checks that the result lies on
/// the branch computed independently by the reduction.
pub fn uniqueness_probe(
    p: &WaveProblem,
    rd: &ReducedData,
    branch: &WaveBranch,
    trials: usize,
    noise_factor: f64,
    seed: u64,
) -> UniquenessReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m1, n) = (p.modes + 1, p.dimension());
    let sys = System::new(p, p.modes);
    let mut out = Vec::new();
    for t in 0..trials {
        if branch.points.is_empty() {
            break;
        }
        let bp = &branch.points[t % branch.points.len()];
        let noise_modes = m1.min(7);
        let mut noise = RMatrix::zeros(m1, n);
        for j in 0..noise_modes {
            for c in 0..n {
                noise[(j, c)] = rng.random_range(-1.0..1.0);
            }
        }
        let col_sum = (0..n)
            .map(|c| noise.column(c).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        if col_sum > 0.0 {
            noise *= noise_factor * bp.a / col_sum;
        }
        let mut c = &bp.coeffs_direct + noise;
        let mut omega = bp.omega_direct;
        let mut converged = false;
        for _ in 0..40 {
            let f = sys.residual(omega, &c);
            if max_abs(&f) < 1e-12 {
                converged = true;
                break;
            }
            let size = m1 * n;
            let mut jac = RMatrix::zeros(size, size + 1);
            jac.view_mut((0, 0), (size, size)).copy_from(&sys.jacobian(omega, &c));
            jac.view_mut((0, size), (size, 1)).copy_from(&flatten(&sys.d_omega(omega, &c)));
            let svd = jac.svd(true, true);
            let Ok(step) = svd.solve(&(-flatten(&f)), 1e-14) else {
                break;
            };
            c += unflatten(&step.rows(0, size).into_owned(), n);
            omega += step[size];
            if !omega.is_finite() {
                break;
            }
        }
        let mut trial = UniquenessTrial {
            base_amplitude: bp.a,
            converged,
            amplitude: f64::NAN,
            distance: f64::INFINITY,
            returned: false,
        };
        if converged {
            let mut amp = rd.v_star.dot(&c.row(1).transpose());
            if amp < 0.0 {
                c = shift_half_period(&c);
                amp = -amp;
            }
            trial.amplitude = amp;
            if let Ok(fp) = fixed_point_omega(p, rd, amp, 1e-14) {
                let ls = kernel_mode(p, rd, amp) + &fp.psi;
                trial.distance = max_abs(&(ls - &c)).max((fp.omega - omega).abs());
                trial.returned = trial.distance < 1e-6;
            }
        }
        out.push(trial);
    }
    let returned = out.iter().filter(|t| t.returned).count();
    UniquenessReport {
        fraction: if out.is_empty() { 0.0 } else { returned as f64 / out.len() as f64 },
        returned,
        trials: out,
    }
}

/// Cosine coefficients as nested rows, for serialisation.
pub fn coeff_rows(c: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..c.nrows()).map(|j| c.row(j).iter().copied().collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::BaseKernel;

    fn s(a: f64) -> RMatrix {
        RMatrix::from_element(1, 1, a)
    }
    fn exp_problem() -> WaveProblem {
        let k = KernelModel::scalar(BaseKernel::TwoSidedExponential { rate: 1.0 }, 1.0).unwrap();
        WaveProblem::new(s(2.0), k, Nonlinearity::quadratic(), 32).unwrap()
    }

    #[test]
    fn omega_star_examples() {
        assert!((find_omega_star(&exp_problem(), (0.5, 1.5)).unwrap() - 1.0).abs() < 1e-10);
        let g = KernelModel::scalar(BaseKernel::Gaussian { sigma: 1.0 }, 1.0).unwrap();
        let pg = WaveProblem::new(s(2.0), g, Nonlinearity::quadratic(), 32).unwrap();
        let w = find_omega_star(&pg, (0.5, 2.0)).unwrap();
        assert!((w - (2.0 * 2f64.ln()).sqrt()).abs() < 1e-10);
        let k = KernelModel::scalar(BaseKernel::TwoSidedExponential { rate: 1.0 }, 1.0).unwrap();
        let p0 = WaveProblem::new(s(0.5), k, Nonlinearity::quadratic(), 32).unwrap();
        assert_eq!(find_omega_star(&p0, (0.1, 5.0)), Err(Error::NoRoot));
    }

    #[test]
    fn kawahara_root() {
        let cf = CharacteristicFunction::kawahara(1.0, 2.0).unwrap();
        let w = find_axis_root(&cf, (0.5, 1.5), 8).unwrap();
        let oracle = ((-1.0 + (1.0f64 + 8.0).sqrt()) / 2.0).sqrt();
        assert!((w - oracle).abs() < 1e-10);
    }

    #[test]
    fn vectors_and_alpha() {
        let p = exp_problem();
        let rd = ReducedData::compute(&p, (0.5, 1.5)).unwrap();
        assert_eq!(rd.v_star[0], 1.0);
        assert_eq!(rd.v_ad[0], 1.0);
        assert!((rd.alpha + 1.0).abs() < 1e-10);
        let k = KernelModel::identity(2, BaseKernel::TwoSidedExponential { rate: 1.0 }).unwrap();
        let a = RMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.5]));
        let p2 = WaveProblem::new(a, k, Nonlinearity::quadratic(), 16).unwrap();
        let (v, w) = kernel_vectors(&p2, 1.0).unwrap();
        assert!((v - DVector::from_vec(vec![1.0, 0.0])).norm() < 1e-12);
        assert!((w - DVector::from_vec(vec![1.0, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn flattened_symbol_has_vanishing_alpha() {
        // k = e1 - (25/16) e2 has a critical point of its symbol at omega = 1
        let k = KernelModel::new(
            1,
            vec![
                (s(1.0), BaseKernel::TwoSidedExponential { rate: 1.0 }),
                (s(-25.0 / 16.0), BaseKernel::TwoSidedExponential { rate: 2.0 }),
            ],
        )
        .unwrap();
        let p = WaveProblem::new(s(-4.0 / 3.0), k, Nonlinearity::quadratic(), 16).unwrap();
        let rd = ReducedData {
            omega_star: 1.0,
            v_star: DVector::from_element(1, 1.0),
            v_ad: DVector::from_element(1, 1.0),
            alpha: 0.0,
        };
        assert!(p.characteristic().eval_d(Complex64::new(0.0, 1.0)).unwrap().norm() < 1e-14);
        assert!(matches!(alpha_coefficient(&p, &rd), Err(Error::AlphaVanishes { .. })));
    }

    #[test]
    fn psi_structure() {
        let p = exp_problem();
        let rd = ReducedData::compute(&p, (0.5, 1.5)).unwrap();
        assert_eq!(max_abs(&solve_psi(&p, &rd, 1.0, 0.0).unwrap()), 0.0);
        let psi = solve_psi(&p, &rd, 1.0, 1e-3).unwrap();
        // leading order: modes 0 and 2 only, from cos^2 = (1 + cos 2y) / 2
        let lead = psi[(0, 0)].abs().max(psi[(2, 0)].abs());
        assert!(lead > 1e-7);
        for j in [1, 3, 4, 5] {
            assert!(psi[(j, 0)].abs() < 1e-3 * lead, "mode {j}: {}", psi[(j, 0)]);
        }
        let mut ratios = Vec::new();
        for a in [0.02, 0.01, 0.005] {
            ratios.push(sup_norm(&solve_psi(&p, &rd, 1.0, a).unwrap()) / (a * a));
        }
        assert!(ratios.iter().all(|r| *r < 2.0 && *r > 0.1), "{ratios:?}");
    }

    #[test]
    fn reduced_map_properties() {
        let p = exp_problem();
        let rd = ReducedData::compute(&p, (0.5, 1.5)).unwrap();
        assert!(reduced_r(&p, &rd, 1.0, 1e-8).unwrap().abs() < 1e-7);
        let r = reduced_r(&p, &rd, 1.0, 0.01).unwrap();
        assert!(r.abs() < 0.01);
        // quadratic in omega - omega_* at a -> 0: limit 0.5 delta^2
        for d in [0.02, 0.01] {
            let q = reduced_r(&p, &rd, 1.0 + d, 1e-9).unwrap() / (d * d);
            assert!((q - 0.5).abs() < 0.05, "{q}");
        }
    }

    #[test]
    fn fixed_point_and_direct_agree() {
        let p = exp_problem();
        let rd = ReducedData::compute(&p, (0.5, 1.5)).unwrap();
        assert_eq!(fixed_point_omega(&p, &rd, 0.0, 1e-14).unwrap().omega, rd.omega_star);
        let fp = fixed_point_omega(&p, &rd, 0.02, 1e-14).unwrap();
        assert!(fp.contraction_ratio < 1.0);
        let neg = fixed_point_omega(&p, &rd, -0.02, 1e-14).unwrap();
        assert!((fp.omega - neg.omega).abs() < 1e-12);
        let bp = branch_point(&p, &rd, 0.02, None).unwrap();
        assert!((bp.omega_ls - bp.omega_direct).abs() < 1e-8);
        assert!(bp.discrepancy < 1e-8);
        assert!(bp.residual_direct < 1e-10);
        assert!(grid_residual(&p, bp.omega_direct, &bp.coeffs_direct, 0.002) < 1e-6);
        let deg = direct_newton(&p, &rd, 0.0, (1.3, &bp.coeffs_direct)).unwrap();
        assert!(deg.degenerate && deg.omega == 1.3);
    }

    #[test]
    fn uniqueness_without_noise() {
        let p = exp_problem().with_modes(16).unwrap();
        let rd = ReducedData::compute(&p, (0.5, 1.5)).unwrap();
        let br = continue_branch(&p, &rd, 0.02, 2);
        let rep = uniqueness_probe(&p, &rd, &br, 4, 0.0, 7);
        assert_eq!(rep.returned, 4);
    }
}
