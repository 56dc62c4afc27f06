//! Exponentially localised matrix convolution kernels with closed-form
//! symbols `K(nu) = \int k(x) e^{-nu x} dx`.

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, RMatrix};
use crate::quadrature::adaptive_gk;
use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative kernel magnitude below which convolution integrals are cut off.
pub const TRUNCATION_LEVEL: f64 = 1e-14;

/// Scalar kernel families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BaseKernel {
    /// Centred normal density with standard deviation `sigma`.
    Gaussian { sigma: f64 },
    /// `(rate / 2) e^{-rate |x|}`.
    TwoSidedExponential { rate: f64 },
    /// `pi^{-1/2} e^{-(x - center)^2}`.
    ShiftedGaussianBump { center: f64 },
}

impl BaseKernel {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            BaseKernel::Gaussian { sigma } => sigma.is_finite() && sigma > 0.0,
            BaseKernel::TwoSidedExponential { rate } => rate.is_finite() && rate > 0.0,
            BaseKernel::ShiftedGaussianBump { center } => center.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("bad kernel parameters: {self:?}")))
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            BaseKernel::Gaussian { sigma } => {
                (-(x * x) / (2.0 * sigma * sigma)).exp() / (2.0 * PI * sigma * sigma).sqrt()
            }
            BaseKernel::TwoSidedExponential { rate } => 0.5 * rate * (-rate * x.abs()).exp(),
            BaseKernel::ShiftedGaussianBump { center } => {
                let y = x - center;
                (-(y * y)).exp() / PI.sqrt()
            }
        }
    }

    /// Classical derivative `k'(x)`; at the kink of the exponential the
    /// average of the one-sided values (zero) is returned.
    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            BaseKernel::Gaussian { sigma } => -x / (sigma * sigma) * self.value(x),
            BaseKernel::TwoSidedExponential { rate } => {
                if x == 0.0 {
                    0.0
                } else {
                    -rate * x.signum() * self.value(x)
                }
            }
            BaseKernel::ShiftedGaussianBump { center } => -2.0 * (x - center) * self.value(x),
        }
    }

    /// Half-width of the strip in which the symbol is analytic.
    pub fn strip_half_width(&self) -> f64 {
        match *self {
            BaseKernel::TwoSidedExponential { rate } => rate,
            _ => f64::INFINITY,
        }
    }

    /// Inverse length scale of the kernel, used to judge grid resolution.
    pub fn inverse_length(&self) -> f64 {
        match *self {
            BaseKernel::Gaussian { sigma } => 1.0 / sigma,
            BaseKernel::TwoSidedExponential { rate } => rate,
            BaseKernel::ShiftedGaussianBump { .. } => std::f64::consts::SQRT_2,
        }
    }

    pub fn is_even(&self) -> bool {
        match *self {
            BaseKernel::ShiftedGaussianBump { center } => center == 0.0,
            _ => true,
        }
    }

    /// Interval outside of which the kernel is below `TRUNCATION_LEVEL`
    /// times its peak.
    pub fn support(&self) -> (f64, f64) {
        let log_level = -TRUNCATION_LEVEL.ln();
        match *self {
            BaseKernel::Gaussian { sigma } => {
                let r = sigma * (2.0 * log_level).sqrt();
                (-r, r)
            }
            BaseKernel::TwoSidedExponential { rate } => {
                let r = log_level / rate;
                (-r, r)
            }
            BaseKernel::ShiftedGaussianBump { center } => {
                let r = log_level.sqrt();
                (center - r, center + r)
            }
        }
    }

    /// Points where the kernel is not smooth (used to split quadrature).
    pub fn kinks(&self) -> &'static [f64] {
        match self {
            BaseKernel::TwoSidedExponential { .. } => &[0.0],
            _ => &[],
        }
    }

    pub fn symbol(&self, nu: Complex64) -> Complex64 {
        match *self {
            BaseKernel::Gaussian { sigma } => (nu * nu * (0.5 * sigma * sigma)).exp(),
            BaseKernel::TwoSidedExponential { rate } => {
                let r2 = rate * rate;
                Complex64::new(r2, 0.0) / (r2 - nu * nu)
            }
            BaseKernel::ShiftedGaussianBump { center } => (-nu * center + nu * nu * 0.25).exp(),
        }
    }

    pub fn symbol_derivative(&self, nu: Complex64) -> Complex64 {
        match *self {
            BaseKernel::Gaussian { sigma } => nu * (sigma * sigma) * self.symbol(nu),
            BaseKernel::TwoSidedExponential { rate } => {
                let r2 = rate * rate;
                let den = r2 - nu * nu;
                nu * (2.0 * r2) / (den * den)
            }
            BaseKernel::ShiftedGaussianBump { center } => (nu * 0.5 - center) * self.symbol(nu),
        }
    }

    /// Taylor coefficients of the symbol at zero, orders `0..=order`.
    fn taylor_at_zero(&self, order: usize) -> Vec<f64> {
        let mut c = vec![0.0; order + 1];
        match *self {
            BaseKernel::Gaussian { sigma } => {
                // e^{s nu^2}, s = sigma^2 / 2
                let s = 0.5 * sigma * sigma;
                let mut term = 1.0;
                for j in 0..=order / 2 {
                    if j > 0 {
                        term *= s / j as f64;
                    }
                    c[2 * j] = term;
                }
            }
            BaseKernel::TwoSidedExponential { rate } => {
                for j in 0..=order / 2 {
                    c[2 * j] = rate.powi(-2 * j as i32);
                }
            }
            BaseKernel::ShiftedGaussianBump { center } => {
                let shift: Vec<f64> = (0..=order)
                    .scan(1.0, |t, i| {
                        if i > 0 {
                            *t *= -center / i as f64;
                        }
                        Some(*t)
                    })
                    .collect();
                let gauss = BaseKernel::Gaussian {
                    sigma: std::f64::consts::FRAC_1_SQRT_2,
                }
                .taylor_at_zero(order);
                for i in 0..=order {
                    for j in 0..=order - i {
                        c[i + j] += shift[i] * gauss[j];
                    }
                }
            }
        }
        c
    }
}

/// Matrix kernel `k(x) = sum_t C_t b_t(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelModel {
    dimension: usize,
    terms: Vec<(RMatrix, BaseKernel)>,
}

impl KernelModel {
    pub fn new(dimension: usize, terms: Vec<(RMatrix, BaseKernel)>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput("kernel dimension must be positive".into()));
        }
        for (c, b) in &terms {
            b.validate()?;
            if c.nrows() != dimension || c.ncols() != dimension {
                return Err(Error::InvalidInput(format!(
                    "coefficient matrix is {}x{}, expected {dimension}x{dimension}",
                    c.nrows(),
                    c.ncols()
                )));
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("non-finite kernel coefficient".into()));
            }
        }
        Ok(Self { dimension, terms })
    }

    /// Scalar kernel `coefficient * base`.
    pub fn scalar(base: BaseKernel, coefficient: f64) -> Result<Self> {
        Self::new(1, vec![(RMatrix::from_element(1, 1, coefficient), base)])
    }

    /// `base(x) * I_n`.
    pub fn identity(dimension: usize, base: BaseKernel) -> Result<Self> {
        Self::new(dimension, vec![(RMatrix::identity(dimension, dimension), base)])
    }

    pub fn zero(dimension: usize) -> Self {
        Self {
            dimension,
            terms: Vec::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn terms(&self) -> &[(RMatrix, BaseKernel)] {
        &self.terms
    }

    pub fn decay_rate(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, b)| b.strip_half_width())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn inverse_length(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, b)| b.inverse_length())
            .fold(0.0, f64::max)
    }

    pub fn is_even(&self) -> bool {
        self.terms.iter().all(|(_, b)| b.is_even())
    }

    /// Union of the truncated supports of all terms.
    pub fn support(&self) -> (f64, f64) {
        if self.terms.is_empty() {
            return (0.0, 0.0);
        }
        self.terms.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, b)| {
            let (l, h) = b.support();
            (lo.min(l), hi.max(h))
        })
    }

    /// The kernel `x -> k(x) M`.
    pub fn right_mul(&self, m: &RMatrix) -> Self {
        Self {
            dimension: self.dimension,
            terms: self.terms.iter().map(|(c, b)| (c * m, *b)).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dimension: self.dimension,
            terms: self.terms.iter().map(|(c, b)| (c * factor, *b)).collect(),
        }
    }

    /// Block-diagonal kernel `diag(self, other)`.
    pub fn block_diag(&self, other: &KernelModel) -> Self {
        let n = self.dimension + other.dimension;
        let mut terms = Vec::new();
        for (c, b) in &self.terms {
            let mut m = RMatrix::zeros(n, n);
            m.view_mut((0, 0), (self.dimension, self.dimension)).copy_from(c);
            terms.push((m, *b));
        }
        for (c, b) in &other.terms {
            let mut m = RMatrix::zeros(n, n);
            m.view_mut((self.dimension, self.dimension), (other.dimension, other.dimension))
                .copy_from(c);
            terms.push((m, *b));
        }
        Self { dimension: n, terms }
    }

    pub fn evaluate(&self, x: f64) -> RMatrix {
        let mut out = RMatrix::zeros(self.dimension, self.dimension);
        for (c, b) in &self.terms {
            out += c * b.value(x);
        }
        out
    }

    pub fn evaluate_derivative(&self, x: f64) -> RMatrix {
        let mut out = RMatrix::zeros(self.dimension, self.dimension);
        for (c, b) in &self.terms {
            out += c * b.derivative(x);
        }
        out
    }

    fn check_strip(&self, nu: Complex64) -> Result<()> {
        let eta0 = self.decay_rate();
        if nu.re.abs() >= eta0 || !nu.re.is_finite() || !nu.im.is_finite() {
            return Err(Error::StripViolation {
                re_abs: nu.re.abs(),
                half_width: eta0,
            });
        }
        Ok(())
    }

    pub fn symbol(&self, nu: Complex64) -> Result<CMatrix> {
        self.check_strip(nu)?;
        Ok(self.combine(|b| b.symbol(nu)))
    }

    pub fn symbol_derivative(&self, nu: Complex64) -> Result<CMatrix> {
        self.check_strip(nu)?;
        Ok(self.combine(|b| b.symbol_derivative(nu)))
    }

    fn combine(&self, f: impl Fn(&BaseKernel) -> Complex64) -> CMatrix {
        let mut out = CMatrix::zeros(self.dimension, self.dimension);
        for (c, b) in &self.terms {
            let s = f(b);
            out += c.map(|x| s * x);
        }
        out
    }

    /// Moments `\int x^m k(x) dx` for `m = 0..=max_order`, from the Taylor
    /// series of the symbol at the origin.
    pub fn moments(&self, max_order: usize) -> Vec<RMatrix> {
        let mut out = vec![RMatrix::zeros(self.dimension, self.dimension); max_order + 1];
        for (c, b) in &self.terms {
            let taylor = b.taylor_at_zero(max_order);
            let mut factorial = 1.0;
            for (m, t) in taylor.iter().enumerate() {
                if m > 0 {
                    factorial *= m as f64;
                }
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                out[m] += c * (sign * factorial * t);
            }
        }
        out
    }

    /// Largest entry of `\int |k_{jl}(x)| e^{eta |x|} dx`.
    pub fn weighted_l1_norm(&self, eta: f64) -> Result<f64> {
        let eta0 = self.decay_rate();
        if eta < 0.0 || eta >= eta0 {
            return Err(Error::StripViolation {
                re_abs: eta,
                half_width: eta0,
            });
        }
        let (lo, hi) = self.support();
        // Extend the truncation range so that the weighted tail is negligible.
        let reach = if eta0.is_finite() {
            let slack = (eta0 - eta).max(1e-3);
            (37.0 / slack).max(hi.abs()).max(lo.abs())
        } else {
            let base = lo.abs().max(hi.abs());
            base + 40.0 * eta.max(1.0)
        };
        let mut breaks = vec![-reach, 0.0, reach];
        for (_, b) in &self.terms {
            if let BaseKernel::ShiftedGaussianBump { center } = b {
                if center.abs() < reach {
                    breaks.push(*center);
                }
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut best = 0.0_f64;
        for j in 0..self.dimension {
            for l in 0..self.dimension {
                let mut total = 0.0;
                for w in breaks.windows(2) {
                    let r = adaptive_gk(w[0], w[1], 1e-13, 4000, |x: f64| {
                        self.entry(j, l, x).abs() * (eta * x.abs()).exp()
                    });
                    total += r.value;
                }
                best = best.max(total);
            }
        }
        Ok(best)
    }

    fn entry(&self, j: usize, l: usize, x: f64) -> f64 {
        self.terms.iter().map(|(c, b)| c[(j, l)] * b.value(x)).sum()
    }

    /// Trapezoidal approximation of `(k * u)(x_i)` on the grid of `u`.
    pub fn convolve_grid<T>(&self, u: &SampledField<T>) -> SampledField<T>
    where
        T: ComplexField<RealField = f64> + Copy,
    {
        let indices: Vec<usize> = (0..u.len()).collect();
        let values = self.convolve_grid_at(u, &indices);
        SampledField {
            start: u.start,
            spacing: u.spacing,
            values,
        }
    }

    /// Same as [`convolve_grid`](Self::convolve_grid) but only at selected
    /// grid indices; rows of the result follow `indices`.
    pub fn convolve_grid_at<T>(&self, u: &SampledField<T>, indices: &[usize]) -> DMatrix<T>
    where
        T: ComplexField<RealField = f64> + Copy,
    {
        let n = self.dimension;
        assert_eq!(u.values.ncols(), n, "field dimension mismatch");
        let len = u.len();
        let h = u.spacing;
        let (lo, hi) = self.support();
        let mut out = DMatrix::<T>::zeros(indices.len(), n);
        if len == 0 || self.terms.is_empty() {
            return out;
        }
        // offsets j - i for which x_i - x_j lies inside the kernel support
        let off_min = (-hi / h).floor() as i64;
        let off_max = (-lo / h).ceil() as i64;
        let kvals: Vec<RMatrix> = (off_min..=off_max)
            .map(|o| self.evaluate(-(o as f64) * h))
            .collect();
        for (row, &i) in indices.iter().enumerate() {
            let j_lo = (i as i64 + off_min).max(0) as usize;
            let j_hi = ((i as i64 + off_max).min(len as i64 - 1)).max(-1);
            if j_hi < j_lo as i64 {
                continue;
            }
            for j in j_lo..=j_hi as usize {
                let k = &kvals[(j as i64 - i as i64 - off_min) as usize];
                let w = if j == 0 || j == len - 1 { 0.5 * h } else { h };
                for a in 0..n {
                    let mut acc = T::zero();
                    for b in 0..n {
                        acc += u.values[(j, b)].scale(k[(a, b)]);
                    }
                    out[(row, a)] += acc.scale(w);
                }
            }
        }
        out
    }
}

/// Vector-valued samples on a uniform grid `x_i = start + i * spacing`;
/// row `i` holds the value at `x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField<T: nalgebra::Scalar = f64> {
    pub start: f64,
    pub spacing: f64,
    pub values: DMatrix<T>,
}

impl<T: nalgebra::Scalar + Copy> SampledField<T> {
    pub fn from_fn(start: f64, spacing: f64, len: usize, dimension: usize, f: impl Fn(f64, usize) -> T) -> Self {
        let values = DMatrix::from_fn(len, dimension, |i, c| f(start + spacing * i as f64, c));
        Self { start, spacing, values }
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn x(&self, i: usize) -> f64 {
        self.start + self.spacing * i as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive_gk;

    fn exp1() -> KernelModel {
        KernelModel::scalar(BaseKernel::TwoSidedExponential { rate: 1.0 }, 1.0).unwrap()
    }
    fn gauss1() -> KernelModel {
        KernelModel::scalar(BaseKernel::Gaussian { sigma: 1.0 }, 1.0).unwrap()
    }
    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluate_examples() {
        assert!((exp1().evaluate(0.0)[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((gauss1().evaluate(0.0)[(0, 0)] - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!((exp1().evaluate(2f64.ln())[(0, 0)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn symbol_examples() {
        assert!((exp1().symbol(c(0.0, 0.0)).unwrap()[(0, 0)] - 1.0).norm() < 1e-15);
        assert!((exp1().symbol(c(0.0, 1.0)).unwrap()[(0, 0)] - 0.5).norm() < 1e-15);
        assert!((gauss1().symbol(c(0.0, 1.0)).unwrap()[(0, 0)] - (-0.5f64).exp()).norm() < 1e-15);
        assert!(matches!(exp1().symbol(c(1.0, 0.0)), Err(Error::StripViolation { .. })));
    }

    #[test]
    fn symbol_derivative_examples() {
        assert!(exp1().symbol_derivative(c(0.0, 0.0)).unwrap()[(0, 0)].norm() < 1e-15);
        assert!((exp1().symbol_derivative(c(0.0, 1.0)).unwrap()[(0, 0)] - c(0.0, 0.5)).norm() < 1e-15);
        let g = gauss1().symbol_derivative(c(0.5, 0.0)).unwrap()[(0, 0)];
        assert!((g - 0.5 * 0.125f64.exp()).norm() < 1e-15);
    }

    #[test]
    fn moments_examples() {
        let m = exp1().moments(4);
        assert!((m[0][(0, 0)] - 1.0).abs() < 1e-15);
        assert_eq!(m[1][(0, 0)], 0.0);
        assert!((m[2][(0, 0)] - 2.0).abs() < 1e-14);
        assert!((m[4][(0, 0)] - 24.0).abs() < 1e-12);
        // shifted bump: mean = center, variance = 1/2
        let b = KernelModel::scalar(BaseKernel::ShiftedGaussianBump { center: 0.7 }, 1.0).unwrap();
        let mb = b.moments(3);
        assert!((mb[1][(0, 0)] - 0.7).abs() < 1e-14);
        assert!((mb[2][(0, 0)] - (0.49 + 0.5)).abs() < 1e-14);
        let third = adaptive_gk(-10.0, 12.0, 1e-13, 1000, |x: f64| x.powi(3) * b.evaluate(x)[(0, 0)]);
        assert!((mb[3][(0, 0)] - third.value).abs() < 1e-10);
    }

    #[test]
    fn weighted_norm_examples() {
        assert!((exp1().weighted_l1_norm(0.0).unwrap() - 1.0).abs() < 1e-9);
        assert!((exp1().weighted_l1_norm(0.5).unwrap() - 2.0).abs() < 1e-9);
        assert!((gauss1().weighted_l1_norm(0.0).unwrap() - 1.0).abs() < 1e-9);
        assert!(exp1().weighted_l1_norm(1.0).is_err());
    }

    #[test]
    fn convolve_constant_and_cosine() {
        let field = SampledField::from_fn(-60.0, 0.01, 12001, 1, |x, _| x.cos());
        let conv = exp1().convolve_grid(&field);
        for i in (4000..8000).step_by(97) {
            let x = field.x(i);
            assert!((conv.values[(i, 0)] - 0.5 * x.cos()).abs() < 1e-4);
        }
        let ones = SampledField::from_fn(-60.0, 0.05, 2401, 1, |_, _| 3.0);
        let conv = gauss1().convolve_grid(&ones);
        assert!((conv.values[(1200, 0)] - 3.0).abs() < 1e-12);
        let zero = SampledField::from_fn(-5.0, 0.1, 101, 1, |_, _| 0.0);
        assert!(exp1().convolve_grid(&zero).values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn block_diag_and_right_mul() {
        let k = exp1().block_diag(&gauss1());
        let s = k.symbol(c(0.0, 1.0)).unwrap();
        assert!((s[(0, 0)] - 0.5).norm() < 1e-15);
        assert!((s[(1, 1)] - (-0.5f64).exp()).norm() < 1e-15);
        assert_eq!(s[(0, 1)], c(0.0, 0.0));
        let m = RMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let km = k.right_mul(&m);
        let direct = k.evaluate(0.3) * &m;
        assert!((km.evaluate(0.3) - direct).norm() < 1e-15);
    }
}
