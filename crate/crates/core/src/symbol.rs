//! Characteristic functions `d(nu)`, argument-principle root counting,
//! root finding and hyperbolicity checks on the imaginary axis.

use crate::error::{Error, Result};
use crate::kernel::KernelModel;
use crate::linalg::{complex_singular_values, det, det_derivative, to_complex, CMatrix, RMatrix};
use crate::quadrature::{adaptive_gk, local_minima, QuadValue};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

/// Contours on which `|d|` drops below this value are rejected.
pub const CONTOUR_FLOOR: f64 = 1e-12;
/// Absolute accuracy requested from the winding-number quadrature.
pub const WINDING_QUAD_TOL: f64 = 1e-10;
/// Default tolerance for deciding that `d` vanishes on the imaginary axis.
pub const HYPERBOLICITY_TOL: f64 = 1e-10;

/// Which determinant a characteristic function represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    /// `d(nu) = det(A + K(nu))`.
    PrincipalPlusKernel,
    /// `d(nu) = det(-I + K(nu) A)`.
    SteadyState,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Matrix {
        form: Form,
        a: RMatrix,
        kernel: KernelModel,
        shift: f64,
    },
    /// Scalar polynomial, coefficients in ascending powers of `nu`.
    Polynomial { coeffs: Vec<f64> },
}

/// An analytic map `nu -> d(nu)` together with its derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicFunction {
    repr: Repr,
}

impl CharacteristicFunction {
    pub fn new(form: Form, a: RMatrix, kernel: KernelModel) -> Result<Self> {
        let n = kernel.dimension();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::InvalidInput(format!(
                "A is {}x{} but the kernel has dimension {n}",
                a.nrows(),
                a.ncols()
            )));
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite entry in A".into()));
        }
        Ok(Self {
            repr: Repr::Matrix {
                form,
                a,
                kernel,
                shift: 0.0,
            },
        })
    }

    pub fn principal_plus_kernel(a: RMatrix, kernel: KernelModel) -> Result<Self> {
        Self::new(Form::PrincipalPlusKernel, a, kernel)
    }

    pub fn steady_state(a: RMatrix, kernel: KernelModel) -> Result<Self> {
        Self::new(Form::SteadyState, a, kernel)
    }

    /// Scalar polynomial `sum_k coeffs[k] nu^k`.
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("polynomial needs finite coefficients".into()));
        }
        Ok(Self {
            repr: Repr::Polynomial { coeffs },
        })
    }

    /// The Kawahara-type symbol `-alpha nu^4 + nu^2 + c`.
    pub fn kawahara(alpha: f64, c: f64) -> Result<Self> {
        Self::polynomial(vec![c, 0.0, 1.0, 0.0, -alpha])
    }

    /// Replaces the kernel symbol `K(nu)` by `K(nu + shift)`, which is the
    /// symbol of the operator conjugated by `e^{shift x}`.
    pub fn with_shift(mut self, s: f64) -> Self {
        match &mut self.repr {
            Repr::Matrix { shift, .. } => *shift = s,
            Repr::Polynomial { coeffs } => {
                // p(nu + s) expanded in powers of nu
                let n = coeffs.len();
                let mut out = vec![0.0; n];
                for (k, &ck) in coeffs.iter().enumerate() {
                    let mut binom = 1.0;
                    for j in 0..=k {
                        out[j] += ck * binom * s.powi((k - j) as i32);
                        binom = binom * (k - j) as f64 / (j + 1) as f64;
                    }
                }
                *coeffs = out;
            }
        }
        self
    }

    /// Direct sum of two matrix characteristic functions with the same
    /// form and shift; the determinant is the product of the two.
    pub fn block_diag(&self, other: &CharacteristicFunction) -> Result<Self> {
        match (&self.repr, &other.repr) {
            (
                Repr::Matrix {
                    form: f1,
                    a: a1,
                    kernel: k1,
                    shift: s1,
                },
                Repr::Matrix {
                    form: f2,
                    a: a2,
                    kernel: k2,
                    shift: s2,
                },
            ) if f1 == f2 && s1 == s2 => {
                let (n1, n2) = (a1.nrows(), a2.nrows());
                let mut a = RMatrix::zeros(n1 + n2, n1 + n2);
                a.view_mut((0, 0), (n1, n1)).copy_from(a1);
                a.view_mut((n1, n1), (n2, n2)).copy_from(a2);
                Ok(Self {
                    repr: Repr::Matrix {
                        form: *f1,
                        a,
                        kernel: k1.block_diag(k2),
                        shift: *s1,
                    },
                })
            }
            _ => Err(Error::InvalidInput(
                "block_diag needs two matrix forms with equal form and shift".into(),
            )),
        }
    }

    pub fn form(&self) -> Option<Form> {
        match &self.repr {
            Repr::Matrix { form, .. } => Some(*form),
            Repr::Polynomial { .. } => None,
        }
    }

    pub fn principal(&self) -> Option<&RMatrix> {
        match &self.repr {
            Repr::Matrix { a, .. } => Some(a),
            Repr::Polynomial { .. } => None,
        }
    }

    pub fn kernel(&self) -> Option<&KernelModel> {
        match &self.repr {
            Repr::Matrix { kernel, .. } => Some(kernel),
            Repr::Polynomial { .. } => None,
        }
    }

    pub fn shift(&self) -> f64 {
        match &self.repr {
            Repr::Matrix { shift, .. } => *shift,
            Repr::Polynomial { .. } => 0.0,
        }
    }

    pub fn dimension(&self) -> usize {
        match &self.repr {
            Repr::Matrix { a, .. } => a.nrows(),
            Repr::Polynomial { .. } => 1,
        }
    }

    /// Half-width of the vertical strip on which `d` is analytic.
    pub fn strip_half_width(&self) -> f64 {
        match &self.repr {
            Repr::Matrix { kernel, shift, .. } => kernel.decay_rate() - shift.abs(),
            Repr::Polynomial { .. } => f64::INFINITY,
        }
    }

    /// True when the roots are symmetric under `nu -> -nu` (even kernel,
    /// unshifted).
    pub fn is_reflection_symmetric(&self) -> bool {
        match &self.repr {
            Repr::Matrix { kernel, shift, .. } => kernel.is_even() && *shift == 0.0,
            Repr::Polynomial { coeffs } => coeffs.iter().skip(1).step_by(2).all(|c| *c == 0.0),
        }
    }

    /// The matrix whose determinant is `d(nu)` and its derivative.
    pub fn form_matrix(&self, nu: Complex64) -> Result<(CMatrix, CMatrix)> {
        match &self.repr {
            Repr::Matrix {
                form,
                a,
                kernel,
                shift,
            } => {
                let z = nu + *shift;
                if nu.re.abs() >= self.strip_half_width() {
                    return Err(Error::StripViolation {
                        re_abs: nu.re.abs(),
                        half_width: self.strip_half_width(),
                    });
                }
                let k = kernel.symbol(z)?;
                let dk = kernel.symbol_derivative(z)?;
                let ac = to_complex(a);
                Ok(match form {
                    Form::PrincipalPlusKernel => (ac + k, dk),
                    Form::SteadyState => {
                        let n = a.nrows();
                        (&k * &ac - CMatrix::identity(n, n), &dk * &ac)
                    }
                })
            }
            Repr::Polynomial { .. } => {
                let (d, dd) = self.poly_eval(nu);
                Ok((CMatrix::from_element(1, 1, d), CMatrix::from_element(1, 1, dd)))
            }
        }
    }

    fn poly_eval(&self, nu: Complex64) -> (Complex64, Complex64) {
        let Repr::Polynomial { coeffs } = &self.repr else {
            unreachable!("polynomial evaluation on matrix form")
        };
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            dp = dp * nu + p;
            p = p * nu + c;
        }
        (p, dp)
    }

    pub fn eval_d(&self, nu: Complex64) -> Result<Complex64> {
        if let Repr::Polynomial { .. } = self.repr {
            return Ok(self.poly_eval(nu).0);
        }
        let (m, _) = self.form_matrix(nu)?;
        Ok(det(&m))
    }

    pub fn eval_d_derivative(&self, nu: Complex64) -> Result<Complex64> {
        if let Repr::Polynomial { .. } = self.repr {
            return Ok(self.poly_eval(nu).1);
        }
        let (m, dm) = self.form_matrix(nu)?;
        Ok(det_derivative(&m, &dm))
    }

    /// `(d, d')` in one evaluation of the form matrix.
    pub fn eval_pair(&self, nu: Complex64) -> Result<(Complex64, Complex64)> {
        if let Repr::Polynomial { .. } = self.repr {
            return Ok(self.poly_eval(nu));
        }
        let (m, dm) = self.form_matrix(nu)?;
        Ok((det(&m), det_derivative(&m, &dm)))
    }

    /// Whether the kernel part is negligible against the principal part
    /// at `i ell` (so `d(i ell)` stays away from zero there).
    pub fn tail_dominated_at(&self, ell: f64) -> Result<bool> {
        match &self.repr {
            Repr::Matrix {
                form,
                a,
                kernel,
                shift,
            } => {
                let k = kernel.symbol(Complex64::new(*shift, ell))?;
                Ok(match form {
                    Form::SteadyState => (&k * to_complex(a)).norm() < 0.5,
                    Form::PrincipalPlusKernel => {
                        let smin = complex_singular_values(&to_complex(a))
                            .last()
                            .copied()
                            .unwrap_or(0.0);
                        k.norm() < 0.5 * smin
                    }
                })
            }
            Repr::Polynomial { coeffs } => {
                let deg = coeffs.len() - 1;
                if deg == 0 {
                    return Ok(coeffs[0] != 0.0);
                }
                let lead = coeffs[deg].abs() * ell.abs().powi(deg as i32);
                let rest: f64 = coeffs[..deg]
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c.abs() * ell.abs().powi(k as i32))
                    .sum();
                Ok(lead > 2.0 * rest)
            }
        }
    }

    fn tail_dominated_beyond(&self, ell_max: f64) -> Result<bool> {
        for f in [1.0, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0] {
            if !self.tail_dominated_at(f * ell_max)? || !self.tail_dominated_at(-f * ell_max)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Smallest power-of-two multiple of 8 beyond which the tail is
    /// dominated.
    pub fn auto_ell_max(&self) -> Result<f64> {
        let mut ell = 8.0;
        while ell <= 1e6 {
            if self.tail_dominated_beyond(ell)? {
                return Ok(ell);
            }
            ell *= 2.0;
        }
        Err(Error::TailNotDominated { ell_max: ell })
    }
}

/// Axis-parallel rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rectangle {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let r = Self {
            re_min,
            re_max,
            im_min,
            im_max,
        };
        if !(re_min < re_max && im_min < im_max) || [re_min, re_max, im_min, im_max].iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("degenerate rectangle {r:?}")));
        }
        Ok(r)
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, z: Complex64, margin: f64) -> bool {
        z.re >= self.re_min - margin
            && z.re <= self.re_max + margin
            && z.im >= self.im_min - margin
            && z.im <= self.im_max + margin
    }

    pub fn expanded(&self, by: f64) -> Self {
        Self {
            re_min: self.re_min - by,
            re_max: self.re_max + by,
            im_min: self.im_min - by,
            im_max: self.im_max + by,
        }
    }

    /// Rectangle shrunk about its centre by `factor` in each direction.
    pub fn scaled(&self, factor: f64) -> Self {
        let c = self.center();
        let hw = 0.5 * self.width() * factor;
        let hh = 0.5 * self.height() * factor;
        Self {
            re_min: c.re - hw,
            re_max: c.re + hw,
            im_min: c.im - hh,
            im_max: c.im + hh,
        }
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }
}

/// A root of `d` with multiplicity and the residual `|d(nu)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "RootJson", into = "RootJson")]
pub struct RootRecord {
    pub nu: Complex64,
    pub multiplicity: usize,
    pub residual: f64,
}

#[derive(Serialize, Deserialize)]
struct RootJson {
    re: f64,
    im: f64,
    multiplicity: usize,
    residual: f64,
}

impl From<RootJson> for RootRecord {
    fn from(j: RootJson) -> Self {
        Self {
            nu: Complex64::new(j.re, j.im),
            multiplicity: j.multiplicity,
            residual: j.residual,
        }
    }
}

impl From<RootRecord> for RootJson {
    fn from(r: RootRecord) -> Self {
        Self {
            re: r.nu.re,
            im: r.nu.im,
            multiplicity: r.multiplicity,
            residual: r.residual,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pair(Complex64, Complex64);

impl Add for Pair {
    type Output = Pair;
    fn add(self, o: Pair) -> Pair {
        Pair(self.0 + o.0, self.1 + o.1)
    }
}
impl Sub for Pair {
    type Output = Pair;
    fn sub(self, o: Pair) -> Pair {
        Pair(self.0 - o.0, self.1 - o.1)
    }
}
impl Mul<f64> for Pair {
    type Output = Pair;
    fn mul(self, s: f64) -> Pair {
        Pair(self.0 * s, self.1 * s)
    }
}
impl QuadValue for Pair {
    fn zero() -> Self {
        Pair(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }
    fn magnitude(&self) -> f64 {
        self.0.norm()
    }
}

/// Winding number and first moment `sum of roots` inside a rectangle.
#[derive(Debug, Clone, Copy)]
struct ContourData {
    count: usize,
    root_sum: Complex64,
}

enum ContourOutcome {
    Ok(ContourData),
    TooClose(f64),
    NonInteger(f64),
}

fn contour_integrals(cf: &CharacteristicFunction, rect: &Rectangle) -> Result<ContourOutcome> {
    let strip = cf.strip_half_width();
    if rect.re_min.abs().max(rect.re_max.abs()) >= strip {
        return Err(Error::StripViolation {
            re_abs: rect.re_min.abs().max(rect.re_max.abs()),
            half_width: strip,
        });
    }
    let corners = rect.corners();
    let mut total = Pair::zero();
    let mut min_abs = f64::INFINITY;
    let mut failure: Option<Error> = None;
    for e in 0..4 {
        let z0 = corners[e];
        let z1 = corners[(e + 1) % 4];
        let dz = z1 - z0;
        let r = adaptive_gk(0.0, 1.0, WINDING_QUAD_TOL * 2.0 * PI / 4.0, 4000, |t: f64| {
            let z = z0 + dz * t;
            match cf.eval_pair(z) {
                Ok((d, dd)) => {
                    min_abs = min_abs.min(d.norm());
                    if d.norm() < CONTOUR_FLOOR {
                        return Pair::zero();
                    }
                    let g = dd / d * dz;
                    Pair(g, g * z)
                }
                Err(err) => {
                    failure.get_or_insert(err);
                    Pair::zero()
                }
            }
        });
        if let Some(err) = failure {
            return Err(err);
        }
        if min_abs < CONTOUR_FLOOR || !r.converged {
            return Ok(ContourOutcome::TooClose(min_abs));
        }
        total = total + r.value;
    }
    let w = total.0 / Complex64::new(0.0, 2.0 * PI);
    let rounded = w.re.round();
    let dev = (w - rounded).norm();
    if dev >= 0.25 || rounded < 0.0 {
        return Ok(ContourOutcome::NonInteger(w.re));
    }
    Ok(ContourOutcome::Ok(ContourData {
        count: rounded as usize,
        root_sum: total.1 / Complex64::new(0.0, 2.0 * PI),
    }))
}

fn nudged_contour(cf: &CharacteristicFunction, rect: &Rectangle) -> Result<(Rectangle, ContourData)> {
    let size = rect.width().max(rect.height());
    let strip = cf.strip_half_width();
    let reach = rect.re_min.abs().max(rect.re_max.abs());
    if reach >= strip {
        return Err(Error::StripViolation {
            re_abs: reach,
            half_width: strip,
        });
    }
    let mut last: Option<Error> = None;
    let offsets = [0.0, 0.0025, -0.0025, 0.005, -0.005, 0.0075, -0.0075, 0.01, -0.01];
    for off in offsets {
        let candidate = rect.expanded(off * size);
        if candidate.re_min.abs().max(candidate.re_max.abs()) >= strip {
            continue;
        }
        match contour_integrals(cf, &candidate)? {
            ContourOutcome::Ok(data) => return Ok((candidate, data)),
            ContourOutcome::TooClose(m) => last = Some(Error::ContourTooCloseToRoot { min_abs: m }),
            ContourOutcome::NonInteger(v) => last = Some(Error::NonIntegerWinding { value: v }),
        }
    }
    Err(last.unwrap_or(Error::StripViolation {
        re_abs: rect.re_min.abs().max(rect.re_max.abs()),
        half_width: strip,
    }))
}

/// Number of roots of `d` (with multiplicity) inside `rect`.
pub fn count_roots(cf: &CharacteristicFunction, rect: &Rectangle) -> Result<usize> {
    nudged_contour(cf, rect).map(|(_, d)| d.count)
}

/// All roots inside `rect`, simple roots polished to `|d| < tol`.
pub fn roots_in_rectangle(cf: &CharacteristicFunction, rect: &Rectangle, tol: f64) -> Result<Vec<RootRecord>> {
    let (rect, data) = nudged_contour(cf, rect)?;
    let mut out = Vec::new();
    subdivide(cf, &rect, data, tol, &mut out)?;
    Ok(out)
}

fn newton_polish(cf: &CharacteristicFunction, start: Complex64, tol: f64) -> Option<(Complex64, f64)> {
    let mut z = start;
    for _ in 0..60 {
        let (d, dd) = cf.eval_pair(z).ok()?;
        if d.norm() < tol * 1e-3 || dd.norm() == 0.0 {
            return (d.norm() < tol).then_some((z, d.norm()));
        }
        let step = d / dd;
        z -= step;
        if step.norm() < 1e-15 * z.norm().max(1.0) {
            break;
        }
    }
    let r = cf.eval_d(z).ok()?.norm();
    (r < tol).then_some((z, r))
}

fn subdivide(
    cf: &CharacteristicFunction,
    rect: &Rectangle,
    data: ContourData,
    tol: f64,
    out: &mut Vec<RootRecord>,
) -> Result<()> {
    if data.count == 0 {
        return Ok(());
    }
    let margin = 1e-3 * rect.diameter();
    if data.count == 1 {
        if let Some((z, r)) = newton_polish(cf, data.root_sum, tol) {
            if rect.contains(z, margin) {
                out.push(RootRecord {
                    nu: z,
                    multiplicity: 1,
                    residual: r,
                });
                return Ok(());
            }
        }
    }
    if rect.diameter() < 10.0 * tol {
        let nu = data.root_sum / data.count as f64;
        out.push(RootRecord {
            nu,
            multiplicity: data.count,
            residual: cf.eval_d(nu)?.norm(),
        });
        return Ok(());
    }
    let split_re = rect.width() >= rect.height();
    // Cut lines avoid the rectangle's midlines: roots on a symmetry axis
    // would sit on a midline cut, and a symmetric pair on the cut splits
    // into two half-contributions whose total still looks integral.
    for frac in [0.4873, 0.5241, 0.4512, 0.5618, 0.4137, 0.6011, 0.3719, 0.3306, 0.6694] {
        let (a, b) = if split_re {
            let x = rect.re_min + frac * rect.width();
            (
                Rectangle { re_max: x, ..*rect },
                Rectangle { re_min: x, ..*rect },
            )
        } else {
            let y = rect.im_min + frac * rect.height();
            (
                Rectangle { im_max: y, ..*rect },
                Rectangle { im_min: y, ..*rect },
            )
        };
        let (ContourOutcome::Ok(da), ContourOutcome::Ok(db)) = (contour_integrals(cf, &a)?, contour_integrals(cf, &b)?) else {
            continue;
        };
        if da.count + db.count != data.count {
            continue;
        }
        subdivide(cf, &a, da, tol, out)?;
        subdivide(cf, &b, db, tol, out)?;
        return Ok(());
    }
    // The cluster cannot be separated at this scale.
    let nu = data.root_sum / data.count as f64;
    out.push(RootRecord {
        nu,
        multiplicity: data.count,
        residual: cf.eval_d(nu)?.norm(),
    });
    Ok(())
}

/// Result of sampling `|d(i ell)|` along the imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicityReport {
    pub hyperbolic: bool,
    pub min_abs: f64,
    pub argmin: f64,
}

/// Refined local minima `(ell, |d(i ell)|)` of `|d|` on `[-ell_max, ell_max]`.
pub fn axis_minima(cf: &CharacteristicFunction, ell_max: f64, n_samples: usize) -> Result<Vec<(f64, f64)>> {
    let mut failure = None;
    let mins = local_minima(-ell_max, ell_max, n_samples, 1e-13 * ell_max.max(1.0), |l| {
        match cf.eval_d(Complex64::new(0.0, l)) {
            Ok(d) => d.norm(),
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(mins),
    }
}

/// Checks that `d(i ell) != 0` for all real `ell`, sampling
/// `[-ell_max, ell_max]` and relying on tail domination beyond.
pub fn hyperbolicity_check(cf: &CharacteristicFunction, ell_max: f64, n_samples: usize) -> Result<HyperbolicityReport> {
    if !cf.tail_dominated_beyond(ell_max)? {
        return Err(Error::TailNotDominated { ell_max });
    }
    let mins = axis_minima(cf, ell_max, n_samples)?;
    let (argmin, min_abs) = mins
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0.0, f64::INFINITY));
    Ok(HyperbolicityReport {
        hyperbolic: min_abs > 10.0 * HYPERBOLICITY_TOL,
        min_abs,
        argmin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::BaseKernel;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }
    fn exp1() -> KernelModel {
        KernelModel::scalar(BaseKernel::TwoSidedExponential { rate: 1.0 }, 1.0).unwrap()
    }
    fn ss(a: f64) -> CharacteristicFunction {
        CharacteristicFunction::steady_state(RMatrix::from_element(1, 1, a), exp1()).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert!(ss(2.0).eval_d(c(0.0, 1.0)).unwrap().norm() < 1e-15);
        assert!((ss(2.0).eval_d(c(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-15);
        let id = CharacteristicFunction::principal_plus_kernel(RMatrix::identity(2, 2), KernelModel::zero(2)).unwrap();
        assert!((id.eval_d(c(0.3, -2.0)).unwrap() - 1.0).norm() < 1e-15);
        assert!((ss(2.0).eval_d_derivative(c(0.0, 1.0)).unwrap() - c(0.0, 1.0)).norm() < 1e-14);
        let kaw = CharacteristicFunction::kawahara(1.0, 2.0).unwrap();
        assert!(kaw.eval_d(c(0.0, 1.0)).unwrap().norm() < 1e-15);
    }

    #[test]
    fn count_examples() {
        let cf = ss(2.0);
        assert_eq!(count_roots(&cf, &Rectangle::new(-0.5, 0.5, 0.5, 1.5).unwrap()).unwrap(), 1);
        assert_eq!(count_roots(&cf, &Rectangle::new(-0.5, 0.5, 2.0, 3.0).unwrap()).unwrap(), 0);
        assert_eq!(count_roots(&cf, &Rectangle::new(-0.5, 0.5, -1.5, 1.5).unwrap()).unwrap(), 2);
        assert!(matches!(
            count_roots(&cf, &Rectangle::new(-1.0, 0.5, 0.5, 1.5).unwrap()),
            Err(Error::StripViolation { .. })
        ));
    }

    #[test]
    fn contour_through_root_is_nudged() {
        // top edge passes exactly through nu = i
        let cf = ss(2.0);
        let n = count_roots(&cf, &Rectangle::new(-0.5, 0.5, 0.0, 1.0).unwrap()).unwrap();
        assert!(n <= 1);
    }

    #[test]
    fn roots_examples() {
        let cf = ss(2.0);
        let roots = roots_in_rectangle(&cf, &Rectangle::new(-0.5, 0.5, -1.5, 1.5).unwrap(), 1e-10).unwrap();
        assert_eq!(roots.len(), 2);
        for (r, want) in roots.iter().zip([c(0.0, -1.0), c(0.0, 1.0)]) {
            assert_eq!(r.multiplicity, 1);
            assert!((r.nu - want).norm() < 1e-8);
            assert!(r.residual < 1e-10);
        }
        let kaw = CharacteristicFunction::kawahara(1.0, 2.0).unwrap();
        let roots = roots_in_rectangle(&kaw, &Rectangle::new(-0.3, 0.3, 0.7, 1.3).unwrap(), 1e-10).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0].nu - c(0.0, 1.0)).norm() < 1e-8);
        let none = roots_in_rectangle(&cf, &Rectangle::new(-0.5, 0.5, 2.0, 3.0).unwrap(), 1e-10).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn double_root_is_reported_as_cluster() {
        // (nu + 0.3)^2
        let cf = CharacteristicFunction::polynomial(vec![0.09, 0.6, 1.0]).unwrap();
        let roots = roots_in_rectangle(&cf, &Rectangle::new(-1.0, 0.7, -0.5, 0.6).unwrap(), 1e-10).unwrap();
        let total: usize = roots.iter().map(|r| r.multiplicity).sum();
        assert_eq!(total, 2);
        for r in &roots {
            assert!((r.nu - c(-0.3, 0.0)).norm() < 1e-5);
        }
    }

    #[test]
    fn hyperbolicity_examples() {
        let h = hyperbolicity_check(&ss(0.5), 16.0, 801).unwrap();
        assert!(h.hyperbolic);
        assert!((h.min_abs - 0.5).abs() < 1e-10);
        let h = hyperbolicity_check(&ss(2.0), 16.0, 801).unwrap();
        assert!(!h.hyperbolic);
        assert!((h.argmin.abs() - 1.0).abs() < 1e-8);
        let id = CharacteristicFunction::principal_plus_kernel(RMatrix::identity(2, 2), KernelModel::zero(2)).unwrap();
        let h = hyperbolicity_check(&id, 16.0, 101).unwrap();
        assert!(h.hyperbolic && (h.min_abs - 1.0).abs() < 1e-15);
        assert!(matches!(hyperbolicity_check(&ss(2.0), 0.5, 101), Err(Error::TailNotDominated { .. })));
    }

    #[test]
    fn shift_moves_roots() {
        let cf = ss(2.0).with_shift(0.3);
        assert_eq!(cf.strip_half_width(), 0.7);
        // roots of -1 + 2/(1 - (nu+0.3)^2): nu = -0.3 +- i
        assert!(cf.eval_d(c(-0.3, 1.0)).unwrap().norm() < 1e-14);
        let p = CharacteristicFunction::kawahara(1.0, 2.0).unwrap().with_shift(0.5);
        assert!(p.eval_d(c(-0.5, 1.0)).unwrap().norm() < 1e-13);
    }

    #[test]
    fn symmetric_rectangle_separates_axis_pair() {
        // d = -nu^4 + nu^2 + 2 has roots +-i on the midline of the square
        let p = CharacteristicFunction::kawahara(1.0, 2.0).unwrap();
        let rect = Rectangle::new(-2.0, 2.0, -2.0, 2.0).unwrap();
        let roots = roots_in_rectangle(&p, &rect, 1e-12).unwrap();
        assert_eq!(roots.len(), 4);
        for exact in [c(0.0, 1.0), c(0.0, -1.0), c(2f64.sqrt(), 0.0), c(-(2f64.sqrt()), 0.0)] {
            assert!(roots.iter().any(|r| r.multiplicity == 1 && (r.nu - exact).norm() < 1e-12));
        }
    }
}
