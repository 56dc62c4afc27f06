//! Spectral flow along one-parameter families of constant-coefficient
//! operators: crossing detection, crossing numbers and the Fredholm index
//! `ind T = -cross`.

use crate::error::{Error, Result};
use crate::linalg::RMatrix;
use crate::quadrature::golden_section;
use crate::symbol::{axis_minima, count_roots, CharacteristicFunction, Rectangle, RootRecord};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

type Family = Arc<dyn Fn(f64) -> Result<CharacteristicFunction> + Send + Sync>;

/// A continuous family `rho -> d^rho` on `[rho_min, rho_max]`.
#[derive(Clone)]
pub struct OperatorPath {
    family: Family,
    rho_min: f64,
    rho_max: f64,
    strip: f64,
}

impl std::fmt::Debug for OperatorPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorPath")
            .field("rho_min", &self.rho_min)
            .field("rho_max", &self.rho_max)
            .field("strip", &self.strip)
            .finish()
    }
}

impl OperatorPath {
    /// `strip` is the half-width `eta` of the vertical strip in which roots
    /// are tracked; it must not exceed the analyticity strip of any member.
    pub fn new<F>(rho_min: f64, rho_max: f64, strip: f64, family: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<CharacteristicFunction> + Send + Sync + 'static,
    {
        if !(rho_min < rho_max) || !(strip > 0.0) {
            return Err(Error::InvalidInput(format!(
                "path needs rho_min < rho_max and positive strip (got [{rho_min}, {rho_max}], {strip})"
            )));
        }
        let path = Self {
            family: Arc::new(family),
            rho_min,
            rho_max,
            strip,
        };
        for rho in [rho_min, 0.5 * (rho_min + rho_max), rho_max] {
            let cf = path.at(rho)?;
            if cf.strip_half_width() < strip {
                return Err(Error::StripViolation {
                    re_abs: strip,
                    half_width: cf.strip_half_width(),
                });
            }
        }
        Ok(path)
    }

    /// The constant path `rho -> cf` on `[0, 1]`.
    pub fn constant(cf: CharacteristicFunction, strip: f64) -> Result<Self> {
        Self::new(0.0, 1.0, strip, move |_| Ok(cf.clone()))
    }

    pub fn at(&self, rho: f64) -> Result<CharacteristicFunction> {
        (self.family)(rho.clamp(self.rho_min, self.rho_max))
    }

    pub fn rho_min(&self) -> f64 {
        self.rho_min
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    pub fn strip(&self) -> f64 {
        self.strip
    }

    /// The same family traversed backwards.
    pub fn reversed(&self) -> Self {
        let f = self.family.clone();
        let (a, b) = (self.rho_min, self.rho_max);
        Self {
            family: Arc::new(move |rho| f(a + b - rho)),
            ..self.clone()
        }
    }

    /// `self` followed by `other`; requires `self.rho_max == other.rho_min`.
    pub fn concat(&self, other: &OperatorPath) -> Result<Self> {
        if (self.rho_max - other.rho_min).abs() > 1e-12 {
            return Err(Error::InvalidInput("concatenated paths must share the joint parameter".into()));
        }
        let (f, g) = (self.family.clone(), other.family.clone());
        let joint = self.rho_max;
        Ok(Self {
            family: Arc::new(move |rho| if rho <= joint { f(rho) } else { g(rho) }),
            rho_min: self.rho_min,
            rho_max: other.rho_max,
            strip: self.strip.min(other.strip),
        })
    }

    /// Direct sum of two paths over the same parameter interval.
    pub fn block_diag(&self, other: &OperatorPath) -> Result<Self> {
        if self.rho_min != other.rho_min || self.rho_max != other.rho_max {
            return Err(Error::InvalidInput("block-diagonal paths must share the parameter interval".into()));
        }
        let (f, g) = (self.family.clone(), other.family.clone());
        Self::new(self.rho_min, self.rho_max, self.strip.min(other.strip), move |rho| {
            f(rho)?.block_diag(&g(rho)?)
        })
    }
}

/// Numerical parameters of the crossing analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    /// Scan step in `rho`.
    pub rho_step: f64,
    /// Half-height of the local counting rectangles around axis roots.
    pub local_rect_height: f64,
    /// Samples of `|d(i ell)|` per evaluation of `m(rho)`.
    pub axis_samples: usize,
    /// `m(rho)` below this value at a refined minimum marks a crossing.
    pub crossing_threshold: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            rho_step: 0.01,
            local_rect_height: 0.25,
            axis_samples: 401,
            crossing_threshold: 1e-6,
        }
    }
}

/// A refined parameter value at which `d^rho` has a root on the axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingBracket {
    pub lo: f64,
    pub hi: f64,
    pub rho: f64,
    pub min_abs: f64,
}

/// Local root counts around one group of axis roots at one crossing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingEvent {
    pub rho: f64,
    pub axis_roots: Vec<RootRecord>,
    pub delta_rho: f64,
    pub local_winding: usize,
    pub m_r_before: usize,
    pub m_r_after: usize,
    pub m_l_before: usize,
    pub m_l_after: usize,
    pub contribution: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CrossingLedger {
    pub events: Vec<CrossingEvent>,
}

impl CrossingLedger {
    pub fn total(&self) -> i64 {
        self.events.iter().map(|e| e.contribution).sum()
    }
}

struct Analyzer<'a> {
    path: &'a OperatorPath,
    opts: FlowOptions,
    ell_max: f64,
}

impl<'a> Analyzer<'a> {
    fn new(path: &'a OperatorPath, opts: FlowOptions) -> Result<Self> {
        if !(opts.rho_step > 0.0) || opts.axis_samples < 3 || !(opts.local_rect_height > 0.0) {
            return Err(Error::InvalidInput(format!("bad flow options {opts:?}")));
        }
        let n = ((path.rho_max - path.rho_min) / opts.rho_step).ceil().max(1.0) as usize;
        let mut ell_max: f64 = 0.0;
        for k in 0..=n.min(64) {
            let rho = path.rho_min + (path.rho_max - path.rho_min) * k as f64 / n.min(64) as f64;
            ell_max = ell_max.max(path.at(rho)?.auto_ell_max()?);
        }
        Ok(Self { path, opts, ell_max })
    }

    /// `m(rho) = min_ell |d^rho(i ell)|`.
    fn m(&self, rho: f64) -> Result<f64> {
        let cf = self.path.at(rho)?;
        let mins = axis_minima(&cf, self.ell_max, self.opts.axis_samples)?;
        Ok(mins.iter().map(|m| m.1).fold(f64::INFINITY, f64::min))
    }

    fn check_endpoints(&self) -> Result<()> {
        for rho in [self.path.rho_min, self.path.rho_max] {
            let m = self.m(rho)?;
            if m <= self.opts.crossing_threshold {
                return Err(Error::EndpointNotHyperbolic { rho, min_abs: m });
            }
        }
        Ok(())
    }

    fn brackets(&self) -> Result<Vec<CrossingBracket>> {
        self.check_endpoints()?;
        let (a, b) = (self.path.rho_min, self.path.rho_max);
        let n = ((b - a) / self.opts.rho_step).ceil().max(2.0) as usize;
        let rhos: Vec<f64> = (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect();
        let ms = rhos.iter().map(|&r| self.m(r)).collect::<Result<Vec<f64>>>()?;
        let mut out = Vec::new();
        for k in 1..n {
            if ms[k] <= ms[k - 1] && ms[k] < ms[k + 1] {
                let mut err = None;
                let (rho, min_abs) = golden_section(rhos[k - 1], rhos[k + 1], 1e-8, |r| match self.m(r) {
                    Ok(v) => v,
                    Err(e) => {
                        err.get_or_insert(e);
                        f64::INFINITY
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
                if min_abs < self.opts.crossing_threshold {
                    out.push(CrossingBracket {
                        lo: rho - 5e-9,
                        hi: rho + 5e-9,
                        rho,
                        min_abs,
                    });
                }
            }
        }
        Ok(out)
    }

    fn axis_roots(&self, rho: f64, min_abs: f64) -> Result<Vec<RootRecord>> {
        let cf = self.path.at(rho)?;
        let level = (100.0 * min_abs).max(self.opts.crossing_threshold);
        let mut roots = Vec::new();
        for (ell, val) in axis_minima(&cf, self.ell_max, self.opts.axis_samples)? {
            if val > level {
                continue;
            }
            let mut z = Complex64::new(0.0, ell);
            for _ in 0..30 {
                let (d, dd) = cf.eval_pair(z)?;
                if dd.norm() < 1e-14 || d.norm() < 1e-15 {
                    break;
                }
                let step = d / dd;
                if step.norm() > 0.1 * self.opts.local_rect_height {
                    break;
                }
                z -= step;
                if step.norm() < 1e-15 {
                    break;
                }
            }
            let residual = cf.eval_d(z)?.norm();
            let (z, residual) = if residual <= val { (z, residual) } else { (Complex64::new(0.0, ell), val) };
            roots.push(RootRecord {
                nu: z,
                multiplicity: 1,
                residual,
            });
        }
        Ok(roots)
    }

    fn events_at(&self, bracket: &CrossingBracket, neighbours: (f64, f64)) -> Result<Vec<CrossingEvent>> {
        let h = self.opts.local_rect_height;
        let half = 0.5 * self.path.strip;
        let roots = self.axis_roots(bracket.rho, bracket.min_abs)?;
        // group axis roots whose windows overlap
        let mut groups: Vec<(f64, f64, Vec<RootRecord>)> = Vec::new();
        for r in roots {
            match groups.last_mut() {
                Some(g) if r.nu.im - h <= g.1 => {
                    g.1 = r.nu.im + h;
                    g.2.push(r);
                }
                _ => groups.push((r.nu.im - h, r.nu.im + h, vec![r])),
            }
        }
        let mut events = Vec::new();
        for (im_lo, im_hi, group) in groups {
            let full = Rectangle::new(-half, half, im_lo, im_hi)?;
            let right = Rectangle::new(0.0, half, im_lo, im_hi)?;
            let left = Rectangle::new(-half, 0.0, im_lo, im_hi)?;
            let inner = full.scaled(0.5);
            let cf_j = self.path.at(bracket.rho)?;
            let winding = count_roots(&cf_j, &full)?;
            let limit = 0.5 * (bracket.rho - neighbours.0).min(neighbours.1 - bracket.rho);
            let mut delta = self.opts.rho_step.min(limit);
            let mut found = None;
            while delta > 1e-7 {
                let before = self.local_counts(bracket.rho - delta, &full, &inner, &right, &left)?;
                let after = self.local_counts(bracket.rho + delta, &full, &inner, &right, &left)?;
                let consistent = |c: &Option<(usize, usize, usize, usize)>| {
                    matches!(c, Some((f, i, r, l)) if *f == winding && *i == winding && r + l == winding)
                };
                if consistent(&before) && consistent(&after) {
                    found = Some((before.unwrap(), after.unwrap()));
                    break;
                }
                delta *= 0.5;
            }
            let Some((before, after)) = found else {
                return Err(Error::CrossingsNotIsolated {
                    rho: bracket.rho,
                    reason: "no parameter window keeps the local root cluster inside its rectangle".into(),
                });
            };
            events.push(CrossingEvent {
                rho: bracket.rho,
                axis_roots: group,
                delta_rho: delta,
                local_winding: winding,
                m_r_before: before.2,
                m_r_after: after.2,
                m_l_before: before.3,
                m_l_after: after.3,
                contribution: after.2 as i64 - before.2 as i64,
            });
        }
        Ok(events)
    }

    /// Root counts (full, inner, right, left) at `rho`, or `None` when the
    /// axis is not clear of roots there.
    fn local_counts(
        &self,
        rho: f64,
        full: &Rectangle,
        inner: &Rectangle,
        right: &Rectangle,
        left: &Rectangle,
    ) -> Result<Option<(usize, usize, usize, usize)>> {
        if rho < self.path.rho_min || rho > self.path.rho_max {
            return Ok(None);
        }
        if self.m(rho)? < self.opts.crossing_threshold {
            return Ok(None);
        }
        let cf = self.path.at(rho)?;
        let count = |r: &Rectangle| match count_roots(&cf, r) {
            Ok(n) => Ok(Some(n)),
            Err(Error::ContourTooCloseToRoot { .. }) | Err(Error::NonIntegerWinding { .. }) => Ok(None),
            Err(e) => Err(e),
        };
        let (Some(f), Some(i), Some(r), Some(l)) = (count(full)?, count(inner)?, count(right)?, count(left)?) else {
            return Ok(None);
        };
        Ok(Some((f, i, r, l)))
    }
}

/// Parameter values at which the path fails to be hyperbolic.
pub fn detect_crossings(path: &OperatorPath, opts: &FlowOptions) -> Result<Vec<CrossingBracket>> {
    Analyzer::new(path, *opts)?.brackets()
}

/// Crossing number `sum_j (M_j^{R+} - M_j^{R-})` with its ledger.
pub fn crossing_number(path: &OperatorPath, opts: &FlowOptions) -> Result<(i64, CrossingLedger)> {
    let an = Analyzer::new(path, *opts)?;
    let brackets = an.brackets()?;
    for w in brackets.windows(2) {
        if w[1].rho - w[0].rho <= 10.0 * opts.local_rect_height.min(opts.rho_step) {
            return Err(Error::CrossingsNotIsolated {
                rho: w[1].rho,
                reason: format!("crossings at {} and {} are too close", w[0].rho, w[1].rho),
            });
        }
    }
    let mut ledger = CrossingLedger::default();
    for (k, b) in brackets.iter().enumerate() {
        let prev = if k == 0 { path.rho_min } else { brackets[k - 1].rho };
        let next = brackets.get(k + 1).map_or(path.rho_max, |n| n.rho);
        // endpoints are hyperbolic, so the full distance to them is usable
        let prev = if k == 0 { 2.0 * prev - b.rho } else { prev };
        let next = if k + 1 == brackets.len() { 2.0 * next - b.rho } else { next };
        ledger.events.extend(an.events_at(b, (prev, next))?);
    }
    Ok((ledger.total(), ledger))
}

/// Fredholm index of an operator whose limits are the endpoints of `path`.
pub fn fredholm_index(path: &OperatorPath, opts: &FlowOptions) -> Result<i64> {
    crossing_number(path, opts).map(|(c, _)| -c)
}

/// Follows a simple root `nu0` of `d^{rho0}` to `rho1`.
pub fn continue_root(
    path: &OperatorPath,
    rho0: f64,
    nu0: Complex64,
    rho1: f64,
    max_step: f64,
) -> Result<Vec<(f64, Complex64)>> {
    let dir = (rho1 - rho0).signum();
    let mut traj = vec![(rho0, newton(path, rho0, nu0, 50)?.0)];
    check_root(path, rho0, traj[0].1)?;
    let d0 = path.at(rho0)?.eval_d_derivative(traj[0].1)?.norm();
    let mut step = max_step.abs().min((rho1 - rho0).abs());
    while (rho1 - traj.last().unwrap().0) * dir > 1e-14 {
        let (rho, nu) = *traj.last().unwrap();
        let target = if ((rho1 - rho) * dir) <= step { rho1 } else { rho + dir * step };
        let predicted = if traj.len() >= 2 {
            let (rp, np) = traj[traj.len() - 2];
            nu + (nu - np) * ((target - rho) / (rho - rp))
        } else {
            nu
        };
        match newton(path, target, predicted, 5) {
            Ok((z, true)) => {
                check_root(path, target, z)?;
                traj.push((target, z));
                step = (step * 1.5).min(max_step.abs());
            }
            Ok((_, false)) | Err(Error::NewtonDiverged { .. }) => {
                step *= 0.5;
                if step < 1e-12 {
                    // a stall next to a nearly degenerate root is a collision
                    let dd = path.at(rho)?.eval_d_derivative(nu)?.norm();
                    if dd < 1e-4 * d0.max(1.0) {
                        return Err(Error::RootCollision { rho });
                    }
                    return Err(Error::NewtonDiverged {
                        reason: format!("root continuation stalled at rho = {rho}"),
                    });
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(traj)
}

fn newton(path: &OperatorPath, rho: f64, start: Complex64, max_iter: usize) -> Result<(Complex64, bool)> {
    let cf = path.at(rho)?;
    let mut z = start;
    for _ in 0..max_iter {
        if z.re.abs() >= cf.strip_half_width() {
            return Err(Error::NewtonDiverged {
                reason: "iterate left the analyticity strip".into(),
            });
        }
        let (d, dd) = cf.eval_pair(z)?;
        if dd.norm() < 1e-8 {
            return Err(Error::RootCollision { rho });
        }
        let step = d / dd;
        z -= step;
        if step.norm() < 1e-13 * z.norm().max(1.0) {
            return Ok((z, true));
        }
    }
    let converged = cf.eval_d(z).map(|d| d.norm() < 1e-12).unwrap_or(false);
    Ok((z, converged))
}

fn check_root(path: &OperatorPath, rho: f64, z: Complex64) -> Result<()> {
    if z.re.abs() >= path.strip {
        return Err(Error::LeftStrip { rho, re: z.re });
    }
    let cf = path.at(rho)?;
    if cf.eval_d_derivative(z)?.norm() < 1e-8 {
        return Err(Error::RootCollision { rho });
    }
    Ok(())
}

/// Limits at `-infinity` and `+infinity` of an operator conjugated by an
/// exponential weight of rate `eta`.
pub fn weighted_limits(cf: &CharacteristicFunction, eta: f64) -> Result<(CharacteristicFunction, CharacteristicFunction)> {
    if eta.abs() >= cf.strip_half_width() {
        return Err(Error::StripViolation {
            re_abs: eta.abs(),
            half_width: cf.strip_half_width(),
        });
    }
    let s = cf.shift();
    Ok((cf.clone().with_shift(s - eta), cf.clone().with_shift(s + eta)))
}

/// Path on `[0, 1]` between the weighted limits of a front with principal
/// parts `a_minus` and `a_plus` under a weight of rate `eta`: it joins
/// `build(a_minus)` with shift `-eta` to `build(a_plus)` with shift `+eta`.
///
/// One half of the path moves the shift at a fixed end, the other moves the
/// matrix at a fixed shift. The shift leg is placed at an end whose symbol is
/// hyperbolic for every shift in `[-eta, eta]`, so that it contributes no
/// crossings. If neither end qualifies the result is `EndpointNotHyperbolic`.
pub fn weighted_front_path<F>(build: F, a_minus: RMatrix, a_plus: RMatrix, eta: f64, strip: f64) -> Result<OperatorPath>
where
    F: Fn(RMatrix) -> Result<CharacteristicFunction> + Send + Sync + 'static,
{
    let shift_safe = |a: &RMatrix| -> Result<bool> {
        let cf = build(a.clone())?;
        for k in 0..=10 {
            let sh = eta * (k as f64 / 5.0 - 1.0);
            let c = cf.clone().with_shift(cf.shift() + sh);
            let ell = c.auto_ell_max()?;
            if axis_minima(&c, ell, 801)?.iter().any(|(_, m)| *m < SHIFT_LEG_MARGIN) {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let shift_first = if shift_safe(&a_minus)? {
        true
    } else if shift_safe(&a_plus)? {
        false
    } else {
        return Err(Error::EndpointNotHyperbolic { rho: 0.0, min_abs: 0.0 });
    };
    OperatorPath::new(0.0, 1.0, strip, move |rho| {
        let (u, v) = (smoothstep(2.0 * rho), smoothstep(2.0 * rho - 1.0));
        let (ta, ts) = if shift_first { (v, u) } else { (u, v) };
        let cf = build(&a_minus + (&a_plus - &a_minus) * ta)?;
        let base = cf.shift();
        Ok(cf.with_shift(base + eta * (2.0 * ts - 1.0)))
    })
}

/// Smallest `|d(i ell)|` tolerated along the shift leg of a front path.
const SHIFT_LEG_MARGIN: f64 = 1e-3;

/// `3t^2 - 2t^3` clamped to `[0, 1]`.
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{BaseKernel, KernelModel};
    use crate::linalg::RMatrix;

    fn exp1() -> KernelModel {
        KernelModel::scalar(BaseKernel::TwoSidedExponential { rate: 1.0 }, 1.0).unwrap()
    }

    fn ss(a: f64, shift: f64) -> Result<CharacteristicFunction> {
        Ok(CharacteristicFunction::steady_state(RMatrix::from_element(1, 1, a), exp1())?.with_shift(shift))
    }

    fn a_of(rho: f64) -> f64 {
        0.5 + 1.5 * smoothstep(rho)
    }

    fn weighted_path() -> OperatorPath {
        OperatorPath::new(0.0, 1.0, 0.6, |rho| ss(a_of(rho), 0.3)).unwrap()
    }

    fn rho_where_a(target: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if a_of(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn constant_path_has_no_crossings() {
        let p = OperatorPath::constant(ss(0.5, 0.0).unwrap(), 0.5).unwrap();
        let opts = FlowOptions::default();
        assert!(detect_crossings(&p, &opts).unwrap().is_empty());
        let (c, ledger) = crossing_number(&p, &opts).unwrap();
        assert_eq!(c, 0);
        assert!(ledger.events.is_empty());
        assert_eq!(fredholm_index(&p, &opts).unwrap(), 0);
    }

    #[test]
    fn weighted_scalar_path_crosses_once() {
        let p = weighted_path();
        let opts = FlowOptions::default();
        let br = detect_crossings(&p, &opts).unwrap();
        assert_eq!(br.len(), 1);
        assert!((br[0].rho - rho_where_a(0.91)).abs() < 1e-7);
        let (c, ledger) = crossing_number(&p, &opts).unwrap();
        assert_eq!(c, -1);
        let e = &ledger.events[0];
        assert_eq!((e.m_r_before, e.m_r_after), (1, 0));
        assert_eq!(e.m_r_before + e.m_l_before, e.local_winding);
        assert_eq!(e.m_r_after + e.m_l_after, e.local_winding);
        assert_eq!(fredholm_index(&p, &opts).unwrap(), 1);
        assert_eq!(crossing_number(&p.reversed(), &opts).unwrap().0, 1);
    }

    #[test]
    fn endpoint_must_be_hyperbolic() {
        let p = OperatorPath::new(0.0, 1.0, 0.5, |rho| ss(0.5 + 1.5 * rho, 0.0)).unwrap();
        // a = 2 at the right end has roots +-i on the axis
        assert!(matches!(
            detect_crossings(&p, &FlowOptions::default()),
            Err(Error::EndpointNotHyperbolic { .. })
        ));
    }

    #[test]
    fn two_identical_blocks_give_index_two() {
        let p = weighted_path();
        let q = p.block_diag(&p).unwrap();
        let opts = FlowOptions::default();
        assert_eq!(fredholm_index(&q, &opts).unwrap(), 2);
    }

    #[test]
    fn continuation_follows_closed_form_branch() {
        let p = weighted_path();
        let rho1 = rho_where_a(0.89);
        let traj = continue_root(&p, 0.0, Complex64::new(-0.3 + 0.5f64.sqrt(), 0.0), rho1, 0.05).unwrap();
        let (r, nu) = *traj.last().unwrap();
        assert_eq!(r, rho1);
        assert!((nu - Complex64::new(-0.3 + 0.11f64.sqrt(), 0.0)).norm() < 1e-10);
        assert!(traj.windows(2).all(|w| w[1].1.re < w[0].1.re));
        // crossing speed at the crossing
        let rc = rho_where_a(0.91);
        let t = continue_root(&p, 0.0, Complex64::new(-0.3 + 0.5f64.sqrt(), 0.0), rc + 1e-4, 0.05).unwrap();
        let n = t.len();
        let speed = (t[n - 1].1.re - t[n - 2].1.re) / (t[n - 1].0 - t[n - 2].0);
        assert!(speed < 0.0);
        let err = continue_root(&p, 0.0, Complex64::new(-0.3 + 0.5f64.sqrt(), 0.0), rho_where_a(1.2), 0.05);
        assert!(matches!(err, Err(Error::RootCollision { .. })), "{err:?}");
    }

    #[test]
    fn constant_continuation() {
        let p = OperatorPath::constant(ss(2.0, 0.0).unwrap(), 0.5).unwrap();
        let t = continue_root(&p, 0.0, Complex64::new(0.0, 1.0), 1.0, 0.1).unwrap();
        assert!(t.iter().all(|(_, z)| (z - Complex64::new(0.0, 1.0)).norm() < 1e-14));
    }

    #[test]
    fn weighted_limits_shift_symbol() {
        let cf = ss(2.0, 0.0).unwrap();
        let (m, p) = weighted_limits(&cf, 0.0).unwrap();
        assert_eq!(m, cf);
        assert_eq!(p, cf);
        let (_, p) = weighted_limits(&cf, 0.3).unwrap();
        let z = Complex64::new(0.1, 0.7);
        let expect = -1.0 + 2.0 / (1.0 - (z + 0.3) * (z + 0.3));
        assert!((p.eval_d(z).unwrap() - expect).norm() < 1e-14);
        assert!(p.eval_d(Complex64::new(-0.3, 1.0)).unwrap().norm() < 1e-14);
        assert!(weighted_limits(&cf, 1.0).is_err());
    }
}
