//! The acceptance suite: nine closed-form or property-based checks with
//! fixed tolerances and runtime limits.

use nonlocal_core::flow::{crossing_number, fredholm_index, smoothstep, FlowOptions, OperatorPath};
use nonlocal_core::kernel::{BaseKernel, KernelModel};
use nonlocal_core::manifold::{
    build_bordered, eigenvalues_2x2, equivariance_error, fixed_point_phi, linearization, orbit_analysis, sample_wavetrain,
    window_difference, CutoffNonlinearity, KernelBasisE0, VForm, WeightedGrid,
};
use nonlocal_core::nalgebra::Vector2;
use nonlocal_core::nonlinearity::Nonlinearity;
use nonlocal_core::ode::OdeOptions;
use nonlocal_core::oracle::{assemble, assemble_weighted, numerical_index, weyl_demo_infinity, weyl_demo_principal, InhomogeneousOperator};
use nonlocal_core::quadrature::adaptive_gk;
use nonlocal_core::symbol::{count_roots, hyperbolicity_check, roots_in_rectangle, CharacteristicFunction, Rectangle};
use nonlocal_core::wavetrain::{continue_branch, find_axis_root, fixed_point_omega, sup_norm, uniqueness_probe, ReducedData, WaveProblem};
use nonlocal_core::{Complex64, Error, RMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::time::Instant;

/// Identifier, name and runtime limit (seconds) of each criterion.
pub const CRITERIA: [(u8, &str, f64); 9] = [
    (1, "characteristic-roots", 1.0),
    (2, "kawahara-anchor", 1.0),
    (3, "spectral-flow-vs-oracle", 120.0),
    (4, "path-algebra", 30.0),
    (5, "weyl-sequences", 60.0),
    (6, "lyapunov-center-branch", 60.0),
    (7, "uniqueness-probe", 120.0),
    (8, "center-manifold", 300.0),
    (9, "numerical-hygiene", 60.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `value < tolerance`
    Below,
    /// `value == tolerance` (integer-valued quantities)
    Equals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub quantity: String,
    pub value: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub passed: bool,
}

impl Measurement {
    pub fn below(quantity: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            quantity: quantity.into(),
            value,
            relation: Relation::Below,
            tolerance,
            passed: value.is_finite() && value < tolerance,
        }
    }

    pub fn equals(quantity: impl Into<String>, value: f64, expected: f64) -> Self {
        Self {
            quantity: quantity.into(),
            value,
            relation: Relation::Equals,
            tolerance: expected,
            passed: value == expected,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub runtime_seconds: f64,
    pub runtime_limit_seconds: f64,
    pub measurements: Vec<Measurement>,
    pub error: Option<String>,
}

impl CriterionReport {
    /// One human-readable status line.
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!(
            "{status} criterion {} {} ({:.2} s, limit {} s)",
            self.id, self.name, self.runtime_seconds, self.runtime_limit_seconds
        );
        if let Some(e) = &self.error {
            s.push_str(&format!(": error {e}"));
        }
        for m in self.measurements.iter().filter(|m| !m.passed) {
            let rel = match m.relation {
                Relation::Below => "<",
                Relation::Equals => "==",
            };
            s.push_str(&format!("; {} = {:e} (need {rel} {:e})", m.quantity, m.value, m.tolerance));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub passed: bool,
    pub criteria: Vec<CriterionReport>,
}

/// Resolves `"3"`, `"criterion-3"` or a criterion name to its id.
pub fn lookup(name: &str) -> Option<u8> {
    let trimmed = name.trim().trim_start_matches("criterion-");
    if let Ok(id) = trimmed.parse::<u8>() {
        return CRITERIA.iter().find(|c| c.0 == id).map(|c| c.0);
    }
    CRITERIA.iter().find(|c| c.1 == trimmed).map(|c| c.0)
}

pub fn run(ids: &[u8]) -> AcceptanceReport {
    let criteria: Vec<CriterionReport> = ids.iter().map(|&id| run_criterion(id)).collect();
    AcceptanceReport {
        passed: !criteria.is_empty() && criteria.iter().all(|c| c.passed),
        criteria,
    }
}

pub fn run_all() -> AcceptanceReport {
    run(&CRITERIA.map(|c| c.0))
}

pub fn run_criterion(id: u8) -> CriterionReport {
    let (_, name, limit) = *CRITERIA.iter().find(|c| c.0 == id).expect("unknown criterion id");
    let start = Instant::now();
    let outcome = match id {
        1 => characteristic_roots(),
        2 => kawahara_anchor(),
        3 => flow_vs_oracle(),
        4 => path_algebra(),
        5 => weyl_sequences(),
        6 => lyapunov_center_branch(),
        7 => uniqueness(),
        8 => center_manifold(),
        _ => hygiene(),
    };
    let runtime = start.elapsed().as_secs_f64();
    let (mut measurements, error) = match outcome {
        Ok(m) => (m, None),
        Err(e) => (Vec::new(), Some(format!("{}: {e}", e.name()))),
    };
    measurements.push(Measurement::below("runtime_seconds", runtime, limit));
    CriterionReport {
        id,
        name: name.to_string(),
        passed: error.is_none() && measurements.iter().all(|m| m.passed),
        runtime_seconds: runtime,
        runtime_limit_seconds: limit,
        measurements,
        error,
    }
}

type Outcome = nonlocal_core::Result<Vec<Measurement>>;

fn s(a: f64) -> RMatrix {
    RMatrix::from_element(1, 1, a)
}

fn exp_kernel(rate: f64) -> KernelModel {
    KernelModel::scalar(BaseKernel::TwoSidedExponential { rate }, 1.0).expect("positive rate")
}

fn exp2_problem(modes: usize) -> nonlocal_core::Result<WaveProblem> {
    WaveProblem::new(s(2.0), exp_kernel(1.0), Nonlinearity::quadratic(), modes)
}

fn characteristic_roots() -> Outcome {
    let cf = CharacteristicFunction::steady_state(s(2.0), exp_kernel(1.0))?;
    let rect = Rectangle::new(-0.5, 0.5, -1.5, 1.5)?;
    let count = count_roots(&cf, &rect)?;
    let roots = roots_in_rectangle(&cf, &rect, 1e-13)?;
    let mut err: f64 = if roots.len() == 2 { 0.0 } else { f64::INFINITY };
    for exact in [Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)] {
        let nearest = roots.iter().map(|r| (r.nu - exact).norm()).fold(f64::INFINITY, f64::min);
        err = err.max(nearest);
    }
    Ok(vec![
        Measurement::equals("winding_count", count as f64, 2.0),
        Measurement::equals("roots_found", roots.len() as f64, 2.0),
        Measurement::below("max_root_error", err, 1e-10),
    ])
}

fn kawahara_anchor() -> Outcome {
    let (alpha, c) = (1.0, 2.0);
    let cf = CharacteristicFunction::kawahara(alpha, c)?;
    let omega = find_axis_root(&cf, (0.5, 1.5), 8)?;
    let oracle = ((-1.0 + (1.0 + 4.0 * alpha * c).sqrt()) / (2.0 * alpha)).sqrt();
    Ok(vec![
        Measurement::below("omega_star_vs_quadratic_formula", (omega - oracle).abs(), 1e-10),
        Measurement::below("omega_star_vs_one", (omega - 1.0).abs(), 1e-10),
    ])
}

/// Scalar steady-state front `a(xi) = 1.25 + 0.75 tanh(xi)` (limits 0.5 and 2).
pub fn weighted_front() -> nonlocal_core::Result<InhomogeneousOperator> {
    InhomogeneousOperator::steady_state(exp_kernel(1.0), |x| s(1.25 + 0.75 * x.tanh()), s(0.5), s(2.0))
}

/// Path between the weighted limits of [`weighted_front`].
pub fn weighted_front_path(eta: f64) -> nonlocal_core::Result<OperatorPath> {
    nonlocal_core::flow::weighted_front_path(
        |a| CharacteristicFunction::steady_state(a, exp_kernel(1.0)),
        s(0.5),
        s(2.0),
        eta,
        2.0 * eta.abs(),
    )
}

fn flow_vs_oracle() -> Outcome {
    let eta = 0.3;
    let flow_index = fredholm_index(&weighted_front_path(eta)?, &FlowOptions::default())?;
    let gop = assemble_weighted(&weighted_front()?, 40.0, 800, eta)?;
    let report = numerical_index(&gop, 1e3)?;
    let mut out = vec![
        Measurement::equals("spectral_flow_index", flow_index as f64, 1.0),
        Measurement::equals("numerical_index", report.index as f64, 1.0),
        Measurement::equals("index_mismatch", (flow_index - report.index).abs() as f64, 0.0),
    ];
    let constant = InhomogeneousOperator::steady_state(exp_kernel(1.0), |_| s(0.5), s(0.5), s(0.5))?;
    let mut sigmas = Vec::new();
    for l in [20.0, 40.0, 80.0] {
        let g = assemble(&constant, l, (20.0 * l) as usize + 1)?;
        let r = numerical_index(&g, nonlocal_core::oracle::DEFAULT_GAP_FACTOR)?;
        out.push(Measurement::equals(format!("constant_L{l}_dim_ker"), r.dim_ker as f64, 0.0));
        out.push(Measurement::equals(format!("constant_L{l}_dim_coker"), r.dim_coker as f64, 0.0));
        out.push(Measurement::equals(format!("constant_L{l}_index"), r.index as f64, 0.0));
        sigmas.push(r.smallest_singular_values[0]);
    }
    let lo = sigmas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sigmas.iter().copied().fold(0.0, f64::max);
    // the limit symbol gives inf |d(il)| = 0.5, so sigma_min stays near 0.5
    out.push(Measurement::below("constant_inverse_sigma_min", 1.0 / lo, 4.0));
    out.push(Measurement::below("constant_sigma_min_relative_spread", (hi - lo) / lo, 0.05));
    Ok(out)
}

/// Strip for the randomized paths; weight shifts stay below 0.35.
const PATH_STRIP: f64 = 0.6;

/// A seeded scalar path `a(rho)` over `rho` between two hyperbolic
/// endpoints, with weight `shift`; `a_start` pins the starting value.
fn random_path(rng: &mut ChaCha8Rng, rho: (f64, f64), shift: f64, a_start: Option<f64>) -> nonlocal_core::Result<OperatorPath> {
    let hyperbolic = |a: f64| -> nonlocal_core::Result<bool> {
        let cf = CharacteristicFunction::steady_state(s(a), exp_kernel(1.0))?.with_shift(shift);
        Ok(hyperbolicity_check(&cf, cf.auto_ell_max()?, 4001)?.min_abs > 1e-3)
    };
    if let Some(a0) = a_start {
        if !hyperbolic(a0)? {
            return Err(Error::InvalidInput("prescribed start is not hyperbolic".into()));
        }
    }
    loop {
        let a0 = a_start.unwrap_or_else(|| rng.random_range(0.5..3.0));
        let a1 = rng.random_range(0.5..3.0);
        if !hyperbolic(a0)? || !hyperbolic(a1)? {
            continue;
        }
        let (r0, r1) = rho;
        return OperatorPath::new(r0, r1, PATH_STRIP, move |r| {
            let t = (r - r0) / (r1 - r0);
            Ok(CharacteristicFunction::steady_state(s(a0 + (a1 - a0) * smoothstep(t)), exp_kernel(1.0))?.with_shift(shift))
        });
    }
}

fn path_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let opts = FlowOptions::default();
    let (mut reversal, mut concat, mut block) = (0.0, 0.0, 0.0);
    let mut nonzero = 0.0;
    for _ in 0..5 {
        let shift = rng.random_range(0.2..0.35) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let p = random_path(&mut rng, (0.0, 1.0), shift, None)?;
        let q = random_path(&mut rng, (0.0, 1.0), shift, None)?;
        let cp = crossing_number(&p, &opts)?.0;
        let cq = crossing_number(&q, &opts)?.0;
        if cp != 0 || cq != 0 {
            nonzero += 1.0;
        }
        if crossing_number(&p.reversed(), &opts)?.0 != -cp {
            reversal += 1.0;
        }
        if crossing_number(&p.block_diag(&q)?, &opts)?.0 != cp + cq {
            block += 1.0;
        }
        let a_end = p.at(1.0)?.principal().map(|a| a[(0, 0)]).unwrap_or(0.0);
        let leg = random_path(&mut rng, (1.0, 2.0), shift, Some(a_end))?;
        let cl = crossing_number(&leg, &opts)?.0;
        if crossing_number(&p.concat(&leg)?, &opts)?.0 != cp + cl {
            concat += 1.0;
        }
    }
    Ok(vec![
        Measurement::equals("reversal_failures", reversal, 0.0),
        Measurement::equals("concatenation_failures", concat, 0.0),
        Measurement::equals("block_diagonal_failures", block, 0.0),
        Measurement::below("paths_without_crossings_shortfall", if nonzero > 0.0 { 0.0 } else { 1.0 }, 0.5),
    ])
}

/// `A(xi) = tanh(xi)^2` with the exponential kernel: `A` vanishes at 0.
pub fn weyl_principal_operator() -> nonlocal_core::Result<InhomogeneousOperator> {
    InhomogeneousOperator::new(
        |x| s(x.tanh().powi(2)),
        |_| exp_kernel(1.0),
        (s(1.0), exp_kernel(1.0)),
        (s(1.0), exp_kernel(1.0)),
    )
}

/// Constant steady-state operator with `a = 2`: the limit symbol vanishes at `+-i`.
pub fn weyl_infinity_operator() -> nonlocal_core::Result<InhomogeneousOperator> {
    InhomogeneousOperator::steady_state(exp_kernel(1.0), |_| s(2.0), s(2.0), s(2.0))
}

pub const WEYL_PRINCIPAL_NS: [usize; 7] = [4, 8, 16, 32, 64, 128, 256];
pub const WEYL_INFINITY_NS: [usize; 6] = [2, 4, 8, 16, 32, 64];

fn weyl_sequences() -> Outcome {
    let p = weyl_demo_principal(&weyl_principal_operator()?, &WEYL_PRINCIPAL_NS, 5.0)?;
    let q = weyl_demo_infinity(&weyl_infinity_operator()?, &WEYL_INFINITY_NS)?;
    let last = |t: &nonlocal_core::oracle::WeylTable| t.rows.last().map(|r| r.residual_sup).unwrap_or(f64::INFINITY);
    Ok(vec![
        Measurement::equals("principal_strictly_decreasing", p.strictly_decreasing() as u8 as f64, 1.0),
        Measurement::below("principal_final_ratio", last(&p), 1e-2),
        Measurement::equals("infinity_strictly_decreasing", q.strictly_decreasing() as u8 as f64, 1.0),
        Measurement::below("infinity_final_ratio", last(&q), 1e-2),
    ])
}

fn lyapunov_center_branch() -> Outcome {
    let p = exp2_problem(32)?;
    let rd = ReducedData::compute(&p, (0.5, 1.5))?;
    let branch = continue_branch(&p, &rd, 0.05, 10);
    if let Some(f) = &branch.failure {
        return Err(Error::NewtonDiverged { reason: f.clone() });
    }
    let disc = branch.points.iter().map(|b| b.discrepancy).fold(0.0, f64::max);
    let ratio = branch.points.iter().map(|b| b.contraction_ratio).fold(0.0, f64::max);
    let mut psi_ratios = Vec::new();
    let mut a = 0.04;
    while a >= 0.0025 - 1e-15 {
        psi_ratios.push(sup_norm(&fixed_point_omega(&p, &rd, a, 1e-14)?.psi) / a);
        a *= 0.5;
    }
    let violations = psi_ratios.windows(2).filter(|w| !(w[1] < w[0])).count();
    Ok(vec![
        Measurement::below("omega_star_error", (rd.omega_star - 1.0).abs(), 1e-10),
        Measurement::below("alpha_error", (rd.alpha + 1.0).abs(), 1e-10),
        Measurement::equals("branch_points", branch.points.len() as f64, 10.0),
        Measurement::below("max_ls_vs_direct_discrepancy", disc, 1e-8),
        Measurement::below("max_contraction_ratio", ratio, 1.0),
        Measurement::equals("psi_ratio_monotonicity_violations", violations as f64, 0.0),
        Measurement::below("psi_ratio_at_a_0.0025", *psi_ratios.last().unwrap_or(&f64::INFINITY), 0.01),
    ])
}

fn uniqueness() -> Outcome {
    let p = exp2_problem(32)?;
    let rd = ReducedData::compute(&p, (0.5, 1.5))?;
    let branch = continue_branch(&p, &rd, 0.05, 10);
    let report = uniqueness_probe(&p, &rd, &branch, 50, 0.1, 7);
    let worst = report.trials.iter().map(|t| t.distance).fold(0.0, f64::max);
    Ok(vec![
        Measurement::equals("trials", report.trials.len() as f64, 50.0),
        Measurement::equals("returned_to_branch", report.returned as f64, 50.0),
        Measurement::below("max_distance", worst, 1e-6),
    ])
}

/// Grid used by the centre-manifold criterion and bundled scenario.
pub const MANIFOLD_PERIODS: f64 = 16.0;
pub const MANIFOLD_POINTS: usize = 2011;
pub const MANIFOLD_ETA: f64 = 0.2;

fn center_manifold() -> Outcome {
    let p = exp2_problem(32)?;
    let rd = ReducedData::compute(&p, (0.5, 1.5))?;
    let vf = VForm::from_wave_problem(&p)?;
    let grid = WeightedGrid::for_frequency(rd.omega_star, MANIFOLD_PERIODS, MANIFOLD_POINTS, MANIFOLD_ETA)?;
    let basis = KernelBasisE0::new(&grid, &rd, None)?;
    let bs = build_bordered(&vf, &grid, &basis)?;
    let a = 0.02;
    let geps = CutoffNonlinearity::new(vf.g.clone(), 10.0 * a)?;

    let t = 1e-3;
    let tangent = fixed_point_phi(&bs, &geps, &Vector2::new(t, 0.0), None)?;
    let slope = grid.weighted_norm(&tangent.psi(&bs.basis)) / t;

    let dh = linearization(&bs, &geps, 1e-6)?;
    let eig_err = eigenvalues_2x2(&dh)
        .iter()
        .map(|(re, im)| re.abs().max((im.abs() - rd.omega_star).abs()))
        .fold(0.0, f64::max);

    let fp = fixed_point_omega(&p, &rd, a, 1e-14)?;
    let mut coeffs = fp.psi.clone();
    for i in 0..coeffs.ncols() {
        coeffs[(1, i)] += a * rd.v_star[i];
    }
    let u = sample_wavetrain(&bs, fp.omega, &coeffs);
    let v0 = bs.basis.project(&u);
    let phi = fixed_point_phi(&bs, &geps, &v0, None)?;
    let match_err = window_difference(&grid, &phi.field, &u, bs.interior_half_width());

    let polar: Vec<Vector2<f64>> = [0.5 * a, a]
        .iter()
        .flat_map(|r| (0..4).map(move |k| KernelBasisE0::rotation(k as f64 * PI / 2.0 + 0.3) * Vector2::new(*r, 0.0)))
        .collect();
    let equiv = equivariance_error(&bs, &geps, &polar, &[0.5, 2.5])?;

    let opts = OdeOptions {
        rel_tol: 1e-8,
        abs_tol: 1e-11,
        ..OdeOptions::default()
    };
    let orbit = orbit_analysis(&bs, &geps, &v0, 16, &opts)?;
    let period_err = (orbit.period.period - 2.0 * PI / fp.omega).abs();
    Ok(vec![
        Measurement::below("bordered_kernel_residual_weighted", bs.report.kernel_residual_weighted, 1e-8),
        Measurement::below("bordered_solve_residual", bs.report.solve_residual, 1e-11),
        Measurement::below("tangency_slope_at_1e-3", slope, 1e-3),
        Measurement::below("dh0_eigenvalue_error", eig_err, 1e-4),
        Measurement::below("equivariance_error", equiv, 1e-6),
        Measurement::below("phi_vs_wavetrain_central_window", match_err, 1e-4),
        Measurement::below("period_error", period_err, 1e-4),
        Measurement::below("reduced_flow_discrepancy", orbit.flow.max_discrepancy, 1e-5),
    ])
}

fn symbol_by_quadrature(base: &BaseKernel, nu: Complex64) -> Complex64 {
    let (lo, hi) = base.support();
    let mut edges = vec![lo];
    edges.extend(base.kinks().iter().copied().filter(|k| *k > lo && *k < hi));
    edges.push(hi);
    edges
        .windows(2)
        .map(|w| adaptive_gk(w[0], w[1], 1e-15, 4000, |x| base.value(x) * (-nu * x).exp()).value)
        .sum()
}

fn hygiene() -> Outcome {
    let bases = [
        BaseKernel::Gaussian { sigma: 1.0 },
        BaseKernel::Gaussian { sigma: 0.6 },
        BaseKernel::TwoSidedExponential { rate: 1.0 },
        BaseKernel::TwoSidedExponential { rate: 2.5 },
        BaseKernel::ShiftedGaussianBump { center: 0.5 },
        BaseKernel::ShiftedGaussianBump { center: -1.0 },
    ];
    let nus = [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.3, 0.0),
        Complex64::new(0.2, 0.8),
        Complex64::new(-0.4, 1.3),
        Complex64::new(0.0, 1.5),
    ];
    let (mut sym_err, mut kder_err, mut sder_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for base in &bases {
        let strip = base.strip_half_width();
        for nu in nus.iter().filter(|nu| nu.re.abs() < 0.8 * strip) {
            let exact = base.symbol(*nu);
            let quad = symbol_by_quadrature(base, *nu);
            sym_err = sym_err.max((quad - exact).norm() / exact.norm());
            let h = 1e-5;
            let fd = (base.symbol(nu + h) - base.symbol(nu - h)) / (2.0 * h);
            let an = base.symbol_derivative(*nu);
            sder_err = sder_err.max((fd - an).norm() / an.norm().max(1e-2));
        }
        for x in [-1.7, -0.4, 0.3, 1.1, 2.2] {
            let h = 1e-5;
            let fd = (base.value(x + h) - base.value(x - h)) / (2.0 * h);
            let an = base.derivative(x);
            kder_err = kder_err.max((fd - an).abs() / an.abs().max(1e-2));
        }
    }
    // derivative of a matrix characteristic function
    let k = KernelModel::new(
        2,
        vec![
            (RMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.0, 0.7]), BaseKernel::TwoSidedExponential { rate: 1.0 }),
            (RMatrix::from_row_slice(2, 2, &[0.0, 0.3, 0.5, 0.0]), BaseKernel::Gaussian { sigma: 0.8 }),
        ],
    )?;
    let cf = CharacteristicFunction::steady_state(RMatrix::from_row_slice(2, 2, &[2.0, 0.1, -0.3, 1.5]), k)?;
    let mut dd_err: f64 = 0.0;
    for nu in [Complex64::new(0.1, 0.4), Complex64::new(-0.3, 1.7)] {
        let h = 1e-5;
        let fd = (cf.eval_d(nu + h)? - cf.eval_d(nu - h)?) / (2.0 * h);
        let an = cf.eval_d_derivative(nu)?;
        dd_err = dd_err.max((fd - an).norm() / an.norm().max(1e-2));
    }
    let p32 = exp2_problem(32)?;
    let p64 = exp2_problem(64)?;
    let rd = ReducedData::compute(&p32, (0.5, 1.5))?;
    let mut doubling: f64 = 0.0;
    for a in [0.01, 0.05] {
        let w32 = fixed_point_omega(&p32, &rd, a, 1e-14)?.omega;
        let w64 = fixed_point_omega(&p64, &rd, a, 1e-14)?.omega;
        doubling = doubling.max((w32 - w64).abs());
    }
    Ok(vec![
        Measurement::below("symbol_vs_quadrature_relative", sym_err, 1e-8),
        Measurement::below("kernel_derivative_vs_fd_relative", kder_err, 1e-6),
        Measurement::below("symbol_derivative_vs_fd_relative", sder_err, 1e-6),
        Measurement::below("characteristic_derivative_vs_fd_relative", dd_err, 1e-6),
        Measurement::below("omega_mode_doubling_change", doubling, 1e-9),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_by_id_and_name() {
        assert_eq!(lookup("3"), Some(3));
        assert_eq!(lookup("criterion-8"), Some(8));
        assert_eq!(lookup("kawahara-anchor"), Some(2));
        assert_eq!(lookup("10"), None);
        assert_eq!(lookup("nope"), None);
    }

    #[test]
    fn report_round_trips_through_json() {
        let report = run(&[2]);
        let text = serde_json::to_string(&report).unwrap();
        let back: AcceptanceReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        assert!(report.criteria[0].line().starts_with("PASS criterion 2"));
    }
}
