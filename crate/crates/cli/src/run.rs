//! Dispatch of validated scenarios to the numerical modules.

use crate::acceptance;
use crate::config::{Scenario, Task, WeylConstruction};
use crate::output::{self, Artifacts, Manifest, Table};
use nonlocal_core::flow::{crossing_number, smoothstep, weighted_front_path, FlowOptions, OperatorPath};
use nonlocal_core::manifold::{
    build_bordered, eigenvalues_2x2, equivariance_error, fixed_point_phi, linearization, orbit_analysis, reduced_vector_field,
    sample_wavetrain, window_difference, CutoffNonlinearity, KernelBasisE0, VForm, WeightedGrid,
};
use nonlocal_core::nalgebra::Vector2;
use nonlocal_core::ode::OdeOptions;
use nonlocal_core::oracle::{assemble_weighted, numerical_index, weyl_demo_infinity, weyl_demo_principal, InhomogeneousOperator};
use nonlocal_core::symbol::{axis_minima, hyperbolicity_check, roots_in_rectangle, Rectangle};
use nonlocal_core::wavetrain::{continue_branch, fixed_point_omega, uniqueness_probe, ReducedData, WaveProblem};
use nonlocal_core::{Complex64, RMatrix};
use serde_json::json;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

/// Result of running one scenario.
#[derive(Debug)]
pub struct RunOutcome {
    pub scenario: String,
    pub directory: PathBuf,
    pub lines: Vec<String>,
    pub manifest: Manifest,
    /// False when the task ran but reported a failed check (acceptance).
    pub passed: bool,
}

/// Failure while executing a scenario.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{scenario}: {name}: {source}")]
    Task {
        scenario: String,
        name: &'static str,
        source: nonlocal_core::Error,
    },
    #[error("{scenario}: cannot write outputs: {source}")]
    Io { scenario: String, source: std::io::Error },
}

struct Produced {
    lines: Vec<String>,
    artifacts: Artifacts,
    passed: bool,
}

impl Produced {
    fn new() -> Self {
        Self {
            lines: Vec::new(),
            artifacts: Artifacts::default(),
            passed: true,
        }
    }

    fn say(&mut self, line: String) {
        self.lines.push(line);
    }
}

type TaskResult = nonlocal_core::Result<Produced>;

/// Runs `scenario` and writes its artifacts under `root`.
pub fn run_scenario(scenario: &Scenario, root: &Path) -> Result<RunOutcome, RunError> {
    let produced = execute(scenario).map_err(|e| RunError::Task {
        scenario: scenario.name().to_string(),
        name: e.name(),
        source: e,
    })?;
    let dir = root.join(scenario.output_dir_name());
    let manifest = Manifest {
        scenario: scenario.name().to_string(),
        task: scenario.task().as_str().to_string(),
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        core_version: nonlocal_core::VERSION.to_string(),
        parameters: serde_json::to_value(&scenario.file).expect("serialisable config"),
        files: Vec::new(),
    };
    let manifest = output::write_all(&dir, &produced.artifacts, manifest).map_err(|e| RunError::Io {
        scenario: scenario.name().to_string(),
        source: e,
    })?;
    Ok(RunOutcome {
        scenario: scenario.name().to_string(),
        directory: dir,
        lines: produced.lines,
        manifest,
        passed: produced.passed,
    })
}

fn execute(s: &Scenario) -> TaskResult {
    match s.task() {
        Task::Symbol => symbol(s),
        Task::Roots => roots(s),
        Task::Hyperbolicity => hyperbolicity(s),
        Task::Flow => flow(s),
        Task::Index => front(s, true),
        Task::Oracle => front(s, false),
        Task::Weyl => weyl(s),
        Task::Wavetrain => wavetrain(s),
        Task::Manifold => manifold(s),
        Task::Acceptance => run_acceptance(s),
    }
}

fn symbol(s: &Scenario) -> TaskResult {
    let t = s.file.symbol.as_ref().expect("validated");
    let cf = s.characteristic()?;
    let mut table = Table::new(&["ell", "re_d", "im_d", "abs_d", "re_d_prime", "im_d_prime"]);
    for k in 0..t.samples {
        let ell = -t.ell_max + 2.0 * t.ell_max * k as f64 / (t.samples - 1) as f64;
        let (d, dd) = cf.eval_pair(Complex64::new(0.0, ell))?;
        table.row(&[ell, d.re, d.im, d.norm(), dd.re, dd.im]);
    }
    let mut out = Produced::new();
    out.artifacts.table("symbol.csv", table);
    out.artifacts.plot_script("symbol.csv", "ell", &["re_d", "im_d", "abs_d"], false);
    let d0 = cf.eval_d(Complex64::new(0.0, 0.0))?;
    out.say(format!("d(0) = {} {:+}i", d0.re, d0.im));
    out.say(format!("sampled d(i ell) at {} points on [-{}, {}]", t.samples, t.ell_max, t.ell_max));
    Ok(out)
}

fn roots(s: &Scenario) -> TaskResult {
    let t = s.file.roots.as_ref().expect("validated");
    let cf = s.characteristic()?;
    let [a, b, c, d] = t.rectangle;
    let rect = Rectangle::new(a, b, c, d)?;
    let roots = roots_in_rectangle(&cf, &rect, t.tol)?;
    let mut table = Table::new(&["re", "im", "multiplicity", "residual"]);
    let mut sorted = roots.clone();
    sorted.sort_by(|x, y| x.nu.im.total_cmp(&y.nu.im).then(x.nu.re.total_cmp(&y.nu.re)));
    for r in &sorted {
        table.row(&[r.nu.re, r.nu.im, r.multiplicity as f64, r.residual]);
    }
    let mut out = Produced::new();
    let total: usize = sorted.iter().map(|r| r.multiplicity).sum();
    out.say(format!("{total} roots (with multiplicity) in {:?}", t.rectangle));
    for r in &sorted {
        out.say(format!("  nu = {:.12} {:+.12}i  multiplicity {}", r.nu.re, r.nu.im, r.multiplicity));
    }
    out.artifacts.table("roots.csv", table);
    out.artifacts.json("roots.json", &json!({ "rectangle": t.rectangle, "count": total, "roots": sorted }));
    Ok(out)
}

fn hyperbolicity(s: &Scenario) -> TaskResult {
    let t = s.file.hyperbolicity.as_ref().expect("validated");
    let cf = s.characteristic()?;
    let ell_max = match t.ell_max {
        Some(e) => e,
        None => cf.auto_ell_max()?,
    };
    let report = hyperbolicity_check(&cf, ell_max, t.samples)?;
    let minima = axis_minima(&cf, ell_max, t.samples)?;
    let mut table = Table::new(&["ell", "abs_d"]);
    for (ell, m) in &minima {
        table.row(&[*ell, *m]);
    }
    let mut out = Produced::new();
    out.say(format!(
        "hyperbolic: {} (min |d(i ell)| = {:e} at ell = {})",
        report.hyperbolic, report.min_abs, report.argmin
    ));
    out.artifacts.table("axis_minima.csv", table);
    out.artifacts.json("hyperbolicity.json", &json!({ "ell_max": ell_max, "report": report }));
    Ok(out)
}

fn flow_options(step: Option<f64>, threshold: Option<f64>) -> FlowOptions {
    let mut opts = FlowOptions::default();
    if let Some(h) = step {
        opts.rho_step = h;
    }
    if let Some(c) = threshold {
        opts.crossing_threshold = c;
    }
    opts
}

fn interpolating_path(
    s: &Scenario,
    a0: RMatrix,
    a1: RMatrix,
    strip: f64,
) -> nonlocal_core::Result<OperatorPath> {
    let s2 = s.clone();
    OperatorPath::new(0.0, 1.0, strip, move |rho| {
        s2.characteristic_with(&a0 + (&a1 - &a0) * smoothstep(rho))
    })
}

fn flow(s: &Scenario) -> TaskResult {
    let t = s.file.flow.as_ref().expect("validated");
    let a1 = RMatrix::from_fn(t.matrix_end.len(), t.matrix_end.len(), |i, j| t.matrix_end[i][j]);
    let path = interpolating_path(s, s.matrix().clone(), a1, t.strip)?;
    let (count, ledger) = crossing_number(&path, &flow_options(t.rho_step, t.crossing_threshold))?;
    let mut table = Table::new(&["rho", "delta_rho", "axis_roots", "m_r_before", "m_r_after", "m_l_before", "m_l_after", "contribution"]);
    for e in &ledger.events {
        table.row(&[
            e.rho,
            e.delta_rho,
            e.axis_roots.len() as f64,
            e.m_r_before as f64,
            e.m_r_after as f64,
            e.m_l_before as f64,
            e.m_l_after as f64,
            e.contribution as f64,
        ]);
    }
    let mut out = Produced::new();
    out.say(format!("crossing number = {count:+} ({} crossing events)", ledger.events.len()));
    out.say(format!("Fredholm index = {:+}", -count));
    out.artifacts.table("crossings.csv", table);
    out.artifacts.json("flow.json", &json!({ "crossing_number": count, "index": -count, "ledger": ledger }));
    Ok(out)
}

/// Steady-state front `a(xi) = A- + (A+ - A-) (1 + tanh xi) / 2`.
fn front_operator(s: &Scenario, am: &RMatrix, ap: &RMatrix) -> nonlocal_core::Result<InhomogeneousOperator> {
    let (m, p) = (am.clone(), ap.clone());
    InhomogeneousOperator::steady_state(s.kernel().clone(), move |x| &m + (&p - &m) * (0.5 * (1.0 + x.tanh())), am.clone(), ap.clone())
}

fn front(s: &Scenario, with_flow: bool) -> TaskResult {
    let t = s.file.front.as_ref().expect("validated");
    let n = t.matrix_minus.len();
    let am = RMatrix::from_fn(n, n, |i, j| t.matrix_minus[i][j]);
    let ap = RMatrix::from_fn(n, n, |i, j| t.matrix_plus[i][j]);
    let op = front_operator(s, &am, &ap)?;
    let mut out = Produced::new();
    let mut summary = json!({ "eta": t.eta, "gap_factor": t.gap_factor });

    if with_flow {
        let kernel = s.kernel().clone();
        let build = move |a: RMatrix| nonlocal_core::CharacteristicFunction::steady_state(a, kernel.clone());
        let path = weighted_front_path(build, am.clone(), ap.clone(), t.eta, t.strip.expect("validated"))?;
        let index = nonlocal_core::flow::fredholm_index(&path, &FlowOptions::default())?;
        out.say(format!("index (spectral flow) = {index:+}"));
        summary["spectral_flow_index"] = json!(index);
    }

    let mut table = Table::new(&["half_length", "points", "dim_ker", "dim_coker", "index", "sigma_min", "sigma_max", "threshold"]);
    let mut reports = Vec::new();
    let mut spectra = Table::new(&["half_length", "k", "sigma"]);
    for &l in &t.half_lengths {
        let points = (2.0 * l * t.points_per_unit).round() as usize;
        let gop = assemble_weighted(&op, l, points, t.eta)?;
        let r = numerical_index(&gop, t.gap_factor)?;
        out.say(format!(
            "index (operator oracle, L = {l}, N = {points}) = {:+} (ker {}, coker {}, sigma_min {:e})",
            r.index, r.dim_ker, r.dim_coker, r.smallest_singular_values[0]
        ));
        table.row(&[
            l,
            points as f64,
            r.dim_ker as f64,
            r.dim_coker as f64,
            r.index as f64,
            r.smallest_singular_values[0],
            r.largest_singular_value,
            r.threshold,
        ]);
        for (k, sv) in r.smallest_singular_values.iter().enumerate() {
            spectra.row(&[l, k as f64, *sv]);
        }
        reports.push(json!({ "half_length": l, "points": points, "report": r }));
    }
    summary["oracle"] = json!(reports);
    out.artifacts.table("oracle.csv", table);
    out.artifacts.table("singular_values.csv", spectra);
    out.artifacts.plot_script("singular_values.csv", "k", &["sigma"], true);
    out.artifacts.json("index.json", &summary);
    Ok(out)
}

fn weyl(s: &Scenario) -> TaskResult {
    let t = s.file.weyl.as_ref().expect("validated");
    let a = s.matrix().clone();
    let k = s.kernel().clone();
    let table = match t.construction {
        WeylConstruction::VanishingPrincipal => {
            let a2 = a.clone();
            let k2 = k.clone();
            let op = InhomogeneousOperator::new(
                move |x| &a2 * x.tanh().powi(2),
                move |_| k2.clone(),
                (a.clone(), k.clone()),
                (a, k),
            )?;
            weyl_demo_principal(&op, &t.ns, t.search_half_width)?
        }
        WeylConstruction::NonhyperbolicLimit => {
            let a2 = a.clone();
            let op = InhomogeneousOperator::steady_state(k, move |_| a2.clone(), a.clone(), a)?;
            weyl_demo_infinity(&op, &t.ns)?
        }
    };
    let mut csv = Table::new(&["n", "residual_ratio"]);
    for r in &table.rows {
        csv.row(&[r.n as f64, r.residual_sup]);
    }
    let mut out = Produced::new();
    out.say(format!("degeneracy at {}", table.location));
    for r in &table.rows {
        out.say(format!("  N = {:>4}  |T u_N| / |u_N| = {:e}", r.n, r.residual_sup));
    }
    out.say(format!("strictly decreasing: {}", table.strictly_decreasing()));
    out.artifacts.table("weyl.csv", csv);
    out.artifacts.plot_script("weyl.csv", "n", &["residual_ratio"], true);
    out.artifacts.json("weyl.json", &json!({ "table": table, "strictly_decreasing": table.strictly_decreasing() }));
    Ok(out)
}

fn wave_problem(s: &Scenario, modes: usize) -> nonlocal_core::Result<WaveProblem> {
    WaveProblem::new(
        s.matrix().clone(),
        s.kernel().clone(),
        s.nonlinearity.clone().expect("validated"),
        modes,
    )
}

fn wavetrain(s: &Scenario) -> TaskResult {
    let t = s.file.wavetrain.as_ref().expect("validated");
    let p = wave_problem(s, t.modes)?;
    let rd = ReducedData::compute(&p, (t.search[0], t.search[1]))?;
    let branch = continue_branch(&p, &rd, t.a_max, t.steps);
    let mut out = Produced::new();
    out.say(format!("omega_* = {:.15}, alpha = {:.15}", rd.omega_star, rd.alpha));

    let header = [
        "a",
        "omega",
        "omega_direct",
        "sup_norm",
        "residual_ls",
        "residual_direct",
        "discrepancy",
        "contraction_ratio",
        "psi_sup",
    ];
    let mut table = Table::new(&header);
    table.row(&[0.0, rd.omega_star, rd.omega_star, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let mut coeffs = Table::new(&["a", "mode", "component", "ls", "direct"]);
    for b in &branch.points {
        table.row(&[
            b.a,
            b.omega_ls,
            b.omega_direct,
            b.sup_norm,
            b.residual_ls,
            b.residual_direct,
            b.discrepancy,
            b.contraction_ratio,
            b.psi_sup,
        ]);
        for j in 0..b.coeffs_ls.nrows() {
            for c in 0..b.coeffs_ls.ncols() {
                coeffs.row(&[b.a, j as f64, c as f64, b.coeffs_ls[(j, c)], b.coeffs_direct[(j, c)]]);
            }
        }
    }
    if let Some(last) = branch.points.last() {
        out.say(format!(
            "{} branch points to a = {}; omega(a_max) = {:.12}, max discrepancy {:e}",
            branch.points.len(),
            last.a,
            last.omega_ls,
            branch.points.iter().map(|b| b.discrepancy).fold(0.0, f64::max)
        ));
    }
    let mut summary = json!({
        "reduced": rd,
        "points": branch.points.len(),
        "failure": branch.failure,
    });
    if let Some(f) = &branch.failure {
        out.say(format!("continuation stopped: {f}"));
    }
    if t.uniqueness_trials > 0 {
        let report = uniqueness_probe(&p, &rd, &branch, t.uniqueness_trials, t.noise_factor, t.seed);
        let mut u = Table::new(&["trial", "base_amplitude", "converged", "amplitude", "distance", "returned"]);
        for (i, tr) in report.trials.iter().enumerate() {
            u.row(&[
                i as f64,
                tr.base_amplitude,
                tr.converged as u8 as f64,
                tr.amplitude,
                tr.distance,
                tr.returned as u8 as f64,
            ]);
        }
        out.say(format!("uniqueness probe: {}/{} trials returned to the branch", report.returned, report.trials.len()));
        out.artifacts.table("uniqueness.csv", u);
        summary["uniqueness"] = json!({ "returned": report.returned, "trials": report.trials.len(), "fraction": report.fraction });
    }
    out.artifacts.table("branch.csv", table);
    out.artifacts.table("coefficients.csv", coeffs);
    out.artifacts.plot_script("branch.csv", "a", &["omega", "omega_direct"], false);
    out.artifacts.json("wavetrain.json", &summary);
    Ok(out)
}

fn manifold(s: &Scenario) -> TaskResult {
    let t = s.file.manifold.as_ref().expect("validated");
    let p = wave_problem(s, t.modes)?;
    let rd = ReducedData::compute(&p, (t.search[0], t.search[1]))?;
    let vf = VForm::from_wave_problem(&p)?;
    let grid = WeightedGrid::for_frequency(rd.omega_star, t.periods, t.points, t.eta)?;
    let basis = KernelBasisE0::new(&grid, &rd, None)?;
    let bs = build_bordered(&vf, &grid, &basis)?;
    let a = t.amplitude;
    let geps = CutoffNonlinearity::new(vf.g.clone(), t.epsilon_factor * a)?;
    let mut out = Produced::new();
    out.say(format!(
        "grid: L = {:.6}, N = {}, eta = {}; bordered backward error {:e}",
        grid.half_length, grid.points, grid.eta, bs.report.solve_residual
    ));

    let dh = linearization(&bs, &geps, 1e-6)?;
    let eig = eigenvalues_2x2(&dh);
    out.say(format!(
        "Dh(0) eigenvalues: {:.10} {:+.10}i, {:.10} {:+.10}i (omega_* = {:.10})",
        eig[0].0, eig[0].1, eig[1].0, eig[1].1, rd.omega_star
    ));

    let mut polar = Table::new(&["r", "theta", "v1", "v2", "h1", "h2"]);
    let mut pts = Vec::new();
    for &r in &t.radii {
        for k in 0..t.angles {
            let theta = 2.0 * PI * k as f64 / t.angles as f64;
            let v = Vector2::new(r * theta.cos(), r * theta.sin());
            let (h, _) = reduced_vector_field(&bs, &geps, &v, None)?;
            polar.row(&[r, theta, v[0], v[1], h[0], h[1]]);
            pts.push(v);
        }
    }
    let equiv = equivariance_error(&bs, &geps, &pts[..pts.len().min(8)], &[0.5, 2.5])?;
    out.say(format!("equivariance error {equiv:e}"));

    let fp = fixed_point_omega(&p, &rd, a, 1e-14)?;
    let mut coeffs = fp.psi.clone();
    for i in 0..coeffs.ncols() {
        coeffs[(1, i)] += a * rd.v_star[i];
    }
    let u = sample_wavetrain(&bs, fp.omega, &coeffs);
    let v0 = bs.basis.project(&u);
    let phi = fixed_point_phi(&bs, &geps, &v0, None)?;
    let window = window_difference(&grid, &phi.field, &u, bs.interior_half_width());
    let opts = OdeOptions {
        rel_tol: t.rel_tol,
        abs_tol: t.abs_tol,
        ..OdeOptions::default()
    };
    let orbit = orbit_analysis(&bs, &geps, &v0, t.flow_samples, &opts)?;
    out.say(format!(
        "orbit through the branch point a = {a}: period {:.10} vs 2 pi / omega(a) = {:.10}",
        orbit.period.period,
        2.0 * PI / fp.omega
    ));
    out.say(format!("reduced flow discrepancy {:e}; wave-train match {window:e}", orbit.flow.max_discrepancy));

    let mut flow = Table::new(&["x", "ode_v1", "ode_v2", "shifted_v1", "shifted_v2"]);
    for smp in &orbit.flow.samples {
        flow.row(&[smp.x, smp.ode[0], smp.ode[1], smp.shifted[0], smp.shifted[1]]);
    }
    let mut field = Table::new(&["xi", "phi", "wavetrain"]);
    let stride = (grid.points / 400).max(1);
    let n = bs.dimension;
    for i in (0..grid.points).step_by(stride) {
        field.row(&[grid.nodes[i], phi.field[i * n], u[i * n]]);
    }
    out.artifacts.table("h_polar.csv", polar);
    out.artifacts.table("orbit.csv", flow);
    out.artifacts.table("manifold_point.csv", field);
    out.artifacts.plot_script("orbit.csv", "x", &["ode_v1", "shifted_v1", "ode_v2", "shifted_v2"], false);
    out.artifacts.plot_script("manifold_point.csv", "xi", &["phi", "wavetrain"], false);
    out.artifacts.json(
        "manifold.json",
        &json!({
            "omega_star": rd.omega_star,
            "omega_a": fp.omega,
            "grid": { "half_length": grid.half_length, "points": grid.points, "eta": grid.eta },
            "bordered": {
                "size": bs.report.size,
                "kernel_residual_weighted": bs.report.kernel_residual_weighted,
                "kernel_residual_interior": bs.report.kernel_residual_interior,
                "solve_residual": bs.report.solve_residual,
            },
            "dh0": [[dh[(0, 0)], dh[(0, 1)]], [dh[(1, 0)], dh[(1, 1)]]],
            "dh0_eigenvalues": eig,
            "equivariance_error": equiv,
            "v0": [v0[0], v0[1]],
            "phi_iterations": phi.iterations,
            "wavetrain_window_difference": window,
            "period": orbit.period.period,
            "period_expected": 2.0 * PI / fp.omega,
            "flow_discrepancy": orbit.flow.max_discrepancy,
        }),
    );
    Ok(out)
}

fn run_acceptance(s: &Scenario) -> TaskResult {
    let t = s.file.acceptance.as_ref().expect("validated");
    let ids = selected_criteria(&t.criteria);
    let report = acceptance::run(&ids);
    let mut out = Produced::new();
    for c in &report.criteria {
        out.say(c.line());
    }
    // runtimes vary between runs, so the table keeps only the verdicts
    let mut table = Table::new(&["criterion", "passed"]);
    for c in &report.criteria {
        table.row(&[c.id as f64, c.passed as u8 as f64]);
    }
    out.passed = report.passed;
    out.artifacts.table("acceptance.csv", table);
    out.artifacts.json("acceptance.json", &report);
    Ok(out)
}

/// Expands `"all"` and resolves names, keeping the suite order.
pub fn selected_criteria(names: &[String]) -> Vec<u8> {
    if names.iter().any(|n| n == "all") {
        return acceptance::CRITERIA.map(|c| c.0).to_vec();
    }
    let wanted: Vec<u8> = names.iter().filter_map(|n| acceptance::lookup(n)).collect();
    acceptance::CRITERIA
        .iter()
        .map(|c| c.0)
        .filter(|id| wanted.contains(id))
        .collect()
}
