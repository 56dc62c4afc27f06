//! Scenario configuration files (TOML) and their validation.

use nonlocal_core::kernel::{BaseKernel, KernelModel};
use nonlocal_core::nonlinearity::Nonlinearity;
use nonlocal_core::symbol::CharacteristicFunction;
use nonlocal_core::RMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

/// A configuration problem, located by line (when known) and field path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source_name: String,
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConfigError: {}", self.source_name)?;
        if let Some(l) = self.line {
            write!(f, ":{l}")?;
        }
        if !self.field.is_empty() {
            write!(f, ": field `{}`", self.field)?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Symbol,
    Roots,
    Hyperbolicity,
    Flow,
    Index,
    Oracle,
    Weyl,
    Wavetrain,
    Manifold,
    Acceptance,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Symbol => "symbol",
            Task::Roots => "roots",
            Task::Hyperbolicity => "hyperbolicity",
            Task::Flow => "flow",
            Task::Index => "index",
            Task::Oracle => "oracle",
            Task::Weyl => "weyl",
            Task::Wavetrain => "wavetrain",
            Task::Manifold => "manifold",
            Task::Acceptance => "acceptance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Gaussian,
    TwoSidedExponential,
    ShiftedGaussianBump,
}

/// A kernel coefficient: a number (times the identity) or a matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Scalar(f64),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelTerm {
    pub family: Family,
    pub sigma: Option<f64>,
    pub rate: Option<f64>,
    pub center: Option<f64>,
    #[serde(default = "one")]
    pub coefficient: Coefficient,
}

fn one() -> Coefficient {
    Coefficient::Scalar(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonlinearityKind {
    Quadratic,
    Cubic,
    Polynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySpec {
    pub kind: NonlinearityKind,
    pub coefficients: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormSpec {
    SteadyState,
    PrincipalPlusKernel,
    Polynomial,
    Kawahara,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacteristicSpec {
    #[serde(default = "steady")]
    pub form: FormSpec,
    /// Coefficients in increasing degree for the polynomial form.
    pub coefficients: Option<Vec<f64>>,
    pub alpha: Option<f64>,
    pub c: Option<f64>,
    #[serde(default)]
    pub shift: f64,
}

fn steady() -> FormSpec {
    FormSpec::SteadyState
}

impl Default for CharacteristicSpec {
    fn default() -> Self {
        Self {
            form: FormSpec::SteadyState,
            coefficients: None,
            alpha: None,
            c: None,
            shift: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolTask {
    pub ell_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    401
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootsTask {
    /// `[re_min, re_max, im_min, im_max]`
    pub rectangle: [f64; 4],
    #[serde(default = "default_root_tol")]
    pub tol: f64,
}

fn default_root_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperbolicityTask {
    pub ell_max: Option<f64>,
    #[serde(default = "default_axis_samples")]
    pub samples: usize,
}

fn default_axis_samples() -> usize {
    4001
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowTask {
    /// Principal part at the end of the path; the start is `matrix`.
    pub matrix_end: Vec<Vec<f64>>,
    pub strip: f64,
    pub rho_step: Option<f64>,
    pub crossing_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontTask {
    /// Limit of the principal part as `xi -> -inf`.
    pub matrix_minus: Vec<Vec<f64>>,
    /// Limit as `xi -> +inf`.
    pub matrix_plus: Vec<Vec<f64>>,
    #[serde(default)]
    pub eta: f64,
    /// Half-widths of the truncation intervals.
    pub half_lengths: Vec<f64>,
    /// Grid points per unit length.
    pub points_per_unit: f64,
    #[serde(default = "default_gap")]
    pub gap_factor: f64,
    /// Strip of the limit-interpolating path (index task only).
    pub strip: Option<f64>,
}

fn default_gap() -> f64 {
    nonlocal_core::oracle::DEFAULT_GAP_FACTOR
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeylConstruction {
    /// `A(xi) = matrix * tanh(xi)^2`, vanishing at 0.
    VanishingPrincipal,
    /// Constant `matrix` whose limit symbol has an axis root.
    NonhyperbolicLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeylTask {
    pub construction: WeylConstruction,
    pub ns: Vec<usize>,
    #[serde(default = "default_search")]
    pub search_half_width: f64,
}

fn default_search() -> f64 {
    5.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavetrainTask {
    #[serde(default = "default_modes")]
    pub modes: usize,
    /// Frequency search interval for the axis root.
    pub search: [f64; 2],
    pub a_max: f64,
    pub steps: usize,
    #[serde(default)]
    pub uniqueness_trials: usize,
    #[serde(default = "default_noise")]
    pub noise_factor: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_modes() -> usize {
    32
}
fn default_noise() -> f64 {
    0.1
}
fn default_seed() -> u64 {
    7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldTask {
    #[serde(default = "default_modes")]
    pub modes: usize,
    pub search: [f64; 2],
    pub periods: f64,
    pub points: usize,
    pub eta: f64,
    /// Branch amplitude of the orbit that is followed.
    pub amplitude: f64,
    /// Cutoff radius as a multiple of the amplitude.
    #[serde(default = "default_eps_factor")]
    pub epsilon_factor: f64,
    /// Radii and angle count of the polar sample of `h`.
    pub radii: Vec<f64>,
    #[serde(default = "default_angles")]
    pub angles: usize,
    #[serde(default = "default_flow_samples")]
    pub flow_samples: usize,
    #[serde(default = "default_rel")]
    pub rel_tol: f64,
    #[serde(default = "default_abs")]
    pub abs_tol: f64,
}

fn default_eps_factor() -> f64 {
    10.0
}
fn default_angles() -> usize {
    16
}
fn default_flow_samples() -> usize {
    16
}
fn default_rel() -> f64 {
    1e-8
}
fn default_abs() -> f64 {
    1e-11
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptanceTask {
    /// Criterion ids or names; `["all"]` selects every criterion.
    pub criteria: Vec<String>,
}

/// The raw file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub task: Task,
    pub description: Option<String>,
    /// Output subdirectory; defaults to `name`.
    pub output: Option<String>,
    #[serde(default)]
    pub kernel: Vec<KernelTerm>,
    pub matrix: Option<Vec<Vec<f64>>>,
    pub nonlinearity: Option<NonlinearitySpec>,
    pub characteristic: Option<CharacteristicSpec>,
    pub symbol: Option<SymbolTask>,
    pub roots: Option<RootsTask>,
    pub hyperbolicity: Option<HyperbolicityTask>,
    pub flow: Option<FlowTask>,
    pub front: Option<FrontTask>,
    pub weyl: Option<WeylTask>,
    pub wavetrain: Option<WavetrainTask>,
    pub manifold: Option<ManifoldTask>,
    pub acceptance: Option<AcceptanceTask>,
}

/// A parsed and validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub source_name: String,
    pub source: String,
    pub kernel: Option<KernelModel>,
    pub matrix: Option<RMatrix>,
    pub nonlinearity: Option<Nonlinearity>,
}

impl Scenario {
    pub fn name(&self) -> &str {
        &self.file.name
    }

    pub fn task(&self) -> Task {
        self.file.task
    }

    pub fn output_dir_name(&self) -> &str {
        self.file.output.as_deref().unwrap_or(&self.file.name)
    }

    pub fn kernel(&self) -> &KernelModel {
        self.kernel.as_ref().expect("validated")
    }

    pub fn matrix(&self) -> &RMatrix {
        self.matrix.as_ref().expect("validated")
    }

    /// Characteristic function of `(matrix, kernel)` in the configured form.
    pub fn characteristic(&self) -> nonlocal_core::Result<CharacteristicFunction> {
        let spec = self.file.characteristic.clone().unwrap_or_default();
        let cf = match spec.form {
            FormSpec::Polynomial => CharacteristicFunction::polynomial(spec.coefficients.unwrap_or_default())?,
            FormSpec::Kawahara => CharacteristicFunction::kawahara(spec.alpha.unwrap_or(0.0), spec.c.unwrap_or(0.0))?,
            FormSpec::SteadyState => CharacteristicFunction::steady_state(self.matrix().clone(), self.kernel().clone())?,
            FormSpec::PrincipalPlusKernel => {
                CharacteristicFunction::principal_plus_kernel(self.matrix().clone(), self.kernel().clone())?
            }
        };
        Ok(if spec.shift != 0.0 { cf.with_shift(spec.shift) } else { cf })
    }

    /// Characteristic function with `matrix` replaced by `a`, same form and shift.
    pub fn characteristic_with(&self, a: RMatrix) -> nonlocal_core::Result<CharacteristicFunction> {
        let spec = self.file.characteristic.clone().unwrap_or_default();
        let cf = match spec.form {
            FormSpec::PrincipalPlusKernel => CharacteristicFunction::principal_plus_kernel(a, self.kernel().clone())?,
            _ => CharacteristicFunction::steady_state(a, self.kernel().clone())?,
        };
        Ok(if spec.shift != 0.0 { cf.with_shift(spec.shift) } else { cf })
    }
}

pub fn load_path(path: &Path) -> Result<Scenario, ConfigError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        source_name: name.clone(),
        line: None,
        field: String::new(),
        message: format!("cannot read file: {e}"),
    })?;
    parse(&name, &text)
}

pub fn parse(source_name: &str, text: &str) -> Result<Scenario, ConfigError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| ConfigError {
        source_name: source_name.to_string(),
        line: e.span().map(|s| line_of_offset(text, s.start)),
        field: String::new(),
        message: e.message().trim().to_string(),
    })?;
    let v = Validator { source_name, text };
    v.check(file)
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

struct Validator<'a> {
    source_name: &'a str,
    text: &'a str,
}

impl Validator<'_> {
    fn err(&self, field: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            source_name: self.source_name.to_string(),
            line: self.locate(field),
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// Best-effort line of `table.key` (or `[[table]]` entry `i`) in the source.
    fn locate(&self, field: &str) -> Option<usize> {
        let mut parts = field.split('.');
        let head = parts.next()?;
        let (table, index) = match head.split_once('[') {
            Some((t, rest)) => (t, rest.trim_end_matches(']').parse::<usize>().ok()),
            None => (head, None),
        };
        let key = parts.next_back();
        let lines: Vec<&str> = self.text.lines().collect();
        let is_key = |l: &str, k: &str| {
            let t = l.trim_start();
            t.starts_with(k) && t[k.len()..].trim_start().starts_with('=')
        };
        let header = |l: &str| {
            let t = l.trim();
            t == format!("[{table}]") || t == format!("[[{table}]]")
        };
        let mut seen = 0usize;
        let mut start = None;
        for (i, l) in lines.iter().enumerate() {
            if header(l) {
                if index.is_none_or(|n| n == seen) {
                    start = Some(i);
                    break;
                }
                seen += 1;
            }
        }
        match (start, key) {
            (Some(s), Some(k)) => {
                for (i, l) in lines.iter().enumerate().skip(s + 1) {
                    if l.trim_start().starts_with('[') {
                        break;
                    }
                    if is_key(l, k) {
                        return Some(i + 1);
                    }
                }
                Some(s + 1)
            }
            (Some(s), None) => Some(s + 1),
            (None, _) => lines.iter().position(|l| is_key(l, table)).map(|i| i + 1),
        }
    }

    fn matrix(&self, field: &str, rows: &[Vec<f64>], n: Option<usize>) -> Result<RMatrix, ConfigError> {
        let r = rows.len();
        if r == 0 || rows.iter().any(|row| row.len() != r) {
            return Err(self.err(field, "expected a non-empty square matrix (list of equal-length rows)"));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(self.err(field, "matrix entries must be finite"));
        }
        if let Some(n) = n {
            if r != n {
                return Err(self.err(field, format!("expected a {n}x{n} matrix, got {r}x{r}")));
            }
        }
        Ok(RMatrix::from_fn(r, r, |i, j| rows[i][j]))
    }

    fn positive(&self, field: &str, x: f64) -> Result<(), ConfigError> {
        if x.is_finite() && x > 0.0 {
            Ok(())
        } else {
            Err(self.err(field, format!("must be a positive finite number, got {x}")))
        }
    }

    fn kernel(&self, file: &ScenarioFile, n: usize) -> Result<KernelModel, ConfigError> {
        if file.kernel.is_empty() {
            return Err(self.err("kernel", "at least one [[kernel]] term is required for this task"));
        }
        let mut terms = Vec::new();
        for (i, t) in file.kernel.iter().enumerate() {
            let f = |k: &str| format!("kernel[{i}].{k}");
            let need = |v: Option<f64>, k: &str| v.ok_or_else(|| self.err(&f(k), format!("required for family {:?}", t.family)));
            let forbid = |v: Option<f64>, k: &str| match v {
                Some(_) => Err(self.err(&f(k), format!("not a parameter of family {:?}", t.family))),
                None => Ok(()),
            };
            let base = match t.family {
                Family::Gaussian => {
                    forbid(t.rate, "rate")?;
                    forbid(t.center, "center")?;
                    let sigma = need(t.sigma, "sigma")?;
                    self.positive(&f("sigma"), sigma)?;
                    BaseKernel::Gaussian { sigma }
                }
                Family::TwoSidedExponential => {
                    forbid(t.sigma, "sigma")?;
                    forbid(t.center, "center")?;
                    let rate = need(t.rate, "rate")?;
                    self.positive(&f("rate"), rate)?;
                    BaseKernel::TwoSidedExponential { rate }
                }
                Family::ShiftedGaussianBump => {
                    forbid(t.sigma, "sigma")?;
                    forbid(t.rate, "rate")?;
                    let center = need(t.center, "center")?;
                    if !center.is_finite() {
                        return Err(self.err(&f("center"), "must be finite"));
                    }
                    BaseKernel::ShiftedGaussianBump { center }
                }
            };
            let c = match &t.coefficient {
                Coefficient::Scalar(x) => {
                    if !x.is_finite() {
                        return Err(self.err(&f("coefficient"), "must be finite"));
                    }
                    RMatrix::identity(n, n) * *x
                }
                Coefficient::Matrix(rows) => self.matrix(&f("coefficient"), rows, Some(n))?,
            };
            terms.push((c, base));
        }
        KernelModel::new(n, terms).map_err(|e| self.err("kernel", e.to_string()))
    }

    fn require<'b, T>(&self, v: &'b Option<T>, table: &str) -> Result<&'b T, ConfigError> {
        v.as_ref()
            .ok_or_else(|| self.err(table, format!("task requires a [{table}] table")))
    }

    fn check(&self, file: ScenarioFile) -> Result<Scenario, ConfigError> {
        if file.name.trim().is_empty() || file.name.contains(['/', '\\']) || file.name.starts_with('.') {
            return Err(self.err("name", "must be a non-empty plain name"));
        }
        if let Some(o) = &file.output {
            if o.trim().is_empty() || o.contains("..") || Path::new(o).is_absolute() {
                return Err(self.err("output", "must be a relative path inside the output root"));
            }
        }
        let task = file.task;
        let tables: [(&str, bool, Task); 9] = [
            ("symbol", file.symbol.is_some(), Task::Symbol),
            ("roots", file.roots.is_some(), Task::Roots),
            ("hyperbolicity", file.hyperbolicity.is_some(), Task::Hyperbolicity),
            ("flow", file.flow.is_some(), Task::Flow),
            ("front", file.front.is_some(), Task::Index),
            ("weyl", file.weyl.is_some(), Task::Weyl),
            ("wavetrain", file.wavetrain.is_some(), Task::Wavetrain),
            ("manifold", file.manifold.is_some(), Task::Manifold),
            ("acceptance", file.acceptance.is_some(), Task::Acceptance),
        ];
        for (t, present, owner) in tables {
            let ok = owner == task || (t == "front" && task == Task::Oracle);
            if present && !ok {
                return Err(self.err(t, format!("table is not used by task `{}`", task.as_str())));
            }
        }

        let char_spec = file.characteristic.clone().unwrap_or_default();
        if !char_spec.shift.is_finite() {
            return Err(self.err("characteristic.shift", "must be finite"));
        }
        let synthetic = matches!(char_spec.form, FormSpec::Polynomial | FormSpec::Kawahara);
        match char_spec.form {
            FormSpec::Polynomial if char_spec.coefficients.is_none() => {
                return Err(self.err("characteristic.coefficients", "required for the polynomial form"));
            }
            FormSpec::Kawahara if char_spec.alpha.is_none() || char_spec.c.is_none() => {
                return Err(self.err("characteristic", "the kawahara form needs `alpha` and `c`"));
            }
            _ => {}
        }
        if synthetic && !matches!(task, Task::Symbol | Task::Roots | Task::Hyperbolicity | Task::Wavetrain) {
            return Err(self.err("characteristic.form", "synthetic forms only support symbol, roots and hyperbolicity"));
        }
        if synthetic && task == Task::Wavetrain {
            return Err(self.err("characteristic.form", "the wavetrain task needs a kernel and matrix"));
        }

        let needs_operator = !synthetic && task != Task::Acceptance;
        let (kernel, matrix) = if needs_operator {
            let m = match (&file.matrix, task) {
                (Some(rows), _) => self.matrix("matrix", rows, None)?,
                (None, Task::Index | Task::Oracle) => {
                    let f = self.require(&file.front, "front")?;
                    self.matrix("front.matrix_minus", &f.matrix_minus, None)?
                }
                (None, _) => return Err(self.err("matrix", "task requires `matrix`")),
            };
            (Some(self.kernel(&file, m.nrows())?), Some(m))
        } else {
            (None, None)
        };
        let n = matrix.as_ref().map(|m| m.nrows()).unwrap_or(1);

        let nonlinearity = match (&file.nonlinearity, task) {
            (Some(spec), _) => Some(self.nonlinearity(spec)?),
            (None, Task::Wavetrain | Task::Manifold) => {
                return Err(self.err("nonlinearity", "task requires a [nonlinearity] table"));
            }
            (None, _) => None,
        };

        match task {
            Task::Symbol => {
                let t = self.require(&file.symbol, "symbol")?;
                self.positive("symbol.ell_max", t.ell_max)?;
                if t.samples < 2 {
                    return Err(self.err("symbol.samples", "need at least 2 samples"));
                }
            }
            Task::Roots => {
                let t = self.require(&file.roots, "roots")?;
                let [a, b, c, d] = t.rectangle;
                if !(a < b && c < d) || t.rectangle.iter().any(|x| !x.is_finite()) {
                    return Err(self.err("roots.rectangle", "expected [re_min, re_max, im_min, im_max] with min < max"));
                }
                self.positive("roots.tol", t.tol)?;
            }
            Task::Hyperbolicity => {
                let t = self.require(&file.hyperbolicity, "hyperbolicity")?;
                if let Some(e) = t.ell_max {
                    self.positive("hyperbolicity.ell_max", e)?;
                }
                if t.samples < 3 {
                    return Err(self.err("hyperbolicity.samples", "need at least 3 samples"));
                }
            }
            Task::Flow => {
                let t = self.require(&file.flow, "flow")?;
                self.matrix("flow.matrix_end", &t.matrix_end, Some(n))?;
                self.positive("flow.strip", t.strip)?;
                if let Some(h) = t.rho_step {
                    if !(h > 0.0 && h <= 0.5) {
                        return Err(self.err("flow.rho_step", "must lie in (0, 0.5]"));
                    }
                }
                if let Some(c) = t.crossing_threshold {
                    self.positive("flow.crossing_threshold", c)?;
                }
            }
            Task::Index | Task::Oracle => {
                let t = self.require(&file.front, "front")?;
                self.matrix("front.matrix_minus", &t.matrix_minus, Some(n))?;
                self.matrix("front.matrix_plus", &t.matrix_plus, Some(n))?;
                if t.half_lengths.is_empty() {
                    return Err(self.err("front.half_lengths", "need at least one half-length"));
                }
                for l in &t.half_lengths {
                    self.positive("front.half_lengths", *l)?;
                }
                self.positive("front.points_per_unit", t.points_per_unit)?;
                self.positive("front.gap_factor", t.gap_factor)?;
                if t.gap_factor <= 1.0 {
                    return Err(self.err("front.gap_factor", "must exceed 1"));
                }
                if !t.eta.is_finite() {
                    return Err(self.err("front.eta", "must be finite"));
                }
                if task == Task::Index {
                    match t.strip {
                        Some(s) => self.positive("front.strip", s)?,
                        None => return Err(self.err("front.strip", "required by the index task")),
                    }
                }
            }
            Task::Weyl => {
                let t = self.require(&file.weyl, "weyl")?;
                if t.ns.len() < 2 || t.ns.windows(2).any(|w| w[1] <= w[0]) || t.ns[0] == 0 {
                    return Err(self.err("weyl.ns", "need at least two positive, strictly increasing values"));
                }
                self.positive("weyl.search_half_width", t.search_half_width)?;
            }
            Task::Wavetrain => {
                let t = self.require(&file.wavetrain, "wavetrain")?;
                self.wave_common("wavetrain", t.modes, t.search)?;
                self.positive("wavetrain.a_max", t.a_max)?;
                if t.steps == 0 {
                    return Err(self.err("wavetrain.steps", "must be positive"));
                }
                if t.uniqueness_trials > 0 {
                    self.positive("wavetrain.noise_factor", t.noise_factor)?;
                }
            }
            Task::Manifold => {
                let t = self.require(&file.manifold, "manifold")?;
                self.wave_common("manifold", t.modes, t.search)?;
                self.positive("manifold.periods", t.periods)?;
                if t.periods < nonlocal_core::manifold::MIN_PERIODS {
                    return Err(self.err(
                        "manifold.periods",
                        format!("need at least {} periods", nonlocal_core::manifold::MIN_PERIODS),
                    ));
                }
                if t.points < 61 {
                    return Err(self.err("manifold.points", "need at least 61 grid points"));
                }
                self.positive("manifold.eta", t.eta)?;
                self.positive("manifold.amplitude", t.amplitude)?;
                self.positive("manifold.epsilon_factor", t.epsilon_factor)?;
                if t.epsilon_factor <= 1.0 {
                    return Err(self.err("manifold.epsilon_factor", "the cutoff radius must exceed the amplitude"));
                }
                if t.radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
                    return Err(self.err("manifold.radii", "radii must be positive"));
                }
                if t.angles == 0 || t.flow_samples == 0 {
                    return Err(self.err("manifold.angles", "angles and flow_samples must be positive"));
                }
                self.positive("manifold.rel_tol", t.rel_tol)?;
                self.positive("manifold.abs_tol", t.abs_tol)?;
            }
            Task::Acceptance => {
                let t = self.require(&file.acceptance, "acceptance")?;
                if t.criteria.is_empty() {
                    return Err(self.err("acceptance.criteria", "list at least one criterion or \"all\""));
                }
                for c in &t.criteria {
                    if c != "all" && crate::acceptance::lookup(c).is_none() {
                        return Err(self.err("acceptance.criteria", format!("unknown criterion `{c}`")));
                    }
                }
            }
        }

        Ok(Scenario {
            file,
            source_name: self.source_name.to_string(),
            source: self.text.to_string(),
            kernel,
            matrix,
            nonlinearity,
        })
    }

    fn wave_common(&self, table: &str, modes: usize, search: [f64; 2]) -> Result<(), ConfigError> {
        if modes < 2 {
            return Err(self.err(&format!("{table}.modes"), "need at least 2 modes"));
        }
        if !(search[0] > 0.0 && search[0] < search[1] && search[1].is_finite()) {
            return Err(self.err(&format!("{table}.search"), "expected [omega_min, omega_max] with 0 < min < max"));
        }
        Ok(())
    }

    fn nonlinearity(&self, spec: &NonlinearitySpec) -> Result<Nonlinearity, ConfigError> {
        match (spec.kind, &spec.coefficients) {
            (NonlinearityKind::Quadratic, None) => Ok(Nonlinearity::quadratic()),
            (NonlinearityKind::Cubic, None) => Ok(Nonlinearity::cubic()),
            (NonlinearityKind::Polynomial, Some(c)) => {
                Nonlinearity::polynomial(c.clone()).map_err(|e| self.err("nonlinearity.coefficients", e.to_string()))
            }
            (NonlinearityKind::Polynomial, None) => Err(self.err("nonlinearity.coefficients", "required for kind polynomial")),
            (_, Some(_)) => Err(self.err("nonlinearity.coefficients", "only allowed for kind polynomial")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
name = "t"
task = "roots"
matrix = [[2.0]]

[[kernel]]
family = "two-sided-exponential"
rate = 1.0

[roots]
rectangle = [-0.5, 0.5, -1.5, 1.5]
"#;

    #[test]
    fn parses_minimal_roots_scenario() {
        let s = parse("good", GOOD).unwrap();
        assert_eq!(s.task(), Task::Roots);
        assert_eq!(s.kernel().dimension(), 1);
        assert!(s.characteristic().is_ok());
    }

    #[test]
    fn unknown_key_reports_line() {
        let bad = GOOD.replace("rate = 1.0", "rate = 1.0\nspeed = 3");
        let e = parse("bad", &bad).unwrap_err();
        assert_eq!(e.line, Some(9));
        assert!(e.message.contains("speed"), "{e}");
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let bad = GOOD.replace("rate = 1.0", "rate = -1.0");
        let e = parse("bad", &bad).unwrap_err();
        assert_eq!(e.field, "kernel[0].rate");
        assert_eq!(e.line, Some(8));

        let bad = GOOD.replace("[-0.5, 0.5, -1.5, 1.5]", "[0.5, -0.5, -1.5, 1.5]");
        let e = parse("bad", &bad).unwrap_err();
        assert_eq!(e.field, "roots.rectangle");
        assert_eq!(e.line, Some(11));

        let bad = GOOD.replace("matrix = [[2.0]]", "matrix = [[2.0, 1.0]]");
        assert_eq!(parse("bad", &bad).unwrap_err().field, "matrix");
    }

    #[test]
    fn missing_task_table_and_foreign_tables() {
        let bad = GOOD.replace("[roots]\nrectangle = [-0.5, 0.5, -1.5, 1.5]", "");
        assert_eq!(parse("bad", &bad).unwrap_err().field, "roots");
        let bad = format!("{GOOD}\n[symbol]\nell_max = 3.0\n");
        assert_eq!(parse("bad", &bad).unwrap_err().field, "symbol");
    }

    #[test]
    fn family_parameters_are_checked() {
        let bad = GOOD.replace("rate = 1.0", "sigma = 1.0");
        let e = parse("bad", &bad).unwrap_err();
        assert_eq!(e.field, "kernel[0].sigma");
    }
}
