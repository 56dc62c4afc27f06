use nonlocal_cli::acceptance::{self, AcceptanceReport};
use nonlocal_cli::config::{self, Task};
use nonlocal_cli::output::{verify_manifest, Manifest, MANIFEST};
use nonlocal_cli::run::run_scenario;
use nonlocal_cli::scenarios::{self, BUNDLED};
use std::path::Path;
use std::process::{Command, Output};

fn nonlocal(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nonlocal"))
        .args(args)
        .env("NONLOCAL_OUT", out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn csv_column(path: &Path, column: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == column).expect("column present");
    r.records().map(|rec| rec.unwrap()[idx].parse().unwrap()).collect()
}

#[test]
fn malformed_config_is_a_config_error_with_exit_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "name = \"bad\"\ntask = \"roots\"\nmatrix = [[2.0]]\n[roots]\nrectangle = [1.0, 2.0]\n").unwrap();
    let o = nonlocal(&["run", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("ConfigError") && err.contains("bad.toml:5"), "{err}");

    std::fs::write(&cfg, "name = \"bad\"\ntask = \"transmogrify\"\n").unwrap();
    let o = nonlocal(&["run", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2"));

    let o = nonlocal(&["run", "no-such-scenario"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn task_errors_carry_module_error_names() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strip.toml");
    std::fs::write(
        &cfg,
        "name = \"strip\"\ntask = \"roots\"\nmatrix = [[2.0]]\n[[kernel]]\nfamily = \"two-sided-exponential\"\nrate = 1.0\n[roots]\nrectangle = [-1.5, 1.5, -1.0, 1.0]\n",
    )
    .unwrap();
    let o = nonlocal(&["run", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("StripViolation"));
}

#[test]
fn list_scenarios_names_every_bundled_file() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&nonlocal(&["list-scenarios"], dir.path()));
    for (name, _) in BUNDLED {
        assert!(text.contains(name), "{name} missing from listing");
    }
}

#[test]
fn wavetrain_branch_starts_at_omega_star() {
    let dir = tempfile::tempdir().unwrap();
    let o = nonlocal(&["run", "exp2-wavetrain"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = dir.path().join("exp2-wavetrain/branch.csv");
    let a = csv_column(&csv, "a");
    let omega = csv_column(&csv, "omega");
    assert_eq!(a[0], 0.0);
    assert!((omega[0] - 1.0).abs() < 1e-8);
    assert_eq!(a.len(), 11);
    assert!(omega.windows(2).all(|w| w[1] < w[0]), "omega decreases along the branch since alpha < 0");
    assert!(stdout(&o).contains("20/20 trials returned"));
}

#[test]
fn weighted_front_index_agrees_between_flow_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let o = nonlocal(&["run", "weighted-front-index"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("index (spectral flow) = +1"), "{text}");
    assert!(text.contains("index (operator oracle, L = 40, N = 800) = +1"), "{text}");
}

#[test]
fn csv_outputs_are_byte_identical_across_runs_and_match_manifest() {
    let names = ["exp2-roots", "kawahara-roots", "weighted-path-flow", "weyl-principal", "exp2-wavetrain"];
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let args: Vec<&str> = std::iter::once("run").chain(names).collect();
    assert!(nonlocal(&args, first.path()).status.success());
    let mut par = args.clone();
    par.push("--parallel");
    assert!(nonlocal(&par, second.path()).status.success());
    for name in names {
        let (d1, d2) = (first.path().join(name), second.path().join(name));
        assert!(verify_manifest(&d1).unwrap().is_empty());
        assert!(verify_manifest(&d2).unwrap().is_empty());
        let manifest: Manifest = serde_json::from_slice(&std::fs::read(d1.join(MANIFEST)).unwrap()).unwrap();
        assert_eq!(manifest.scenario, name);
        assert!(manifest.files.iter().any(|f| f.path.ends_with(".csv")));
        for f in manifest.files.iter().filter(|f| f.path.ends_with(".csv")) {
            assert_eq!(std::fs::read(d1.join(&f.path)).unwrap(), std::fs::read(d2.join(&f.path)).unwrap(), "{name}/{}", f.path);
        }
    }
}

#[test]
fn tampered_output_fails_manifest_check() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenarios::resolve("exp2-roots").unwrap();
    let outcome = run_scenario(&s, dir.path()).unwrap();
    std::fs::write(outcome.directory.join("roots.csv"), "re,im\n").unwrap();
    assert_eq!(verify_manifest(&outcome.directory).unwrap(), vec!["roots.csv".to_string()]);
}

#[test]
fn kawahara_scenario_finds_four_simple_roots() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenarios::resolve("kawahara-roots").unwrap();
    run_scenario(&s, dir.path()).unwrap();
    let csv = dir.path().join("kawahara-roots/roots.csv");
    let re = csv_column(&csv, "re");
    let im = csv_column(&csv, "im");
    let mult = csv_column(&csv, "multiplicity");
    assert_eq!(re.len(), 4);
    assert!(mult.iter().all(|m| *m == 1.0));
    let exact = [(0.0, -1.0), (-(2f64.sqrt()), 0.0), (2f64.sqrt(), 0.0), (0.0, 1.0)];
    for (x, y) in exact {
        assert!(re.iter().zip(&im).any(|(r, i)| (r - x).abs() < 1e-10 && (i - y).abs() < 1e-10));
    }
}

#[test]
fn hyperbolicity_and_symbol_scenarios_run() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["hyperbolic-half", "exp2-symbol"] {
        let s = scenarios::resolve(name).unwrap();
        let o = run_scenario(&s, dir.path()).unwrap();
        assert!(o.passed);
    }
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("hyperbolic-half/hyperbolicity.json")).unwrap()).unwrap();
    assert_eq!(json["report"]["hyperbolic"], true);
    assert!((json["report"]["min_abs"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    let abs_d = csv_column(&dir.path().join("exp2-symbol/symbol.csv"), "abs_d");
    assert_eq!(abs_d.len(), 401);
}

#[test]
fn acceptance_report_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = nonlocal(&["acceptance", "1", "kawahara-anchor", "--json"], dir.path());
    assert!(o.status.success());
    let report: AcceptanceReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report.criteria.iter().map(|c| c.id).collect::<Vec<_>>(), vec![1, 2]);
    assert!(report.passed);
    let again: AcceptanceReport = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(again, report);
    assert!(report.criteria[0].measurements.iter().all(|m| m.passed));

    let o = nonlocal(&["acceptance", "criterion-42"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn acceptance_scenario_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("acc.toml");
    std::fs::write(&cfg, "name = \"acc\"\ntask = \"acceptance\"\n[acceptance]\ncriteria = [\"2\"]\n").unwrap();
    let s = config::load_path(&cfg).unwrap();
    assert_eq!(s.task(), Task::Acceptance);
    let o = run_scenario(&s, dir.path()).unwrap();
    assert!(o.passed);
    let report: AcceptanceReport = serde_json::from_slice(&std::fs::read(o.directory.join("acceptance.json")).unwrap()).unwrap();
    assert_eq!(report.criteria.len(), 1);
    assert_eq!(acceptance::lookup(&report.criteria[0].name), Some(2));
}
