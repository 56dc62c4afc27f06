use clap::{Parser, Subcommand};
use nonlocal_cli::config::Scenario;
use nonlocal_cli::run::{run_scenario, selected_criteria, RunOutcome};
use nonlocal_cli::{acceptance, output, scenarios};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nonlocal", version, about = "Fredholm index, spectral flow and wave trains for nonlocal equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenario files or bundled scenarios; outputs go to $NONLOCAL_OUT (default ./out).
    Run {
        /// Config paths or bundled scenario names.
        #[arg(required = true)]
        scenarios: Vec<String>,
        /// Run independent scenarios concurrently.
        #[arg(long)]
        parallel: bool,
    },
    /// Run the acceptance suite (all criteria, or the named ones).
    Acceptance {
        /// Criterion ids or names; empty or `all` selects every criterion.
        criteria: Vec<String>,
        /// Print the machine-readable report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// List the bundled scenarios.
    ListScenarios,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { scenarios, parallel } => run(&scenarios, parallel),
        Command::Acceptance { criteria, json } => run_acceptance(&criteria, json),
        Command::ListScenarios => {
            for (name, src) in scenarios::BUNDLED {
                let task = nonlocal_cli::config::parse(name, src)
                    .map(|s| s.task().as_str())
                    .unwrap_or("?");
                println!("{name:<24} {task}");
            }
            ExitCode::SUCCESS
        }
    }
}

fn run(args: &[String], parallel: bool) -> ExitCode {
    let mut loaded: Vec<Scenario> = Vec::new();
    for a in args {
        match scenarios::resolve(a) {
            Ok(s) => loaded.push(s),
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(2);
            }
        }
    }
    let root = output::output_root();
    let results: Vec<_> = if parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = loaded.iter().map(|s| scope.spawn(|| run_scenario(s, &root))).collect();
            handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
        })
    } else {
        loaded.iter().map(|s| run_scenario(s, &root)).collect()
    };
    let mut ok = true;
    for r in results {
        match r {
            Ok(outcome) => {
                report(&outcome);
                ok &= outcome.passed;
            }
            Err(e) => {
                eprintln!("error: {e}");
                ok = false;
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn report(o: &RunOutcome) {
    println!("== {} ({})", o.scenario, o.manifest.task);
    for l in &o.lines {
        println!("{l}");
    }
    println!("wrote {} files to {}", o.manifest.files.len() + 1, o.directory.display());
}

fn run_acceptance(names: &[String], json: bool) -> ExitCode {
    for n in names {
        if n != "all" && acceptance::lookup(n).is_none() {
            eprintln!("unknown criterion `{n}`");
            return ExitCode::from(2);
        }
    }
    let ids = if names.is_empty() {
        selected_criteria(&["all".to_string()])
    } else {
        selected_criteria(names)
    };
    let mut criteria = Vec::new();
    for id in ids {
        let c = acceptance::run_criterion(id);
        if !json {
            println!("{}", c.line());
        }
        criteria.push(c);
    }
    let report = acceptance::AcceptanceReport {
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serialisable report"));
    } else {
        println!("overall: {}", if report.passed { "PASS" } else { "FAIL" });
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
