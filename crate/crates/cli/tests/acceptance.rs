use nonlocal_cli::acceptance::{run_criterion, CRITERIA};
use std::io::Write;

#[test]
fn acceptance_criteria() {
    let only: Option<Vec<u8>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(nonlocal_cli::acceptance::lookup).collect());
    let mut failed = Vec::new();
    for (id, _, _) in CRITERIA {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let report = run_criterion(id);
        // written to the raw handle so the line shows without --nocapture
        writeln!(std::io::stderr(), "{}", report.line()).unwrap();
        if !report.passed {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
