//! Prints one PASS/FAIL line per acceptance criterion and exits nonzero if
//! any fails. `ACCEPTANCE_ONLY=1,3` restricts the run.

use std::process::ExitCode;

use hardcore::acceptance::{run, run_all};

fn main() -> ExitCode {
    // cargo passes harness flags such as --nocapture; they do not apply here
    let results = match std::env::var("ACCEPTANCE_ONLY") {
        Ok(s) => run(&s.split(',').filter_map(|t| t.trim().parse().ok()).collect::<Vec<_>>()),
        Err(_) => run_all(),
    };
    println!();
    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
