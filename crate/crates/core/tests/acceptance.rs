//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest harness so the lines always print.

use std::process::ExitCode;
use std::time::Instant;

use pmin_core::verify::{run_suite, Suite};

const SEED: u64 = 20_240_611;

fn time_limit(suite: Suite) -> Option<f64> {
    match suite {
        Suite::Families => Some(5.0),
        Suite::Dirichlet => Some(60.0),
        _ => None,
    }
}

fn main() -> ExitCode {
    let verbose = std::env::args().any(|a| a == "--verbose" || a == "-v");
    let mut failed = Vec::new();
    for suite in Suite::ALL {
        let t = Instant::now();
        let r = run_suite(suite, SEED);
        let secs = t.elapsed().as_secs_f64();
        let limit = time_limit(suite);
        let in_time = limit.map_or(true, |l| secs < l);
        let ok = r.pass && in_time;
        println!(
            "{} criterion {:>2} {:<15} {:>7.2} s{}",
            if ok { "PASS" } else { "FAIL" },
            r.criterion,
            suite.name(),
            secs,
            limit.map(|l| format!(" (limit {l} s)")).unwrap_or_default()
        );
        for c in &r.checks {
            if verbose || !c.pass {
                let detail = c
                    .detail
                    .as_deref()
                    .map(|d| format!(" [{d}]"))
                    .unwrap_or_default();
                println!(
                    "     {} {}: {:e} {:?} {:e}{detail}",
                    if c.pass { "ok  " } else { "FAIL" },
                    c.name,
                    c.value,
                    c.relation,
                    c.threshold
                );
            }
        }
        if !ok {
            failed.push(r.criterion);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", Suite::ALL.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
