//! Runs every verification suite and prints one line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use p1wedge::suites::{run_suite, SUITES};

fn main() -> ExitCode {
    let mut ok = true;
    for name in SUITES {
        let start = Instant::now();
        let rep = run_suite(name).expect("known suite");
        let secs = start.elapsed().as_secs_f64();
        let status = if rep.pass { "pass" } else { "FAIL" };
        println!("criterion {} {:<15} {status}  ({} checks, {secs:.1}s)", rep.criterion, rep.name, rep.checks);
        for f in &rep.failures {
            println!("    {f}");
        }
        if rep.failed > rep.failures.len() {
            println!("    ... {} failures in total", rep.failed);
        }
        ok &= rep.pass;
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
