//! Every invariant suite on every default spec.
//!
//! cargo run --example invariant_suites

use pag::suite::{run_suite, Suite, DEFAULT_SEED};
use pag::{CaseTag, ModelSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut failures = 0;
    for case in CaseTag::ALL {
        let report = run_suite(&ModelSpec::default_for(case), Suite::All, DEFAULT_SEED)?;
        for line in &report.lines {
            println!("{case:<5} {line}");
        }
        failures += usize::from(!report.all_pass());
    }
    println!("\n{failures} case(s) with failures");
    Ok(())
}
