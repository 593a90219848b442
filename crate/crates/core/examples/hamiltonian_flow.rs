//! Pontryagin flow of C22 with its three first integrals.
//!
//! cargo run --example hamiltonian_flow

use pag::integrate::{energy, integral_drift, integrate, IntegratorConfig};
use pag::pmp::{default_phase_point, first_integrals, optimal_control};
use pag::{CaseTag, ModelSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ModelSpec::default_for(CaseTag::C22);
    let start = default_phase_point(CaseTag::C22);
    println!("start x={:?} p={:?} u*={:.6}", start.x.0, start.p, optimal_control(&spec, &start)?);
    let ints = first_integrals(&spec, &start)?;
    for (n, v) in ints.names.iter().zip(&ints.values) {
        println!("  {n:>3} = {v:+.12}");
    }

    let traj = integrate(&spec, &start, (0.0, 5.0), &IntegratorConfig::rk45(1e-10))?;
    println!("\n{} accepted steps, stop_reason={}", traj.len(), traj.stop_reason);
    for i in (0..traj.len()).step_by(traj.len() / 8 + 1) {
        let x = &traj.states[i];
        println!(
            "  t={:6.3}  x=({:+.5}, {:+.5}, {:+.5})  u={:+.5}",
            traj.times[i], x[0], x[1], x[2], traj.controls[i]
        );
    }
    println!("energy = {:.10}", energy(&spec, &traj)?);
    for (n, d) in integral_drift(&traj) {
        println!("  drift {n:>3}: {d:.2e}");
    }
    Ok(())
}
