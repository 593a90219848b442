//! Numerical flow against the closed form through the same phase point.
//!
//! cargo run --example oracle_compare

use pag::closedform::family_from_phase_point;
use pag::integrate::{integrate, IntegratorConfig};
use pag::pmp::PhasePoint;
use pag::{CaseTag, ModelSpec, Params};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let runs = [
        (ModelSpec::new(CaseTag::C11, Params { c1: 1.0, ..Default::default() }), [0.0, 0.0], [0.3, 2.0]),
        (ModelSpec::new(CaseTag::C11, Params { c1: -0.5, ..Default::default() }), [0.2, -0.1], [0.0, 0.8]),
        (ModelSpec::default_for(CaseTag::C12), [0.0, 1.0], [0.2, 0.1]),
        (ModelSpec::default_for(CaseTag::C12), [0.0, 1.0], [-1.0, 0.0]),
    ];
    for (spec, x, p) in runs {
        let start = PhasePoint::new(x, p.to_vec())?;
        let fam = family_from_phase_point(&spec, &start)?;
        let traj = integrate(&spec, &start, (0.0, 1.0), &IntegratorConfig::rk45(1e-10))?;
        let mut worst: f64 = 0.0;
        for (t, x) in traj.times.iter().zip(&traj.states) {
            let y = fam.eval(&spec, *t)?;
            worst = worst.max((x[0] - y[0]).abs()).max((x[1] - y[1]).abs());
        }
        println!("{} {:<17} nodes={:<4} max discrepancy {worst:.2e}", spec.case, fam.subcase(), traj.len());
    }

    // k < 0 reaches its pole: the integrator stops on blow-up
    let spec = ModelSpec::new(CaseTag::C12, Params { j0: 0.0, g0: 1.0, ..Default::default() });
    let start = PhasePoint::new([0.0, 1.0], vec![-1.0, 0.0])?;
    let traj = integrate(&spec, &start, (0.0, 3.0), &IntegratorConfig::default())?;
    println!(
        "k<0 run: stop_reason={} at t={:.6} (pole at pi/sqrt(2) = {:.6})",
        traj.stop_reason,
        traj.times[traj.len() - 1],
        std::f64::consts::PI / 2f64.sqrt()
    );
    Ok(())
}
