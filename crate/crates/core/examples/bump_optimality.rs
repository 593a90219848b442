//! Perturbing a C11 geodesic with fixed endpoints raises its energy.
//!
//! cargo run --example bump_optimality

use std::f64::consts::PI;

use pag::integrate::energy_of_samples;
use pag::{CaseTag, ControlAffine, ModelSpec, Params};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c1 = 0.8;
    let spec = ModelSpec::new(CaseTag::C11, Params { c1, ..Default::default() });
    let (c2, horizon) = (1.1, 1.0);
    let ts: Vec<f64> = (0..=2000).map(|i| horizon * i as f64 / 2000.0).collect();

    // x1 = t, u = d/dt x2, bump = delta sin(pi t / T) in x2
    let energy = |delta: f64| -> pag::Result<f64> {
        let q = ts
            .iter()
            .map(|&t| {
                let u = c2 * (-2.0 * c1 * t).exp() + delta * PI / horizon * (PI * t / horizon).cos();
                spec.cost(&[t, 0.0], u)
            })
            .collect::<pag::Result<Vec<_>>>()?;
        energy_of_samples(&ts, &q)
    };
    let base = energy(0.0)?;
    println!("geodesic energy {base:.10}");
    for delta in [-0.1, -0.01, 0.001, 0.01, 0.1, 0.5] {
        println!("  delta={delta:+.3}: E - E0 = {:+.6e}", energy(delta)? - base);
    }
    Ok(())
}
