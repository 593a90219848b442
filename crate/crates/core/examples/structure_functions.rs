//! Canonical coframes and their constant structure functions.
//!
//! cargo run --example structure_functions

use pag::coframing::{duality_error, homogeneity_check, structure_functions, UnitControlFraming, DEFAULT_FD_STEP};
use pag::{CaseTag, ModelSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for case in CaseTag::ALL {
        let spec = ModelSpec::default_for(case);
        let pts = spec.sample_points(10, &mut rng)?;
        let report = homogeneity_check(&spec, &pts, DEFAULT_FD_STEP, 1e-5)?;
        let dual = pts.iter().map(|x| duality_error(&spec, x)).collect::<Result<Vec<_>, _>>()?;
        let dual = dual.into_iter().fold(0.0, f64::max);
        println!("{case}: duality {dual:.1e}, spread {:.1e}", report.max_spread);
        for (i, j, k, v) in report.mean.iter() {
            if v.abs() > 1e-8 {
                println!("    T{i}_{j}{k} = {v:+.6}");
            }
        }
    }

    // C11 with G = exp(2 x1 + x1^2/10): T2_12 drifts with x1
    let c11 = ModelSpec::default_for(CaseTag::C11);
    let hook = UnitControlFraming {
        spec: c11,
        metric: |x: &[f64]| (2.0 * x[0] + x[0] * x[0] / 10.0).exp(),
    };
    println!("\nperturbed metric:");
    for x1 in [-0.5, 0.0, 0.5] {
        let t = structure_functions(&hook, &[x1, 0.0], DEFAULT_FD_STEP)?;
        println!("    x1={x1:+.1}: T2_12 = {:+.6}", t.get(2, 1, 2));
    }
    Ok(())
}
