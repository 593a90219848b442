//! Residual symmetry groups acting as point-affine isometries.
//!
//! cargo run --example symmetries

use pag::verify::{apply_symmetry, isometry_residual, isometry_residual_of_map, SymmetryTransform, ISOMETRY_STEP};
use pag::{CaseTag, ModelSpec, Params, StateVec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for case in [CaseTag::C11, CaseTag::C12, CaseTag::C211, CaseTag::C212, CaseTag::C22, CaseTag::C231] {
        let spec = ModelSpec::default_for(case);
        let g = SymmetryTransform::random(case, &mut rng)?;
        let x = spec.sample_point(&mut rng)?;
        let y = apply_symmetry(&spec, &g, &x)?;
        let r = isometry_residual(&spec, &g, &x, ISOMETRY_STEP)?;
        println!("{case}: {}", serde_json::to_string(&g)?);
        println!(
            "    {:?} -> {:?}\n    drift {:.1e} span {:.1e} metric {:.1e}",
            x.0, y.0, r.drift_err, r.span_err, r.metric_err
        );
    }

    let c22 = ModelSpec::default_for(CaseTag::C22);
    let s1 = SymmetryTransform::Case22 { a: 1.1, b: 0.2, c: -0.1, d: 0.9 };
    let s2 = SymmetryTransform::Case22 { a: 0.8, b: -0.1, c: 0.2, d: 1.2 };
    let x = [0.3, 1.2, -0.4];
    let seq = apply_symmetry(&c22, &s1, &apply_symmetry(&c22, &s2, &x)?)?;
    let comp = apply_symmetry(&c22, &SymmetryTransform::compose(&c22, &s1, &s2)?, &x)?;
    println!("\nC22 s1(s2(x)) = {:?}\n    (s1 s2)(x) = {:?}", seq.0, comp.0);

    // scaling x2 alone is not in the C11 group
    let c11 = ModelSpec::new(CaseTag::C11, Params { c1: 1.0, ..Default::default() });
    let r = isometry_residual_of_map(&c11, |y| Ok(StateVec(vec![y[0], 2.0 * y[1]])), &[0.3, 0.1], ISOMETRY_STEP)?;
    println!("\nC11 x2 -> 2 x2: metric_err {:.3}", r.metric_err);
    Ok(())
}
