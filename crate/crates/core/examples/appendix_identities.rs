//! The appendix identities on the C23x family.
//!
//! cargo run --example appendix_identities

use pag::verify::{
    a19_roots, expected_c2_a9, expected_schwarzian, pde_residual_a9, schwarzian_x1, A9_STEP, SCHWARZIAN_STEP,
};
use pag::{CaseTag, ModelSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for spec in [
        ModelSpec::default_for(CaseTag::C231),
        ModelSpec::default_for(CaseTag::C232).with_f20(vec![1.0, 1.0]),
        ModelSpec::default_for(CaseTag::C233).with_f20(vec![0.2, 0.0, -0.3]),
    ] {
        let c2 = expected_c2_a9(&spec)?;
        let want = expected_schwarzian(&spec)?;
        println!("{}: A9 target -2*{c2}, Schwarzian target {want}", spec.case);
        for x in spec.sample_points(4, &mut rng)? {
            println!(
                "  x=({:+.3}, {:+.3}, {:+.3})  A9 residual {:.1e}  Schwarzian {:+.6}",
                x[0],
                x[1],
                x[2],
                pde_residual_a9(&spec, &x, c2, A9_STEP)?,
                schwarzian_x1(&spec, &x, SCHWARZIAN_STEP)?
            );
        }
    }
    for (eps, c) in [(1.0, 0.0), (1.0, 1.5), (-1.0, 0.5)] {
        let (r, res) = a19_roots(eps, c);
        println!("r^2 - {eps}*{c}*r - {eps} = 0: r1={:.6} r2={:.6} residual {res:.1e}", r[0], r[1]);
    }
    Ok(())
}
