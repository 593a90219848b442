//! Closed-form families of C12 and C212 and their reduced equations.
//!
//! cargo run --example closed_forms

use pag::closedform::{
    case12_parabola_residual, family_from_phase_point, reduced_ode_residual, Case12Family, Case212Family,
    ClosedFormFamily,
};
use pag::pmp::PhasePoint;
use pag::{CaseTag, ModelSpec, Params};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (j0, g0) = (0.5, 1.5);
    let c12 = ModelSpec::new(CaseTag::C12, Params { j0, g0, ..Default::default() });
    let times: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();

    // the conserved p1 and p2 x2 pick the branch
    for p in [[0.2, 0.1], [-1.0, 0.0], [0.0, 0.3], [0.0, -0.75]] {
        let start = PhasePoint::new([0.0, 1.0], p.to_vec())?;
        let fam = family_from_phase_point(&c12, &start)?;
        let res = reduced_ode_residual(&c12, &fam, &times)?;
        print!("p={p:?} -> {:<17} residual {res:.1e}", fam.subcase());
        if let ClosedFormFamily::Case12(f @ (Case12Family::KPos { .. } | Case12Family::KNeg { .. })) = &fam {
            let x = fam.eval(&c12, 0.7)?;
            print!("  parabola {:.1e}", case12_parabola_residual(j0, g0, f, &x)?);
        }
        println!();
    }

    let c212 = ModelSpec::new(CaseTag::C212, Params { c1: 1.5, c3: 0.5, ..Default::default() });
    let fams = [
        Case212Family::ConstSlope { a: 2.0, b: 1.0, t0: 0.0 },
        Case212Family::Exp { ctilde: -0.7, a: 1.5, b: 0.2, t0: 0.0 },
        Case212Family::Tan { a: 0.8, b: 0.6, c: 0.1, d: -0.3, t0: 0.0 },
        Case212Family::Tanh { a: -1.2, b: 0.9, c: 0.4, d: 0.5, t0: 0.0 },
        Case212Family::Rational { a: 0.5, b: 2.0, c: 1.0, t0: 0.0 },
    ];
    println!();
    for f in fams {
        let fam = ClosedFormFamily::Case212(f);
        let x = fam.eval(&c212, 0.5)?;
        println!(
            "C212 {:<15} x(0.5)=({:.4}, {:.4}, {:.4}) residual {:.1e}",
            fam.subcase(),
            x[0],
            x[1],
            x[2],
            reduced_ode_residual(&c212, &fam, &times)?
        );
    }

    let tan = ClosedFormFamily::Case212(Case212Family::Tan { a: 1.0, b: 1.0, c: 0.0, d: 0.0, t0: 0.0 });
    println!("\nat the pole: {}", tan.eval(&c212, std::f64::consts::FRAC_PI_2).unwrap_err());
    Ok(())
}
