//! The eight catalog models with their default constants.
//!
//! cargo run --example catalog

use pag::{CaseTag, ControlAffine, ModelSpec, Params};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for case in CaseTag::ALL {
        let spec = ModelSpec::default_for(case);
        let p = &spec.params;
        println!(
            "{:<5} dim={} params={:<36} domain: {}",
            case,
            case.dim(),
            case.parameter_names().join(","),
            case.domain_description()
        );
        let x: Vec<f64> = match case {
            CaseTag::C12 | CaseTag::C22 => vec![0.1, 1.0, 0.2][..case.dim()].to_vec(),
            CaseTag::C212 => vec![0.1, 0.2, 1.0],
            _ => vec![0.1, 0.2, 0.3][..case.dim()].to_vec(),
        };
        println!(
            "      c1={} c2={} c3={} c4={} j0={} g0={} eps={}",
            p.c1, p.c2, p.c3, p.c4, p.j0, p.g0, p.epsilon
        );
        println!(
            "      at x={x:?}: v1={:?} v2={:?} G={:.6}",
            spec.drift(&x)?.0,
            spec.control_field(&x)?.0,
            spec.metric(&x)?
        );
    }

    // validation collects every problem
    let bad = ModelSpec::new(
        CaseTag::C233,
        Params {
            c3: 1.0,
            epsilon: 1.0,
            ..Default::default()
        },
    );
    println!("\ninvalid C233 spec:");
    for msg in bad.validate() {
        println!("  - {msg}");
    }
    Ok(())
}
