use pag::closedform::family_from_phase_point;
use pag::integrate::{integrate, max_integral_drift, IntegratorConfig, StopReason};
use pag::pmp::{first_integrals, hamiltonian, PhasePoint};
use pag::verify::{apply_symmetry, SymmetryTransform};
use pag::{CaseTag, ControlAffine, ModelSpec, Params};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c12(j0: f64, g0: f64) -> ModelSpec {
    ModelSpec::new(CaseTag::C12, Params { j0, g0, ..Default::default() })
}

#[test]
fn symmetry_images_of_flows_are_admissible() {
    // ẋ − v₁ must stay parallel to v₂ after the push-forward
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for case in [CaseTag::C11, CaseTag::C12, CaseTag::C211, CaseTag::C212, CaseTag::C22, CaseTag::C231] {
        let spec = ModelSpec::default_for(case);
        let start = pag::pmp::default_phase_point(case);
        let traj = integrate(&spec, &start, (0.0, 1.0), &IntegratorConfig::rk4(1e-3)).unwrap();
        let g = SymmetryTransform::random(case, &mut rng).unwrap();
        let img: Vec<_> = traj.states.iter().map(|x| apply_symmetry(&spec, &g, x).unwrap()).collect();
        let dt = 1e-3;
        let mut worst: f64 = 0.0;
        for i in 1..img.len() - 1 {
            let xdot: Vec<f64> = (0..spec.dim()).map(|k| (img[i + 1][k] - img[i - 1][k]) / (2.0 * dt)).collect();
            let v1 = spec.drift(&img[i]).unwrap();
            let v2 = spec.control_field(&img[i]).unwrap();
            let w: Vec<f64> = xdot.iter().zip(v1.iter()).map(|(a, b)| a - b).collect();
            let vv: f64 = v2.iter().map(|c| c * c).sum();
            let a: f64 = w.iter().zip(v2.iter()).map(|(p, q)| p * q).sum::<f64>() / vv;
            let orth = w.iter().zip(v2.iter()).map(|(p, q)| (p - a * q).powi(2)).sum::<f64>().sqrt();
            worst = worst.max(orth);
        }
        assert!(worst < 1e-5, "{case}: {worst}");
    }
}

#[test]
fn rk4_and_rk45_agree() {
    for case in CaseTag::ALL {
        let spec = ModelSpec::default_for(case);
        let start = pag::pmp::default_phase_point(case);
        let a = integrate(&spec, &start, (0.0, 1.0), &IntegratorConfig::rk4(1e-3)).unwrap();
        let b = integrate(&spec, &start, (0.0, 1.0), &IntegratorConfig::rk45(1e-11)).unwrap();
        let (xa, xb) = (a.last_point(), b.last_point());
        for i in 0..spec.dim() {
            assert!((xa.x[i] - xb.x[i]).abs() < 1e-9, "{case}");
            assert!((xa.p[i] - xb.p[i]).abs() < 1e-9, "{case}");
        }
    }
}

#[test]
fn c22_flow_keeps_reduced_momenta() {
    let spec = ModelSpec::default_for(CaseTag::C22);
    let start = pag::pmp::default_phase_point(CaseTag::C22);
    let k = first_integrals(&spec, &start).unwrap();
    let traj = integrate(&spec, &start, (0.0, 3.0), &IntegratorConfig::default()).unwrap();
    assert_eq!(traj.stop_reason, StopReason::Horizon);
    for i in (0..traj.len()).step_by(7) {
        let x = &traj.states[i];
        let p = pag::pmp::reduce_momenta_case22(x, k.get("I1").unwrap(), k.get("I2").unwrap(), k.get("I3").unwrap())
            .unwrap();
        for j in 0..3 {
            assert!((p[j] - traj.costates[i][j]).abs() < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn c12_closed_form_tracks_the_flow(
        p1 in -1.0f64..1.0, p2 in -1.0f64..1.0, x2 in 0.5f64..1.5, j0 in -0.5f64..0.5,
    ) {
        let spec = c12(j0, 1.5);
        let start = PhasePoint::new([0.0, x2], vec![p1, p2]).unwrap();
        let fam = match family_from_phase_point(&spec, &start) {
            Ok(f) => f,
            Err(_) => return Ok(()),
        };
        let traj = integrate(&spec, &start, (0.0, 0.5), &IntegratorConfig::default()).unwrap();
        prop_assume!(traj.stop_reason == StopReason::Horizon);
        for (t, x) in traj.times.iter().zip(&traj.states) {
            let y = match fam.eval(&spec, *t) {
                Ok(y) => y,
                Err(_) => return Ok(()),
            };
            let scale = 1.0 + x[0].abs().max(x[1].abs());
            prop_assert!((x[0] - y[0]).abs() < 1e-6 * scale);
            prop_assert!((x[1] - y[1]).abs() < 1e-6 * scale);
        }
    }

    #[test]
    fn hamiltonian_is_conserved(seed in any::<u64>(), which in 0usize..8) {
        let case = CaseTag::ALL[which];
        let spec = ModelSpec::default_for(case);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = spec.sample_point(&mut rng).unwrap();
        let p: Vec<f64> = (0..spec.dim()).map(|i| 0.1 * (i as f64 + 1.0) - 0.15).collect();
        let start = PhasePoint::new(x, p).unwrap();
        let traj = integrate(&spec, &start, (0.0, 0.5), &IntegratorConfig::default()).unwrap();
        if traj.stop_reason == StopReason::Horizon {
            prop_assert!(max_integral_drift(&traj) < 1e-7);
            let h0 = hamiltonian(&spec, &start).unwrap();
            let h1 = hamiltonian(&spec, &traj.last_point()).unwrap();
            prop_assert!((h0 - h1).abs() < 1e-7 * (1.0 + h0.abs()));
        }
    }
}
