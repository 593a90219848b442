//! Appendix identities and residual symmetry groups.
//!
//! A [`SymmetryTransform`] is one element of the group of coordinate changes
//! that keeps a case's normal form `(v₁, v₂, G)` unchanged. The checks here
//! confirm numerically that each element is a point-affine isometry.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linode::{quadratic_roots, ExpBasis};
use crate::models::{dot, CaseTag, ControlAffine, ModelSpec, StateVec};
use crate::pmp::characteristic_roots_case231;

/// Step of the `x¹` stencil in [`schwarzian_x1`].
pub const SCHWARZIAN_STEP: f64 = 1e-3;

/// Step of the central differences in [`pde_residual_a9`].
pub const A9_STEP: f64 = 1e-4;

/// Step of the finite-difference Jacobian in [`isometry_residual`].
pub const ISOMETRY_STEP: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SymmetryTransform {
    /// `x¹ = x̃¹ + a`, `x² = e^{−c₁a}x̃² + b`.
    Case11 { a: f64, b: f64 },
    /// `x¹ = a·x̃¹ + b`, `x² = a·x̃²`.
    Case12 { a: f64, b: f64 },
    /// `x¹ = x̃¹ + a`, `x² = x̃² + φ₀(x̃¹)`, `x³ = x̃³ + φ₀′(x̃¹)`, with `φ₀`
    /// given by its coefficients in the real basis of
    /// `φ₀″ − c₃φ₀′ − c₂φ₀ = 0` (larger root first).
    Case211 { a: f64, phi0: [f64; 2] },
    /// `x¹ = x̃¹ + a`, `x² = b·x̃² + c`, `x³ = b·x̃³`.
    Case212 { a: f64, b: f64, c: f64 },
    /// Linear fractional in `x¹`, prolonged to `x²`, `x³`.
    Case22 { a: f64, b: f64, c: f64, d: f64 },
    /// `x² = x̃² − a`, `x¹ = x̃¹ + Φ₀(x²)`, `x³ = x̃³ + Φ₀′(x²)` with
    /// `Φ₀ = b₁φ₁ + b₂φ₂` over the basis of the C231 characteristic roots.
    Case231 { a: f64, b1: f64, b2: f64 },
}

impl SymmetryTransform {
    pub fn case(&self) -> CaseTag {
        match self {
            SymmetryTransform::Case11 { .. } => CaseTag::C11,
            SymmetryTransform::Case12 { .. } => CaseTag::C12,
            SymmetryTransform::Case211 { .. } => CaseTag::C211,
            SymmetryTransform::Case212 { .. } => CaseTag::C212,
            SymmetryTransform::Case22 { .. } => CaseTag::C22,
            SymmetryTransform::Case231 { .. } => CaseTag::C231,
        }
    }

    pub fn identity(case: CaseTag) -> Result<Self> {
        Ok(match case {
            CaseTag::C11 => SymmetryTransform::Case11 { a: 0.0, b: 0.0 },
            CaseTag::C12 => SymmetryTransform::Case12 { a: 1.0, b: 0.0 },
            CaseTag::C211 => SymmetryTransform::Case211 { a: 0.0, phi0: [0.0; 2] },
            CaseTag::C212 => SymmetryTransform::Case212 { a: 0.0, b: 1.0, c: 0.0 },
            CaseTag::C22 => SymmetryTransform::Case22 {
                a: 1.0,
                b: 0.0,
                c: 0.0,
                d: 1.0,
            },
            CaseTag::C231 => SymmetryTransform::Case231 { a: 0.0, b1: 0.0, b2: 0.0 },
            case => return Err(no_group(case)),
        })
    }

    /// A random element near the identity, small enough that images of the
    /// default sample box stay in the domain.
    pub fn random<R: Rng + ?Sized>(case: CaseTag, rng: &mut R) -> Result<Self> {
        let mut u = |r: f64| rng.gen_range(-r..r);
        Ok(match case {
            CaseTag::C11 => SymmetryTransform::Case11 { a: u(1.0), b: u(1.0) },
            CaseTag::C12 => {
                let a = 0.5 + u(0.4).abs() * 2.0;
                let a = if u(1.0) < 0.0 { -a } else { a };
                SymmetryTransform::Case12 { a, b: u(1.0) }
            }
            CaseTag::C211 => SymmetryTransform::Case211 {
                a: u(1.0),
                phi0: [u(1.0), u(1.0)],
            },
            CaseTag::C212 => {
                let b = 0.5 + u(0.4).abs() * 2.0;
                let b = if u(1.0) < 0.0 { -b } else { b };
                SymmetryTransform::Case212 { a: u(1.0), b, c: u(1.0) }
            }
            CaseTag::C22 => SymmetryTransform::Case22 {
                a: 1.0 + u(0.3),
                b: u(0.3),
                c: u(0.3),
                d: 1.0 + u(0.3),
            },
            CaseTag::C231 => SymmetryTransform::Case231 {
                a: u(1.0),
                b1: u(1.0),
                b2: u(1.0),
            },
            case => return Err(no_group(case)),
        })
    }

    pub fn validate(&self, spec: &ModelSpec) -> Result<()> {
        if spec.case != self.case() {
            return Err(Error::WrongCase {
                case: spec.case,
                what: "symmetry belongs to another case",
            });
        }
        spec.ensure_valid()?;
        let vals: Vec<f64> = match *self {
            SymmetryTransform::Case11 { a, b } | SymmetryTransform::Case12 { a, b } => vec![a, b],
            SymmetryTransform::Case211 { a, phi0 } => vec![a, phi0[0], phi0[1]],
            SymmetryTransform::Case212 { a, b, c } | SymmetryTransform::Case231 { a, b1: b, b2: c } => vec![a, b, c],
            SymmetryTransform::Case22 { a, b, c, d } => vec![a, b, c, d],
        };
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Guard("symmetry parameters must be finite".into()));
        }
        match *self {
            SymmetryTransform::Case12 { a, .. } if a == 0.0 => Err(Error::Guard("a must be nonzero".into())),
            SymmetryTransform::Case212 { b, .. } if b == 0.0 => Err(Error::Guard("b must be nonzero".into())),
            SymmetryTransform::Case22 { a, b, c, d } if a * d - b * c == 0.0 => {
                Err(Error::Guard("ad - bc must be nonzero".into()))
            }
            _ => Ok(()),
        }
    }

    /// `compose(s₁, s₂)` acts as `s₁ ∘ s₂`. Implemented for C11, C12, C22.
    pub fn compose(spec: &ModelSpec, s1: &Self, s2: &Self) -> Result<Self> {
        s1.validate(spec)?;
        s2.validate(spec)?;
        match (*s1, *s2) {
            (SymmetryTransform::Case11 { a: a1, b: b1 }, SymmetryTransform::Case11 { a: a2, b: b2 }) => {
                Ok(SymmetryTransform::Case11 {
                    a: a1 + a2,
                    b: (-spec.params.c1 * a1).exp() * b2 + b1,
                })
            }
            (SymmetryTransform::Case12 { a: a1, b: b1 }, SymmetryTransform::Case12 { a: a2, b: b2 }) => {
                Ok(SymmetryTransform::Case12 {
                    a: a1 * a2,
                    b: a1 * b2 + b1,
                })
            }
            (
                SymmetryTransform::Case22 { a, b, c, d },
                SymmetryTransform::Case22 {
                    a: a2,
                    b: b2,
                    c: c2,
                    d: d2,
                },
            ) => Ok(SymmetryTransform::Case22 {
                a: a * a2 + b * c2,
                b: a * b2 + b * d2,
                c: c * a2 + d * c2,
                d: c * b2 + d * d2,
            }),
            _ => Err(Error::WrongCase {
                case: spec.case,
                what: "composition is implemented for C11, C12 and C22",
            }),
        }
    }
}

fn no_group(case: CaseTag) -> Error {
    Error::WrongCase {
        case,
        what: "no residual symmetry group is implemented",
    }
}

fn phi0_basis(spec: &ModelSpec) -> ExpBasis {
    let [r1, r2] = quadratic_roots(-spec.params.c3, -spec.params.c2);
    ExpBasis::from_roots(&[r1, r2])
}

fn case231_basis(spec: &ModelSpec) -> Result<ExpBasis> {
    let r = characteristic_roots_case231(spec)?;
    Ok(ExpBasis::from_roots(&[r.r1, r.r2]))
}

/// Image of `x̃` under the symmetry.
pub fn apply_symmetry(spec: &ModelSpec, sym: &SymmetryTransform, xt: &[f64]) -> Result<StateVec> {
    sym.validate(spec)?;
    if xt.len() != spec.dim() {
        return Err(Error::Dimension {
            expected: spec.dim(),
            got: xt.len(),
        });
    }
    if !spec.in_domain(xt) {
        return Err(Error::OutOfDomain {
            case: spec.case,
            point: xt.to_vec(),
        });
    }
    let x = match *sym {
        SymmetryTransform::Case11 { a, b } => vec![xt[0] + a, (-spec.params.c1 * a).exp() * xt[1] + b],
        SymmetryTransform::Case12 { a, b } => vec![a * xt[0] + b, a * xt[1]],
        SymmetryTransform::Case211 { a, phi0 } => {
            let basis = phi0_basis(spec);
            vec![
                xt[0] + a,
                xt[1] + basis.value(&phi0, xt[0]),
                xt[2] + basis.derivative(&phi0, 1, xt[0]),
            ]
        }
        SymmetryTransform::Case212 { a, b, c } => vec![xt[0] + a, b * xt[1] + c, b * xt[2]],
        SymmetryTransform::Case22 { a, b, c, d } => {
            let den = c * xt[0] + d;
            if den.abs() < 1e-12 {
                return Err(Error::OutOfDomain {
                    case: spec.case,
                    point: xt.to_vec(),
                });
            }
            let det = a * d - b * c;
            vec![
                (a * xt[0] + b) / den,
                det / (den * den) * xt[1],
                det / (den * den) * xt[2] - 2.0 * c * det / den.powi(3) * xt[1] * xt[1],
            ]
        }
        SymmetryTransform::Case231 { a, b1, b2 } => {
            let basis = case231_basis(spec)?;
            let x2 = xt[1] - a;
            let c = [b1, b2];
            vec![
                xt[0] + basis.value(&c, x2),
                x2,
                xt[2] + basis.derivative(&c, 1, x2),
            ]
        }
    };
    if !spec.in_domain(&x) {
        return Err(Error::OutOfDomain { case: spec.case, point: x });
    }
    Ok(StateVec(x))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsometryResidual {
    pub drift_err: f64,
    pub span_err: f64,
    pub metric_err: f64,
}

impl IsometryResidual {
    pub fn max(&self) -> f64 {
        self.drift_err.max(self.span_err).max(self.metric_err)
    }
}

pub fn isometry_residual(spec: &ModelSpec, sym: &SymmetryTransform, xt: &[f64], h: f64) -> Result<IsometryResidual> {
    sym.validate(spec)?;
    isometry_residual_of_map(spec, |y| apply_symmetry(spec, sym, y), xt, h)
}

/// [`isometry_residual`] for an arbitrary map of the state space to itself.
pub fn isometry_residual_of_map<F>(spec: &ModelSpec, map: F, xt: &[f64], h: f64) -> Result<IsometryResidual>
where
    F: Fn(&[f64]) -> Result<StateVec>,
{
    if !(h > 0.0) {
        return Err(Error::Config("step h must be positive".into()));
    }
    let n = spec.dim();
    if xt.len() != n {
        return Err(Error::Dimension { expected: n, got: xt.len() });
    }
    if !spec.box_in_domain(xt, h) {
        return Err(Error::Stencil { point: xt.to_vec(), h });
    }
    let x = map(xt)?;
    if !spec.in_domain(&x) {
        return Err(Error::OutOfDomain { case: spec.case, point: x.0 });
    }
    // columns of Dφ by central differences
    let mut jac = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut yp = xt.to_vec();
        let mut ym = xt.to_vec();
        yp[j] += h;
        ym[j] -= h;
        let (fp, fm) = (map(&yp)?, map(&ym)?);
        for i in 0..n {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    let push = |v: &[f64]| -> Vec<f64> { jac.iter().map(|row| dot(row, v)).collect() };

    let v1t = spec.drift(xt)?;
    let v2t = spec.control_field(xt)?;
    let v1 = spec.drift(&x)?;
    let v2 = spec.control_field(&x)?;

    let pv1 = push(&v1t);
    let drift_err = norm(&sub(&pv1, &v1));

    let pv2 = push(&v2t);
    let vv = dot(&v2, &v2);
    let along = dot(&pv2, &v2) / vv;
    let orth: Vec<f64> = pv2.iter().zip(v2.iter()).map(|(w, v)| w - along * v).collect();
    let span_err = norm(&orth) / norm(&pv2);

    let w: Vec<f64> = pv1.iter().zip(pv2.iter()).zip(v1.iter()).map(|((a, b), c)| a + b - c).collect();
    let u_image = dot(&w, &v2) / vv;
    let metric_err = (spec.cost(xt, 1.0)? - spec.cost(&x, u_image)?).abs();

    Ok(IsometryResidual {
        drift_err,
        span_err,
        metric_err,
    })
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn require_case23(spec: &ModelSpec) -> Result<()> {
    match spec.case {
        CaseTag::C231 | CaseTag::C232 | CaseTag::C233 => spec.ensure_valid(),
        case => Err(Error::WrongCase {
            case,
            what: "appendix identities concern the C23x family",
        }),
    }
}

/// `|LHS + 2·expected_c2|` for the identity
/// `(H₁₂ + x³H₁₁ + H·H₁₃ − 2H₁H₃) / (H₁·√(εH₁)) = −2c₂`,
/// subscripts denoting partials in `x¹, x², x³`, all taken by central
/// differences of `H` with step `h`.
pub fn pde_residual_a9(spec: &ModelSpec, x: &[f64], expected_c2: f64, h: f64) -> Result<f64> {
    require_case23(spec)?;
    if !(h > 0.0) {
        return Err(Error::Config("step h must be positive".into()));
    }
    if !spec.box_in_domain(x, h) {
        return Err(Error::Stencil { point: x.to_vec(), h });
    }
    let f = |d: [f64; 3]| -> Result<f64> {
        let y = [x[0] + d[0] * h, x[1] + d[1] * h, x[2] + d[2] * h];
        spec.case23_h(&y)
    };
    let hh = f([0.0; 3])?;
    let d1 = |i: usize| -> Result<f64> {
        let mut e = [0.0; 3];
        e[i] = 1.0;
        let mut m = [0.0; 3];
        m[i] = -1.0;
        Ok((f(e)? - f(m)?) / (2.0 * h))
    };
    let d2 = |i: usize, j: usize| -> Result<f64> {
        if i == j {
            let mut e = [0.0; 3];
            e[i] = 1.0;
            let mut m = [0.0; 3];
            m[i] = -1.0;
            return Ok((f(e)? - 2.0 * hh + f(m)?) / (h * h));
        }
        let at = |si: f64, sj: f64| {
            let mut e = [0.0; 3];
            e[i] = si;
            e[j] = sj;
            f(e)
        };
        Ok((at(1.0, 1.0)? - at(1.0, -1.0)? - at(-1.0, 1.0)? + at(-1.0, -1.0)?) / (4.0 * h * h))
    };
    let h1 = d1(0)?;
    let h3 = d1(2)?;
    let eps = spec.params.epsilon;
    if eps * h1 <= 0.0 {
        return Err(Error::Sign(format!("eps * H_x1 = {} is not positive", eps * h1)));
    }
    let num = d2(0, 1)? + x[2] * d2(0, 0)? + hh * d2(0, 2)? - 2.0 * h1 * h3;
    let lhs = num / (h1 * (eps * h1).sqrt());
    Ok((lhs + 2.0 * expected_c2).abs())
}

/// The `c₂` that [`pde_residual_a9`] should find for the spec: `ε·c₂` for
/// C231, zero for C232 and C233.
pub fn expected_c2_a9(spec: &ModelSpec) -> Result<f64> {
    require_case23(spec)?;
    Ok(match spec.case {
        CaseTag::C231 => spec.params.epsilon * spec.params.c2,
        _ => 0.0,
    })
}

/// `¾(H₁₁/H₁)² − ½·H₁₁₁/H₁` in `x¹`, five-point stencils with step `h`.
pub fn schwarzian_x1(spec: &ModelSpec, x: &[f64], h: f64) -> Result<f64> {
    require_case23(spec)?;
    if !(h > 0.0) {
        return Err(Error::Config("step h must be positive".into()));
    }
    if !spec.box_in_domain(x, 2.0 * h) {
        return Err(Error::Stencil { point: x.to_vec(), h });
    }
    let f = |k: f64| spec.case23_h(&[x[0] + k * h, x[1], x[2]]);
    let (m2, m1, z, p1, p2) = (f(-2.0)?, f(-1.0)?, f(0.0)?, f(1.0)?, f(2.0)?);
    let h1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let h11 = (-m2 + 16.0 * m1 - 30.0 * z + 16.0 * p1 - p2) / (12.0 * h * h);
    let h111 = (-m2 + 2.0 * m1 - 2.0 * p1 + p2) / (2.0 * h.powi(3));
    if h1.abs() < 1e-12 {
        return Err(Error::Sign("H_x1 vanishes".into()));
    }
    let r = h11 / h1;
    Ok(0.75 * r * r - 0.5 * h111 / h1)
}

/// Value [`schwarzian_x1`] takes on the spec: `0`, `−c₃²`, `+c₃²`.
pub fn expected_schwarzian(spec: &ModelSpec) -> Result<f64> {
    require_case23(spec)?;
    let c3 = spec.params.c3;
    Ok(match spec.case {
        CaseTag::C231 => 0.0,
        CaseTag::C232 => -c3 * c3,
        _ => c3 * c3,
    })
}

/// Roots of `r² − ε·c·r − ε = 0` and the larger of their two residuals.
pub fn a19_roots(epsilon: f64, c: f64) -> ([Complex64; 2], f64) {
    let roots = quadratic_roots(-epsilon * c, -epsilon);
    let res = roots
        .iter()
        .map(|r| (r * r - epsilon * c * r - epsilon).norm())
        .fold(0.0, f64::max);
    (roots, res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Params;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const GROUP_CASES: [CaseTag; 6] = [
        CaseTag::C11,
        CaseTag::C12,
        CaseTag::C211,
        CaseTag::C212,
        CaseTag::C22,
        CaseTag::C231,
    ];

    #[test]
    fn identity_elements_fix_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for case in GROUP_CASES {
            let spec = ModelSpec::default_for(case);
            let id = SymmetryTransform::identity(case).unwrap();
            let x = spec.sample_point(&mut rng).unwrap();
            assert_eq!(apply_symmetry(&spec, &id, &x).unwrap(), x);
            let r = isometry_residual(&spec, &id, &x, ISOMETRY_STEP).unwrap();
            assert!(r.max() < 1e-9, "{case}: {r:?}");
        }
        assert!(SymmetryTransform::identity(CaseTag::C232).is_err());
    }

    #[test]
    fn case12_scaling_example() {
        let spec = ModelSpec::default_for(CaseTag::C12);
        let s = SymmetryTransform::Case12 { a: 2.0, b: 0.0 };
        assert_eq!(apply_symmetry(&spec, &s, &[0.5, 1.5]).unwrap().0, vec![1.0, 3.0]);
    }

    #[test]
    fn random_elements_are_isometries() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for case in GROUP_CASES {
            let spec = ModelSpec::default_for(case);
            for _ in 0..5 {
                let s = SymmetryTransform::random(case, &mut rng).unwrap();
                for x in spec.sample_points(10, &mut rng).unwrap() {
                    let r = isometry_residual(&spec, &s, &x, ISOMETRY_STEP).unwrap();
                    assert!(r.max() < 1e-6, "{case} {s:?} at {x:?}: {r:?}");
                }
            }
        }
    }

    #[test]
    fn complex_root_groups_are_isometries() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c211 = ModelSpec::new(
            CaseTag::C211,
            Params {
                c2: -2.0,
                c3: 0.5,
                ..Default::default()
            },
        );
        let c231 = ModelSpec::new(
            CaseTag::C231,
            Params {
                c1: 0.5,
                c2: 0.5,
                epsilon: -1.0,
                ..Default::default()
            },
        );
        assert!(!characteristic_roots_case231(&c231).unwrap().is_real());
        for spec in [c211, c231] {
            let s = SymmetryTransform::random(spec.case, &mut rng).unwrap();
            for x in spec.sample_points(10, &mut rng).unwrap() {
                assert!(isometry_residual(&spec, &s, &x, ISOMETRY_STEP).unwrap().max() < 1e-6);
            }
        }
    }

    #[test]
    fn non_member_scaling_breaks_the_metric() {
        let spec = ModelSpec::new(
            CaseTag::C11,
            Params {
                c1: 1.0,
                ..Default::default()
            },
        );
        let r = isometry_residual_of_map(&spec, |y| Ok(StateVec(vec![y[0], 2.0 * y[1]])), &[0.3, -0.2], 1e-5).unwrap();
        assert!(r.drift_err < 1e-9 && r.span_err < 1e-9);
        assert!(r.metric_err > 0.1, "{r:?}");
    }

    #[test]
    fn isometry_residual_is_second_order() {
        // an x¹-dependent map that is not an isometry, so the FD error shows
        let spec = ModelSpec::default_for(CaseTag::C11);
        let map = |y: &[f64]| Ok(StateVec(vec![y[0], y[1] + y[0].sin()]));
        let exact_drift = 0.4f64.cos();
        let e = |h: f64| (isometry_residual_of_map(&spec, map, &[0.4, 0.1], h).unwrap().drift_err - exact_drift).abs();
        let ratio = e(1e-2) / e(5e-3);
        assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn guards_and_domain() {
        let c22 = ModelSpec::default_for(CaseTag::C22);
        let bad = SymmetryTransform::Case22 {
            a: 1.0,
            b: 2.0,
            c: 1.0,
            d: 2.0,
        };
        assert!(matches!(apply_symmetry(&c22, &bad, &[0.0, 1.0, 0.0]), Err(Error::Guard(_))));
        let pole = SymmetryTransform::Case22 {
            a: 0.0,
            b: 1.0,
            c: 1.0,
            d: 0.0,
        };
        assert!(matches!(apply_symmetry(&c22, &pole, &[0.0, 1.0, 0.0]), Err(Error::OutOfDomain { .. })));
        let c12 = ModelSpec::default_for(CaseTag::C12);
        assert!(apply_symmetry(&c12, &SymmetryTransform::Case12 { a: 0.0, b: 0.0 }, &[0.0, 1.0]).is_err());
        assert!(apply_symmetry(&c12, &SymmetryTransform::Case11 { a: 0.0, b: 0.0 }, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn c22_identity_lft() {
        let spec = ModelSpec::default_for(CaseTag::C22);
        let id = SymmetryTransform::Case22 {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
        };
        let x = [0.3, 1.2, -0.4];
        assert_eq!(apply_symmetry(&spec, &id, &x).unwrap().0, x.to_vec());
    }

    proptest! {
        #[test]
        fn composition_matches_sequential_application(seed in any::<u64>(), which in 0usize..3) {
            let case = [CaseTag::C11, CaseTag::C12, CaseTag::C22][which];
            let spec = ModelSpec::default_for(case);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s1 = SymmetryTransform::random(case, &mut rng).unwrap();
            let s2 = SymmetryTransform::random(case, &mut rng).unwrap();
            let x = spec.sample_point(&mut rng).unwrap();
            let seq = apply_symmetry(&spec, &s1, &apply_symmetry(&spec, &s2, &x).unwrap());
            let comp = apply_symmetry(&spec, &SymmetryTransform::compose(&spec, &s1, &s2).unwrap(), &x);
            match (seq, comp) {
                (Ok(a), Ok(b)) => {
                    for i in 0..a.dim() {
                        prop_assert!((a[i] - b[i]).abs() < 1e-9 * (1.0 + a[i].abs()));
                    }
                }
                // an LFT pole between the two steps
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn a9_examples() {
        let mut p = Params {
            c1: 0.5,
            ..Default::default()
        };
        let s0 = ModelSpec::new(CaseTag::C231, p.clone());
        assert!(pde_residual_a9(&s0, &[0.2, 0.1, 0.3], 0.0, A9_STEP).unwrap() < 1e-9);
        p.c2 = 3.0;
        let s3 = ModelSpec::new(CaseTag::C231, p);
        assert!(pde_residual_a9(&s3, &[0.2, 0.1, 0.3], 3.0, A9_STEP).unwrap() < 1e-6);
        assert!(pde_residual_a9(&s3, &[0.2, 0.1, 0.3], 0.0, A9_STEP).unwrap() > 5.0);
    }

    #[test]
    fn a9_holds_across_the_family() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let specs = [
            ModelSpec::default_for(CaseTag::C231),
            ModelSpec::new(
                CaseTag::C231,
                Params {
                    c1: 0.5,
                    c2: 1.5,
                    epsilon: -1.0,
                    ..Default::default()
                },
            ),
            ModelSpec::default_for(CaseTag::C232).with_f20(vec![0.3, -0.5, 0.2]),
            ModelSpec::default_for(CaseTag::C233).with_f20(vec![1.0, 1.0]),
        ];
        for spec in specs {
            let c2 = expected_c2_a9(&spec).unwrap();
            for x in spec.sample_points(10, &mut rng).unwrap() {
                let r = pde_residual_a9(&spec, &x, c2, A9_STEP).unwrap();
                assert!(r < 1e-5, "{} at {x:?}: {r}", spec.case);
            }
        }
    }

    #[test]
    fn a9_rejects_other_cases() {
        assert!(pde_residual_a9(&ModelSpec::default_for(CaseTag::C22), &[0.0, 1.0, 0.0], 0.0, A9_STEP).is_err());
    }

    #[test]
    fn schwarzian_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for case in [CaseTag::C231, CaseTag::C232, CaseTag::C233] {
            let spec = ModelSpec::default_for(case).with_f20(vec![0.4]);
            let want = expected_schwarzian(&spec).unwrap();
            for x in spec.sample_points(10, &mut rng).unwrap() {
                let s = schwarzian_x1(&spec, &x, SCHWARZIAN_STEP).unwrap();
                assert!((s - want).abs() < 1e-4, "{case} at {x:?}: {s} vs {want}");
            }
        }
    }

    #[test]
    fn a19_unit_roots() {
        let (r, res) = a19_roots(1.0, 0.0);
        assert_eq!((r[0].re, r[1].re), (1.0, -1.0));
        assert!(res < 1e-12);
        let (r, res) = a19_roots(-1.0, 0.5);
        assert!(r[0].im != 0.0);
        assert!(res < 1e-12);
        assert_abs_diff_eq!((r[0] * r[1]).re, 1.0, epsilon = 1e-12);
    }
}
