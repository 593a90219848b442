//! Explicit optimal trajectories.
//!
//! Cases C11, C12, C211 and C212 integrate in closed form. Each family is a
//! curve `t ↦ x(t)` parametrized by integration constants; the model
//! constants (`c₁` of C11, `j₀, g₀` of C12, `c₂, c₃` of C211, `c₁, c₃` of
//! C212) come from the [`ModelSpec`] it is evaluated against.
//!
//! [`reduced_ode_residual`] differentiates a family numerically in `t` and
//! plugs it into the reduced first-order system it is supposed to solve.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linode::{quadratic_roots, ExpBasis};
use crate::models::{CaseTag, ModelSpec, StateVec};
use crate::pmp::PhasePoint;

/// Samples closer than this (in `t`) to a pole are rejected.
pub const POLE_GUARD: f64 = 1e-6;

/// Step of the central differences in [`reduced_ode_residual`].
pub const RESIDUAL_DT: f64 = 1e-5;

/// Step of the higher-order stencils used for the C211 operator.
pub const C211_STENCIL_STEP: f64 = 0.02;

/// Closed-form families of C12. `c₁` is the conserved `p₁`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Case12Family {
    /// `c₁ = 0` and `ẋ² = 0`: `(c₃t + c₄, c₃)`.
    #[serde(rename = "c1zero_c2zero")]
    Line { c3: f64, c4: f64 },
    /// `c₁ = 0`, `ẋ² = rate·x²`: `x² = c₃e^{rate·t}`.
    #[serde(rename = "c1zero_c2nonzero")]
    Exponential { rate: f64, c3: f64, c4: f64 },
    KZero { c1: f64, c3: f64, c4: f64 },
    KPos { c1: f64, k: f64, c3: f64, c4: f64 },
    KNeg { c1: f64, k: f64, c3: f64, c4: f64 },
}

/// Closed-form families of C212.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Case212Family {
    ConstSlope {
        a: f64,
        b: f64,
        #[serde(default)]
        t0: f64,
    },
    Exp {
        ctilde: f64,
        a: f64,
        b: f64,
        #[serde(default)]
        t0: f64,
    },
    #[serde(rename = "tan_family")]
    Tan {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        #[serde(default)]
        t0: f64,
    },
    #[serde(rename = "tanh_family")]
    Tanh {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        #[serde(default)]
        t0: f64,
    },
    #[serde(rename = "rational_family")]
    Rational {
        a: f64,
        b: f64,
        c: f64,
        #[serde(default)]
        t0: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ClosedFormFamily {
    /// `x(t) = γ(t + t₀)` with `γ` from [`case11_trajectory`].
    Case11 {
        c2: f64,
        c3: f64,
        #[serde(default)]
        t0: f64,
    },
    Case12(Case12Family),
    /// Coefficients in the real basis of [`case211_basis`].
    Case211 {
        coeffs: [f64; 4],
        #[serde(default)]
        t0: f64,
    },
    Case212(Case212Family),
}

impl ClosedFormFamily {
    pub fn case(&self) -> CaseTag {
        match self {
            ClosedFormFamily::Case11 { .. } => CaseTag::C11,
            ClosedFormFamily::Case12(_) => CaseTag::C12,
            ClosedFormFamily::Case211 { .. } => CaseTag::C211,
            ClosedFormFamily::Case212(_) => CaseTag::C212,
        }
    }

    pub fn subcase(&self) -> &'static str {
        match self {
            ClosedFormFamily::Case11 { .. } => "case11",
            ClosedFormFamily::Case12(f) => match f {
                Case12Family::Line { .. } => "c1zero_c2zero",
                Case12Family::Exponential { .. } => "c1zero_c2nonzero",
                Case12Family::KZero { .. } => "k_zero",
                Case12Family::KPos { .. } => "k_pos",
                Case12Family::KNeg { .. } => "k_neg",
            },
            ClosedFormFamily::Case211 { .. } => "case211",
            ClosedFormFamily::Case212(f) => match f {
                Case212Family::ConstSlope { .. } => "const_slope",
                Case212Family::Exp { .. } => "exp",
                Case212Family::Tan { .. } => "tan_family",
                Case212Family::Tanh { .. } => "tanh_family",
                Case212Family::Rational { .. } => "rational_family",
            },
        }
    }

    fn check_case(&self, spec: &ModelSpec) -> Result<()> {
        if spec.case != self.case() {
            return Err(Error::WrongCase {
                case: spec.case,
                what: "closed-form family belongs to another case",
            });
        }
        spec.ensure_valid()
    }

    /// State at time `t`.
    pub fn eval(&self, spec: &ModelSpec, t: f64) -> Result<StateVec> {
        self.check_case(spec)?;
        let p = &spec.params;
        match self {
            ClosedFormFamily::Case11 { c2, c3, t0 } => Ok(case11_trajectory(p.c1, *c2, *c3, t + t0)),
            ClosedFormFamily::Case12(f) => case12_trajectory(p.j0, p.g0, f, t),
            ClosedFormFamily::Case211 { coeffs, t0 } => Ok(case211_trajectory(p.c2, p.c3, coeffs, *t0, t)),
            ClosedFormFamily::Case212(f) => case212_trajectory(f, t),
        }
    }
}

/// First pole of the family in `[a, b]`, if any.
pub fn first_pole(family: &ClosedFormFamily, spec: &ModelSpec, a: f64, b: f64) -> Result<Option<f64>> {
    family.check_case(spec)?;
    // first t >= a with σ·t + φ = π/2 (mod π)
    let periodic = |sigma: f64, phase: f64| -> Option<f64> {
        if sigma == 0.0 {
            return None;
        }
        let n = ((sigma * a + phase - FRAC_PI_2) / PI).ceil();
        let n = if sigma > 0.0 { n } else { ((sigma * a + phase - FRAC_PI_2) / PI).floor() };
        Some((FRAC_PI_2 + n * PI - phase) / sigma)
    };
    let g0 = spec.params.g0;
    let t = match *family {
        ClosedFormFamily::Case12(Case12Family::KZero { c3, .. }) => Some(-c3),
        ClosedFormFamily::Case12(Case12Family::KNeg { k, c3, .. }) if k < 0.0 => {
            let sigma = (-k).sqrt() / (2.0 * g0);
            periodic(sigma, sigma * c3)
        }
        ClosedFormFamily::Case212(Case212Family::Tan { b: bb, c, .. }) => periodic(bb, c),
        ClosedFormFamily::Case212(Case212Family::Rational { a: aa, b: bb, .. }) if aa != 0.0 => Some(-bb / aa),
        _ => None,
    };
    Ok(t.filter(|&t| t >= a - POLE_GUARD && t <= b + POLE_GUARD))
}

/// `(t, c₂t + c₃)` for `c₁ = 0`, else `(t, −c₂/(2c₁)·e^{−2c₁t} + c₃)`.
pub fn case11_trajectory(c1: f64, c2: f64, c3: f64, t: f64) -> StateVec {
    let x2 = if c1 == 0.0 {
        c2 * t + c3
    } else {
        -c2 / (2.0 * c1) * (-2.0 * c1 * t).exp() + c3
    };
    StateVec(vec![t, x2])
}

fn guard(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Guard(msg.to_string()))
    }
}

/// `t` is within [`POLE_GUARD`] of a zero of `cos(σ·t + φ)`.
fn near_cos_zero(sigma: f64, phase: f64, t: f64) -> bool {
    let theta = sigma * t + phase - FRAC_PI_2;
    let n = (theta / PI).round();
    (theta - n * PI).abs() < POLE_GUARD * sigma.abs()
}

pub fn case12_trajectory(j0: f64, g0: f64, fam: &Case12Family, t: f64) -> Result<StateVec> {
    guard(g0 > 0.0, "g0 must be positive")?;
    let (x1, x2) = match *fam {
        Case12Family::Line { c3, c4 } => (c3 * t + c4, c3),
        Case12Family::Exponential { rate, c3, c4 } => {
            guard(rate != 0.0, "rate must be nonzero")?;
            let e = (rate * t).exp();
            (c3 / rate * e + c4, c3 * e)
        }
        Case12Family::KZero { c1, c3, c4 } => {
            guard(c1 != 0.0, "c1 must be nonzero")?;
            let tau = t + c3;
            if tau.abs() < POLE_GUARD {
                return Err(Error::Pole { t });
            }
            (
                g0 * (2.0 + j0 * tau) / (c1 * tau) + c4,
                -2.0 * g0 / (c1 * tau * tau),
            )
        }
        Case12Family::KPos { c1, k, c3, c4 } => {
            guard(c1 != 0.0, "c1 must be nonzero")?;
            guard(k > 0.0, "k must be positive")?;
            let rk = k.sqrt();
            let th = (rk / (2.0 * g0) * (t + c3)).tanh();
            ((rk * th + j0 * g0) / c1 + c4, k / (2.0 * c1 * g0) * (1.0 - th * th))
        }
        Case12Family::KNeg { c1, k, c3, c4 } => {
            guard(c1 != 0.0, "c1 must be nonzero")?;
            guard(k < 0.0, "k must be negative")?;
            let rk = (-k).sqrt();
            let sigma = rk / (2.0 * g0);
            if near_cos_zero(sigma, sigma * c3, t) {
                return Err(Error::Pole { t });
            }
            let arg = sigma * (t + c3);
            let sec2 = 1.0 / arg.cos().powi(2);
            (-(rk * arg.tan() - j0 * g0) / c1 + c4, k / (2.0 * c1 * g0) * sec2)
        }
    };
    Ok(StateVec(vec![x1, x2]))
}

/// `x² + [(c₁x¹ − (j₀g₀ + c₁c₄))² − k] / (2c₁g₀)`: zero on the parabola
/// traced by the `k` families of C12.
pub fn case12_parabola_residual(j0: f64, g0: f64, fam: &Case12Family, x: &[f64]) -> Result<f64> {
    let (c1, k, c4) = match *fam {
        Case12Family::KZero { c1, c4, .. } => (c1, 0.0, c4),
        Case12Family::KPos { c1, k, c4, .. } | Case12Family::KNeg { c1, k, c4, .. } => (c1, k, c4),
        _ => return Err(Error::Guard("parabola identity needs a k family".into())),
    };
    let w = c1 * x[0] - (j0 * g0 + c1 * c4);
    Ok(x[1] + (w * w - k) / (2.0 * c1 * g0))
}

/// Real solution basis of `(D² + c₃D − c₂)(D² − c₃D − c₂)y = 0`.
pub fn case211_basis(c2: f64, c3: f64) -> ExpBasis {
    let [a, b] = quadratic_roots(c3, -c2);
    let [c, d] = quadratic_roots(-c3, -c2);
    ExpBasis::from_roots(&[a, b, c, d])
}

/// `x¹ = t + t₀`, `x² = Σ coeffs·φₖ(t)`, `x³ = ẋ²`.
pub fn case211_trajectory(c2: f64, c3: f64, coeffs: &[f64; 4], t0: f64, t: f64) -> StateVec {
    let basis = case211_basis(c2, c3);
    StateVec(vec![t + t0, basis.value(coeffs, t), basis.derivative(coeffs, 1, t)])
}

pub fn case212_trajectory(fam: &Case212Family, t: f64) -> Result<StateVec> {
    let (t0, x2, x3) = match *fam {
        Case212Family::ConstSlope { a, b, t0 } => (t0, a * t + b, a),
        Case212Family::Exp { ctilde, a, b, t0 } => {
            guard(ctilde != 0.0, "ctilde must be nonzero")?;
            let e = (ctilde * t).exp();
            (t0, a / ctilde * e + b, a * e)
        }
        Case212Family::Tan { a, b, c, d, t0 } => {
            guard(b != 0.0, "b must be nonzero")?;
            if near_cos_zero(b, c, t) {
                return Err(Error::Pole { t });
            }
            let arg = b * t + c;
            (t0, a * arg.tan() + d, a * b / arg.cos().powi(2))
        }
        Case212Family::Tanh { a, b, c, d, t0 } => {
            let th = (b * t + c).tanh();
            (t0, a * th + d, a * b * (1.0 - th * th))
        }
        Case212Family::Rational { a, b, c, t0 } => {
            let s = a * t + b;
            if s.abs() < POLE_GUARD * a.abs().max(f64::MIN_POSITIVE) || s == 0.0 {
                return Err(Error::Pole { t });
            }
            (t0, 1.0 / s + c, -a / (s * s))
        }
    };
    Ok(StateVec(vec![t + t0, x2, x3]))
}

/// `(c₂, c₄, z-offset)` of a C212 Riccati family: on the curve,
/// `z = −c₂·(x² − offset) − c₃/c₁²` solves `ż = ½c₁²z² + c₃z + c₄`.
fn case212_riccati_constants(c1: f64, c3: f64, fam: &Case212Family) -> Result<Option<(f64, f64, f64)>> {
    let q = c1 * c1;
    let base = c3 * c3 / (2.0 * q);
    Ok(match *fam {
        Case212Family::Tan { a, b, d, .. } => {
            guard(a != 0.0 && b != 0.0, "a and b must be nonzero")?;
            Some((-2.0 * b / (q * a), base + 2.0 * b * b / q, d))
        }
        Case212Family::Tanh { a, b, d, .. } => {
            guard(a != 0.0 && b != 0.0, "a and b must be nonzero")?;
            Some((2.0 * b / (q * a), base - 2.0 * b * b / q, d))
        }
        Case212Family::Rational { a, c, .. } => {
            guard(a != 0.0, "a must be nonzero")?;
            Some((2.0 * a / q, base, c))
        }
        _ => None,
    })
}

/// Maximum residual of the family's reduced ODE at the sample times.
pub fn reduced_ode_residual(spec: &ModelSpec, family: &ClosedFormFamily, times: &[f64]) -> Result<f64> {
    reduced_ode_residual_of_curve(spec, family, |t| family.eval(spec, t), times)
}

/// As [`reduced_ode_residual`], but evaluates `curve` against the reduced ODE
/// whose constants come from `family`. Lets a perturbed curve be tested
/// against the unperturbed equations.
pub fn reduced_ode_residual_of_curve<F>(spec: &ModelSpec, family: &ClosedFormFamily, curve: F, times: &[f64]) -> Result<f64>
where
    F: Fn(f64) -> Result<StateVec>,
{
    family.check_case(spec)?;
    let p = &spec.params;
    let dt = RESIDUAL_DT;
    let deriv = |t: f64| -> Result<(StateVec, Vec<f64>)> {
        let x = curve(t)?;
        let xp = curve(t + dt)?;
        let xm = curve(t - dt)?;
        let d = xp.iter().zip(xm.iter()).map(|(a, b)| (a - b) / (2.0 * dt)).collect();
        Ok((x, d))
    };
    let mut worst: f64 = 0.0;
    for &t in times {
        let res: Vec<f64> = match family {
            ClosedFormFamily::Case11 { c2, .. } => {
                let (x, d) = deriv(t)?;
                vec![d[0] - 1.0, d[1] - c2 * (-2.0 * p.c1 * x[0]).exp()]
            }
            ClosedFormFamily::Case12(f) => {
                let (x, d) = deriv(t)?;
                let (j0, g0) = (p.j0, p.g0);
                match *f {
                    Case12Family::Line { .. } => vec![d[0] - x[1], d[1]],
                    Case12Family::Exponential { rate, .. } => vec![d[0] - x[1], d[1] - rate * x[1]],
                    Case12Family::KZero { c1, c4, .. }
                    | Case12Family::KPos { c1, c4, .. }
                    | Case12Family::KNeg { c1, c4, .. } => {
                        let k = match *f {
                            Case12Family::KPos { k, .. } | Case12Family::KNeg { k, .. } => k,
                            _ => 0.0,
                        };
                        let c2 = (j0 * j0 * g0 * g0 - k) / (2.0 * g0);
                        // P = p₂x², recovered from x¹
                        let pp = -c1 * (x[0] - c4);
                        vec![
                            d[0] - x[1],
                            d[1] - x[1] * (j0 + pp / g0),
                            -c1 * x[1] - (j0 * pp + pp * pp / (2.0 * g0) + c2),
                        ]
                    }
                }
            }
            ClosedFormFamily::Case211 { .. } => {
                let (x, d) = deriv(t)?;
                let h = C211_STENCIL_STEP;
                let y = |k: i32| curve(t + k as f64 * h).map(|s| s[1]);
                let ys = [y(-3)?, y(-2)?, y(-1)?, y(0)?, y(1)?, y(2)?, y(3)?];
                let d2 = (-ys[1] + 16.0 * ys[2] - 30.0 * ys[3] + 16.0 * ys[4] - ys[5]) / (12.0 * h * h);
                let d4 = (-ys[0] + 12.0 * ys[1] - 39.0 * ys[2] + 56.0 * ys[3] - 39.0 * ys[4] + 12.0 * ys[5]
                    - ys[6])
                    / (6.0 * h.powi(4));
                let op = d4 - (2.0 * p.c2 + p.c3 * p.c3) * d2 + p.c2 * p.c2 * ys[3];
                vec![d[0] - 1.0, d[1] - x[2], op]
            }
            ClosedFormFamily::Case212(f) => {
                let (x, d) = deriv(t)?;
                let (c1, c3) = (p.c1, p.c3);
                let mut r = vec![d[0] - 1.0, d[1] - x[2]];
                match case212_riccati_constants(c1, c3, f)? {
                    Some((c2, c4, off)) => {
                        let z = |x2: f64| -c2 * (x2 - off) - c3 / (c1 * c1);
                        let zdot = -c2 * d[1];
                        let zz = z(x[1]);
                        r.push(d[2] - x[2] * (c3 + c1 * c1 * zz));
                        r.push(zdot - (0.5 * c1 * c1 * zz * zz + c3 * zz + c4));
                    }
                    None => {
                        let ct = match *f {
                            Case212Family::Exp { ctilde, .. } => ctilde,
                            _ => 0.0,
                        };
                        r.push(d[2] - ct * x[2]);
                    }
                }
                r
            }
        };
        worst = res.iter().fold(worst, |m, v| m.max(v.abs()));
    }
    Ok(worst)
}

/// The family through a phase point (taken at `t = 0`) of C11 or C12,
/// built from the conserved momenta.
pub fn family_from_phase_point(spec: &ModelSpec, pt: &PhasePoint) -> Result<ClosedFormFamily> {
    spec.ensure_valid()?;
    let (x, p) = (&pt.x, &pt.p);
    match spec.case {
        CaseTag::C11 => {
            let c1 = spec.params.c1;
            let c2 = p[1];
            let c3 = x[1] - case11_trajectory(c1, c2, 0.0, x[0])[1];
            Ok(ClosedFormFamily::Case11 { c2, c3, t0: x[0] })
        }
        CaseTag::C12 => {
            let (j0, g0) = (spec.params.j0, spec.params.g0);
            if x[1] == 0.0 {
                return Err(Error::OutOfDomain {
                    case: spec.case,
                    point: x.0.clone(),
                });
            }
            let c1 = p[0];
            let pp = p[1] * x[1];
            if c1 == 0.0 {
                let rate = j0 + pp / g0;
                return Ok(ClosedFormFamily::Case12(if rate == 0.0 {
                    Case12Family::Line { c3: x[1], c4: x[0] }
                } else {
                    Case12Family::Exponential {
                        rate,
                        c3: x[1],
                        c4: x[0] - x[1] / rate,
                    }
                }));
            }
            let c4 = x[0] + pp / c1;
            let w = pp + j0 * g0;
            let k = w * w + 2.0 * g0 * c1 * x[1];
            let scale = (w * w).max((g0 * c1 * x[1]).abs()).max(1.0);
            let fam = if k.abs() <= 1e-12 * scale {
                Case12Family::KZero {
                    c1,
                    c3: -2.0 * g0 / w,
                    c4,
                }
            } else if k > 0.0 {
                let r = -w / k.sqrt();
                if r.abs() >= 1.0 {
                    return Err(Error::Guard(
                        "phase point lies on a branch with no closed form (c1 x2 < 0 with k > 0)".into(),
                    ));
                }
                let sigma = k.sqrt() / (2.0 * g0);
                Case12Family::KPos {
                    c1,
                    k,
                    c3: r.atanh() / sigma,
                    c4,
                }
            } else {
                let sigma = (-k).sqrt() / (2.0 * g0);
                Case12Family::KNeg {
                    c1,
                    k,
                    c3: (w / (-k).sqrt()).atan() / sigma,
                    c4,
                }
            };
            Ok(ClosedFormFamily::Case12(fam))
        }
        case => Err(Error::WrongCase {
            case,
            what: "no closed form is reachable from a phase point",
        }),
    }
}

/// Roots of the C211 quartic characteristic polynomial, for reporting.
pub fn case211_roots(c2: f64, c3: f64) -> [Complex64; 4] {
    let [a, b] = quadratic_roots(c3, -c2);
    let [c, d] = quadratic_roots(-c3, -c2);
    [a, b, c, d]
}
