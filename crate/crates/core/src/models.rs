//! The catalog of homogeneous point-affine control systems with quadratic cost.
//!
//! Every model is a control-affine system `ẋ = v₁(x) + u·v₂(x)` on ℝ² or ℝ³
//! with cost `Q = ½·G(x)·u²`. [`ModelSpec`] names one of the eight catalog
//! cases together with its constants and evaluates the drift `v₁`, the
//! control field `v₂`, the metric `G`, their analytic derivatives, and the
//! canonical frame used by the coframing.
//!
//! Two normalizations of the control direction coexist:
//!
//! * the *system* control field ([`ControlAffine::control_field`]) is the one
//!   paired with `G` in the catalog triple, and is what the maximum principle
//!   uses;
//! * the *canonical* control field ([`ModelSpec::canonical_frame`]) is the
//!   frame vector dual to the canonical coframe. It differs from the system
//!   field only by a positive factor (C11, C212, C232, C233).

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance kept from singular loci when drawing random sample points.
pub const SAMPLE_MARGIN: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    C11,
    C12,
    C211,
    C212,
    C22,
    C231,
    C232,
    C233,
}

impl CaseTag {
    pub const ALL: [CaseTag; 8] = [
        CaseTag::C11,
        CaseTag::C12,
        CaseTag::C211,
        CaseTag::C212,
        CaseTag::C22,
        CaseTag::C231,
        CaseTag::C232,
        CaseTag::C233,
    ];

    pub fn dim(self) -> usize {
        match self {
            CaseTag::C11 | CaseTag::C12 => 2,
            _ => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CaseTag::C11 => "C11",
            CaseTag::C12 => "C12",
            CaseTag::C211 => "C211",
            CaseTag::C212 => "C212",
            CaseTag::C22 => "C22",
            CaseTag::C231 => "C231",
            CaseTag::C232 => "C232",
            CaseTag::C233 => "C233",
        }
    }

    /// Constants the case reads from [`Params`].
    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            CaseTag::C11 => &["c1"],
            CaseTag::C12 => &["j0", "g0"],
            CaseTag::C211 => &["c2", "c3"],
            CaseTag::C212 => &["c1", "c3"],
            CaseTag::C22 => &["c1", "g0"],
            CaseTag::C231 => &["c1", "c2", "epsilon", "g0"],
            CaseTag::C232 | CaseTag::C233 => &["c1", "c3", "c4", "epsilon", "g0", "f20"],
        }
    }

    pub fn domain_description(self) -> &'static str {
        match self {
            CaseTag::C11 | CaseTag::C211 | CaseTag::C231 => "all of R^n",
            CaseTag::C12 | CaseTag::C22 => "x2 != 0",
            CaseTag::C212 => "x3 != 0",
            CaseTag::C232 => "cos(c3 x1) != 0, c3 x3^2 + c4 > 0",
            CaseTag::C233 => "c3 x3^2 - c4 > 0",
        }
    }

    /// Labels of the first integrals logged besides `H`.
    pub fn integral_names(self) -> &'static [&'static str] {
        match self {
            CaseTag::C11 => &["p2"],
            CaseTag::C12 => &["I2", "I3"],
            CaseTag::C211 => &["p1"],
            CaseTag::C212 => &["p1", "p2"],
            CaseTag::C22 => &["I1", "I2", "I3"],
            CaseTag::C231 => &["I1", "I2", "I3"],
            CaseTag::C232 | CaseTag::C233 => &["p2"],
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseTag::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown case {s:?}")))
    }
}

/// Real constants of a catalog model. Each case reads only the ones it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub j0: f64,
    pub g0: f64,
    pub epsilon: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            c1: 0.0,
            c2: 0.0,
            c3: 0.0,
            c4: 0.0,
            j0: 0.0,
            g0: 1.0,
            epsilon: 1.0,
        }
    }
}

/// Polynomial in one variable, coefficients in increasing degree.
///
/// Stands in for the free function `F₂₀(x²)` of cases C232/C233. The empty
/// polynomial is the zero function.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Polynomial { coeffs }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVec(pub Vec<f64>);

impl StateVec {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

impl std::ops::Deref for StateVec {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for StateVec {
    fn from(v: Vec<f64>) -> Self {
        StateVec(v)
    }
}

impl<const N: usize> From<[f64; N]> for StateVec {
    fn from(v: [f64; N]) -> Self {
        StateVec(v.to_vec())
    }
}

pub type ControlValue = f64;

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

/// `pᵀ·M`, the covector pulled back through a Jacobian.
pub(crate) fn vec_mat(p: &[f64], m: &DMatrix<f64>) -> Vec<f64> {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| p[i] * m[(i, j)]).sum())
        .collect()
}

/// A control-affine system `ẋ = v₁(x) + u·v₂(x)` with cost `½·G(x)·u²`.
///
/// Jacobians are `D[(i, j)] = ∂vⁱ/∂xʲ`. The maximum-principle machinery in
/// [`crate::pmp`] is written against this trait only.
pub trait ControlAffine {
    fn dim(&self) -> usize;
    fn in_domain(&self, x: &[f64]) -> bool;
    fn drift(&self, x: &[f64]) -> Result<StateVec>;
    fn drift_jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>>;
    fn control_field(&self, x: &[f64]) -> Result<StateVec>;
    fn control_jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>>;
    fn metric(&self, x: &[f64]) -> Result<f64>;
    fn metric_gradient(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn cost(&self, x: &[f64], u: ControlValue) -> Result<f64> {
        Ok(0.5 * self.metric(x)? * u * u)
    }
}

/// One model of the catalog: a case tag plus its constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub case: CaseTag,
    #[serde(default)]
    pub params: Params,
    /// Coefficients of `F₂₀`; read by C232/C233 only.
    #[serde(default)]
    pub f20: Polynomial,
}

/// `H`, `J` and the derivatives the Case 2.3 family needs at one point.
#[derive(Clone, Debug)]
pub(crate) struct Case23Eval {
    pub h: f64,
    pub grad_h: [f64; 3],
    pub h1: f64,
    pub grad_h1: [f64; 3],
    pub j: f64,
    pub grad_j: [f64; 3],
}

impl ModelSpec {
    pub fn new(case: CaseTag, params: Params) -> Self {
        ModelSpec {
            case,
            params,
            f20: Polynomial::default(),
        }
    }

    pub fn with_f20(mut self, coeffs: Vec<f64>) -> Self {
        self.f20 = Polynomial::new(coeffs);
        self
    }

    /// Builds the spec and rejects it unless [`ModelSpec::validate`] is clean.
    pub fn checked(case: CaseTag, params: Params) -> Result<Self> {
        let spec = ModelSpec::new(case, params);
        spec.ensure_valid()?;
        Ok(spec)
    }

    /// Representative constants for each case, used by the check suites,
    /// the examples and the acceptance tests.
    pub fn default_for(case: CaseTag) -> Self {
        let p = Params::default();
        let params = match case {
            CaseTag::C11 => Params { c1: 0.5, ..p },
            CaseTag::C12 => Params {
                j0: 0.5,
                g0: 1.5,
                ..p
            },
            CaseTag::C211 => Params {
                c2: 0.5,
                c3: 1.0,
                ..p
            },
            CaseTag::C212 => Params {
                c1: 1.5,
                c3: 0.5,
                ..p
            },
            CaseTag::C22 => Params {
                c1: -0.3,
                g0: 2.0,
                ..p
            },
            CaseTag::C231 => Params {
                c1: 0.5,
                c2: 1.5,
                epsilon: 1.0,
                g0: 1.0,
                ..p
            },
            CaseTag::C232 => Params {
                c1: 0.5,
                c3: 0.25,
                c4: 1.0,
                epsilon: 1.0,
                g0: 1.0,
                ..p
            },
            CaseTag::C233 => Params {
                c1: 0.5,
                c3: 1.0,
                c4: -1.0,
                epsilon: -1.0,
                g0: 1.0,
                ..p
            },
        };
        ModelSpec::new(case, params)
    }

    pub fn dim(&self) -> usize {
        self.case.dim()
    }

    /// Every violated parameter constraint; empty iff the spec is usable.
    pub fn validate(&self) -> Vec<String> {
        let p = &self.params;
        let mut errs = Vec::new();
        let finite = [p.c1, p.c2, p.c3, p.c4, p.j0, p.g0, p.epsilon]
            .iter()
            .chain(self.f20.coeffs.iter())
            .all(|v| v.is_finite());
        if !finite {
            errs.push("all constants must be finite".to_string());
        }
        let uses_g0 = matches!(
            self.case,
            CaseTag::C12 | CaseTag::C22 | CaseTag::C231 | CaseTag::C232 | CaseTag::C233
        );
        if uses_g0 && !(p.g0 > 0.0) {
            errs.push("g0 must be positive".to_string());
        }
        if self.case == CaseTag::C212 && p.c1 == 0.0 {
            errs.push("c1 must be nonzero".to_string());
        }
        let uses_eps = matches!(self.case, CaseTag::C231 | CaseTag::C232 | CaseTag::C233);
        if uses_eps && p.epsilon != 1.0 && p.epsilon != -1.0 {
            errs.push("epsilon must be +1 or -1".to_string());
        }
        if matches!(self.case, CaseTag::C232 | CaseTag::C233) {
            if p.c3 == 0.0 {
                errs.push("c3 must be nonzero".to_string());
            } else if (p.epsilon == 1.0 || p.epsilon == -1.0) && p.c3 != 0.0 {
                // epsilon is the sign of H_x1, fixed by c3
                let want = if self.case == CaseTag::C232 {
                    p.c3.signum()
                } else {
                    -p.c3.signum()
                };
                if p.epsilon != want {
                    errs.push(format!(
                        "epsilon must equal sgn(H_x1) = {want:+} for this c3"
                    ));
                }
            }
        }
        errs
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let errs = self.validate();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(errs))
        }
    }

    /// Positive iff `x` is inside the domain; measures the distance-like
    /// quantity that vanishes on the nearest singular locus. `+∞` for models
    /// defined everywhere.
    pub fn domain_margin(&self, x: &[f64]) -> f64 {
        if x.len() != self.dim() || x.iter().any(|v| !v.is_finite()) {
            return f64::NEG_INFINITY;
        }
        let p = &self.params;
        match self.case {
            CaseTag::C11 | CaseTag::C211 | CaseTag::C231 => f64::INFINITY,
            CaseTag::C12 | CaseTag::C22 => x[1].abs(),
            CaseTag::C212 => x[2].abs(),
            CaseTag::C232 => {
                let s = p.c3 * x[2] * x[2] + p.c4;
                (p.c3 * x[0]).cos().abs().min(s)
            }
            CaseTag::C233 => p.c3 * x[2] * x[2] - p.c4,
        }
    }

    /// Whether the closed cube `[x − h, x + h]ⁿ` lies inside the domain, so
    /// that any finite-difference stencil of step ≤ h stays on one side of
    /// every singular locus.
    pub fn box_in_domain(&self, x: &[f64], h: f64) -> bool {
        if !ControlAffine::in_domain(self, x) {
            return false;
        }
        let p = &self.params;
        // min of c3·y² + c4 over y ∈ [a − h, a + h]
        let quad_min = |a: f64, c4: f64| {
            let mut m = (p.c3 * (a - h) * (a - h)).min(p.c3 * (a + h) * (a + h));
            if (a - h) <= 0.0 && 0.0 <= (a + h) {
                m = m.min(0.0);
            }
            m + c4
        };
        match self.case {
            CaseTag::C11 | CaseTag::C211 | CaseTag::C231 => true,
            CaseTag::C12 | CaseTag::C22 => x[1].abs() > h,
            CaseTag::C212 => x[2].abs() > h,
            CaseTag::C232 => {
                let phase = p.c3 * x[0] - FRAC_PI_2;
                let k = (phase / std::f64::consts::PI).round();
                let to_pole = (phase - k * std::f64::consts::PI).abs();
                to_pole > p.c3.abs() * h && quad_min(x[2], p.c4) > 0.0
            }
            CaseTag::C233 => quad_min(x[2], -p.c4) > 0.0,
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if !ControlAffine::in_domain(self, x) {
            return Err(Error::OutOfDomain {
                case: self.case,
                point: x.to_vec(),
            });
        }
        Ok(())
    }

    /// `H(x)` of the Case 2.3 family (C231, C232, C233).
    pub fn case23_h(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(self.case23_eval(x)?.h)
    }

    pub(crate) fn case23_eval(&self, x: &[f64]) -> Result<Case23Eval> {
        let p = &self.params;
        let eps = p.epsilon;
        let (x1, x2, x3) = (x[0], x[1], x[2]);
        match self.case {
            CaseTag::C231 => Ok(Case23Eval {
                h: eps * (x1 + p.c2 * x3),
                grad_h: [eps, 0.0, eps * p.c2],
                h1: eps,
                grad_h1: [0.0; 3],
                j: p.c1,
                grad_j: [0.0; 3],
            }),
            CaseTag::C232 => {
                let (c1, c3) = (p.c1, p.c3);
                let s = c3 * x3 * x3 + p.c4;
                let q = s.sqrt();
                let (sin, cos) = (c3 * x1).sin_cos();
                let t = sin / cos;
                let sec2 = 1.0 + t * t;
                let f = self.f20.eval(x2);
                let df = self.f20.derivative().eval(x2);
                let r = eps * c3 * s;
                let rs = r.sqrt();
                Ok(Case23Eval {
                    h: s * t + f * q,
                    grad_h: [c3 * s * sec2, df * q, 2.0 * c3 * x3 * t + f * c3 * x3 / q],
                    h1: c3 * s * sec2,
                    grad_h1: [2.0 * c3 * c3 * s * t * sec2, 0.0, 2.0 * c3 * c3 * x3 * sec2],
                    j: c1 * cos / rs,
                    grad_j: [
                        -c1 * c3 * sin / rs,
                        0.0,
                        -c1 * cos * eps * c3 * c3 * x3 / (r * rs),
                    ],
                })
            }
            CaseTag::C233 => {
                let (c1, c3) = (p.c1, p.c3);
                let s = c3 * x3 * x3 - p.c4;
                let q = s.sqrt();
                let th = (c3 * x1).tanh();
                let sech2 = 1.0 - th * th;
                let f = self.f20.eval(x2);
                let df = self.f20.derivative().eval(x2);
                let r = -eps * c3 * s;
                let rs = r.sqrt();
                let (sinh, cosh) = ((c3 * x1).sinh(), (c3 * x1).cosh());
                Ok(Case23Eval {
                    h: -s * th + f * q,
                    grad_h: [-c3 * s * sech2, df * q, -2.0 * c3 * x3 * th + f * c3 * x3 / q],
                    h1: -c3 * s * sech2,
                    grad_h1: [2.0 * c3 * c3 * s * th * sech2, 0.0, -2.0 * c3 * c3 * x3 * sech2],
                    j: c1 * cosh / rs,
                    grad_j: [
                        c1 * c3 * sinh / rs,
                        0.0,
                        c1 * cosh * eps * c3 * c3 * x3 / (r * rs),
                    ],
                })
            }
            case => Err(Error::WrongCase {
                case,
                what: "H is only defined for C231, C232, C233",
            }),
        }
    }

    /// Canonical control field and its Jacobian.
    fn canonical_control(&self, x: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let n = self.dim();
        let p = &self.params;
        let mut d = DMatrix::zeros(n, n);
        let v = match self.case {
            CaseTag::C11 => {
                let e = (-p.c1 * x[0]).exp();
                d[(1, 0)] = -p.c1 * e;
                vec![0.0, e]
            }
            CaseTag::C212 => {
                d[(2, 2)] = p.c1;
                vec![0.0, 0.0, p.c1 * x[2]]
            }
            CaseTag::C232 | CaseTag::C233 => {
                let ev = self.case23_eval(x)?;
                let eps = p.epsilon;
                let s = 1.0 / (eps * ev.h1).sqrt();
                let w = [x[2], 1.0, ev.h];
                let grad_s: Vec<f64> = ev
                    .grad_h1
                    .iter()
                    .map(|g| -0.5 * eps * s * s * s * g)
                    .collect();
                let dw = w_jacobian(&ev.grad_h);
                for i in 0..3 {
                    for j in 0..3 {
                        d[(i, j)] = eps * (w[i] * grad_s[j] + s * dw[(i, j)]);
                    }
                }
                w.iter().map(|wi| eps * s * wi).collect()
            }
            _ => {
                let v = self.control_field(x)?;
                return Ok((v.0, self.control_jacobian(x)?));
            }
        };
        Ok((v, d))
    }

    /// The canonical frame `(v₁, v₂[, v₃])` with `v₃ = −[v₁, v₂]`, dual to the
    /// canonical coframe.
    pub fn canonical_frame(&self, x: &[f64]) -> Result<Vec<StateVec>> {
        self.check(x)?;
        let v1 = self.drift(x)?;
        let (v2, dv2) = self.canonical_control(x)?;
        if self.dim() == 2 {
            return Ok(vec![v1, StateVec(v2)]);
        }
        let dv1 = self.drift_jacobian(x)?;
        let v3 = neg_bracket(&v1, &dv1, &v2, &dv2);
        Ok(vec![v1, StateVec(v2), StateVec(v3)])
    }

    /// `v₃ = −[v₁, v₂]` of the canonical frame, from analytic Jacobians.
    pub fn frame_v3(&self, x: &[f64]) -> Result<StateVec> {
        if self.dim() != 3 {
            return Err(Error::WrongCase {
                case: self.case,
                what: "v3 exists only for three-state models",
            });
        }
        Ok(self.canonical_frame(x)?.swap_remove(2))
    }

    /// Axis-aligned box random sample points are drawn from.
    pub fn sample_box(&self) -> Vec<(f64, f64)> {
        let unit = (-1.0, 1.0);
        let pos = (0.5, 2.0);
        match self.case {
            CaseTag::C11 => vec![unit, unit],
            CaseTag::C12 => vec![unit, pos],
            CaseTag::C211 | CaseTag::C231 | CaseTag::C233 => vec![unit, unit, unit],
            CaseTag::C212 => vec![unit, unit, pos],
            CaseTag::C22 => vec![unit, pos, unit],
            CaseTag::C232 => {
                let half = (1.0_f64).min((FRAC_PI_2 - 0.3) / self.params.c3.abs());
                vec![(-half, half), unit, unit]
            }
        }
    }

    /// Uniform draw from [`ModelSpec::sample_box`], rejecting points closer
    /// than [`SAMPLE_MARGIN`] to a singular locus.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<StateVec> {
        let bounds = self.sample_box();
        for _ in 0..10_000 {
            let x: Vec<f64> = bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
            if self.domain_margin(&x) > SAMPLE_MARGIN {
                return Ok(StateVec(x));
            }
        }
        Err(Error::Config(format!(
            "{}: no in-domain sample point found in the default box",
            self.case
        )))
    }

    pub fn sample_points<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<StateVec>> {
        (0..n).map(|_| self.sample_point(rng)).collect()
    }
}

/// Jacobian of `W = (x³, 1, H)`.
fn w_jacobian(grad_h: &[f64; 3]) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(3, 3);
    d[(0, 2)] = 1.0;
    for j in 0..3 {
        d[(2, j)] = grad_h[j];
    }
    d
}

/// `−[X, Y] = DX·Y − DY·X`.
pub(crate) fn neg_bracket(x: &[f64], dx: &DMatrix<f64>, y: &[f64], dy: &DMatrix<f64>) -> Vec<f64> {
    let a = mat_vec(dx, y);
    let b = mat_vec(dy, x);
    a.iter().zip(&b).map(|(p, q)| p - q).collect()
}

impl ControlAffine for ModelSpec {
    fn dim(&self) -> usize {
        self.case.dim()
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        self.domain_margin(x) > 0.0
    }

    fn drift(&self, x: &[f64]) -> Result<StateVec> {
        self.check(x)?;
        let p = &self.params;
        let v = match self.case {
            CaseTag::C11 => vec![1.0, 0.0],
            CaseTag::C12 => vec![x[1], p.j0 * x[1]],
            CaseTag::C211 => vec![1.0, x[2], p.c2 * x[1] + p.c3 * x[2]],
            CaseTag::C212 => vec![1.0, x[2], p.c3 * x[2]],
            CaseTag::C22 => {
                let r = x[2] / x[1];
                vec![x[1], x[2], x[1] * (1.5 * r * r + p.c1)]
            }
            CaseTag::C231 | CaseTag::C232 | CaseTag::C233 => {
                let ev = self.case23_eval(x)?;
                vec![1.0 + ev.j * x[2], ev.j, ev.j * ev.h]
            }
        };
        Ok(StateVec(v))
    }

    fn drift_jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check(x)?;
        let p = &self.params;
        let n = self.dim();
        let mut d = DMatrix::zeros(n, n);
        match self.case {
            CaseTag::C11 => {}
            CaseTag::C12 => {
                d[(0, 1)] = 1.0;
                d[(1, 1)] = p.j0;
            }
            CaseTag::C211 => {
                d[(1, 2)] = 1.0;
                d[(2, 1)] = p.c2;
                d[(2, 2)] = p.c3;
            }
            CaseTag::C212 => {
                d[(1, 2)] = 1.0;
                d[(2, 2)] = p.c3;
            }
            CaseTag::C22 => {
                let r = x[2] / x[1];
                d[(0, 1)] = 1.0;
                d[(1, 2)] = 1.0;
                d[(2, 1)] = -1.5 * r * r + p.c1;
                d[(2, 2)] = 3.0 * r;
            }
            CaseTag::C231 | CaseTag::C232 | CaseTag::C233 => {
                let ev = self.case23_eval(x)?;
                let w = [x[2], 1.0, ev.h];
                let dw = w_jacobian(&ev.grad_h);
                for i in 0..3 {
                    for j in 0..3 {
                        d[(i, j)] = w[i] * ev.grad_j[j] + ev.j * dw[(i, j)];
                    }
                }
            }
        }
        Ok(d)
    }

    fn control_field(&self, x: &[f64]) -> Result<StateVec> {
        self.check(x)?;
        let v = match self.case {
            CaseTag::C11 => vec![0.0, 1.0],
            CaseTag::C12 => vec![0.0, x[1]],
            CaseTag::C211 | CaseTag::C212 => vec![0.0, 0.0, 1.0],
            CaseTag::C22 => vec![0.0, 0.0, x[1]],
            CaseTag::C231 | CaseTag::C232 | CaseTag::C233 => {
                let eps = self.params.epsilon;
                let h = self.case23_eval(x)?.h;
                vec![eps * x[2], eps, eps * h]
            }
        };
        Ok(StateVec(v))
    }

    fn control_jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check(x)?;
        let n = self.dim();
        let mut d = DMatrix::zeros(n, n);
        match self.case {
            CaseTag::C11 | CaseTag::C211 | CaseTag::C212 => {}
            CaseTag::C12 => d[(1, 1)] = 1.0,
            CaseTag::C22 => d[(2, 1)] = 1.0,
            CaseTag::C231 | CaseTag::C232 | CaseTag::C233 => {
                let ev = self.case23_eval(x)?;
                d = w_jacobian(&ev.grad_h) * self.params.epsilon;
            }
        }
        Ok(d)
    }

    fn metric(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        let p = &self.params;
        Ok(match self.case {
            CaseTag::C11 => (2.0 * p.c1 * x[0]).exp(),
            CaseTag::C211 => 1.0,
            CaseTag::C212 => {
                let a = p.c1 * x[2];
                1.0 / (a * a)
            }
            _ => p.g0,
        })
    }

    fn metric_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let p = &self.params;
        let mut g = vec![0.0; self.dim()];
        match self.case {
            CaseTag::C11 => g[0] = 2.0 * p.c1 * (2.0 * p.c1 * x[0]).exp(),
            CaseTag::C212 => g[2] = -2.0 / (p.c1 * p.c1 * x[2].powi(3)),
            _ => {}
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(case: CaseTag, params: Params) -> ModelSpec {
        ModelSpec::new(case, params)
    }

    #[test]
    fn validate_reports_each_violation() {
        let s = spec(
            CaseTag::C12,
            Params {
                g0: -1.0,
                ..Default::default()
            },
        );
        assert_eq!(s.validate(), vec!["g0 must be positive".to_string()]);

        let s = spec(CaseTag::C232, Params::default());
        assert!(s.validate().contains(&"c3 must be nonzero".to_string()));

        let s = spec(CaseTag::C211, Params::default());
        assert!(s.validate().is_empty());

        let s = spec(CaseTag::C212, Params::default());
        assert!(s.validate().contains(&"c1 must be nonzero".to_string()));

        let s = spec(
            CaseTag::C231,
            Params {
                epsilon: 0.5,
                ..Default::default()
            },
        );
        assert_eq!(s.validate().len(), 1);
    }

    #[test]
    fn catalog_defaults_are_valid() {
        for case in CaseTag::ALL {
            assert!(ModelSpec::default_for(case).validate().is_empty(), "{case}");
        }
    }

    #[test]
    fn domain_edges() {
        let c12 = ModelSpec::default_for(CaseTag::C12);
        assert!(!c12.in_domain(&[0.0, 0.0]));
        let c212 = spec(
            CaseTag::C212,
            Params {
                c1: 1.0,
                ..Default::default()
            },
        );
        assert!(c212.in_domain(&[0.0, 0.0, 1.0]));
        let c232 = spec(
            CaseTag::C232,
            Params {
                c3: 1.0,
                c4: 1.0,
                ..Default::default()
            },
        );
        assert!(c232.domain_margin(&[FRAC_PI_2, 0.0, 0.0]) < 1e-15);
        assert!(c232.in_domain(&[FRAC_PI_2 - 1e-3, 0.0, 0.0]));
        assert!(c232.box_in_domain(&[FRAC_PI_2 - 1e-3, 0.0, 0.0], 5e-4));
        assert!(!c232.box_in_domain(&[FRAC_PI_2 - 1e-3, 0.0, 0.0], 2e-3));
        assert!(!c232.box_in_domain(&[-FRAC_PI_2 + 1e-3, 0.0, 0.0], 2e-3));
        assert!(!c12.box_in_domain(&[0.0, 0.05], 0.07));
        let c233 = ModelSpec::new(
            CaseTag::C233,
            Params {
                c3: -1.0,
                c4: -1.0,
                ..Default::default()
            },
        );
        // 1 - x3^2 > 0
        assert!(c233.box_in_domain(&[0.0, 0.0, 0.5], 0.4));
        assert!(!c233.box_in_domain(&[0.0, 0.0, 0.5], 0.6));
        assert!(!c12.in_domain(&[0.0, f64::NAN]));
        assert!(!c12.in_domain(&[0.0, 1.0, 2.0]));
    }

    #[test]
    fn hamiltonian_density_diverges_toward_the_tan_pole() {
        let c232 = spec(
            CaseTag::C232,
            Params {
                c3: 1.0,
                c4: 1.0,
                ..Default::default()
            },
        );
        let mut last = 0.0;
        for k in 1..6 {
            let x1 = FRAC_PI_2 - 10f64.powi(-k);
            let h = c232.case23_h(&[x1, 0.0, 0.5]).unwrap().abs();
            assert!(h > 5.0 * last);
            last = h;
        }
        assert!(last > 1e4);
    }

    #[test]
    fn drift_examples() {
        let c11 = ModelSpec::default_for(CaseTag::C11);
        assert_eq!(c11.drift(&[3.0, -2.0]).unwrap().0, vec![1.0, 0.0]);
        let c12 = spec(
            CaseTag::C12,
            Params {
                j0: 2.0,
                ..Default::default()
            },
        );
        assert_eq!(c12.drift(&[5.0, 3.0]).unwrap().0, vec![3.0, 6.0]);
        let c211 = spec(
            CaseTag::C211,
            Params {
                c2: 1.0,
                c3: 2.0,
                ..Default::default()
            },
        );
        assert_eq!(c211.drift(&[0.0, 1.0, 1.0]).unwrap().0, vec![1.0, 1.0, 3.0]);
        assert!(c12.drift(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn control_field_examples() {
        let c11 = ModelSpec::default_for(CaseTag::C11);
        assert_eq!(c11.control_field(&[0.3, 0.1]).unwrap().0, vec![0.0, 1.0]);
        let c22 = ModelSpec::default_for(CaseTag::C22);
        assert_eq!(c22.control_field(&[0.0, 2.0, 0.0]).unwrap().0, vec![0.0, 0.0, 2.0]);
        let c231 = spec(CaseTag::C231, Params::default());
        assert_eq!(c231.control_field(&[0.0, 0.0, 0.0]).unwrap().0, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn metric_and_cost_examples() {
        let c11 = ModelSpec::default_for(CaseTag::C11);
        let c11 = ModelSpec {
            params: Params { c1: 0.0, ..c11.params },
            ..c11
        };
        assert_eq!(c11.cost(&[0.7, 0.2], 2.0).unwrap(), 2.0);
        let c12 = spec(
            CaseTag::C12,
            Params {
                g0: 3.0,
                ..Default::default()
            },
        );
        assert_eq!(c12.cost(&[0.0, 1.0], 1.0).unwrap(), 1.5);
        let c212 = spec(
            CaseTag::C212,
            Params {
                c1: 2.0,
                ..Default::default()
            },
        );
        assert_eq!(c212.cost(&[0.0, 0.0, 1.0], 1.0).unwrap(), 0.125);
    }

    #[test]
    fn frame_v3_examples() {
        let c211 = spec(
            CaseTag::C211,
            Params {
                c3: 2.0,
                ..Default::default()
            },
        );
        assert_eq!(c211.frame_v3(&[0.4, -1.0, 3.0]).unwrap().0, vec![0.0, 1.0, 2.0]);
        let c22 = ModelSpec::default_for(CaseTag::C22);
        let v3 = c22.frame_v3(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(v3.0, vec![0.0, 1.0, 0.0]);
        assert!(ModelSpec::default_for(CaseTag::C11).frame_v3(&[0.0, 0.0]).is_err());
    }

    fn fd_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> DMatrix<f64> {
        let n = x.len();
        let mut d = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            let (fp, fm) = (f(&xp), f(&xm));
            for i in 0..n {
                d[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        d
    }

    fn all_specs() -> Vec<ModelSpec> {
        let mut v: Vec<_> = CaseTag::ALL.iter().map(|&c| ModelSpec::default_for(c)).collect();
        v.push(ModelSpec::default_for(CaseTag::C232).with_f20(vec![1.0, 1.0]));
        v.push(ModelSpec::default_for(CaseTag::C233).with_f20(vec![0.5, -0.3, 0.2]));
        let mut neg = ModelSpec::default_for(CaseTag::C231);
        neg.params.epsilon = -1.0;
        v.push(neg);
        v
    }

    #[test]
    fn analytic_jacobians_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for s in all_specs() {
            for _ in 0..10 {
                let x = s.sample_point(&mut rng).unwrap();
                let pairs: [(DMatrix<f64>, DMatrix<f64>); 2] = [
                    (
                        s.drift_jacobian(&x).unwrap(),
                        fd_jacobian(|y| s.drift(y).unwrap().0, &x, 1e-6),
                    ),
                    (
                        s.control_jacobian(&x).unwrap(),
                        fd_jacobian(|y| s.control_field(y).unwrap().0, &x, 1e-6),
                    ),
                ];
                for (a, f) in pairs {
                    assert!((a - f).abs().max() < 1e-6, "{}", s.case);
                }
                let (_, dv2) = s.canonical_control(&x).unwrap();
                let fd = fd_jacobian(|y| s.canonical_control(y).unwrap().0, &x, 1e-6);
                assert!((dv2 - fd).abs().max() < 1e-6, "{}", s.case);
                let g = s.metric_gradient(&x).unwrap();
                for j in 0..x.len() {
                    let mut xp = x.0.clone();
                    let mut xm = x.0.clone();
                    xp[j] += 1e-6;
                    xm[j] -= 1e-6;
                    let fd = (s.metric(&xp).unwrap() - s.metric(&xm).unwrap()) / 2e-6;
                    assert_abs_diff_eq!(g[j], fd, epsilon = 1e-6 * (1.0 + fd.abs()));
                }
            }
        }
    }

    #[test]
    fn v3_agrees_with_finite_difference_bracket() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-5;
        for s in all_specs().into_iter().filter(|s| s.dim() == 3) {
            for _ in 0..10 {
                let x = s.sample_point(&mut rng).unwrap();
                let frame = |y: &[f64]| s.canonical_frame(y).unwrap();
                let v1 = |y: &[f64]| frame(y)[0].0.clone();
                let v2 = |y: &[f64]| frame(y)[1].0.clone();
                let d1 = fd_jacobian(v1, &x, h);
                let d2 = fd_jacobian(v2, &x, h);
                let fr = frame(&x);
                let v3 = neg_bracket(&fr[0], &d1, &fr[1], &d2);
                let err = v3
                    .iter()
                    .zip(fr[2].iter())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(err < 1e-6, "{} err {err}", s.case);
            }
        }
    }

    #[test]
    fn frame_vectors_are_independent_and_metric_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for s in all_specs() {
            for _ in 0..20 {
                let x = s.sample_point(&mut rng).unwrap();
                let fr = s.canonical_frame(&x).unwrap();
                let n = s.dim();
                let m = DMatrix::from_fn(n, n, |i, j| fr[j][i]);
                let gram = m.transpose() * &m;
                assert!(gram.determinant() > 1e-12, "{}", s.case);
                assert!(s.metric(&x).unwrap() > 0.0);
                assert_eq!(s.cost(&x, 0.0).unwrap(), 0.0);
                let q = |u: f64| s.cost(&x, u).unwrap();
                assert!(q(1.3) - 2.0 * q(0.3) + q(-0.7) > 0.0);
            }
        }
    }

    #[test]
    fn polynomial_eval_and_derivative() {
        let p = Polynomial::new(vec![1.0, 2.0, 3.0]);
        assert_eq!(p.eval(2.0), 17.0);
        assert_eq!(p.derivative().eval(2.0), 14.0);
        assert_eq!(Polynomial::default().eval(5.0), 0.0);
    }

    #[test]
    fn case_tags_parse() {
        assert_eq!("c22".parse::<CaseTag>().unwrap(), CaseTag::C22);
        assert!("C99".parse::<CaseTag>().is_err());
    }
}
