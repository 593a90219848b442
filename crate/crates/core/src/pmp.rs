//! Pontryagin maximum principle for the quadratic-cost catalog.
//!
//! For `ẋ = v₁ + u·v₂` with cost `½·G·u²` the pre-maximization Hamiltonian is
//! `⟨p, v₁ + u·v₂⟩ − ½·G·u²`; it is maximized by `u* = ⟨p, v₂⟩ / G`, giving
//!
//! ```text
//! H(x, p) = ⟨p, v₁⟩ + ⟨p, v₂⟩² / (2G).
//! ```
//!
//! Everything here works from that single law; the case-by-case flows are
//! never typed in by hand.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linode::quadratic_roots;
use crate::models::{dot, vec_mat, CaseTag, ControlAffine, ControlValue, ModelSpec, StateVec};

/// A point of the cotangent bundle.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PhasePoint {
    pub x: StateVec,
    pub p: Vec<f64>,
}

impl PhasePoint {
    pub fn new(x: impl Into<StateVec>, p: Vec<f64>) -> Result<Self> {
        let x = x.into();
        if x.dim() != p.len() {
            return Err(Error::Dimension {
                expected: x.dim(),
                got: p.len(),
            });
        }
        if x.iter().chain(&p).any(|v| !v.is_finite()) {
            return Err(Error::Config("phase point has non-finite components".into()));
        }
        Ok(PhasePoint { x, p })
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    /// `(x, p)` concatenated.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.x.0.clone();
        v.extend_from_slice(&self.p);
        v
    }

    pub fn from_flat(z: &[f64]) -> Self {
        let n = z.len() / 2;
        PhasePoint {
            x: StateVec(z[..n].to_vec()),
            p: z[n..].to_vec(),
        }
    }
}

/// `(ẋ, ṗ)` at a phase point.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseVelocity {
    pub xdot: Vec<f64>,
    pub pdot: Vec<f64>,
}

impl PhaseVelocity {
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.xdot.clone();
        v.extend_from_slice(&self.pdot);
        v
    }
}

fn check_dim<S: ControlAffine + ?Sized>(sys: &S, pt: &PhasePoint) -> Result<()> {
    if pt.x.dim() != sys.dim() || pt.p.len() != sys.dim() {
        return Err(Error::Dimension {
            expected: sys.dim(),
            got: pt.x.dim().max(pt.p.len()),
        });
    }
    Ok(())
}

/// `u* = ⟨p, v₂⟩ / G`.
pub fn optimal_control<S: ControlAffine + ?Sized>(sys: &S, pt: &PhasePoint) -> Result<ControlValue> {
    check_dim(sys, pt)?;
    Ok(dot(&pt.p, &sys.control_field(&pt.x)?) / sys.metric(&pt.x)?)
}

/// `⟨p, v₁ + u·v₂⟩ − ½·G·u²`.
pub fn pre_hamiltonian<S: ControlAffine + ?Sized>(sys: &S, pt: &PhasePoint, u: ControlValue) -> Result<f64> {
    check_dim(sys, pt)?;
    let x = &pt.x;
    Ok(dot(&pt.p, &sys.drift(x)?) + u * dot(&pt.p, &sys.control_field(x)?) - sys.cost(x, u)?)
}

/// The maximized Hamiltonian `⟨p, v₁⟩ + ⟨p, v₂⟩² / (2G)`.
pub fn hamiltonian<S: ControlAffine + ?Sized>(sys: &S, pt: &PhasePoint) -> Result<f64> {
    check_dim(sys, pt)?;
    let x = &pt.x;
    let a = dot(&pt.p, &sys.control_field(x)?);
    Ok(dot(&pt.p, &sys.drift(x)?) + a * a / (2.0 * sys.metric(x)?))
}

/// Hamilton's equations from analytic Jacobians:
/// `ẋ = v₁ + u*·v₂`, `ṗ = −(pᵀDv₁ + u*·pᵀDv₂ − ½·u*²·∇G)`.
pub fn hamilton_rhs<S: ControlAffine + ?Sized>(sys: &S, pt: &PhasePoint) -> Result<PhaseVelocity> {
    check_dim(sys, pt)?;
    let x = &pt.x;
    let p = &pt.p;
    let v1 = sys.drift(x)?;
    let v2 = sys.control_field(x)?;
    let g = sys.metric(x)?;
    let u = dot(p, &v2) / g;
    let a = vec_mat(p, &sys.drift_jacobian(x)?);
    let b = vec_mat(p, &sys.control_jacobian(x)?);
    let dg = sys.metric_gradient(x)?;
    let xdot = v1.iter().zip(v2.iter()).map(|(a, b)| a + u * b).collect();
    let pdot = (0..sys.dim())
        .map(|j| -(a[j] + u * b[j] - 0.5 * u * u * dg[j]))
        .collect();
    Ok(PhaseVelocity { xdot, pdot })
}

/// Central differences of [`hamiltonian`] in `p` and `x`.
pub fn hamilton_rhs_fd<S: ControlAffine + ?Sized>(sys: &S, pt: &PhasePoint, h: f64) -> Result<PhaseVelocity> {
    check_dim(sys, pt)?;
    let n = sys.dim();
    let mut xdot = vec![0.0; n];
    let mut pdot = vec![0.0; n];
    for j in 0..n {
        let mut plus = pt.clone();
        let mut minus = pt.clone();
        plus.p[j] += h;
        minus.p[j] -= h;
        xdot[j] = (hamiltonian(sys, &plus)? - hamiltonian(sys, &minus)?) / (2.0 * h);

        let mut plus = pt.clone();
        let mut minus = pt.clone();
        plus.x.0[j] += h;
        minus.x.0[j] -= h;
        if !sys.in_domain(&plus.x) || !sys.in_domain(&minus.x) {
            return Err(Error::Stencil {
                point: pt.x.0.clone(),
                h,
            });
        }
        pdot[j] = -(hamiltonian(sys, &plus)? - hamiltonian(sys, &minus)?) / (2.0 * h);
    }
    Ok(PhaseVelocity { xdot, pdot })
}

/// Starting phase points whose flows under [`ModelSpec::default_for`] stay
/// in the domain and bounded up to time 5.
pub fn default_phase_point(case: CaseTag) -> PhasePoint {
    let (x, p): (Vec<f64>, Vec<f64>) = match case {
        CaseTag::C11 => (vec![0.0, 0.0], vec![0.5, 0.8]),
        CaseTag::C12 => (vec![0.0, 1.0], vec![0.1, 0.3]),
        CaseTag::C211 => (vec![0.0, 0.2, -0.1], vec![0.3, 0.2, -0.4]),
        CaseTag::C212 => (vec![0.0, 0.5, 1.0], vec![0.2, 0.1, 0.3]),
        CaseTag::C22 => (vec![0.0, 1.0, 0.1], vec![0.1, -0.2, 0.1]),
        CaseTag::C231 => (vec![0.0, 0.1, 0.2], vec![0.1, 0.2, 0.1]),
        CaseTag::C232 => (vec![-1.5, 0.0, 0.3], vec![0.1, 0.2, 0.1]),
        CaseTag::C233 => (vec![0.1, 0.0, 0.3], vec![0.1, 0.2, 0.1]),
    };
    PhasePoint { x: StateVec(x), p }
}

/// Labelled values of `H` and the case's first integrals.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FirstIntegralSet {
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

impl FirstIntegralSet {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }
}

/// Roots of `r² − ε·c·r − ε = 0` for the C231 constant `c = c₂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharRoots {
    pub r1: Complex64,
    pub r2: Complex64,
}

impl CharRoots {
    pub fn is_real(&self) -> bool {
        self.r1.im == 0.0 && self.r2.im == 0.0
    }
}

pub fn characteristic_roots_case231(spec: &ModelSpec) -> Result<CharRoots> {
    if spec.case != CaseTag::C231 {
        return Err(Error::WrongCase {
            case: spec.case,
            what: "characteristic roots belong to C231",
        });
    }
    let eps = spec.params.epsilon;
    let [r1, r2] = quadratic_roots(-eps * spec.params.c2, -eps);
    Ok(CharRoots { r1, r2 })
}

/// `H` followed by the case's first integrals.
///
/// C232/C233 carry `p₂` only for constant `F₂₀`.
/// C231 integrals `(p₁ + r·p₃)·e^{r·x²}` are complex when the roots are; they
/// are then logged as `I1.re, I1.im, I2.re, I2.im`.
pub fn first_integrals(spec: &ModelSpec, pt: &PhasePoint) -> Result<FirstIntegralSet> {
    let h = hamiltonian(spec, pt)?;
    let x = &pt.x;
    let p = &pt.p;
    let mut names: Vec<String> = vec!["H".into()];
    let mut values = vec![h];
    let mut push = |n: &str, v: f64| {
        names.push(n.to_string());
        values.push(v);
    };
    match spec.case {
        CaseTag::C11 => push("p2", p[1]),
        CaseTag::C12 => {
            push("I2", p[0]);
            push("I3", p[0] * x[0] + p[1] * x[1]);
        }
        CaseTag::C211 => push("p1", p[0]),
        CaseTag::C212 => {
            push("p1", p[0]);
            push("p2", p[1]);
        }
        CaseTag::C22 => {
            let (i1, i2, i3) = case22_integrals(x, p);
            push("I1", i1);
            push("I2", i2);
            push("I3", i3);
        }
        CaseTag::C231 => {
            let roots = characteristic_roots_case231(spec)?;
            let integral = |r: Complex64| (p[0] + r * p[2]) * (r * x[1]).exp();
            let (i1, i2) = (integral(roots.r1), integral(roots.r2));
            if roots.is_real() {
                push("I1", i1.re);
                push("I2", i2.re);
            } else {
                push("I1.re", i1.re);
                push("I1.im", i1.im);
                push("I2.re", i2.re);
                push("I2.im", i2.im);
            }
            push("I3", p[1]);
        }
        CaseTag::C232 | CaseTag::C233 => {
            // x² is cyclic only while F₂₀ is constant
            if spec.f20.derivative().coeffs.iter().all(|c| *c == 0.0) {
                push("p2", p[1]);
            }
        }
    }
    Ok(FirstIntegralSet { names, values })
}

fn case22_integrals(x: &[f64], p: &[f64]) -> (f64, f64, f64) {
    let i1 = p[0];
    let i2 = p[0] * x[0] + p[1] * x[1] + p[2] * x[2];
    let i3 = p[0] * x[0] * x[0]
        + 2.0 * p[1] * x[0] * x[1]
        + 2.0 * p[2] * x[0] * x[2]
        + 2.0 * p[2] * x[1] * x[1];
    (i1, i2, i3)
}

/// Solves `I₁ = k₁, I₂ = k₂, I₃ = k₃` of C22 for the costate at `x`.
pub fn reduce_momenta_case22(x: &[f64], k1: f64, k2: f64, k3: f64) -> Result<Vec<f64>> {
    if x.len() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            got: x.len(),
        });
    }
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    if x2 == 0.0 || !x2.is_finite() {
        return Err(Error::OutOfDomain {
            case: CaseTag::C22,
            point: x.to_vec(),
        });
    }
    let q2 = x2 * x2;
    let q3 = q2 * x2;
    let p1 = k1;
    let p2 = k1 * (-x1 / x2 - x1 * x1 * x3 / (2.0 * q3))
        + k2 * (1.0 / x2 + x1 * x3 / q3)
        + k3 * (-x3 / (2.0 * q3));
    let p3 = k1 * (x1 * x1 / (2.0 * q2)) + k2 * (-x1 / q2) + k3 * (1.0 / (2.0 * q2));
    Ok(vec![p1, p2, p3])
}
