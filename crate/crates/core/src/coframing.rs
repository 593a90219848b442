//! Canonical coframes and numerically estimated structure functions.
//!
//! For a frame `(v₁, …, vₙ)` with dual coframe `(η¹, …, ηⁿ)` the structure
//! functions are `T^i_{jk} = −η^i([v_j, v_k])`. The model is homogeneous iff
//! all of them are constant; [`homogeneity_check`] estimates them at several
//! points and reports the spread.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::models::{dot, CaseTag, ModelSpec, StateVec};

/// Default central-difference step for Jacobians of frame fields.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// A frame on an open set together with its dual coframe.
pub trait Framing {
    fn dim(&self) -> usize;
    fn in_domain(&self, x: &[f64]) -> bool;
    /// Whether the cube of half-width `h` around `x` lies in the domain.
    /// The default only probes the stencil points along each axis.
    fn box_in_domain(&self, x: &[f64], h: f64) -> bool {
        (0..x.len()).all(|j| {
            [-1.0, 1.0].iter().all(|s| {
                let mut y = x.to_vec();
                y[j] += s * h;
                self.in_domain(&y)
            })
        })
    }

    /// Frame vectors `v₁, …, vₙ` at `x`.
    fn frame(&self, x: &[f64]) -> Result<Vec<StateVec>>;

    /// Dual coframe; by default the inverse of the frame matrix.
    fn coframe(&self, x: &[f64]) -> Result<CoframeValue> {
        let m = frame_matrix(&self.frame(x)?);
        let inv = m.try_inverse().ok_or_else(|| Error::Guard("degenerate frame".into()))?;
        Ok(CoframeValue { rows: inv })
    }
}

/// Row `i` holds the components of `ηⁱ` in the basis `dx¹, …, dxⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoframeValue {
    pub rows: DMatrix<f64>,
}

impl CoframeValue {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        CoframeValue {
            rows: DMatrix::from_fn(n, n, |i, j| rows[i][j]),
        }
    }

    /// `ηⁱ(v)`, `i` zero-based.
    pub fn apply(&self, i: usize, v: &[f64]) -> f64 {
        (0..v.len()).map(|j| self.rows[(i, j)] * v[j]).sum()
    }
}

/// Columns are the frame vectors.
pub fn frame_matrix(frame: &[StateVec]) -> DMatrix<f64> {
    let n = frame.len();
    DMatrix::from_fn(n, n, |i, j| frame[j][i])
}

/// `max |η·V − I|` at `x`.
pub fn duality_error<F: Framing + ?Sized>(framing: &F, x: &[f64]) -> Result<f64> {
    let v = frame_matrix(&framing.frame(x)?);
    let eta = framing.coframe(x)?;
    let n = v.nrows();
    Ok((eta.rows * v - DMatrix::<f64>::identity(n, n)).abs().max())
}

impl Framing for ModelSpec {
    fn dim(&self) -> usize {
        self.case.dim()
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        crate::models::ControlAffine::in_domain(self, x)
    }

    fn box_in_domain(&self, x: &[f64], h: f64) -> bool {
        ModelSpec::box_in_domain(self, x, h)
    }

    fn frame(&self, x: &[f64]) -> Result<Vec<StateVec>> {
        self.canonical_frame(x)
    }

    /// The case's canonical coframe, written out per case.
    fn coframe(&self, x: &[f64]) -> Result<CoframeValue> {
        // domain and length checks
        let frame = self.canonical_frame(x)?;
        let p = &self.params;
        let rows: Vec<Vec<f64>> = match self.case {
            CaseTag::C11 => vec![vec![1.0, 0.0], vec![0.0, (p.c1 * x[0]).exp()]],
            CaseTag::C12 => {
                let r = 1.0 / x[1];
                vec![vec![r, 0.0], vec![-p.j0 * r, r]]
            }
            CaseTag::C211 => vec![
                vec![1.0, 0.0, 0.0],
                vec![-p.c2 * x[1], -p.c3, 1.0],
                vec![-x[2], 1.0, 0.0],
            ],
            CaseTag::C212 => {
                let w = 1.0 / (p.c1 * x[2]);
                vec![
                    vec![1.0, 0.0, 0.0],
                    vec![-p.c3 / p.c1, 0.0, w],
                    vec![-1.0 / p.c1, w, 0.0],
                ]
            }
            CaseTag::C22 => {
                let (x2, x3) = (x[1], x[2]);
                let j = 1.5 * (x3 / x2).powi(2) + p.c1;
                let j3 = 3.0 * x3 / (x2 * x2);
                let k = j3 - x3 / (x2 * x2);
                vec![
                    vec![1.0 / x2, 0.0, 0.0],
                    vec![-j / x2 + k * x3 / x2, -k, 1.0 / x2],
                    vec![-x3 / (x2 * x2), 1.0 / x2, 0.0],
                ]
            }
            CaseTag::C231 | CaseTag::C232 | CaseTag::C233 => {
                let ev = self.case23_eval(x)?;
                let eps = p.epsilon;
                let s = 1.0 / (eps * ev.h1).sqrt();
                let eta1 = vec![1.0, -x[2], 0.0];
                let eta3 = vec![0.0, s * ev.h, -s];
                let base = vec![-eps * ev.j / s, eps * (1.0 + ev.j * x[2]) / s, 0.0];
                let shift = dot(&base, &frame[2]);
                let eta2 = base.iter().zip(&eta3).map(|(b, e)| b - shift * e).collect();
                vec![eta1, eta2, eta3]
            }
        };
        Ok(CoframeValue::from_rows(&rows))
    }
}

/// A two-state framing `(v₁, v₂/√G)` for an arbitrary positive metric `G`.
///
/// Lets the homogeneity check run on metrics outside the catalog, e.g. a C11
/// drift/control pair with a perturbed `G`.
pub struct UnitControlFraming<G> {
    pub spec: ModelSpec,
    pub metric: G,
}

impl<G: Fn(&[f64]) -> f64> Framing for UnitControlFraming<G> {
    fn dim(&self) -> usize {
        2
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        crate::models::ControlAffine::in_domain(&self.spec, x) && (self.metric)(x) > 0.0
    }

    fn frame(&self, x: &[f64]) -> Result<Vec<StateVec>> {
        use crate::models::ControlAffine;
        if self.spec.dim() != 2 {
            return Err(Error::WrongCase {
                case: self.spec.case,
                what: "unit-control framing is two-state only",
            });
        }
        let scale = 1.0 / (self.metric)(x).sqrt();
        let v2 = self.spec.control_field(x)?.iter().map(|c| c * scale).collect();
        Ok(vec![self.spec.drift(x)?, StateVec(v2)])
    }
}

/// `T^i_{jk}` for all `i` and `j < k`; antisymmetric in `(j, k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureTensor {
    n: usize,
    entries: Vec<f64>,
}

impl StructureTensor {
    pub fn zeros(n: usize) -> Self {
        StructureTensor {
            n,
            entries: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `T^i_{jk}` with one-based indices, so `get(2, 1, 2)` is `T²₁₂`.
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.entries[self.index(i - 1, j - 1, k - 1)]
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let a = self.index(i, j, k);
        let b = self.index(i, k, j);
        self.entries[a] = v;
        self.entries[b] = -v;
    }

    /// `(i, j, k, T^i_{jk})` for `j < k`, one-based.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| {
            (0..n).flat_map(move |j| {
                (j + 1..n).map(move |k| (i + 1, j + 1, k + 1, self.entries[self.index(i, j, k)]))
            })
        })
    }

    /// Largest violation of the Jacobi identity for the Lie algebra whose
    /// brackets are `[e_j, e_k] = −T^i_{jk} e_i`. Vanishes when the constant
    /// structure functions are consistent with `d² = 0`.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.n;
        let c = |i: usize, j: usize, k: usize| -self.entries[self.index(i, j, k)];
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for d in 0..n {
                    for m in 0..n {
                        let mut s = 0.0;
                        for l in 0..n {
                            s += c(l, a, b) * c(m, l, d)
                                + c(l, b, d) * c(m, l, a)
                                + c(l, d, a) * c(m, l, b);
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }
}

fn fd_frame_jacobians<F: Framing + ?Sized>(framing: &F, x: &[f64], h: f64) -> Result<Vec<DMatrix<f64>>> {
    let n = x.len();
    let mut jac = vec![DMatrix::zeros(n, n); n];
    for j in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let fp = framing.frame(&xp)?;
        let fm = framing.frame(&xm)?;
        for (a, m) in jac.iter_mut().enumerate() {
            for i in 0..n {
                m[(i, j)] = (fp[a][i] - fm[a][i]) / (2.0 * h);
            }
        }
    }
    Ok(jac)
}

/// `T^i_{jk} = −η^i([v_j, v_k])(x)` with central-difference Jacobians.
pub fn structure_functions<F: Framing + ?Sized>(framing: &F, x: &[f64], h: f64) -> Result<StructureTensor> {
    if !(h > 0.0) {
        return Err(Error::Config(format!("finite-difference step must be positive, got {h}")));
    }
    let frame = framing.frame(x)?;
    let eta = framing.coframe(x)?;
    if !framing.box_in_domain(x, h) {
        return Err(Error::Stencil { point: x.to_vec(), h });
    }
    let jac = fd_frame_jacobians(framing, x, h)?;
    let n = frame.len();
    let mut t = StructureTensor::zeros(n);
    for j in 0..n {
        for k in j + 1..n {
            // [v_j, v_k] = Dv_k·v_j − Dv_j·v_k
            let a = crate::models::mat_vec(&jac[k], &frame[j]);
            let b = crate::models::mat_vec(&jac[j], &frame[k]);
            let br: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p - q).collect();
            for i in 0..n {
                t.set(i, j, k, -eta.apply(i, &br));
            }
        }
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneityReport {
    pub pass: bool,
    pub max_spread: f64,
    /// Mean of the estimates over the valid points.
    pub mean: StructureTensor,
    pub points_used: usize,
}

/// Estimates the structure functions at each in-domain point and reports the
/// largest range of any component. Out-of-domain points are skipped.
pub fn homogeneity_check<F: Framing + ?Sized>(
    framing: &F,
    points: &[StateVec],
    h: f64,
    tol: f64,
) -> Result<HomogeneityReport> {
    let estimates: Vec<StructureTensor> = points
        .iter()
        .filter(|x| framing.in_domain(x))
        .map(|x| structure_functions(framing, x, h))
        .collect::<Result<_>>()?;
    if estimates.len() < 2 {
        return Err(Error::TooFew {
            what: "in-domain points",
            needed: 2,
            got: estimates.len(),
        });
    }
    let n = framing.dim();
    let len = n * n * n;
    let mut max_spread: f64 = 0.0;
    let mut mean = StructureTensor::zeros(n);
    for e in 0..len {
        let vals = estimates.iter().map(|t| t.entries[e]);
        let lo = vals.clone().fold(f64::INFINITY, f64::min);
        let hi = vals.clone().fold(f64::NEG_INFINITY, f64::max);
        max_spread = max_spread.max(hi - lo);
        mean.entries[e] = vals.sum::<f64>() / estimates.len() as f64;
    }
    Ok(HomogeneityReport {
        pass: max_spread <= tol,
        max_spread,
        mean,
        points_used: estimates.len(),
    })
}
