//! Numerical integration of the Hamiltonian flow.
//!
//! Two explicit schemes: classical fixed-step RK4 and adaptive
//! Dormand–Prince 5(4). Every accepted node records the state, costate,
//! optimal control and first integrals. Leaving the domain, blowing up or
//! running out of step budget ends the run early with a [`StopReason`]; that
//! is a normal return, not an error.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{norm, ControlAffine, ModelSpec, StateVec};
use crate::pmp::{first_integrals, hamilton_rhs, optimal_control, FirstIntegralSet, PhasePoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4Fixed,
    Rk45Adaptive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step for RK4; first trial step for RK45.
    pub step: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
    /// Stop once `‖(x, p)‖` exceeds this.
    pub blow_up_norm: f64,
    /// Stop once the domain margin drops to this.
    pub domain_margin: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rk45Adaptive,
            step: 1e-2,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_steps: 1_000_000,
            blow_up_norm: 1e8,
            domain_margin: 1e-6,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(step: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk4Fixed,
            step,
            ..Default::default()
        }
    }

    pub fn rk45(tol: f64) -> Self {
        IntegratorConfig {
            abs_tol: tol,
            rel_tol: tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        pos("step", self.step)?;
        pos("abs_tol", self.abs_tol)?;
        pos("rel_tol", self.rel_tol)?;
        pos("blow_up_norm", self.blow_up_norm)?;
        if !(self.domain_margin >= 0.0) {
            return Err(Error::Config("domain_margin must be nonnegative".into()));
        }
        if self.max_steps < 1 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Horizon,
    DomainExit,
    BlowUp,
    StepFailure,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Horizon => "horizon",
            StopReason::DomainExit => "domain_exit",
            StopReason::BlowUp => "blow_up",
            StopReason::StepFailure => "step_failure",
        })
    }
}

/// Accepted nodes of one integration run.
///
/// Integral names are stored once; `integral_values[i]` lines up with them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVec>,
    pub costates: Vec<Vec<f64>>,
    pub controls: Vec<f64>,
    pub integral_names: Vec<String>,
    pub integral_values: Vec<Vec<f64>>,
    pub stop_reason: StopReason,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn phase_point(&self, i: usize) -> PhasePoint {
        PhasePoint {
            x: self.states[i].clone(),
            p: self.costates[i].clone(),
        }
    }

    pub fn last_point(&self) -> PhasePoint {
        self.phase_point(self.len() - 1)
    }

    pub fn integral_log(&self, i: usize) -> FirstIntegralSet {
        FirstIntegralSet {
            names: self.integral_names.clone(),
            values: self.integral_values[i].clone(),
        }
    }

    /// Every `stride`-th node, always keeping the last one.
    pub fn subsample(&self, stride: usize) -> Trajectory {
        let stride = stride.max(1);
        let n = self.len();
        let keep: Vec<usize> = (0..n)
            .filter(|i| i % stride == 0 || *i + 1 == n)
            .collect();
        let pick = |v: &Vec<f64>| keep.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Trajectory {
            times: pick(&self.times),
            states: keep.iter().map(|&i| self.states[i].clone()).collect(),
            costates: keep.iter().map(|&i| self.costates[i].clone()).collect(),
            controls: pick(&self.controls),
            integral_names: self.integral_names.clone(),
            integral_values: keep.iter().map(|&i| self.integral_values[i].clone()).collect(),
            stop_reason: self.stop_reason,
        }
    }
}

struct Node {
    t: f64,
    z: Vec<f64>,
    u: f64,
    integrals: FirstIntegralSet,
}

enum NodeCheck {
    Ok(Node),
    Stop(StopReason),
}

fn check_node(spec: &ModelSpec, cfg: &IntegratorConfig, t: f64, z: &[f64]) -> NodeCheck {
    if z.iter().any(|v| !v.is_finite()) || norm(z) > cfg.blow_up_norm {
        return NodeCheck::Stop(StopReason::BlowUp);
    }
    let pt = PhasePoint::from_flat(z);
    if !(spec.domain_margin(&pt.x) > cfg.domain_margin) {
        return NodeCheck::Stop(StopReason::DomainExit);
    }
    match (optimal_control(spec, &pt), first_integrals(spec, &pt)) {
        (Ok(u), Ok(integrals)) if u.is_finite() && integrals.values.iter().all(|v| v.is_finite()) => {
            NodeCheck::Ok(Node {
                t,
                z: z.to_vec(),
                u,
                integrals,
            })
        }
        _ => NodeCheck::Stop(StopReason::DomainExit),
    }
}

fn rhs(spec: &ModelSpec, z: &[f64]) -> Option<Vec<f64>> {
    if z.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let pt = PhasePoint::from_flat(z);
    if !spec.in_domain(&pt.x) {
        return None;
    }
    let v = hamilton_rhs(spec, &pt).ok()?.to_flat();
    v.iter().all(|a| a.is_finite()).then_some(v)
}

fn axpy(z: &[f64], h: f64, terms: &[(f64, &Vec<f64>)]) -> Vec<f64> {
    let mut out = z.to_vec();
    for (c, k) in terms {
        if *c != 0.0 {
            for (o, v) in out.iter_mut().zip(k.iter()) {
                *o += h * c * v;
            }
        }
    }
    out
}

fn rk4_step(spec: &ModelSpec, z: &[f64], h: f64) -> Option<Vec<f64>> {
    let k1 = rhs(spec, z)?;
    let k2 = rhs(spec, &axpy(z, h, &[(0.5, &k1)]))?;
    let k3 = rhs(spec, &axpy(z, h, &[(0.5, &k2)]))?;
    let k4 = rhs(spec, &axpy(z, h, &[(1.0, &k3)]))?;
    Some(axpy(
        z,
        h,
        &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)],
    ))
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step: the 5th-order solution and the scaled error norm.
fn dopri_step(spec: &ModelSpec, z: &[f64], h: f64, cfg: &IntegratorConfig) -> Option<(Vec<f64>, f64)> {
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    k.push(rhs(spec, z)?);
    for row in A.iter() {
        let terms: Vec<(f64, &Vec<f64>)> = row.iter().copied().zip(k.iter()).collect();
        let zi = axpy(z, h, &terms);
        k.push(rhs(spec, &zi)?);
    }
    let terms: Vec<(f64, &Vec<f64>)> = A[5].iter().copied().zip(k.iter()).collect();
    let z5 = axpy(z, h, &terms);
    let mut sum = 0.0;
    for i in 0..z.len() {
        // the 5th-order weights are the last stage row, with 0 for k7
        let e: f64 = (0..7)
            .map(|s| {
                let b = if s < 6 { A[5][s] } else { 0.0 };
                (b - B4[s]) * k[s][i]
            })
            .sum::<f64>()
            * h;
        let sc = cfg.abs_tol + cfg.rel_tol * z[i].abs().max(z5[i].abs());
        sum += (e / sc).powi(2);
    }
    Some((z5, (sum / z.len() as f64).sqrt()))
}

/// Integrates Hamilton's equations from `start` over `t_span`.
pub fn integrate(spec: &ModelSpec, start: &PhasePoint, t_span: (f64, f64), cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let (t0, t1) = t_span;
    if !(t0 < t1) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::Config(format!("time span must satisfy t0 < t1, got ({t0}, {t1})")));
    }
    if start.x.dim() != spec.dim() || start.p.len() != spec.dim() {
        return Err(Error::Dimension {
            expected: spec.dim(),
            got: start.x.dim(),
        });
    }
    if !spec.in_domain(&start.x) {
        return Err(Error::OutOfDomain {
            case: spec.case,
            point: start.x.0.clone(),
        });
    }

    let mut nodes: Vec<Node> = Vec::new();
    let z0 = start.to_flat();
    let stop = match check_node(spec, cfg, t0, &z0) {
        NodeCheck::Ok(n) => {
            nodes.push(n);
            match cfg.method {
                Method::Rk4Fixed => run_rk4(spec, cfg, t0, t1, z0, &mut nodes),
                Method::Rk45Adaptive => run_rk45(spec, cfg, t0, t1, z0, &mut nodes),
            }
        }
        NodeCheck::Stop(r) => {
            // start sits inside the stop margin: record it and stop
            let pt = start.clone();
            nodes.push(Node {
                t: t0,
                z: z0,
                u: optimal_control(spec, &pt)?,
                integrals: first_integrals(spec, &pt)?,
            });
            r
        }
    };

    let integral_names = nodes[0].integrals.names.clone();
    let mut traj = Trajectory {
        times: Vec::with_capacity(nodes.len()),
        states: Vec::with_capacity(nodes.len()),
        costates: Vec::with_capacity(nodes.len()),
        controls: Vec::with_capacity(nodes.len()),
        integral_names,
        integral_values: Vec::with_capacity(nodes.len()),
        stop_reason: stop,
    };
    for n in nodes {
        let pt = PhasePoint::from_flat(&n.z);
        traj.times.push(n.t);
        traj.states.push(pt.x);
        traj.costates.push(pt.p);
        traj.controls.push(n.u);
        traj.integral_values.push(n.integrals.values);
    }
    Ok(traj)
}

fn underflow(t: f64, h: f64) -> bool {
    h <= 1e-14 * t.abs().max(1.0)
}

fn run_rk4(
    spec: &ModelSpec,
    cfg: &IntegratorConfig,
    t0: f64,
    t1: f64,
    mut z: Vec<f64>,
    nodes: &mut Vec<Node>,
) -> StopReason {
    let mut t = t0;
    let mut steps = 0usize;
    let mut h_try = cfg.step;
    loop {
        if steps >= cfg.max_steps {
            return StopReason::StepFailure;
        }
        let last = t + h_try >= t1;
        let h = if last { t1 - t } else { h_try };
        match rk4_step(spec, &z, h) {
            None => {
                h_try = h / 2.0;
                if underflow(t, h_try) {
                    return StopReason::DomainExit;
                }
                continue;
            }
            Some(zn) => {
                steps += 1;
                let tn = if last { t1 } else { t + h };
                match check_node(spec, cfg, tn, &zn) {
                    NodeCheck::Stop(r) => return r,
                    NodeCheck::Ok(n) => nodes.push(n),
                }
                t = tn;
                z = zn;
                if last {
                    return StopReason::Horizon;
                }
            }
        }
    }
}

fn run_rk45(
    spec: &ModelSpec,
    cfg: &IntegratorConfig,
    t0: f64,
    t1: f64,
    mut z: Vec<f64>,
    nodes: &mut Vec<Node>,
) -> StopReason {
    let mut t = t0;
    let mut h = cfg.step.min(t1 - t0);
    let mut attempts = 0usize;
    loop {
        if attempts >= cfg.max_steps {
            return StopReason::StepFailure;
        }
        attempts += 1;
        let last = t + h >= t1;
        let hs = if last { t1 - t } else { h };
        match dopri_step(spec, &z, hs, cfg) {
            None => {
                h = hs / 4.0;
                if underflow(t, h) {
                    return StopReason::DomainExit;
                }
            }
            Some((zn, err)) if err.is_finite() && err <= 1.0 => {
                let tn = if last { t1 } else { t + hs };
                match check_node(spec, cfg, tn, &zn) {
                    NodeCheck::Stop(r) => return r,
                    NodeCheck::Ok(n) => nodes.push(n),
                }
                t = tn;
                z = zn;
                if last {
                    return StopReason::Horizon;
                }
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h = hs * factor;
            }
            Some((_, err)) => {
                let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                h = hs * factor;
                if underflow(t, h) {
                    return StopReason::StepFailure;
                }
            }
        }
    }
}

/// Phase points at each of `times` (increasing, first = start time), by
/// re-integrating segment to segment so every sample is an accepted node.
pub fn integrate_at(
    spec: &ModelSpec,
    start: &PhasePoint,
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<(Vec<PhasePoint>, StopReason)> {
    let mut out = vec![start.clone()];
    let mut cur = start.clone();
    for w in times.windows(2) {
        let seg = integrate(spec, &cur, (w[0], w[1]), cfg)?;
        if seg.stop_reason != StopReason::Horizon {
            return Ok((out, seg.stop_reason));
        }
        cur = seg.last_point();
        out.push(cur.clone());
    }
    Ok((out, StopReason::Horizon))
}

/// `∫ Q dt` over a sampled curve by composite Simpson on a non-uniform grid.
pub fn energy_of_samples(times: &[f64], q: &[f64]) -> Result<f64> {
    let n = times.len();
    if n < 3 || q.len() != n {
        return Err(Error::TooFew {
            what: "nodes for Simpson quadrature",
            needed: 3,
            got: n.min(q.len()),
        });
    }
    let mut total = 0.0;
    let mut i = 0;
    while i + 2 < n {
        let h0 = times[i + 1] - times[i];
        let h1 = times[i + 2] - times[i + 1];
        let s = h0 + h1;
        total += s / 6.0
            * ((2.0 - h1 / h0) * q[i] + s * s / (h0 * h1) * q[i + 1] + (2.0 - h0 / h1) * q[i + 2]);
        i += 2;
    }
    if i + 1 < n {
        // odd number of intervals: quadratic through the last three nodes
        let h0 = times[n - 2] - times[n - 3];
        let h1 = times[n - 1] - times[n - 2];
        let alpha = (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1));
        let beta = (h1 * h1 + 3.0 * h0 * h1) / (6.0 * h0);
        let eta = h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
        total += alpha * q[n - 1] + beta * q[n - 2] - eta * q[n - 3];
    }
    Ok(total)
}

/// Energy `∫ ½·G·u² dt` of a trajectory, from the logged controls.
pub fn energy(spec: &ModelSpec, traj: &Trajectory) -> Result<f64> {
    let q = traj
        .states
        .iter()
        .zip(&traj.controls)
        .map(|(x, &u)| spec.cost(x, u))
        .collect::<Result<Vec<_>>>()?;
    energy_of_samples(&traj.times, &q)
}

/// Per integral, `max_t |I(t) − I(t₀)| / max(1, |I(t₀)|)`.
pub fn integral_drift(traj: &Trajectory) -> Vec<(String, f64)> {
    let Some(first) = traj.integral_values.first() else {
        return Vec::new();
    };
    traj.integral_names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let i0 = first[k];
            let worst = traj
                .integral_values
                .iter()
                .map(|v| (v[k] - i0).abs())
                .fold(0.0, f64::max);
            (name.clone(), worst / i0.abs().max(1.0))
        })
        .collect()
}

pub fn max_integral_drift(traj: &Trajectory) -> f64 {
    integral_drift(traj).into_iter().map(|(_, d)| d).fold(0.0, f64::max)
}
