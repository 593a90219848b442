//! Named invariant suites with one pass/fail line per check.
//!
//! Sample points come from a seeded ChaCha stream so a report is a pure
//! function of `(spec, suite, seed)`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coframing::{duality_error, homogeneity_check, DEFAULT_FD_STEP};
use crate::error::Result;
use crate::integrate::{integrate, max_integral_drift, IntegratorConfig, StopReason};
use crate::models::{CaseTag, ControlAffine, ModelSpec};
use crate::pmp::{default_phase_point, hamilton_rhs, hamilton_rhs_fd, PhasePoint};
use crate::verify::{
    a19_roots, apply_symmetry, expected_c2_a9, expected_schwarzian, isometry_residual, pde_residual_a9,
    schwarzian_x1, SymmetryTransform, A9_STEP, ISOMETRY_STEP, SCHWARZIAN_STEP,
};

pub const DEFAULT_SEED: u64 = 42;

pub const DUALITY_TOL: f64 = 1e-10;
pub const HOMOGENEITY_TOL: f64 = 1e-5;
pub const GRADIENT_TOL: f64 = 1e-6;
pub const DRIFT_TOL: f64 = 1e-8;
pub const A9_TOL: f64 = 1e-5;
pub const SCHWARZIAN_TOL: f64 = 1e-4;
pub const ROOT_TOL: f64 = 1e-12;
pub const ISOMETRY_TOL: f64 = 1e-6;
pub const CLOSURE_TOL: f64 = 1e-9;

/// Horizon of the conservation run from the default phase point.
pub const CONSERVATION_HORIZON: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Homogeneity,
    Duality,
    Integrals,
    Appendix,
    Symmetry,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub suite: String,
    pub check: String,
    pub value: f64,
    pub tol: f64,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckLine {
    fn below(suite: &str, check: &str, value: f64, tol: f64) -> Self {
        CheckLine {
            suite: suite.into(),
            check: check.into(),
            value,
            tol,
            outcome: if value < tol { Outcome::Pass } else { Outcome::Fail },
            note: None,
        }
    }

    fn skip(suite: &str, note: &str) -> Self {
        CheckLine {
            suite: suite.into(),
            check: "-".into(),
            value: f64::NAN,
            tol: f64::NAN,
            outcome: Outcome::Skip,
            note: Some(note.into()),
        }
    }

    fn failed(suite: &str, check: &str, tol: f64, why: String) -> Self {
        CheckLine {
            suite: suite.into(),
            check: check.into(),
            value: f64::NAN,
            tol,
            outcome: Outcome::Fail,
            note: Some(why),
        }
    }

    fn with_note(mut self, note: String) -> Self {
        self.note = Some(note);
        self
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Skip => "SKIP",
        };
        write!(f, "{tag} {}/{}", self.suite, self.check)?;
        if !self.value.is_nan() {
            write!(f, " value={:.3e}", self.value)?;
        }
        if self.tol.is_finite() {
            write!(f, " tol={:.0e}", self.tol)?;
        }
        if let Some(n) = &self.note {
            write!(f, " note=\"{n}\"")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub case: CaseTag,
    pub lines: Vec<CheckLine>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.lines.iter().all(|l| l.outcome != Outcome::Fail)
    }
}

/// Runs one suite (or all of them) on a validated spec.
pub fn run_suite(spec: &ModelSpec, suite: Suite, seed: u64) -> Result<SuiteReport> {
    spec.ensure_valid()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = Vec::new();
    let want = |s: Suite| suite == s || suite == Suite::All;
    if want(Suite::Duality) {
        lines.extend(duality(spec, &mut rng)?);
    }
    if want(Suite::Homogeneity) {
        lines.extend(homogeneity(spec, &mut rng)?);
    }
    if want(Suite::Integrals) {
        lines.extend(integrals(spec, &mut rng)?);
    }
    if want(Suite::Appendix) {
        lines.extend(appendix(spec, &mut rng)?);
    }
    if want(Suite::Symmetry) {
        lines.extend(symmetry(spec, &mut rng)?);
    }
    Ok(SuiteReport { case: spec.case, lines })
}

fn duality(spec: &ModelSpec, rng: &mut ChaCha8Rng) -> Result<Vec<CheckLine>> {
    let mut worst: f64 = 0.0;
    for x in spec.sample_points(20, rng)? {
        worst = worst.max(duality_error(spec, &x)?);
    }
    Ok(vec![CheckLine::below("duality", "max_error", worst, DUALITY_TOL)])
}

fn homogeneity(spec: &ModelSpec, rng: &mut ChaCha8Rng) -> Result<Vec<CheckLine>> {
    let pts = spec.sample_points(10, rng)?;
    let r = homogeneity_check(spec, &pts, DEFAULT_FD_STEP, HOMOGENEITY_TOL)?;
    let shown: Vec<String> = r
        .mean
        .iter()
        .filter(|(.., v)| v.abs() > 1e-6)
        .map(|(i, j, k, v)| format!("T{i}_{j}{k}={v:.6}"))
        .collect();
    Ok(vec![
        CheckLine::below("homogeneity", "max_spread", r.max_spread, HOMOGENEITY_TOL).with_note(shown.join(" ")),
    ])
}

fn random_phase_point(spec: &ModelSpec, rng: &mut ChaCha8Rng) -> Result<PhasePoint> {
    let x = spec.sample_point(rng)?;
    let p = (0..spec.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    PhasePoint::new(x, p)
}

fn integrals(spec: &ModelSpec, rng: &mut ChaCha8Rng) -> Result<Vec<CheckLine>> {
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let pt = random_phase_point(spec, rng)?;
        let a = hamilton_rhs(spec, &pt)?.to_flat();
        let f = hamilton_rhs_fd(spec, &pt, 1e-5)?.to_flat();
        for (u, v) in a.iter().zip(&f) {
            worst = worst.max((u - v).abs() / (1.0 + u.abs()));
        }
    }
    let mut lines = vec![CheckLine::below("integrals", "gradient", worst, GRADIENT_TOL)];
    let start = default_phase_point(spec.case);
    if !spec.in_domain(&start.x) {
        lines.push(CheckLine::failed(
            "integrals",
            "conservation",
            DRIFT_TOL,
            "default phase point is outside this spec's domain".into(),
        ));
        return Ok(lines);
    }
    let traj = integrate(spec, &start, (0.0, CONSERVATION_HORIZON), &IntegratorConfig::default())?;
    let drift = max_integral_drift(&traj);
    let mut line = CheckLine::below("integrals", "conservation", drift, DRIFT_TOL);
    if traj.stop_reason != StopReason::Horizon {
        line.outcome = Outcome::Fail;
    }
    lines.push(line.with_note(format!("stop_reason={} names={}", traj.stop_reason, traj.integral_names.join(","))));
    Ok(lines)
}

fn appendix(spec: &ModelSpec, rng: &mut ChaCha8Rng) -> Result<Vec<CheckLine>> {
    if !matches!(spec.case, CaseTag::C231 | CaseTag::C232 | CaseTag::C233) {
        return Ok(vec![CheckLine::skip("appendix", "only the C23x family carries the appendix identities")]);
    }
    let pts = spec.sample_points(10, rng)?;
    let c2 = expected_c2_a9(spec)?;
    let s_want = expected_schwarzian(spec)?;
    let (mut a9, mut a10): (f64, f64) = (0.0, 0.0);
    for x in &pts {
        a9 = a9.max(pde_residual_a9(spec, x, c2, A9_STEP)?);
        a10 = a10.max((schwarzian_x1(spec, x, SCHWARZIAN_STEP)? - s_want).abs());
    }
    let mut lines = vec![
        CheckLine::below("appendix", "A9", a9, A9_TOL).with_note(format!("expected_c2={c2}")),
        CheckLine::below("appendix", "A10", a10, SCHWARZIAN_TOL).with_note(format!("expected={s_want}")),
    ];
    if spec.case == CaseTag::C231 {
        let (r, res) = a19_roots(spec.params.epsilon, spec.params.c2);
        lines.push(
            CheckLine::below("appendix", "A19", res, ROOT_TOL).with_note(format!("r1={} r2={}", r[0], r[1])),
        );
    }
    Ok(lines)
}

fn symmetry(spec: &ModelSpec, rng: &mut ChaCha8Rng) -> Result<Vec<CheckLine>> {
    if matches!(spec.case, CaseTag::C232 | CaseTag::C233) {
        return Ok(vec![CheckLine::skip("symmetry", "no residual group implemented (F20 is not normalized)")]);
    }
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let s = SymmetryTransform::random(spec.case, rng)?;
        for x in spec.sample_points(10, rng)? {
            worst = worst.max(isometry_residual(spec, &s, &x, ISOMETRY_STEP)?.max());
        }
    }
    let mut lines = vec![CheckLine::below("symmetry", "isometry", worst, ISOMETRY_TOL)];
    if matches!(spec.case, CaseTag::C11 | CaseTag::C12 | CaseTag::C22) {
        let mut worst: f64 = 0.0;
        for _ in 0..5 {
            let s1 = SymmetryTransform::random(spec.case, rng)?;
            let s2 = SymmetryTransform::random(spec.case, rng)?;
            let x = spec.sample_point(rng)?;
            let seq = apply_symmetry(spec, &s2, &x).and_then(|y| apply_symmetry(spec, &s1, &y));
            let comp = apply_symmetry(spec, &SymmetryTransform::compose(spec, &s1, &s2)?, &x);
            if let (Ok(a), Ok(b)) = (seq, comp) {
                for i in 0..a.dim() {
                    worst = worst.max((a[i] - b[i]).abs() / (1.0 + a[i].abs()));
                }
            }
        }
        lines.push(CheckLine::below("symmetry", "closure", worst, CLOSURE_TOL));
    }
    Ok(lines)
}
