//! The `pag` command line.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or configuration error,
//! 3 early stop or pole. Trajectory data goes to `--out` (or the config's
//! output path) and falls back to stdout; the one-line summary then moves to
//! stderr.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::closedform::{family_from_phase_point, first_pole, ClosedFormFamily};
use crate::error::{Error, Result};
use crate::integrate::{energy, integrate, max_integral_drift, IntegratorConfig, StopReason, Trajectory};
use crate::models::{CaseTag, ModelSpec, StateVec};
use crate::pmp::PhasePoint;
use crate::suite::{run_suite, Suite, DEFAULT_SEED};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_EARLY_STOP: i32 = 3;

/// Default tolerance of `compare`.
pub const COMPARE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Format,
    pub stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            path: None,
            format: Format::Csv,
            stride: 1,
        }
    }
}

/// Start of a run: a phase point, or a closed-form family.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<ClosedFormFamily>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub initial: Initial,
    pub t_span: (f64, f64),
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Sampling step of `closed-form`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    /// Pass threshold of `compare`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.ensure_valid()?;
        let (t0, t1) = self.t_span;
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return Err(Error::Config(format!("t_span must satisfy t0 < t1, got ({t0}, {t1})")));
        }
        if self.output.stride == 0 {
            return Err(Error::Config("stride must be at least 1".into()));
        }
        self.integrator.validate()?;
        if let Some(step) = self.grid_step {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::Config("grid_step must be positive".into()));
            }
        }
        if let Some(tol) = self.tolerance {
            if !(tol > 0.0) {
                return Err(Error::Config("tolerance must be positive".into()));
            }
        }
        let n = self.model.dim();
        for (name, v) in [("x", &self.initial.x), ("p", &self.initial.p)] {
            if let Some(v) = v {
                if v.len() != n {
                    return Err(Error::Config(format!(
                        "initial.{name} has length {}, {} needs {n}",
                        v.len(),
                        self.model.case
                    )));
                }
            }
        }
        if let Some(f) = &self.initial.family {
            if f.case() != self.model.case {
                return Err(Error::Config(format!(
                    "initial.family belongs to {}, model is {}",
                    f.case(),
                    self.model.case
                )));
            }
        }
        Ok(())
    }

    pub fn phase_point(&self) -> Result<PhasePoint> {
        match (&self.initial.x, &self.initial.p) {
            (Some(x), Some(p)) => PhasePoint::new(x.clone(), p.clone()),
            _ => Err(Error::Config("initial.x and initial.p are required".into())),
        }
    }

    pub fn family(&self) -> Result<&ClosedFormFamily> {
        self.initial
            .family
            .as_ref()
            .ok_or_else(|| Error::Config("initial.family is required".into()))
    }

    /// `t0, t0 + step, …` up to `t1` (inclusive when it lands on the grid).
    pub fn grid(&self) -> Result<Vec<f64>> {
        let step = self
            .grid_step
            .ok_or_else(|| Error::Config("grid_step is required".into()))?;
        let (t0, t1) = self.t_span;
        let n = ((t1 - t0) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| t0 + i as f64 * step).collect())
    }
}

#[derive(Debug, Parser)]
#[command(name = "pag", version, about = "Homogeneous point-affine control systems: catalog, flows, closed forms, checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub stride: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the model catalog, or one case in detail.
    ListModels {
        #[arg(long)]
        case: Option<String>,
    },
    /// Validate a run config, or the default spec of a case.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        case: Option<String>,
    },
    /// Integrate the Hamiltonian flow from `initial.{x,p}`.
    Integrate(OutArgs),
    /// Sample `initial.family` on `t_span` with `grid_step`.
    ClosedForm(OutArgs),
    /// Run an invariant suite on a case's default spec or a config's model.
    Check {
        #[arg(long)]
        case: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Integrate and compare with the closed-form family through the start.
    Compare {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Pole { .. } => EXIT_EARLY_STOP,
                _ => EXIT_CONFIG,
            }
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::ListModels { case } => cmd_list_models(case.as_deref(), out),
        Command::Validate { config, case } => cmd_validate(config.as_deref(), case.as_deref(), out),
        Command::Integrate(a) => cmd_integrate(&a, out, err),
        Command::ClosedForm(a) => cmd_closed_form(&a, out, err),
        Command::Check {
            case,
            config,
            suite,
            format,
        } => cmd_check(case.as_deref(), config.as_deref(), suite, format.unwrap_or_default(), out),
        Command::Compare { config } => cmd_compare(&config, out, err),
    }
}

fn io(e: io::Error) -> Error {
    Error::Io(e)
}

/// Seed of the sample-point stream, from `PAG_SEED`.
pub fn seed_from_env() -> Result<u64> {
    match std::env::var("PAG_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("PAG_SEED must be an unsigned integer, got {s:?}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn fmt_params(spec: &ModelSpec) -> String {
    let p = &spec.params;
    spec.case
        .parameter_names()
        .iter()
        .map(|&n| {
            let v = match n {
                "c1" => p.c1,
                "c2" => p.c2,
                "c3" => p.c3,
                "c4" => p.c4,
                "j0" => p.j0,
                "g0" => p.g0,
                "epsilon" => p.epsilon,
                _ => return format!("f20={:?}", spec.f20.coeffs),
            };
            format!("{n}={v}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn cmd_list_models(case: Option<&str>, out: &mut dyn Write) -> Result<i32> {
    match case {
        None => {
            writeln!(out, "{:<6}{:<5}{:<36}{:<36}integrals", "case", "dim", "parameters", "domain").map_err(io)?;
            for c in CaseTag::ALL {
                writeln!(
                    out,
                    "{:<6}{:<5}{:<36}{:<36}H,{}",
                    c.name(),
                    c.dim(),
                    c.parameter_names().join(","),
                    c.domain_description(),
                    c.integral_names().join(",")
                )
                .map_err(io)?;
            }
        }
        Some(name) => {
            let c = CaseTag::from_str(name)?;
            let spec = ModelSpec::default_for(c);
            writeln!(out, "case:       {}", c.name()).map_err(io)?;
            writeln!(out, "dim:        {}", c.dim()).map_err(io)?;
            writeln!(out, "parameters: {}", c.parameter_names().join(", ")).map_err(io)?;
            writeln!(out, "defaults:   {}", fmt_params(&spec)).map_err(io)?;
            writeln!(out, "domain:     {}", c.domain_description()).map_err(io)?;
            writeln!(out, "integrals:  H, {}", c.integral_names().join(", ")).map_err(io)?;
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_validate(config: Option<&Path>, case: Option<&str>, out: &mut dyn Write) -> Result<i32> {
    let spec = match (config, case) {
        (Some(p), _) => RunConfig::load(p)?.model,
        (None, Some(c)) => ModelSpec::default_for(CaseTag::from_str(c)?),
        (None, None) => return Err(Error::Config("validate needs --config or --case".into())),
    };
    writeln!(out, "ok {} {}", spec.case, fmt_params(&spec)).map_err(io)?;
    Ok(EXIT_OK)
}

fn load_with_overrides(a: &OutArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&a.config)?;
    if let Some(p) = &a.out {
        cfg.output.path = Some(p.clone());
    }
    if let Some(f) = a.format {
        cfg.output.format = f;
    }
    if let Some(s) = a.stride {
        cfg.output.stride = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Writes the payload to the configured path, or stdout. Returns whether
/// stdout was used.
fn emit(cfg: &RunConfig, bytes: &[u8], out: &mut dyn Write) -> Result<bool> {
    match &cfg.output.path {
        Some(p) => {
            fs::write(p, bytes)?;
            Ok(false)
        }
        None => {
            out.write_all(bytes)?;
            Ok(true)
        }
    }
}

pub fn cmd_integrate(a: &OutArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = load_with_overrides(a)?;
    let start = cfg.phase_point()?;
    let traj = integrate(&cfg.model, &start, cfg.t_span, &cfg.integrator)?;
    let kept = traj.subsample(cfg.output.stride);
    let bytes = match cfg.output.format {
        Format::Csv => trajectory_csv(&kept)?,
        Format::Json => trajectory_json(&kept)?,
    };
    let to_stdout = emit(&cfg, &bytes, out)?;
    let last = traj.last_point();
    let energy = energy(&cfg.model, &traj)?;
    let line = format!(
        "stop_reason={} t={:.16e} x={:?} p={:?} max_integral_drift={:.3e} energy={:.16e} nodes={}",
        traj.stop_reason,
        traj.times[traj.len() - 1],
        last.x.0,
        last.p,
        max_integral_drift(&traj),
        energy,
        traj.len()
    );
    if to_stdout {
        writeln!(err, "{line}")?;
    } else {
        writeln!(out, "{line}")?;
    }
    Ok(if traj.stop_reason == StopReason::Horizon {
        EXIT_OK
    } else {
        EXIT_EARLY_STOP
    })
}

/// A closed-form family sampled on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledCurve {
    pub case: CaseTag,
    pub subcase: String,
    pub times: Vec<f64>,
    pub states: Vec<StateVec>,
}

/// Samples the family; a pole anywhere in the sampled interval is an error.
pub fn sample_family(spec: &ModelSpec, family: &ClosedFormFamily, times: &[f64]) -> Result<SampledCurve> {
    if let (Some(&a), Some(&b)) = (times.first(), times.last()) {
        if let Some(t) = first_pole(family, spec, a, b)? {
            return Err(Error::Pole { t });
        }
    }
    let states = times.iter().map(|&t| family.eval(spec, t)).collect::<Result<_>>()?;
    Ok(SampledCurve {
        case: spec.case,
        subcase: family.subcase().to_string(),
        times: times.to_vec(),
        states,
    })
}

pub fn cmd_closed_form(a: &OutArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = load_with_overrides(a)?;
    let family = cfg.family()?;
    let curve = sample_family(&cfg.model, family, &cfg.grid()?)?;
    let stride = cfg.output.stride;
    let n = curve.times.len();
    let keep: Vec<usize> = (0..n).filter(|i| i % stride == 0 || i + 1 == n).collect();
    let kept = SampledCurve {
        times: keep.iter().map(|&i| curve.times[i]).collect(),
        states: keep.iter().map(|&i| curve.states[i].clone()).collect(),
        ..curve
    };
    let bytes = match cfg.output.format {
        Format::Csv => curve_csv(&kept)?,
        Format::Json => to_json_bytes(&kept)?,
    };
    let to_stdout = emit(&cfg, &bytes, out)?;
    let line = format!("case={} subcase={} rows={}", kept.case, kept.subcase, kept.times.len());
    if to_stdout {
        writeln!(err, "{line}")?;
    } else {
        writeln!(out, "{line}")?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_check(
    case: Option<&str>,
    config: Option<&Path>,
    suite: Suite,
    format: Format,
    out: &mut dyn Write,
) -> Result<i32> {
    let spec = match (config, case) {
        (Some(p), c) => {
            let spec = RunConfig::load(p)?.model;
            if let Some(c) = c {
                if CaseTag::from_str(c)? != spec.case {
                    return Err(Error::Config(format!("--case {c} disagrees with the config's {}", spec.case)));
                }
            }
            spec
        }
        (None, Some(c)) => ModelSpec::default_for(CaseTag::from_str(c)?),
        (None, None) => return Err(Error::Config("check needs --case or --config".into())),
    };
    let report = run_suite(&spec, suite, seed_from_env()?)?;
    match format {
        Format::Csv => {
            for l in &report.lines {
                writeln!(out, "{} {l}", report.case)?;
            }
        }
        Format::Json => {
            out.write_all(&to_json_bytes(&report)?)?;
        }
    }
    Ok(if report.all_pass() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

pub fn cmd_compare(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = RunConfig::load(path)?;
    let start = cfg.phase_point()?;
    let family = family_from_phase_point(&cfg.model, &start).map_err(|e| match e {
        Error::WrongCase { .. } => Error::Config(format!("{}: no closed form to compare against", cfg.model.case)),
        e => e,
    })?;
    let traj = integrate(&cfg.model, &start, cfg.t_span, &cfg.integrator)?;
    let t0 = cfg.t_span.0;
    let mut worst: f64 = 0.0;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let y = family.eval(&cfg.model, t - t0)?;
        for i in 0..x.dim() {
            worst = worst.max((x[i] - y[i]).abs());
        }
    }
    let tol = cfg.tolerance.unwrap_or(COMPARE_TOL);
    writeln!(
        out,
        "case={} subcase={} nodes={} stop_reason={} max_discrepancy={:.3e} tol={:.0e}",
        cfg.model.case,
        family.subcase(),
        traj.len(),
        traj.stop_reason,
        worst,
        tol
    )?;
    if traj.stop_reason != StopReason::Horizon {
        writeln!(err, "integration stopped early: {}", traj.stop_reason)?;
        return Ok(EXIT_EARLY_STOP);
    }
    Ok(if worst < tol { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

fn write_rows(header: Vec<String>, rows: impl Iterator<Item = Vec<f64>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.into_iter().map(fmt_f)).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))
}

/// Column names `t, x1…, p1…, u, H, I…`. An integral named like a
/// costate column (`p2`) is written as `I_p2`.
pub fn trajectory_header(traj: &Trajectory) -> Vec<String> {
    let n = traj.states.first().map_or(0, |s| s.dim());
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|i| format!("x{i}")));
    h.extend((1..=n).map(|i| format!("p{i}")));
    h.push("u".into());
    for name in &traj.integral_names {
        let col = if h.contains(name) { format!("I_{name}") } else { name.clone() };
        h.push(col);
    }
    h
}

pub fn trajectory_rows(traj: &Trajectory) -> Vec<Vec<f64>> {
    (0..traj.len())
        .map(|i| {
            let mut r = vec![traj.times[i]];
            r.extend(traj.states[i].iter());
            r.extend(traj.costates[i].iter());
            r.push(traj.controls[i]);
            r.extend(traj.integral_values[i].iter());
            r
        })
        .collect()
}

pub fn trajectory_csv(traj: &Trajectory) -> Result<Vec<u8>> {
    write_rows(trajectory_header(traj), trajectory_rows(traj).into_iter())
}

pub fn curve_csv(curve: &SampledCurve) -> Result<Vec<u8>> {
    let n = curve.case.dim();
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    let rows = curve.times.iter().zip(&curve.states).map(|(t, x)| {
        let mut r = vec![*t];
        r.extend(x.iter());
        r
    });
    write_rows(header, rows)
}

fn to_json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

pub fn trajectory_json(traj: &Trajectory) -> Result<Vec<u8>> {
    to_json_bytes(traj)
}

pub fn read_trajectory_json(bytes: &[u8]) -> Result<Trajectory> {
    Ok(serde_json::from_slice(bytes)?)
}

/// Header and numeric rows of a CSV written by this module.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_csv<R: Read>(r: R) -> Result<CsvTable> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Config(format!("csv: bad number {s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(CsvTable { header, rows })
}
