//! Config-driven command-line front end.
//!
//! Four commands, all reading one JSON config (strict: unknown keys are
//! rejected, every section validates on load) and writing fixed-name files
//! into `--out`:
//!
//! * `simulate`: integrate a trajectory, write `trajectory.csv` and the
//!   conservation drifts to `conservation.json`.
//! * `verify-algebra`: finite-difference bracket check of the full charge
//!   algebra at seeded random points, write `bracket_report.json`.
//! * `spectrum`: closed-form levels (`--mode analytic`), the radial
//!   finite-difference oracle (`numeric`), or both with a deviation gate
//!   (`compare`).
//! * `sweep`: one parameter over a linear range, long-format `sweep.csv`,
//!   parallel across values (worker count from `BATEMANLAB_THREADS`).
//!
//! Exit codes: 0 success, 2 config or domain error, 3 integration failure,
//! 4 algebra violation, 5 spectrum mismatch. All numeric output is written
//! with 17 significant digits, so reruns are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::algebra::{verify_su11_with_box, ChargeBearing};
use crate::dynamics::{integrate, ConservationReport, Integrable, IntegratorSpec};
use crate::phase::{BatemanParams, CompositeParams, PhaseStateRot, PhaseStateXY};
use crate::spectra::{
    asymptotic_spectrum, emergent_radical, emergent_spectrum, isotonic_levels, solve_radial,
    sw_spectrum, GridSpec, IsotonicParams, Level, SpectrumResult,
};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INTEGRATION: i32 = 3;
pub const EXIT_ALGEBRA: i32 = 4;
pub const EXIT_SPECTRUM: i32 = 5;

/// Environment variable limiting sweep parallelism.
pub const THREADS_ENV: &str = "BATEMANLAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "batemanlab",
    version,
    about = "Damped/amplified oscillator pairs: trajectories, charge algebra, constraints, spectra"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a trajectory and report conservation drifts.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the charge algebra with finite-difference brackets.
    VerifyAlgebra {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the violation threshold (default from config, else 1e-6).
        #[arg(long)]
        threshold: Option<f64>,
        /// Override the sampling seed from the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate spectra: closed form, numerical oracle, or both.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Analytic)]
        mode: Mode,
        /// Override the compare-mode deviation gate (default 1e-2).
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Sweep one parameter over a linear range into a long-format CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        parameter: SweepParameter,
        /// Inclusive range "lo,hi".
        #[arg(long)]
        range: String,
        /// Number of evaluation points (1 evaluates at lo only).
        #[arg(long)]
        steps: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "lowercase")]
pub enum Mode {
    Analytic,
    Numeric,
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParameter {
    #[value(name = "mu_a")]
    MuA,
    #[value(name = "gamma_ratio")]
    GammaRatio,
    #[value(name = "gamma_a")]
    GammaA,
    #[value(name = "omega_b")]
    OmegaB,
    #[value(name = "c")]
    C,
}

impl SweepParameter {
    fn label(&self) -> &'static str {
        match self {
            SweepParameter::MuA => "mu_a",
            SweepParameter::GammaRatio => "gamma_ratio",
            SweepParameter::GammaA => "gamma_a",
            SweepParameter::OmegaB => "omega_b",
            SweepParameter::C => "c",
        }
    }
}

/// Parse arguments, run, and map everything to an exit code. Never panics
/// on user input.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::StepFailure { .. } => EXIT_INTEGRATION,
        _ => EXIT_CONFIG,
    }
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Simulate { config, out } => cmd_simulate(&load_config(&config)?, &out),
        Command::VerifyAlgebra {
            config,
            out,
            threshold,
            seed,
        } => cmd_verify_algebra(&load_config(&config)?, &out, threshold, seed),
        Command::Spectrum {
            config,
            out,
            mode,
            threshold,
        } => cmd_spectrum(&load_config(&config)?, &out, mode, threshold),
        Command::Sweep {
            config,
            out,
            parameter,
            range,
            steps,
        } => cmd_sweep(&load_config(&config)?, &out, parameter, &range, steps),
    }
}

/// Full run configuration. Sections are optional; each command demands the
/// ones it needs. Every section validates its own invariants during
/// deserialization, so a config that loads is a config that ran through all
/// parameter checks.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub system_a: BatemanParams,
    pub system_b: Option<BatemanParams>,
    pub composite: Option<CompositeNorms>,
    pub initial_state: Option<InitialState>,
    pub integrator: Option<IntegratorSpec>,
    pub algebra: Option<AlgebraSection>,
    pub spectrum: Option<SpectrumSection>,
    pub grid: Option<GridSpec>,
}

/// Optional overrides for the global normalizations; arithmetic means of
/// the pair values are used where absent.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositeNorms {
    pub omega: Option<f64>,
    pub gamma: Option<f64>,
}

/// Initial state tagged by chart, e.g. `{"xy": {"x": 1, "y": 0, ...}}`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    Xy(PhaseStateXY),
    Rot(PhaseStateRot),
}

/// Settings for `verify-algebra`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(try_from = "RawAlgebraSection")]
pub struct AlgebraSection {
    pub n_points: usize,
    pub threshold: f64,
    pub box_half_width: f64,
}

impl Default for AlgebraSection {
    fn default() -> Self {
        Self {
            n_points: 100,
            threshold: 1e-6,
            box_half_width: 2.0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlgebraSection {
    n_points: Option<usize>,
    threshold: Option<f64>,
    box_half_width: Option<f64>,
}

impl TryFrom<RawAlgebraSection> for AlgebraSection {
    type Error = Error;

    fn try_from(raw: RawAlgebraSection) -> Result<Self> {
        let defaults = AlgebraSection::default();
        let n_points = raw.n_points.unwrap_or(defaults.n_points);
        if n_points == 0 {
            return Err(Error::InvalidParams(
                "algebra n_points must be at least 1".into(),
            ));
        }
        let threshold = raw.threshold.unwrap_or(defaults.threshold);
        if !threshold.is_finite() || threshold <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "algebra threshold must be positive, got {threshold}"
            )));
        }
        let box_half_width = raw.box_half_width.unwrap_or(defaults.box_half_width);
        if !box_half_width.is_finite() || box_half_width <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "algebra box_half_width must be positive, got {box_half_width}"
            )));
        }
        Ok(Self {
            n_points,
            threshold,
            box_half_width,
        })
    }
}

/// Which levels to report for spectra with a branch choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchPolicy {
    /// Follow the attractive/repulsive rule of the parameters.
    #[default]
    Auto,
    /// Report only the `+` branch even where both are admissible.
    PlusOnly,
}

/// Spectrum request tagged by kind, e.g.
/// `{"emergent": {"mu_a": 0.1, "n_max": 5}}`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumSection {
    Isotonic(IsotonicSection),
    Emergent(EmergentSection),
    Sw(SwSection),
    Asymptotic(AsymptoticSection),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(try_from = "RawIsotonicSection")]
pub struct IsotonicSection {
    pub params: IsotonicParams,
    pub n_max: u32,
    pub branch_policy: BranchPolicy,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIsotonicSection {
    n_coef: f64,
    q_coef: f64,
    r_coef: f64,
    n_max: u32,
    #[serde(default)]
    branch_policy: BranchPolicy,
}

impl TryFrom<RawIsotonicSection> for IsotonicSection {
    type Error = Error;

    fn try_from(raw: RawIsotonicSection) -> Result<Self> {
        Ok(Self {
            params: IsotonicParams::new(raw.n_coef, raw.q_coef, raw.r_coef)?,
            n_max: raw.n_max,
            branch_policy: raw.branch_policy,
        })
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmergentSection {
    pub mu_a: f64,
    #[serde(default)]
    pub c: f64,
    pub n_max: u32,
    #[serde(default)]
    pub branch_policy: BranchPolicy,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(try_from = "RawSwSection")]
pub struct SwSection {
    pub m: f64,
    pub omega: f64,
    pub mu_a: f64,
    pub gamma_ratio: f64,
    pub n_max: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSwSection {
    m: Option<f64>,
    omega: f64,
    mu_a: f64,
    gamma_ratio: f64,
    n_max: u32,
}

impl TryFrom<RawSwSection> for SwSection {
    type Error = Error;

    fn try_from(raw: RawSwSection) -> Result<Self> {
        let m = raw.m.unwrap_or(1.0);
        // Probe the domain checks once so a bad section fails on load.
        sw_spectrum(m, raw.omega, raw.mu_a, raw.gamma_ratio, 0)?;
        Ok(Self {
            m,
            omega: raw.omega,
            mu_a: raw.mu_a,
            gamma_ratio: raw.gamma_ratio,
            n_max: raw.n_max,
        })
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticSection {
    pub n_max: u32,
}

/// Read and validate a config file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidParams(format!("config {}: {e}", path.display())))
}

fn build_composite_with(
    cfg: &RunConfig,
    a: BatemanParams,
    b: BatemanParams,
) -> Result<CompositeParams> {
    let norms = cfg.composite.unwrap_or_default();
    CompositeParams::new(
        a,
        b,
        norms.omega.unwrap_or(0.5 * (a.omega() + b.omega())),
        norms.gamma.unwrap_or(0.5 * (a.big_gamma() + b.big_gamma())),
    )
}

fn build_composite(cfg: &RunConfig) -> Result<CompositeParams> {
    let b = cfg.system_b.ok_or_else(|| {
        Error::InvalidParams("this operation needs a system_b block in the config".into())
    })?;
    build_composite_with(cfg, cfg.system_a, b)
}

fn io_err(context: &str, e: std::io::Error) -> Error {
    Error::Io(format!("{context}: {e}"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Io(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(&format!("cannot write {}", path.display()), e))
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Integrate the configured initial state and write `trajectory.csv` plus
/// `conservation.json`.
pub fn cmd_simulate(cfg: &RunConfig, out_dir: &Path) -> Result<i32> {
    let spec = cfg.integrator.ok_or_else(|| {
        Error::InvalidParams("simulate needs an integrator section in the config".into())
    })?;
    let initial = cfg.initial_state.ok_or_else(|| {
        Error::InvalidParams("simulate needs an initial_state section in the config".into())
    })?;
    fs::create_dir_all(out_dir)
        .map_err(|e| io_err(&format!("cannot create {}", out_dir.display()), e))?;
    let report = match initial {
        InitialState::Xy(s0) => simulate_in_chart(&cfg.system_a, &s0, &spec, out_dir)?,
        InitialState::Rot(s0) => simulate_in_chart(&cfg.system_a, &s0, &spec, out_dir)?,
    };
    write_json(&out_dir.join("conservation.json"), &report)?;
    Ok(EXIT_OK)
}

fn simulate_in_chart<S: Integrable + ChargeBearing>(
    p: &BatemanParams,
    s0: &S,
    spec: &IntegratorSpec,
    out_dir: &Path,
) -> Result<ConservationReport> {
    let traj = integrate(p, s0, spec)?;
    let mut buf = Vec::new();
    traj.write_csv(p, &mut buf)
        .map_err(|e| io_err("cannot format trajectory", e))?;
    let path = out_dir.join("trajectory.csv");
    fs::write(&path, buf).map_err(|e| io_err(&format!("cannot write {}", path.display()), e))?;
    Ok(traj.conservation(p))
}

/// Run the bracket verification and write `bracket_report.json`; exit 4 when
/// any relation exceeds the threshold.
pub fn cmd_verify_algebra(
    cfg: &RunConfig,
    out_dir: &Path,
    threshold_flag: Option<f64>,
    seed_flag: Option<u64>,
) -> Result<i32> {
    let section = cfg.algebra.unwrap_or_default();
    let threshold = threshold_flag.unwrap_or(section.threshold);
    if !threshold.is_finite() || threshold <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let seed = seed_flag.unwrap_or(cfg.seed);
    let p_a = cfg.system_a;
    let p_b = cfg.system_b.unwrap_or(p_a);
    let reports = verify_su11_with_box(&p_a, &p_b, section.n_points, seed, section.box_half_width);
    let max_residual = reports.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    let violations: Vec<&str> = reports
        .iter()
        .filter(|r| r.max_residual > threshold)
        .map(|r| r.relation.as_str())
        .collect();

    fs::create_dir_all(out_dir)
        .map_err(|e| io_err(&format!("cannot create {}", out_dir.display()), e))?;
    let doc = json!({
        "n_points": section.n_points,
        "seed": seed,
        "box_half_width": section.box_half_width,
        "threshold": threshold,
        "max_residual": max_residual,
        "violations": violations,
        "relations": reports,
    });
    write_json(&out_dir.join("bracket_report.json"), &doc)?;

    if violations.is_empty() {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "algebra violation: max residual {max_residual:e} exceeds threshold {threshold:e} \
             in {} relation(s)",
            violations.len()
        );
        Ok(EXIT_ALGEBRA)
    }
}

fn apply_policy(mut res: SpectrumResult, policy: BranchPolicy) -> SpectrumResult {
    if policy == BranchPolicy::PlusOnly {
        res.levels.retain(|l| l.branch == "+");
        res.warnings
            .push("minus branch suppressed by branch_policy".into());
    }
    res
}

fn analytic_result(cfg: &RunConfig, section: &SpectrumSection) -> Result<SpectrumResult> {
    match section {
        SpectrumSection::Isotonic(s) => Ok(apply_policy(
            isotonic_levels(&s.params, s.n_max),
            s.branch_policy,
        )),
        SpectrumSection::Emergent(s) => {
            let cp = build_composite(cfg)?;
            Ok(apply_policy(
                emergent_spectrum(&cp, s.mu_a, s.c, s.n_max)?,
                s.branch_policy,
            ))
        }
        SpectrumSection::Sw(s) => sw_spectrum(s.m, s.omega, s.mu_a, s.gamma_ratio, s.n_max),
        SpectrumSection::Asymptotic(s) => {
            let cp = build_composite(cfg)?;
            Ok(asymptotic_spectrum(&cp, s.n_max))
        }
    }
}

fn oracle_inputs(section: &SpectrumSection) -> Result<(IsotonicParams, usize)> {
    match section {
        SpectrumSection::Isotonic(s) => Ok((s.params, s.n_max as usize + 1)),
        _ => Err(Error::InvalidParams(
            "the numerical oracle supports only the isotonic spectrum kind \
             (map other kinds onto it first)"
                .into(),
        )),
    }
}

fn write_spectrum_csv(path: &Path, res: &SpectrumResult) -> Result<()> {
    let mut buf = String::from("n,n_b,branch,energy\n");
    for l in &res.levels {
        let n_b = l.n_b.map(|v| v.to_string()).unwrap_or_default();
        buf.push_str(&format!(
            "{},{},{},{}\n",
            l.n,
            n_b,
            l.branch,
            fmt_float(l.energy)
        ));
    }
    fs::write(path, buf).map_err(|e| io_err(&format!("cannot write {}", path.display()), e))
}

/// Evaluate the configured spectrum. `analytic` writes `spectrum.csv` and
/// `spectrum.json`; `numeric` writes `oracle.csv`; `compare` writes
/// `compare.csv` and exits 5 when the worst relative deviation exceeds the
/// gate (default 1e-2).
pub fn cmd_spectrum(
    cfg: &RunConfig,
    out_dir: &Path,
    mode: Mode,
    threshold_flag: Option<f64>,
) -> Result<i32> {
    let section = cfg.spectrum.as_ref().ok_or_else(|| {
        Error::InvalidParams("spectrum needs a spectrum section in the config".into())
    })?;
    fs::create_dir_all(out_dir)
        .map_err(|e| io_err(&format!("cannot create {}", out_dir.display()), e))?;
    match mode {
        Mode::Analytic => {
            let res = analytic_result(cfg, section)?;
            write_spectrum_csv(&out_dir.join("spectrum.csv"), &res)?;
            write_json(&out_dir.join("spectrum.json"), &res)?;
            Ok(EXIT_OK)
        }
        Mode::Numeric => {
            let (params, k) = oracle_inputs(section)?;
            let grid = require_grid(cfg)?;
            let levels = solve_radial(&params, &grid, k)?;
            let mut buf = String::from("n,energy\n");
            for (n, e) in levels.iter().enumerate() {
                buf.push_str(&format!("{n},{}\n", fmt_float(*e)));
            }
            let path = out_dir.join("oracle.csv");
            fs::write(&path, buf)
                .map_err(|e| io_err(&format!("cannot write {}", path.display()), e))?;
            Ok(EXIT_OK)
        }
        Mode::Compare => {
            let (params, k) = oracle_inputs(section)?;
            let grid = require_grid(cfg)?;
            let numeric = solve_radial(&params, &grid, k)?;
            let closed = isotonic_levels(&params, k as u32 - 1);
            let analytic: Vec<f64> = closed
                .levels
                .iter()
                .filter(|l| l.branch == "+")
                .map(|l| l.energy)
                .collect();
            let mut buf = String::from("n,analytic,numeric,rel_dev\n");
            let mut max_rel: f64 = 0.0;
            for (n, (a, b)) in analytic.iter().zip(&numeric).enumerate() {
                let rel = (a - b).abs() / a.abs().max(1e-300);
                max_rel = max_rel.max(rel);
                buf.push_str(&format!(
                    "{n},{},{},{}\n",
                    fmt_float(*a),
                    fmt_float(*b),
                    fmt_float(rel)
                ));
            }
            let path = out_dir.join("compare.csv");
            fs::write(&path, buf)
                .map_err(|e| io_err(&format!("cannot write {}", path.display()), e))?;
            let gate = threshold_flag.unwrap_or(1e-2);
            if max_rel > gate {
                eprintln!("spectrum mismatch: max relative deviation {max_rel:e} exceeds {gate:e}");
                Ok(EXIT_SPECTRUM)
            } else {
                Ok(EXIT_OK)
            }
        }
    }
}

fn require_grid(cfg: &RunConfig) -> Result<GridSpec> {
    cfg.grid
        .ok_or_else(|| Error::InvalidParams("this mode needs a grid section in the config".into()))
}

fn parse_range(text: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::InvalidParams(format!(
            "range must be \"lo,hi\", got {text:?}"
        )));
    }
    let lo: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParams(format!("range start {:?} is not a number", parts[0])))?;
    let hi: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParams(format!("range end {:?} is not a number", parts[1])))?;
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParams(format!(
            "range bounds must be finite, got {text:?}"
        )));
    }
    Ok((lo, hi))
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

fn worker_count(n_jobs: usize) -> Result<usize> {
    let configured = match std::env::var(THREADS_ENV) {
        Ok(text) => match text.trim().parse::<usize>() {
            Ok(n) if n >= 1 => n,
            _ => {
                return Err(Error::InvalidParams(format!(
                    "{THREADS_ENV} must be a positive integer, got {text:?}"
                )))
            }
        },
        Err(std::env::VarError::NotPresent) => std::thread::available_parallelism()
            .map(usize::from)
            .unwrap_or(1),
        Err(e) => {
            return Err(Error::InvalidParams(format!("{THREADS_ENV}: {e}")));
        }
    };
    Ok(configured.min(n_jobs).max(1))
}

/// Levels of one sweep point plus the branch radical where the kind has one.
type SweepPoint = (Vec<Level>, Option<f64>);

fn evaluate_sweep_point(
    cfg: &RunConfig,
    section: &SpectrumSection,
    parameter: SweepParameter,
    value: f64,
) -> Result<SweepPoint> {
    match (parameter, section) {
        (SweepParameter::MuA, SpectrumSection::Emergent(s)) => {
            let cp = build_composite(cfg)?;
            let res = apply_policy(
                emergent_spectrum(&cp, value, s.c, s.n_max)?,
                s.branch_policy,
            );
            let radical = emergent_radical(&cp, value)?;
            Ok((res.levels, Some(radical)))
        }
        (SweepParameter::MuA, SpectrumSection::Sw(s)) => {
            let res = sw_spectrum(s.m, s.omega, value, s.gamma_ratio, s.n_max)?;
            Ok((res.levels, None))
        }
        (SweepParameter::GammaRatio, SpectrumSection::Sw(s)) => {
            let res = sw_spectrum(s.m, s.omega, s.mu_a, value, s.n_max)?;
            Ok((res.levels, None))
        }
        (SweepParameter::GammaA, SpectrumSection::Emergent(s)) => {
            let a = cfg.system_a;
            let a_swept = BatemanParams::new(a.m(), value, a.kappa())?;
            let b = cfg.system_b.ok_or_else(|| {
                Error::InvalidParams("this operation needs a system_b block in the config".into())
            })?;
            let cp = build_composite_with(cfg, a_swept, b)?;
            let res = apply_policy(
                emergent_spectrum(&cp, s.mu_a, s.c, s.n_max)?,
                s.branch_policy,
            );
            let radical = emergent_radical(&cp, s.mu_a)?;
            Ok((res.levels, Some(radical)))
        }
        (SweepParameter::OmegaB, SpectrumSection::Emergent(s)) => {
            let cp = composite_with_omega_b(cfg, value)?;
            let res = apply_policy(
                emergent_spectrum(&cp, s.mu_a, s.c, s.n_max)?,
                s.branch_policy,
            );
            let radical = emergent_radical(&cp, s.mu_a)?;
            Ok((res.levels, Some(radical)))
        }
        (SweepParameter::OmegaB, SpectrumSection::Asymptotic(s)) => {
            let cp = composite_with_omega_b(cfg, value)?;
            Ok((asymptotic_spectrum(&cp, s.n_max).levels, None))
        }
        (SweepParameter::C, SpectrumSection::Emergent(s)) => {
            let cp = build_composite(cfg)?;
            let res = apply_policy(
                emergent_spectrum(&cp, s.mu_a, value, s.n_max)?,
                s.branch_policy,
            );
            let radical = emergent_radical(&cp, s.mu_a)?;
            Ok((res.levels, Some(radical)))
        }
        (p, _) => Err(Error::InvalidParams(format!(
            "sweep parameter {} does not apply to the configured spectrum kind",
            p.label()
        ))),
    }
}

fn composite_with_omega_b(cfg: &RunConfig, omega_b: f64) -> Result<CompositeParams> {
    if !omega_b.is_finite() || omega_b <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "swept omega_b must be positive, got {omega_b}"
        )));
    }
    let b = cfg.system_b.ok_or_else(|| {
        Error::InvalidParams("this operation needs a system_b block in the config".into())
    })?;
    // kappa = m (omega^2 + Gamma^2) hits the requested frequency while
    // keeping mass and damping fixed.
    let kappa = b.m() * (omega_b * omega_b + b.big_gamma() * b.big_gamma());
    let b_swept = BatemanParams::new(b.m(), b.gamma(), kappa)?;
    build_composite_with(cfg, cfg.system_a, b_swept)
}

/// Evaluate the configured spectrum at every point of a linear parameter
/// range and write `sweep.csv` (long format, one row per level per point).
pub fn cmd_sweep(
    cfg: &RunConfig,
    out_dir: &Path,
    parameter: SweepParameter,
    range: &str,
    steps: usize,
) -> Result<i32> {
    let section = cfg.spectrum.as_ref().ok_or_else(|| {
        Error::InvalidParams("sweep needs a spectrum section in the config".into())
    })?;
    if steps == 0 {
        return Err(Error::InvalidParams("sweep needs at least one step".into()));
    }
    let (lo, hi) = parse_range(range)?;
    if lo > hi {
        return Err(Error::InvalidParams(format!(
            "empty sweep range: {lo} > {hi}"
        )));
    }
    let values = linspace(lo, hi, steps);

    let workers = worker_count(values.len())?;
    let results: Vec<Result<SweepPoint>> = if workers <= 1 {
        values
            .iter()
            .map(|v| evaluate_sweep_point(cfg, section, parameter, *v))
            .collect()
    } else {
        let mut slots: Vec<Option<Result<SweepPoint>>> = Vec::new();
        slots.resize_with(values.len(), || None);
        let chunk = values.len().div_ceil(workers);
        std::thread::scope(|scope| {
            for (slot_chunk, value_chunk) in slots.chunks_mut(chunk).zip(values.chunks(chunk)) {
                scope.spawn(move || {
                    for (slot, v) in slot_chunk.iter_mut().zip(value_chunk) {
                        *slot = Some(evaluate_sweep_point(cfg, section, parameter, *v));
                    }
                });
            }
        });
        slots
            .into_iter()
            .map(|s| s.expect("every sweep slot is filled by its worker"))
            .collect()
    };

    let mut buf = String::from("parameter,value,n,n_b,branch,radical,energy\n");
    for (value, result) in values.iter().zip(results) {
        let (levels, radical) = result?;
        let radical_text = radical.map(fmt_float).unwrap_or_default();
        for l in &levels {
            let n_b = l.n_b.map(|v| v.to_string()).unwrap_or_default();
            buf.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                parameter.label(),
                fmt_float(*value),
                l.n,
                n_b,
                l.branch,
                radical_text,
                fmt_float(l.energy)
            ));
        }
    }
    fs::create_dir_all(out_dir)
        .map_err(|e| io_err(&format!("cannot create {}", out_dir.display()), e))?;
    let path = out_dir.join("sweep.csv");
    fs::write(&path, buf).map_err(|e| io_err(&format!("cannot write {}", path.display()), e))?;
    Ok(EXIT_OK)
}
