//! File-driven front end.
//!
//! Every command reads a time-scale file (`--ts`), a system file
//! (`--system`) and, where a Lyapunov equation is involved, a cost file
//! (`--cost`), and writes CSV/JSON artifacts into `--out`.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 for numerical failure.
//! On failure a one-line JSON object `{"error": name, …}` goes to stderr and
//! to `error.json` in the output directory.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::linalg;
use crate::lyapunov::{
    ddle_recursion, solve_cale_oracle, solve_tsale_grid, solve_tsdle, solve_tsdle_stationary,
    stationary_initial_condition, CostMatrix, CostSpec, StationaryOptions, DEFAULT_SERIES_TOL, DEFAULT_TAIL_TOL,
};
use crate::report;
use crate::stability::stability_report;
use crate::timescale::{Grid, ScaleKind, TimeScaleSpec, TimeScaleWindow};
use crate::transition::{SystemMatrix, SystemSpec, TransitionOptions, DEFAULT_DENSE_STEP, DEFAULT_INTEGRATOR_TOL};
use crate::verify::{empirical_decay, lyapunov_trace, simulate, simulate_on_grid};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "CHRONOSLYAP_THREADS";
/// Largest relative discrepancy tolerated by `reduce-check`.
pub const REDUCE_TOL: f64 = 1e-8;
const DISK_SAMPLES: usize = 256;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "chronoslyap", version, about = "Lyapunov equations and stability on time scales")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Pointwise algebraic solutions along the grid, A frozen at each t.
    SolveTsale(CommonArgs),
    /// Dynamic equation from an initial matrix.
    SolveTsdle {
        #[command(flatten)]
        common: CommonArgs,
        /// zero | stationary | file:<path to JSON rows>
        #[arg(long, default_value = "zero")]
        ic: InitialCondition,
    },
    /// Stationary initial matrix at t0.
    Stationary(CommonArgs),
    /// Spectral stability report for constant A.
    Stability(CommonArgs),
    /// Trajectory from x0.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x0: Vec<f64>,
    },
    /// Stationary P, trajectory from x0 and the Lyapunov trace along it.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x0: Vec<f64>,
        /// Also test ‖x(t)‖ ≤ γ e_{−λ}(t, t0) ‖x0‖ for this λ.
        #[arg(long)]
        lambda_test: Option<f64>,
    },
    /// Unified solver against the real-line and integer closed forms.
    ReduceCheck {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "zero")]
        ic: InitialCondition,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Time-scale file; `reduce-check` accepts it repeatedly.
    #[arg(long, required = true)]
    pub ts: Vec<PathBuf>,
    #[arg(long)]
    pub system: PathBuf,
    #[arg(long)]
    pub cost: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_DENSE_STEP)]
    pub dense_step: f64,
    #[arg(long)]
    pub tail_tol: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Defaults to the window start.
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Zero,
    Stationary,
    File(PathBuf),
}

impl FromStr for InitialCondition {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "zero" => Ok(InitialCondition::Zero),
            "stationary" => Ok(InitialCondition::Stationary),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(InitialCondition::File(PathBuf::from(p))),
                _ => Err(format!("expected zero, stationary or file:<path>, got {s:?}")),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    SolveTsale,
    SolveTsdle,
    Stationary,
    Stability,
    Simulate,
    Verify,
    ReduceCheck,
}

/// A fully specified job.
#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    pub command: CommandKind,
    pub ts: Vec<PathBuf>,
    pub system: PathBuf,
    pub cost: Option<PathBuf>,
    pub ic: InitialCondition,
    pub x0: Option<Vec<f64>>,
    pub lambda_test: Option<f64>,
    pub dense_step: f64,
    pub tail_tol: Option<f64>,
    pub horizon: Option<f64>,
    pub t0: Option<f64>,
    pub out: PathBuf,
}

impl JobSpec {
    pub fn from_cli(cli: Cli) -> Self {
        let (command, common, ic, x0, lambda_test) = match cli.command {
            CliCommand::SolveTsale(c) => (CommandKind::SolveTsale, c, InitialCondition::Zero, None, None),
            CliCommand::SolveTsdle { common, ic } => (CommandKind::SolveTsdle, common, ic, None, None),
            CliCommand::Stationary(c) => (CommandKind::Stationary, c, InitialCondition::Stationary, None, None),
            CliCommand::Stability(c) => (CommandKind::Stability, c, InitialCondition::Zero, None, None),
            CliCommand::Simulate { common, x0 } => (CommandKind::Simulate, common, InitialCondition::Zero, Some(x0), None),
            CliCommand::Verify { common, x0, lambda_test } => {
                (CommandKind::Verify, common, InitialCondition::Stationary, Some(x0), lambda_test)
            }
            CliCommand::ReduceCheck { common, ic } => (CommandKind::ReduceCheck, common, ic, None, None),
        };
        JobSpec {
            command,
            ts: common.ts,
            system: common.system,
            cost: common.cost,
            ic,
            x0,
            lambda_test,
            dense_step: common.dense_step,
            tail_tol: common.tail_tol,
            horizon: common.horizon,
            t0: common.t0,
            out: common.out,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dense_step > 0.0 && self.dense_step.is_finite()) {
            return Err(Error::InvalidParameter(format!("--dense-step must be positive, got {}", self.dense_step)));
        }
        if let Some(t) = self.tail_tol {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::InvalidParameter(format!("--tail-tol must lie in (0, 1), got {t}")));
            }
        }
        if self.ts.len() != 1 && self.command != CommandKind::ReduceCheck {
            return Err(Error::InvalidParameter("exactly one --ts is required".into()));
        }
        let needs_cost = !matches!(self.command, CommandKind::Stability | CommandKind::Simulate);
        if needs_cost && self.cost.is_none() {
            return Err(Error::InvalidParameter("--cost is required for this command".into()));
        }
        Ok(())
    }

    fn transition_options(&self) -> TransitionOptions {
        TransitionOptions {
            dense_step: self.dense_step,
            integrator_tol: DEFAULT_INTEGRATOR_TOL,
        }
    }

    fn stationary_options(&self) -> StationaryOptions {
        StationaryOptions {
            tail_tol: self.tail_tol.unwrap_or(DEFAULT_TAIL_TOL),
            horizon: self.horizon,
            report_until: None,
            transition: self.transition_options(),
        }
    }
}

/// Files written and a JSON summary of a successful run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn load_window(path: &Path) -> Result<TimeScaleWindow> {
    TimeScaleWindow::from_spec(&TimeScaleSpec::from_json(&read(path)?)?)
}

pub fn load_system(path: &Path) -> Result<SystemMatrix> {
    let spec: SystemSpec = serde_json::from_str(&read(path)?)?;
    SystemMatrix::from_spec(&spec)
}

pub fn load_cost(path: &Path) -> Result<CostMatrix> {
    let spec: CostSpec = serde_json::from_str(&read(path)?)?;
    CostMatrix::from_spec(&spec)
}

/// Initial matrix file: bare rows `[[…], …]` or `{"P0": rows}`.
pub fn load_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let v: serde_json::Value = serde_json::from_str(&read(path)?)?;
    let rows = v.get("P0").cloned().unwrap_or(v);
    let rows: Vec<Vec<f64>> = serde_json::from_value(rows)?;
    linalg::from_rows(&rows)
}

struct Inputs {
    window: TimeScaleWindow,
    t0: f64,
    a: SystemMatrix,
    m: Option<CostMatrix>,
}

fn load_inputs(job: &JobSpec, ts: &Path) -> Result<Inputs> {
    let window = load_window(ts)?;
    let a = load_system(&job.system)?;
    let m = job.cost.as_deref().map(load_cost).transpose()?;
    if let Some(m) = &m {
        if m.dim() != a.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: m.dim(),
            });
        }
    }
    let t0 = job.t0.unwrap_or(window.t0());
    if !window.contains(t0) {
        return Err(Error::NotInTimeScale(t0));
    }
    Ok(Inputs { window, t0, a, m })
}

fn initial_matrix(job: &JobSpec, n: usize) -> Result<Option<DMatrix<f64>>> {
    Ok(match &job.ic {
        InitialCondition::Zero => Some(DMatrix::zeros(n, n)),
        InitialCondition::Stationary => None,
        InitialCondition::File(p) => {
            let m = load_matrix(p)?;
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
            }
            Some(m)
        }
    })
}

fn state(job: &JobSpec, n: usize) -> Result<DVector<f64>> {
    let x0 = job.x0.as_ref().ok_or_else(|| Error::InvalidParameter("--x0 is required".into()))?;
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x0.len() });
    }
    Ok(DVector::from_column_slice(x0))
}

struct Writer<'a> {
    out: &'a Path,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn csv(&mut self, name: &str, table: &report::Table) -> Result<()> {
        let p = self.out.join(name);
        report::write_csv(&p, table)?;
        self.files.push(p);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let p = self.out.join(name);
        report::write_json(&p, value)?;
        self.files.push(p);
        Ok(())
    }
}

/// Runs a job and writes its artifacts.
pub fn run(job: &JobSpec) -> Result<RunOutcome> {
    job.validate()?;
    fs::create_dir_all(&job.out)?;
    let mut w = Writer {
        out: &job.out,
        files: Vec::new(),
    };
    let summary = match job.command {
        CommandKind::ReduceCheck => reduce_check(job, &mut w)?,
        _ => {
            let inp = load_inputs(job, &job.ts[0])?;
            dispatch(job, &inp, &mut w)?
        }
    };
    Ok(RunOutcome { files: w.files, summary })
}

fn cost(inp: &Inputs) -> Result<&CostMatrix> {
    inp.m
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("--cost is required for this command".into()))
}

fn grid_from(window: &TimeScaleWindow, t0: f64, dense: f64) -> Result<Grid> {
    if t0 == window.t0() {
        window.build_grid(dense)
    } else {
        window.restrict(t0, window.t_end())?.build_grid(dense)
    }
}

fn dispatch(job: &JobSpec, inp: &Inputs, w: &mut Writer<'_>) -> Result<serde_json::Value> {
    let topts = job.transition_options();
    let n = inp.a.dim();
    match job.command {
        CommandKind::SolveTsale => {
            let grid = grid_from(&inp.window, inp.t0, job.dense_step)?;
            let sols = solve_tsale_grid(&inp.a, cost(inp)?, &grid, job.tail_tol.unwrap_or(DEFAULT_SERIES_TOL))?;
            w.csv("tsale.csv", &report::tsale_table(&grid, &sols))?;
            let summary = json!({
                "command": "solve-tsale",
                "points": sols.len(),
                "max_residual": sols.iter().map(|s| s.residual).fold(0.0, f64::max),
                "max_tail_bound": sols.iter().map(|s| s.tail_bound).fold(0.0, f64::max),
            });
            w.json("tsale.json", &summary)?;
            Ok(summary)
        }
        CommandKind::SolveTsdle => {
            let m = cost(inp)?;
            let sol = match initial_matrix(job, n)? {
                Some(p0) => solve_tsdle(&inp.a, m, &p0, &inp.window, inp.t0, &topts)?,
                None => solve_tsdle_stationary(&inp.a, m, &inp.window, inp.t0, &job.stationary_options())?,
            };
            w.csv("gramian.csv", &report::gramian_table(&sol))?;
            let summary = report::gramian_summary(&sol);
            w.json("gramian.json", &summary)?;
            Ok(serde_json::to_value(summary)?)
        }
        CommandKind::Stationary => {
            let ic = stationary_initial_condition(&inp.a, cost(inp)?, &inp.window, inp.t0, &job.stationary_options())?;
            let summary = json!({
                "command": "stationary",
                "t0": inp.t0,
                "P0": linalg::to_rows(&ic.p0),
                "horizon": ic.horizon,
                "tail_bound": ic.tail_bound,
            });
            w.json("stationary.json", &summary)?;
            Ok(summary)
        }
        CommandKind::Stability => {
            let a = inp
                .a
                .as_constant()
                .ok_or_else(|| Error::InvalidParameter("stability analysis needs a constant A".into()))?;
            let grid = grid_from(&inp.window, inp.t0, job.dense_step)?;
            let rep = stability_report(a, &grid)?;
            w.json("stability.json", &rep)?;
            w.csv("eigen.csv", &report::eigen_table(&rep))?;
            let mut mus: Vec<f64> = grid.points().iter().map(|p| p.mu).filter(|m| *m > 0.0).collect();
            mus.sort_by(f64::total_cmp);
            mus.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * y.abs());
            w.csv("disks.csv", &report::disk_table(&mus, DISK_SAMPLES))?;
            Ok(serde_json::to_value(&rep)?)
        }
        CommandKind::Simulate => {
            let traj = simulate(&inp.a, &inp.window, &state(job, n)?, inp.t0, &topts)?;
            w.csv("trajectory.csv", &report::trajectory_table(&traj, None))?;
            Ok(json!({ "command": "simulate", "points": traj.states.len() }))
        }
        CommandKind::Verify => {
            let x0 = state(job, n)?;
            let p = solve_tsdle_stationary(&inp.a, cost(inp)?, &inp.window, inp.t0, &job.stationary_options())?;
            let traj = simulate_on_grid(&inp.a, p.grid().clone(), &x0, &topts)?;
            let trace = lyapunov_trace(&inp.a, &p, &traj)?;
            let decay = job.lambda_test.map(|l| empirical_decay(&traj, l)).transpose()?;
            w.csv("trace.csv", &report::trajectory_table(&traj, Some(&trace)))?;
            let summary = json!({
                "command": "verify",
                "conclusion": trace.conclusion(),
                "verdicts": trace.verdicts,
                "max_disagreement": trace.max_disagreement,
                "empirical_decay": decay,
                "points": trace.v.len(),
            });
            w.json("verify.json", &summary)?;
            Ok(summary)
        }
        CommandKind::ReduceCheck => unreachable!("handled by reduce_check"),
    }
}

fn rel(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    (x - y).norm() / y.norm().max(1.0)
}

/// Constant-coefficient closed form on the real line:
/// `P(t) = e^{−Aᵀτ}(P0 − X)e^{−Aτ} + X`, `AᵀX + XA = −M`, `τ = t − t0`.
fn real_line_closed_form(a: &DMatrix<f64>, m: &DMatrix<f64>, p0: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    let x = solve_cale_oracle(a, m)?;
    let e = (a * -tau).exp();
    Ok(linalg::congruence(&e, &(p0 - &x)) + x)
}

fn reduce_check(job: &JobSpec, w: &mut Writer<'_>) -> Result<serde_json::Value> {
    let topts = job.transition_options();
    let mut checks = Vec::new();
    let mut worst: f64 = 0.0;
    for ts in &job.ts {
        let inp = load_inputs(job, ts)?;
        let m = cost(&inp)?;
        let (a, mc) = match (inp.a.as_constant(), m.schedule_ref().is_constant()) {
            (Some(a), true) => (a.clone(), m.at(inp.t0).clone()),
            _ => return Err(Error::InvalidParameter("reduce-check needs constant A and M".into())),
        };
        let p0 = initial_matrix(job, a.nrows())?
            .ok_or_else(|| Error::InvalidParameter("reduce-check needs --ic zero or file:".into()))?;
        let sol = solve_tsdle(&inp.a, m, &p0, &inp.window, inp.t0, &topts)?;
        let (scale, discrepancy) = match inp.window.kind() {
            Some(ScaleKind::Reals) => {
                let mut d: f64 = 0.0;
                for (i, p) in sol.p.iter().enumerate() {
                    let want = real_line_closed_form(&a, &mc, &p0, sol.grid().t(i) - inp.t0)?;
                    d = d.max(rel(p, &want));
                }
                ("reals", d)
            }
            Some(ScaleKind::Integers) => {
                let rec = ddle_recursion(&inp.a, m, &p0, inp.t0, sol.len() - 1)?;
                ("integers", sol.p.iter().zip(&rec).map(|(p, r)| rel(p, r)).fold(0.0, f64::max))
            }
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "{}: reduce-check accepts canonical reals or integers windows",
                    ts.display()
                )))
            }
        };
        worst = worst.max(discrepancy);
        checks.push(json!({
            "ts": ts.display().to_string(),
            "scale": scale,
            "points": sol.len(),
            "discrepancy": discrepancy,
        }));
    }
    let summary = json!({
        "command": "reduce-check",
        "tolerance": REDUCE_TOL,
        "max_discrepancy": worst,
        "checks": checks,
    });
    w.json("reduce.json", &summary)?;
    if worst > REDUCE_TOL {
        return Err(Error::ReductionMismatch(worst));
    }
    Ok(summary)
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::InvalidParameter(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    // A pool may already exist when called more than once in a process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_NUMERICAL
    }
}

/// Machine-readable error object.
pub fn error_json(e: &Error) -> serde_json::Value {
    json!({ "error": e.name(), "message": e.to_string(), "exit_code": exit_code(e) })
}

/// Parses `args`, runs the job and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let job = JobSpec::from_cli(cli);
    let result = configure_threads().and_then(|_| run(&job));
    match result {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            EXIT_OK
        }
        Err(e) => {
            let body = error_json(&e);
            eprintln!("{body}");
            if job.out.is_dir() {
                let _ = report::write_json(&job.out.join("error.json"), &body);
            }
            exit_code(&e)
        }
    }
}
