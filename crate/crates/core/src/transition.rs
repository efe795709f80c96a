//! Transition matrices `Φ_A(t, t0)` of `X^Δ = A(t)X`, `X(t0) = I`.
//!
//! A forward sweep over a [`Grid`] applies the exact update
//! `X ← (I + μ(t)A(t))X` across every gap and classical RK4 inside dense
//! segments. RK4 runs on an even number of sub-steps per grid interval so
//! the sub-step values can feed composite Simpson rules downstream.

use std::sync::Arc;

use log::warn;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::timescale::{Grid, TimeScaleWindow, TOL_MEMBER};
use crate::tscalc::{RegressivityClass, RegressivityVerdict, TOL_REG};

/// Default spacing of grid points inside dense segments.
pub const DEFAULT_DENSE_STEP: f64 = 1e-3;
/// Default bound on the RK4 local error estimate, relative to `‖X‖`.
pub const DEFAULT_INTEGRATOR_TOL: f64 = 1e-12;
/// Condition number above which inverting a transition matrix warns.
pub const COND_WARN: f64 = 1e12;

const MAX_SUBSTEP_DOUBLINGS: u32 = 12;

/// A matrix-valued function of time that is constant between breakpoints.
///
/// `Schedule` entries `(t_i, A_i)` hold `A_i` on `[t_i, t_{i+1})`; times
/// before the first breakpoint use the first matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum MatrixSchedule {
    Constant(DMatrix<f64>),
    Schedule(Vec<(f64, DMatrix<f64>)>),
}

impl MatrixSchedule {
    pub fn new_schedule(mut entries: Vec<(f64, DMatrix<f64>)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter("empty schedule".into()));
        }
        entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let n = linalg::require_square(&entries[0].1)?;
        for (t, m) in &entries {
            if !t.is_finite() {
                return Err(Error::InvalidParameter("non-finite breakpoint".into()));
            }
            check_matrix(m, n)?;
        }
        Ok(MatrixSchedule::Schedule(entries))
    }

    pub fn dim(&self) -> usize {
        match self {
            MatrixSchedule::Constant(m) => m.nrows(),
            MatrixSchedule::Schedule(e) => e[0].1.nrows(),
        }
    }

    pub fn at(&self, t: f64) -> &DMatrix<f64> {
        match self {
            MatrixSchedule::Constant(m) => m,
            MatrixSchedule::Schedule(e) => {
                let k = e.partition_point(|(s, _)| *s <= t + TOL_MEMBER);
                &e[k.saturating_sub(1)].1
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, MatrixSchedule::Constant(_))
    }

    pub fn matrices(&self) -> Vec<&DMatrix<f64>> {
        match self {
            MatrixSchedule::Constant(m) => vec![m],
            MatrixSchedule::Schedule(e) => e.iter().map(|(_, m)| m).collect(),
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            MatrixSchedule::Constant(_) => Vec::new(),
            MatrixSchedule::Schedule(e) => e.iter().map(|(t, _)| *t).collect(),
        }
    }

    pub fn from_spec(spec: &MatrixSpec) -> Result<Self> {
        match spec {
            MatrixSpec::Constant(rows) => {
                let m = linalg::from_rows(rows)?;
                linalg::require_square(&m)?;
                Ok(MatrixSchedule::Constant(m))
            }
            MatrixSpec::Schedule(entries) => Self::new_schedule(
                entries
                    .iter()
                    .map(|(t, rows)| Ok((*t, linalg::from_rows(rows)?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
        }
    }

    pub fn to_spec(&self) -> MatrixSpec {
        match self {
            MatrixSchedule::Constant(m) => MatrixSpec::Constant(linalg::to_rows(m)),
            MatrixSchedule::Schedule(e) => MatrixSpec::Schedule(
                e.iter().map(|(t, m)| (*t, linalg::to_rows(m))).collect(),
            ),
        }
    }
}

fn check_matrix(m: &DMatrix<f64>, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.nrows().max(m.ncols()),
        });
    }
    if !m.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite matrix entry".into()));
    }
    Ok(())
}

/// The system matrix `A(t)` of `x^Δ = A(t)x`.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemMatrix {
    schedule: MatrixSchedule,
}

impl SystemMatrix {
    pub fn constant(a: DMatrix<f64>) -> Result<Self> {
        let n = linalg::require_square(&a)?;
        check_matrix(&a, n)?;
        Ok(SystemMatrix {
            schedule: MatrixSchedule::Constant(a),
        })
    }

    pub fn scalar(a: f64) -> Self {
        SystemMatrix {
            schedule: MatrixSchedule::Constant(DMatrix::from_element(1, 1, a)),
        }
    }

    /// Piecewise-constant `A(t)` from `(breakpoint, matrix)` pairs.
    pub fn schedule(entries: Vec<(f64, DMatrix<f64>)>) -> Result<Self> {
        Ok(SystemMatrix {
            schedule: MatrixSchedule::new_schedule(entries)?,
        })
    }

    /// Samples on grid points, held until the next sample.
    pub fn tabulated(grid: &Grid, samples: Vec<DMatrix<f64>>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: samples.len(),
            });
        }
        Self::schedule(grid.times().into_iter().zip(samples).collect())
    }

    pub fn from_schedule(schedule: MatrixSchedule) -> Self {
        SystemMatrix { schedule }
    }

    pub fn dim(&self) -> usize {
        self.schedule.dim()
    }

    pub fn at(&self, t: f64) -> &DMatrix<f64> {
        self.schedule.at(t)
    }

    /// `A_R(t) = A(t) + I`.
    pub fn recursive_at(&self, t: f64) -> DMatrix<f64> {
        self.at(t) + DMatrix::identity(self.dim(), self.dim())
    }

    pub fn as_constant(&self) -> Option<&DMatrix<f64>> {
        match &self.schedule {
            MatrixSchedule::Constant(m) => Some(m),
            _ => None,
        }
    }

    pub fn schedule_ref(&self) -> &MatrixSchedule {
        &self.schedule
    }

    pub fn from_spec(spec: &SystemSpec) -> Result<Self> {
        let schedule = MatrixSchedule::from_spec(&spec.a)?;
        if schedule.dim() != spec.n {
            return Err(Error::DimensionMismatch {
                expected: spec.n,
                found: schedule.dim(),
            });
        }
        Ok(SystemMatrix { schedule })
    }

    pub fn to_spec(&self) -> SystemSpec {
        SystemSpec {
            n: self.dim(),
            a: self.schedule.to_spec(),
        }
    }
}

/// Row-major matrix data, `{"constant": rows}` or `{"schedule": [[t, rows], …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixSpec {
    Constant(Vec<Vec<f64>>),
    Schedule(Vec<(f64, Vec<Vec<f64>>)>),
}

/// System file: `{"n": 2, "A": {"constant": [[-1, 0], [0, -2]]}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: MatrixSpec,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionOptions {
    pub dense_step: f64,
    pub integrator_tol: f64,
}

impl Default for TransitionOptions {
    fn default() -> Self {
        TransitionOptions {
            dense_step: DEFAULT_DENSE_STEP,
            integrator_tol: DEFAULT_INTEGRATOR_TOL,
        }
    }
}

/// Tests invertibility of `I + μ(t)A(t)` at every right-scattered grid point.
///
/// A point is flagged when `|det| ≤ TOL_REG · ‖I + μA‖_Fⁿ`. Witnesses are
/// `(t, det)`. Windows without scattered points are vacuously regressive.
pub fn check_matrix_regressive(a: &SystemMatrix, grid: &Grid) -> RegressivityClass {
    let n = a.dim();
    let mut witnesses = Vec::new();
    for i in 0..grid.last() {
        let mu = grid.mu(i);
        if mu <= 0.0 {
            continue;
        }
        let b = DMatrix::identity(n, n) + a.at(grid.t(i)) * mu;
        let det = b.determinant();
        let scale = b.norm().powi(n as i32);
        if det.abs() <= TOL_REG * scale.max(f64::MIN_POSITIVE) {
            witnesses.push((grid.t(i), det));
        }
    }
    if witnesses.is_empty() {
        RegressivityClass {
            verdict: RegressivityVerdict::Regressive,
            witnesses,
        }
    } else {
        RegressivityClass {
            verdict: RegressivityVerdict::NotRegressive,
            witnesses,
        }
    }
}

pub(crate) fn require_regressive(a: &SystemMatrix, grid: &Grid) -> Result<()> {
    let class = check_matrix_regressive(a, grid);
    match class.witnesses.first() {
        Some(&(t, det)) if !class.is_regressive() => Err(Error::NotRegressive {
            t,
            detail: format!("det(I + μA) = {det:e}"),
        }),
        _ => Ok(()),
    }
}

/// Result of propagating across one grid interval.
pub(crate) struct IntervalStep {
    pub end: DMatrix<f64>,
    /// Values at the RK4 sub-step nodes strictly inside the interval
    /// (empty for a scattered jump).
    pub interior: Vec<DMatrix<f64>>,
    pub h_sub: f64,
    pub local_error: f64,
}

fn rk4_step(a: &SystemMatrix, t: f64, h: f64, x: &DMatrix<f64>) -> DMatrix<f64> {
    let a1 = a.at(t);
    let am = a.at(t + 0.5 * h);
    let a2 = a.at(t + h);
    let k1 = a1 * x;
    let k2 = am * (x + &k1 * (0.5 * h));
    let k3 = am * (x + &k2 * (0.5 * h));
    let k4 = a2 * (x + &k3 * h);
    x + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0)
}

fn rk4_run(a: &SystemMatrix, t: f64, h: f64, n: usize, x: &DMatrix<f64>, keep: bool) -> (DMatrix<f64>, Vec<DMatrix<f64>>) {
    let step = h / n as f64;
    let mut cur = x.clone();
    let mut nodes = Vec::new();
    for k in 0..n {
        cur = rk4_step(a, t + k as f64 * step, step, &cur);
        if keep && k + 1 < n {
            nodes.push(cur.clone());
        }
    }
    (cur, nodes)
}

/// Advances `x` from grid point `i` to `i + 1`.
pub(crate) fn propagate_interval(
    a: &SystemMatrix,
    grid: &Grid,
    i: usize,
    x: &DMatrix<f64>,
    opts: &TransitionOptions,
) -> IntervalStep {
    let t = grid.t(i);
    let mu = grid.mu(i);
    if mu > 0.0 {
        let n = a.dim();
        let b = DMatrix::identity(n, n) + a.at(t) * mu;
        return IntervalStep {
            end: b * x,
            interior: Vec::new(),
            h_sub: 0.0,
            local_error: 0.0,
        };
    }
    let h = grid.t(i + 1) - t;
    let seg = grid.window().segments()[grid.points()[i].segment];
    let cap = opts.dense_step.min(seg.len() / 8.0);
    let mut n_sub = ((h / cap) - 1e-9).ceil().max(2.0) as usize;
    if n_sub % 2 == 1 {
        n_sub += 1;
    }
    let mut doublings = 0;
    loop {
        let (fine, interior) = rk4_run(a, t, h, n_sub, x, true);
        let (coarse, _) = rk4_run(a, t, h, n_sub / 2, x, false);
        let err = (&fine - &coarse).norm() / 15.0;
        let scale = fine.norm().max(x.norm()).max(f64::MIN_POSITIVE);
        if err <= opts.integrator_tol * scale || doublings >= MAX_SUBSTEP_DOUBLINGS {
            return IntervalStep {
                end: fine,
                interior,
                h_sub: h / n_sub as f64,
                local_error: err / scale,
            };
        }
        n_sub *= 2;
        doublings += 1;
    }
}

/// Composite Simpson over an interval's sub-step nodes of `f(X)`.
pub(crate) fn simpson_nodes<F>(start: &DMatrix<f64>, step: &IntervalStep, f: F) -> DMatrix<f64>
where
    F: Fn(usize, &DMatrix<f64>) -> DMatrix<f64>,
{
    let n_sub = step.interior.len() + 1;
    let mut acc = f(0, start) + f(n_sub, &step.end);
    for (k, x) in step.interior.iter().enumerate() {
        let w = if (k + 1) % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(k + 1, x) * w;
    }
    acc * (step.h_sub / 3.0)
}

/// `Φ_A(t, t0)` cached at every grid point from `t0` to the window end.
#[derive(Clone, Debug)]
pub struct TransitionMatrix {
    grid: Arc<Grid>,
    base: usize,
    phi: Vec<DMatrix<f64>>,
    interior: Vec<Vec<DMatrix<f64>>>,
    h_sub: Vec<f64>,
    integrator_tol: f64,
    max_local_error: f64,
}

impl TransitionMatrix {
    /// Forward sweep from `t0`. Regressivity is not required: forward
    /// stepping never inverts, so `Φ` may become singular.
    pub fn compute(a: &SystemMatrix, grid: Arc<Grid>, t0: f64, opts: &TransitionOptions) -> Result<Self> {
        let base = grid.require_index(t0)?;
        let n = a.dim();
        let mut phi = Vec::with_capacity(grid.len() - base);
        let mut interior = Vec::with_capacity(grid.len() - base);
        let mut h_sub = Vec::with_capacity(grid.len() - base);
        let mut max_local_error: f64 = 0.0;
        let mut x = DMatrix::identity(n, n);
        for i in base..grid.last() {
            let step = propagate_interval(a, &grid, i, &x, opts);
            max_local_error = max_local_error.max(step.local_error);
            phi.push(std::mem::replace(&mut x, step.end));
            interior.push(step.interior);
            h_sub.push(step.h_sub);
        }
        phi.push(x);
        Ok(TransitionMatrix {
            grid,
            base,
            phi,
            interior,
            h_sub,
            integrator_tol: opts.integrator_tol,
            max_local_error,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn base_index(&self) -> usize {
        self.base
    }

    pub fn t0(&self) -> f64 {
        self.grid.t(self.base)
    }

    pub fn integrator_tol(&self) -> f64 {
        self.integrator_tol
    }

    /// Largest relative RK4 local error estimate seen in the sweep.
    pub fn max_local_error(&self) -> f64 {
        self.max_local_error
    }

    /// `Φ(t_i, t0)` for grid index `i ≥ base`.
    pub fn at_index(&self, i: usize) -> &DMatrix<f64> {
        &self.phi[i - self.base]
    }

    pub fn at(&self, t: f64) -> Result<&DMatrix<f64>> {
        let i = self.grid.require_index(t)?;
        if i < self.base {
            return Err(Error::NotInTimeScale(t));
        }
        Ok(self.at_index(i))
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        self.base..=self.grid.last()
    }

    pub(crate) fn interval(&self, i: usize) -> IntervalStep {
        IntervalStep {
            end: self.phi[i + 1 - self.base].clone(),
            interior: self.interior[i - self.base].clone(),
            h_sub: self.h_sub[i - self.base],
            local_error: 0.0,
        }
    }

    /// Cumulative `∫_{t0}^{t_i} Φᵀ(s, t0) M(s) Φ(s, t0) Δs` at every cached
    /// grid point: `μ Φᵀ M Φ` across gaps, Simpson on the RK4 nodes inside
    /// dense intervals.
    pub fn congruence_integral(&self, m: &MatrixSchedule) -> Vec<DMatrix<f64>> {
        let n = self.phi[0].nrows();
        let mut acc = DMatrix::zeros(n, n);
        let mut out = Vec::with_capacity(self.phi.len());
        out.push(acc.clone());
        for i in self.base..self.grid.last() {
            acc += self.interval_increment(i, m);
            out.push(acc.clone());
        }
        out
    }

    pub(crate) fn interval_increment(&self, i: usize, m: &MatrixSchedule) -> DMatrix<f64> {
        let t = self.grid.t(i);
        let x = self.at_index(i);
        let mu = self.grid.mu(i);
        if mu > 0.0 {
            return linalg::congruence(x, m.at(t)) * mu;
        }
        let step = self.interval(i);
        let h = step.h_sub;
        simpson_nodes(x, &step, |k, y| linalg::congruence(y, m.at(t + k as f64 * h)))
    }
}

/// `Φ_A(t, t0)⁻¹` with a one-norm condition estimate.
#[derive(Clone, Debug)]
pub struct InverseTransition {
    pub inverse: DMatrix<f64>,
    pub cond: f64,
}

/// Inverts the cached `Φ_A(t, t0)` by LU.
pub fn transition_inverse(phi: &TransitionMatrix, t: f64) -> Result<InverseTransition> {
    invert_at(phi.at(t)?, t)
}

pub(crate) fn invert_at(m: &DMatrix<f64>, t: f64) -> Result<InverseTransition> {
    let inverse = m
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::SingularTransition(t))?;
    if !inverse.iter().all(|v| v.is_finite()) {
        return Err(Error::SingularTransition(t));
    }
    let cond = linalg::cond1(m, &inverse);
    if cond > COND_WARN {
        warn!("transition matrix at t = {t} is ill-conditioned (cond ≈ {cond:e})");
    }
    Ok(InverseTransition { inverse, cond })
}

/// `Φ_A(t, t0)` on `w`. For `t < t0` returns `Φ_A(t0, t)⁻¹`.
pub fn transition(
    a: &SystemMatrix,
    w: &TimeScaleWindow,
    t0: f64,
    t: f64,
    opts: &TransitionOptions,
) -> Result<DMatrix<f64>> {
    for s in [t0, t] {
        if !w.contains(s) {
            return Err(Error::NotInTimeScale(s));
        }
    }
    if t < t0 {
        let forward = transition(a, w, t, t0, opts)?;
        return Ok(invert_at(&forward, t)?.inverse);
    }
    let n = a.dim();
    if (t - t0).abs() <= TOL_MEMBER {
        return Ok(DMatrix::identity(n, n));
    }
    let grid = Arc::new(w.restrict(t0, t)?.build_grid(opts.dense_step)?);
    require_regressive(a, &grid)?;
    let phi = TransitionMatrix::compute(a, grid.clone(), grid.t(0), opts)?;
    Ok(phi.at_index(grid.last()).clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timescale::{make_canonical, ScaleKind};

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(v))
    }

    #[test]
    fn regressivity_examples() {
        let z = make_canonical(&ScaleKind::Integers, 0.0, 5.0).unwrap().build_grid(1.0).unwrap();
        let minus_i = SystemMatrix::constant(-DMatrix::identity(2, 2)).unwrap();
        assert!(!check_matrix_regressive(&minus_i, &z).is_regressive());
        let half = SystemMatrix::constant(DMatrix::identity(2, 2) * -0.5).unwrap();
        assert!(check_matrix_regressive(&half, &z).is_regressive());
        let r = make_canonical(&ScaleKind::Reals, 0.0, 1.0).unwrap().build_grid(0.1).unwrap();
        assert!(check_matrix_regressive(&minus_i, &r).is_regressive());
    }

    #[test]
    fn integers_are_exact_powers() {
        let w = make_canonical(&ScaleKind::Integers, 0.0, 6.0).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[-0.5, 0.25, 0.1, -0.3]);
        let sys = SystemMatrix::constant(a.clone()).unwrap();
        let phi = transition(&sys, &w, 0.0, 5.0, &TransitionOptions::default()).unwrap();
        let ar = a + DMatrix::identity(2, 2);
        let expected = &ar * &ar * &ar * &ar * &ar;
        assert!((phi - expected).norm() < 1e-15);
    }

    #[test]
    fn identity_at_base() {
        let w = make_canonical(&ScaleKind::Reals, 0.0, 1.0).unwrap();
        let sys = SystemMatrix::scalar(-1.0);
        let phi = transition(&sys, &w, 0.5, 0.5, &TransitionOptions::default()).unwrap();
        assert_eq!(phi, DMatrix::identity(1, 1));
    }

    #[test]
    fn inverse_examples() {
        let w = make_canonical(&ScaleKind::Integers, 0.0, 4.0).unwrap();
        let grid = Arc::new(w.build_grid(1.0).unwrap());
        let sys = SystemMatrix::scalar(-0.5);
        let phi = TransitionMatrix::compute(&sys, grid, 0.0, &TransitionOptions::default()).unwrap();
        assert_eq!(phi.at(2.0).unwrap()[(0, 0)], 0.25);
        assert_eq!(transition_inverse(&phi, 2.0).unwrap().inverse[(0, 0)], 4.0);
        assert_eq!(transition_inverse(&phi, 0.0).unwrap().inverse[(0, 0)], 1.0);

        let r = make_canonical(&ScaleKind::Reals, 0.0, 1.0).unwrap();
        let grid = Arc::new(r.build_grid(1e-2).unwrap());
        let sys = SystemMatrix::constant(diag(&[-1.0, -2.0])).unwrap();
        let phi = TransitionMatrix::compute(&sys, grid, 0.0, &TransitionOptions::default()).unwrap();
        let inv = transition_inverse(&phi, 1.0).unwrap().inverse;
        assert!((inv[(0, 0)] - 1f64.exp()).abs() < 1e-9 * 1f64.exp());
        assert!((inv[(1, 1)] - 2f64.exp()).abs() < 1e-9 * 2f64.exp());
        assert!(inv[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn singular_transition_detected() {
        let w = make_canonical(&ScaleKind::Integers, 0.0, 3.0).unwrap();
        let grid = Arc::new(w.build_grid(1.0).unwrap());
        let sys = SystemMatrix::scalar(-1.0);
        let phi = TransitionMatrix::compute(&sys, grid, 0.0, &TransitionOptions::default()).unwrap();
        assert_eq!(phi.at(2.0).unwrap()[(0, 0)], 0.0);
        assert!(matches!(transition_inverse(&phi, 2.0), Err(Error::SingularTransition(_))));
        assert!(matches!(
            transition(&sys, &w, 0.0, 2.0, &TransitionOptions::default()),
            Err(Error::NotRegressive { .. })
        ));
    }

    #[test]
    fn backward_transition_is_inverse() {
        let w = make_canonical(&ScaleKind::Pulse { a: 1.0, b: 1.0 }, 0.0, 5.0).unwrap();
        let sys = SystemMatrix::constant(DMatrix::from_row_slice(2, 2, &[-0.4, 0.3, -0.2, -0.6])).unwrap();
        let opts = TransitionOptions::default();
        let fwd = transition(&sys, &w, 0.5, 4.5, &opts).unwrap();
        let back = transition(&sys, &w, 4.5, 0.5, &opts).unwrap();
        assert!((fwd * back - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn schedule_holds_values() {
        let s = MatrixSchedule::new_schedule(vec![
            (2.0, DMatrix::from_element(1, 1, 3.0)),
            (0.0, DMatrix::from_element(1, 1, 1.0)),
        ])
        .unwrap();
        assert_eq!(s.at(-1.0)[(0, 0)], 1.0);
        assert_eq!(s.at(1.9)[(0, 0)], 1.0);
        assert_eq!(s.at(2.0)[(0, 0)], 3.0);
        assert!(MatrixSchedule::new_schedule(vec![
            (0.0, DMatrix::zeros(1, 1)),
            (1.0, DMatrix::zeros(2, 2))
        ])
        .is_err());
    }

    #[test]
    fn system_spec_round_trip() {
        let text = r#"{"n": 2, "A": {"constant": [[-1.0, 0.0], [0.0, -2.0]]}}"#;
        let spec: SystemSpec = serde_json::from_str(text).unwrap();
        let sys = SystemMatrix::from_spec(&spec).unwrap();
        assert_eq!(sys.at(0.0), &diag(&[-1.0, -2.0]));
        assert_eq!(sys.to_spec(), spec);
        let text = r#"{"n": 1, "A": {"schedule": [[0.0, [[-1.0]]], [1.5, [[-2.0]]]]}}"#;
        let spec: SystemSpec = serde_json::from_str(text).unwrap();
        let sys = SystemMatrix::from_spec(&spec).unwrap();
        assert_eq!(sys.at(2.0)[(0, 0)], -2.0);
        let back: SystemSpec = serde_json::from_str(&serde_json::to_string(&sys.to_spec()).unwrap()).unwrap();
        assert_eq!(back, spec);
        let bad = r#"{"n": 3, "A": {"constant": [[-1.0]]}}"#;
        assert!(SystemMatrix::from_spec(&serde_json::from_str(bad).unwrap()).is_err());
    }
}
