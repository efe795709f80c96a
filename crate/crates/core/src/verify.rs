//! Trajectories of `x^Δ = A(t)x` and empirical Lyapunov-function checks.

use std::sync::Arc;

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::lyapunov::GramianSolution;
use crate::timescale::{Grid, TimeScaleWindow, TOL_MEMBER};
use crate::transition::{check_matrix_regressive, SystemMatrix, TransitionMatrix, TransitionOptions};
use crate::tscalc::{exp_ts, grid_stencil_smooth, ScalarSignal};

/// Default relative threshold of [`is_positive_definite`].
pub const DEFAULT_PD_TOL: f64 = 1e-10;
/// Sign tolerance: `V^Δ < 0` is read relative to `V`: `V^Δ < −SIGN_TOL · V`.
pub const SIGN_TOL: f64 = 1e-9;
/// Required relative agreement of the two `V^Δ` evaluations.
pub const DERIVATIVE_AGREEMENT_TOL: f64 = 1e-5;
/// `|V^Δ|` below which the agreement test is skipped.
pub const DERIVATIVE_FLOOR: f64 = 1e-12;
/// Share of leading grid points used to fit the overshoot constant.
pub const DECAY_FIT_FRACTION: f64 = 0.1;

/// Sampled solution `x(t) = Φ_A(t, t0) x0`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    grid: Arc<Grid>,
    pub x0: DVector<f64>,
    pub states: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    pub fn at(&self, t: f64) -> Result<&DVector<f64>> {
        Ok(&self.states[self.grid.require_index(t)?])
    }

    pub fn method(&self) -> &'static str {
        "exact-scattered + rk4-dense"
    }
}

/// Simulates on the part of `w` from `t0` on.
pub fn simulate(
    a: &SystemMatrix,
    w: &TimeScaleWindow,
    x0: &DVector<f64>,
    t0: f64,
    opts: &TransitionOptions,
) -> Result<Trajectory> {
    if !w.contains(t0) {
        return Err(Error::NotInTimeScale(t0));
    }
    let w = if (t0 - w.t0()).abs() <= TOL_MEMBER {
        w.clone()
    } else {
        w.restrict(t0, w.t_end())?
    };
    simulate_on_grid(a, Arc::new(w.build_grid(opts.dense_step)?), x0, opts)
}

/// Simulates from the first point of an existing grid.
///
/// `A` need not be regressive; forward stepping never inverts, and a
/// trajectory may legitimately reach zero at a gap.
pub fn simulate_on_grid(
    a: &SystemMatrix,
    grid: Arc<Grid>,
    x0: &DVector<f64>,
    opts: &TransitionOptions,
) -> Result<Trajectory> {
    if x0.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: x0.len(),
        });
    }
    if !check_matrix_regressive(a, &grid).is_regressive() {
        warn!("simulating a non-regressive system: the trajectory may be annihilated at a gap");
    }
    let phi = TransitionMatrix::compute(a, grid.clone(), grid.t(0), opts)?;
    let states = phi.indices().map(|i| phi.at_index(i) * x0).collect();
    Ok(Trajectory {
        grid,
        x0: x0.clone(),
        states,
    })
}

/// `true` iff the smallest eigenvalue exceeds `tol · ‖P‖_F`.
pub fn is_positive_definite(p: &DMatrix<f64>, tol: f64) -> Result<bool> {
    linalg::require_square(p)?;
    let asym = linalg::asymmetry(p);
    if asym > 1e-10 * p.norm().max(1.0) {
        return Err(Error::NonSymmetric(asym));
    }
    Ok(linalg::min_sym_eigenvalue(p) > tol * p.norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TraceVerdicts {
    pub v_positive: bool,
    pub v_delta_nonpositive: bool,
    pub v_delta_negative: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceConclusion {
    AsymptoticallyStable,
    LyapunovStable,
    Inconclusive,
}

/// `V(t) = xᵀ(t) P(t) x(t)` and its delta derivative along a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovTrace {
    pub times: Vec<f64>,
    pub v: Vec<f64>,
    /// Difference quotient of `V`; `None` where no forward point exists.
    pub v_delta: Vec<Option<f64>>,
    /// `xᵀ[AᵀP + PA + μAᵀPA + (I + μAᵀ)P^Δ(I + μA)]x`.
    pub v_delta_quadratic: Vec<Option<f64>>,
    pub max_disagreement: f64,
    pub verdicts: TraceVerdicts,
}

impl LyapunovTrace {
    pub fn conclusion(&self) -> TraceConclusion {
        let v = self.verdicts;
        if v.v_positive && v.v_delta_negative {
            TraceConclusion::AsymptoticallyStable
        } else if v.v_delta_nonpositive {
            TraceConclusion::LyapunovStable
        } else {
            TraceConclusion::Inconclusive
        }
    }
}

/// Evaluates `V` and `V^Δ` two ways and checks they agree.
///
/// The quotient uses `(V(σ(t)) − V(t))/μ` across gaps and a five-point
/// difference inside dense segments; the quadratic form uses the same
/// stencil on `P`.
pub fn lyapunov_trace(a: &SystemMatrix, p: &GramianSolution, traj: &Trajectory) -> Result<LyapunovTrace> {
    let g = p.grid();
    let n = p.len();
    if traj.states.len() < n || traj.grid.len() < n {
        return Err(Error::GridMismatch);
    }
    for i in 0..n {
        if (g.t(i) - traj.grid.t(i)).abs() > TOL_MEMBER * g.t(i).abs().max(1.0) {
            return Err(Error::GridMismatch);
        }
    }
    if p.at_index(0).nrows() != a.dim() || traj.x0.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: traj.x0.len(),
        });
    }
    let x = &traj.states;
    let v: Vec<f64> = (0..n).map(|i| p.at_index(i).dot(&(&x[i] * x[i].transpose()))).collect();
    let eye = DMatrix::<f64>::identity(a.dim(), a.dim());
    let mut v_delta = Vec::with_capacity(n);
    let mut v_quad = Vec::with_capacity(n);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let stencil = match grid_stencil_smooth(g, i) {
            Ok(s) if stencil_fits(&s, n) => s,
            _ => {
                v_delta.push(None);
                v_quad.push(None);
                continue;
            }
        };
        let q = stencil.apply(i, |j| v[j]);
        let pd: DMatrix<f64> = stencil.apply(i, |j| p.at_index(j).clone());
        let t = g.t(i);
        let mu = g.mu(i);
        let at = a.at(t);
        let b = &eye + at * mu;
        let pi = p.at_index(i);
        let k = at.transpose() * pi + pi * at + (at.transpose() * pi * at) * mu + linalg::congruence(&b, &pd);
        let c = x[i].dot(&(&k * &x[i]));
        let scale = q.abs().max(c.abs());
        if scale > DERIVATIVE_FLOOR {
            let rel = (q - c).abs() / scale;
            if rel > DERIVATIVE_AGREEMENT_TOL {
                return Err(Error::SpotCheckFailed { t, rel });
            }
            worst = worst.max(rel);
        }
        v_delta.push(Some(q));
        v_quad.push(Some(c));
    }
    let signs = v_delta.iter().zip(&v).filter_map(|(d, v)| d.map(|d| (d, *v)));
    let verdicts = TraceVerdicts {
        v_positive: v.iter().all(|v| *v > 0.0),
        v_delta_nonpositive: signs.clone().all(|(d, v)| d <= SIGN_TOL * v.abs()),
        v_delta_negative: signs.clone().all(|(d, v)| d < -SIGN_TOL * v.abs()),
    };
    Ok(LyapunovTrace {
        times: (0..n).map(|i| g.t(i)).collect(),
        v,
        v_delta,
        v_delta_quadratic: v_quad,
        max_disagreement: worst,
        verdicts,
    })
}

fn stencil_fits(s: &crate::tscalc::Stencil, n: usize) -> bool {
    match s {
        crate::tscalc::Stencil::Jump { next, .. } => *next < n,
        crate::tscalc::Stencil::Dense(w) => w.iter().all(|(j, _)| *j < n),
    }
}

/// `‖x(t)‖ ≤ γ_fit e_{−λ}(t, t0) ‖x0‖` at every grid point, where `γ_fit`
/// is the largest ratio over the leading tenth of the grid.
pub fn empirical_decay(traj: &Trajectory, lambda_test: f64) -> Result<bool> {
    let g = traj.grid.clone();
    for i in 0..g.last() {
        let f = 1.0 - g.mu(i) * lambda_test;
        if f <= 0.0 {
            return Err(Error::NotRegressive {
                t: g.t(i),
                detail: format!("1 − μλ = {f:e} is not positive"),
            });
        }
    }
    let x0 = traj.x0.norm();
    if x0 == 0.0 {
        return Ok(true);
    }
    let p = ScalarSignal::constant(g.clone(), -lambda_test);
    let t0 = g.t(0);
    let ratios = (0..g.len())
        .map(|i| Ok(traj.states[i].norm() / (exp_ts(&p, g.t(i), t0)? * x0)))
        .collect::<Result<Vec<f64>>>()?;
    let fit = ((g.len() as f64 * DECAY_FIT_FRACTION).ceil() as usize).clamp(1, g.len());
    let gamma = ratios[..fit].iter().cloned().fold(0.0, f64::max);
    Ok(ratios.iter().all(|r| *r <= gamma * (1.0 + 1e-12)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lyapunov::{solve_tsdle, solve_tsdle_stationary, CostMatrix, StationaryOptions};
    use crate::timescale::{make_canonical, ScaleKind};

    fn canon(kind: ScaleKind, a: f64, b: f64) -> TimeScaleWindow {
        make_canonical(&kind, a, b).unwrap()
    }

    fn one(v: f64) -> DVector<f64> {
        DVector::from_element(1, v)
    }

    #[test]
    fn simulate_examples() {
        let o = TransitionOptions::default();
        let tr = simulate(&SystemMatrix::scalar(-0.5), &canon(ScaleKind::Integers, 0.0, 6.0), &one(1.0), 0.0, &o).unwrap();
        for (t, x) in tr.times().iter().zip(&tr.states) {
            assert_eq!(x[0], 0.5f64.powf(*t));
        }
        let tr = simulate(&SystemMatrix::scalar(-1.0), &canon(ScaleKind::Reals, 0.0, 3.0), &one(2.0), 0.0, &o).unwrap();
        assert!((tr.at(3.0).unwrap()[0] - 2.0 * (-3.0f64).exp()).abs() < 1e-8);
        let pulse = canon(ScaleKind::Pulse { a: 1.0, b: 1.0 }, 0.0, 4.0);
        let tr = simulate(&SystemMatrix::scalar(-1.0), &pulse, &one(1.0), 0.0, &o).unwrap();
        assert_eq!(tr.at(3.0).unwrap()[0], 0.0);
        assert!(simulate(&SystemMatrix::scalar(-1.0), &pulse, &one(1.0), 1.5, &o).is_err());
    }

    #[test]
    fn positive_definiteness() {
        assert!(is_positive_definite(&DMatrix::identity(2, 2), DEFAULT_PD_TOL).unwrap());
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(!is_positive_definite(&m, DEFAULT_PD_TOL).unwrap());
        assert!(!is_positive_definite(&DMatrix::zeros(2, 2), DEFAULT_PD_TOL).unwrap());
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(is_positive_definite(&bad, DEFAULT_PD_TOL), Err(Error::NonSymmetric(_))));
    }

    #[test]
    fn trace_on_reals() {
        let o = TransitionOptions::default();
        let a = SystemMatrix::scalar(-1.0);
        let w = canon(ScaleKind::Reals, 0.0, 2.0);
        let p = solve_tsdle(&a, &CostMatrix::scalar(1.0), &DMatrix::from_element(1, 1, 0.5), &w, 0.0, &o).unwrap();
        let tr = simulate_on_grid(&a, p.grid().clone(), &one(1.0), &o).unwrap();
        let trace = lyapunov_trace(&a, &p, &tr).unwrap();
        assert_eq!(trace.conclusion(), TraceConclusion::AsymptoticallyStable);
        for (i, t) in trace.times.iter().enumerate() {
            assert!((trace.v[i] - 0.5 * (-2.0 * t).exp()).abs() < 1e-8);
            if let Some(d) = trace.v_delta[i] {
                assert!((d + (-2.0 * t).exp()).abs() < 1e-5);
            }
        }
        let zero = simulate_on_grid(&a, p.grid().clone(), &one(0.0), &o).unwrap();
        let trace = lyapunov_trace(&a, &p, &zero).unwrap();
        assert!(trace.v.iter().all(|v| *v == 0.0));
        assert_eq!(trace.conclusion(), TraceConclusion::LyapunovStable);
    }

    #[test]
    fn trace_on_integers_follows_cost() {
        let o = TransitionOptions::default();
        let a = SystemMatrix::scalar(-0.5);
        let w = canon(ScaleKind::Integers, 0.0, 6.0);
        let p = solve_tsdle(&a, &CostMatrix::scalar(1.0), &DMatrix::from_element(1, 1, 4.0 / 3.0), &w, 0.0, &o).unwrap();
        let tr = simulate_on_grid(&a, p.grid().clone(), &one(3.0), &o).unwrap();
        let trace = lyapunov_trace(&a, &p, &tr).unwrap();
        for (i, d) in trace.v_delta.iter().enumerate() {
            if let Some(d) = d {
                assert!((d + tr.states[i][0].powi(2)).abs() < 1e-12);
            }
        }
        assert!(trace.verdicts.v_delta_negative);
    }

    #[test]
    fn trace_from_stationary_on_pulse() {
        let o = StationaryOptions::default();
        let a = SystemMatrix::constant(DMatrix::from_row_slice(2, 2, &[-0.5, 0.2, -0.1, -0.3])).unwrap();
        let w = canon(ScaleKind::Pulse { a: 1.0, b: 1.0 }, 0.0, 6.0);
        let p = solve_tsdle_stationary(&a, &CostMatrix::identity(2), &w, 0.0, &o).unwrap();
        let tr = simulate_on_grid(&a, p.grid().clone(), &DVector::from_vec(vec![1.0, -2.0]), &o.transition).unwrap();
        let trace = lyapunov_trace(&a, &p, &tr).unwrap();
        assert_eq!(trace.conclusion(), TraceConclusion::AsymptoticallyStable);
    }

    #[test]
    fn decay_examples() {
        let o = TransitionOptions::default();
        let tr = simulate(&SystemMatrix::scalar(-1.0), &canon(ScaleKind::Reals, 0.0, 5.0), &one(1.0), 0.0, &o).unwrap();
        assert!(empirical_decay(&tr, 0.5).unwrap());
        assert!(!empirical_decay(&tr, 2.0).unwrap());
        let tr = simulate(&SystemMatrix::scalar(-0.5), &canon(ScaleKind::Integers, 0.0, 20.0), &one(1.0), 0.0, &o).unwrap();
        assert!(empirical_decay(&tr, 0.4).unwrap());
        assert!(matches!(empirical_decay(&tr, 1.0), Err(Error::NotRegressive { .. })));
    }
}
