//! Scalar calculus on a time-scale window: delta derivative, delta
//! integral, regressivity and the generalized exponential.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::timescale::{Grid, TOL_MEMBER};

/// Tolerance on `1 + μ(t)p(t)` when classifying regressivity.
pub const TOL_REG: f64 = 1e-10;
/// Absolute tolerance of the adaptive Simpson rule, per dense piece.
pub const QUAD_TOL: f64 = 1e-10;

const MAX_SIMPSON_DEPTH: u32 = 40;

#[derive(Clone)]
enum Evaluation {
    Rule(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// One value per grid point; linear between points of a dense segment.
    Tabulated(Vec<f64>),
}

/// A real function on a time-scale window.
#[derive(Clone)]
pub struct ScalarSignal {
    grid: Arc<Grid>,
    eval: Evaluation,
}

impl fmt::Debug for ScalarSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.eval {
            Evaluation::Rule(_) => "rule",
            Evaluation::Tabulated(_) => "tabulated",
        };
        f.debug_struct("ScalarSignal")
            .field("kind", &kind)
            .field("grid_points", &self.grid.len())
            .finish()
    }
}

impl ScalarSignal {
    pub fn from_fn<F>(grid: Arc<Grid>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ScalarSignal {
            grid,
            eval: Evaluation::Rule(Arc::new(f)),
        }
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        Self::from_fn(grid, move |_| c)
    }

    /// Values given at every grid point.
    pub fn tabulated(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(ScalarSignal {
            grid,
            eval: Evaluation::Tabulated(values),
        })
    }

    /// Samples `(t, value)` held piecewise-constant from each sample time
    /// onward, then tabulated on the grid.
    pub fn from_samples(grid: Arc<Grid>, samples: &[(f64, f64)]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidParameter("no samples".into()));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let values = grid
            .points()
            .iter()
            .map(|p| {
                let k = sorted.partition_point(|s| s.0 <= p.t + TOL_MEMBER);
                sorted[k.saturating_sub(1)].1
            })
            .collect();
        Self::tabulated(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self.eval, Evaluation::Tabulated(_))
    }

    /// Value at grid point `i`.
    pub fn at_index(&self, i: usize) -> f64 {
        match &self.eval {
            Evaluation::Rule(f) => f(self.grid.t(i)),
            Evaluation::Tabulated(v) => v[i],
        }
    }

    /// Value at a window point `t`.
    pub fn value(&self, t: f64) -> Result<f64> {
        if !self.grid.window().contains(t) {
            return Err(Error::NotInTimeScale(t));
        }
        match &self.eval {
            Evaluation::Rule(f) => Ok(f(t)),
            Evaluation::Tabulated(v) => {
                let i = self.grid.floor_index(t);
                let t_i = self.grid.t(i);
                if (t - t_i).abs() <= TOL_MEMBER || i == self.grid.last() {
                    return Ok(v[i]);
                }
                let t_j = self.grid.t(i + 1);
                let w = (t - t_i) / (t_j - t_i);
                Ok(v[i] * (1.0 - w) + v[i + 1] * w)
            }
        }
    }
}

/// How a delta derivative is formed at one grid point.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Stencil {
    /// `(f(σ(t)) − f(t)) / μ`, `σ(t)` being grid point `next`.
    Jump { next: usize, mu: f64 },
    /// Finite-difference weights on grid points of one dense segment.
    Dense(Vec<(usize, f64)>),
}

impl Stencil {
    pub(crate) fn apply<T, F>(&self, at: usize, value: F) -> T
    where
        F: Fn(usize) -> T,
        T: std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        match self {
            Stencil::Jump { next, mu } => (value(*next) - value(at)) * (1.0 / mu),
            Stencil::Dense(weights) => {
                let mut it = weights.iter();
                let (j, w) = it.next().expect("non-empty stencil");
                let mut acc = value(*j) * *w;
                for (j, w) in it {
                    acc = acc + value(*j) * *w;
                }
                acc
            }
        }
    }
}

/// Derivative stencil at grid point `i` for data tabulated on the grid:
/// the exact jump quotient at right-scattered points, the three-point
/// nonuniform formula (central where both neighbours share the segment,
/// one-sided otherwise) at right-dense points.
pub(crate) fn grid_stencil(grid: &Grid, i: usize) -> Result<Stencil> {
    if i >= grid.last() {
        return Err(Error::WindowExhausted(grid.t(grid.last())));
    }
    let mu = grid.mu(i);
    if mu > 0.0 {
        return Ok(Stencil::Jump { next: i + 1, mu });
    }
    let pts = grid.points();
    let seg = pts[i].segment;
    let same = |j: usize| j < pts.len() && pts[j].segment == seg;
    let t = |j: usize| pts[j].t;
    if i > 0 && same(i - 1) && pts[i - 1].mu == 0.0 {
        let h1 = t(i) - t(i - 1);
        let h2 = t(i + 1) - t(i);
        return Ok(Stencil::Dense(vec![
            (i - 1, -h2 / (h1 * (h1 + h2))),
            (i, (h2 - h1) / (h1 * h2)),
            (i + 1, h1 / (h2 * (h1 + h2))),
        ]));
    }
    if same(i + 2) {
        let h1 = t(i + 1) - t(i);
        let h2 = t(i + 2) - t(i + 1);
        return Ok(Stencil::Dense(vec![
            (i, -(2.0 * h1 + h2) / (h1 * (h1 + h2))),
            (i + 1, (h1 + h2) / (h1 * h2)),
            (i + 2, -h1 / (h2 * (h1 + h2))),
        ]));
    }
    let h = t(i + 1) - t(i);
    Ok(Stencil::Dense(vec![(i, -1.0 / h), (i + 1, 1.0 / h)]))
}

/// Like [`grid_stencil`], but inside dense segments with at least five grid
/// points uses the five-point Lagrange derivative on the nearest window of
/// points of the same segment (fourth order).
pub(crate) fn grid_stencil_smooth(grid: &Grid, i: usize) -> Result<Stencil> {
    let base = grid_stencil(grid, i)?;
    if matches!(base, Stencil::Jump { .. }) {
        return Ok(base);
    }
    let pts = grid.points();
    let seg = pts[i].segment;
    let mut lo = i;
    while lo > 0 && pts[lo - 1].segment == seg && pts[lo - 1].mu == 0.0 {
        lo -= 1;
    }
    let mut hi = i;
    while hi + 1 < pts.len() && pts[hi + 1].segment == seg {
        hi += 1;
        if pts[hi].mu > 0.0 {
            break;
        }
    }
    if hi - lo + 1 < 5 {
        return Ok(base);
    }
    let start = i.saturating_sub(2).clamp(lo, hi - 4);
    let nodes: Vec<usize> = (start..start + 5).collect();
    let x0 = pts[i].t;
    let weights = nodes
        .iter()
        .map(|&j| {
            let xj = pts[j].t;
            let mut w = 0.0;
            for &k in nodes.iter().filter(|&&k| k != j) {
                let mut term = 1.0 / (xj - pts[k].t);
                for &m in nodes.iter().filter(|&&m| m != j && m != k) {
                    term *= (x0 - pts[m].t) / (xj - pts[m].t);
                }
                w += term;
            }
            (j, w)
        })
        .collect();
    Ok(Stencil::Dense(weights))
}

/// Delta derivative `f^Δ(t)`.
///
/// At right-scattered points this is the exact quotient
/// `(f(σ(t)) − f(t))/μ(t)`. At right-dense points a second-order finite
/// difference is used: for rule-based signals with step
/// `min(dense_step/4, distance to the segment ends)`, for tabulated
/// signals on the neighbouring grid points.
pub fn delta_derivative(f: &ScalarSignal, t: f64) -> Result<f64> {
    let w = f.grid.window();
    let mu = w.mu(t)?;
    if (t - w.t_end()).abs() <= TOL_MEMBER {
        return Err(Error::WindowExhausted(t));
    }
    if mu > 0.0 {
        let s = t + mu;
        return Ok((f.value(s)? - f.value(t)?) / mu);
    }
    match &f.eval {
        Evaluation::Tabulated(v) => {
            let i = f
                .grid
                .index_of(t)
                .ok_or_else(|| Error::InvalidParameter(format!("tabulated signal has no sample at {t}")))?;
            let st = grid_stencil(&f.grid, i)?;
            Ok(st.apply(i, |j| v[j]))
        }
        Evaluation::Rule(rule) => {
            let seg = w
                .segments()
                .iter()
                .find(|s| t >= s.start - TOL_MEMBER && t <= s.end + TOL_MEMBER)
                .expect("member lies in a segment");
            let left = (t - seg.start).max(0.0);
            let right = (seg.end - t).max(0.0);
            let base = f.grid.dense_step() / 4.0;
            let hc = base.min(left).min(right);
            if hc >= base / 4.0 {
                return Ok((rule(t + hc) - rule(t - hc)) / (2.0 * hc));
            }
            if right >= left {
                let h = base.min(right / 2.0);
                Ok((-3.0 * rule(t) + 4.0 * rule(t + h) - rule(t + 2.0 * h)) / (2.0 * h))
            } else {
                let h = base.min(left / 2.0);
                Ok((3.0 * rule(t) - 4.0 * rule(t - h) + rule(t - 2.0 * h)) / (2.0 * h))
            }
        }
    }
}

/// Dense and scattered pieces of `[a, b)`.
struct Decomposition {
    /// Closed intervals `[lo, hi]` inside non-degenerate segments.
    dense: Vec<(f64, f64)>,
    /// Right-scattered points `s ∈ [a, b)` with `μ(s)`.
    jumps: Vec<(f64, f64)>,
}

fn decompose(grid: &Grid, a: f64, b: f64) -> Result<Decomposition> {
    let w = grid.window();
    if a > b {
        return Err(Error::ReversedBounds(a, b));
    }
    if !w.contains(a) {
        return Err(Error::NotInTimeScale(a));
    }
    if !w.contains(b) {
        return Err(Error::NotInTimeScale(b));
    }
    let segs = w.segments();
    let mut dense = Vec::new();
    let mut jumps = Vec::new();
    for (k, s) in segs.iter().enumerate() {
        let lo = s.start.max(a);
        let hi = s.end.min(b);
        if hi - lo > TOL_MEMBER {
            dense.push((lo, hi));
        }
        if k + 1 < segs.len() && s.end >= a - TOL_MEMBER && s.end < b - TOL_MEMBER {
            jumps.push((s.end, segs[k + 1].start - s.end));
        }
    }
    Ok(Decomposition { dense, jumps })
}

fn simpson_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth >= MAX_SIMPSON_DEPTH || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth + 1)
            + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth + 1)
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 0)
}

/// Composite adaptive Simpson over `[lo, hi]` starting from panels of
/// width at most `panel`.
pub(crate) fn integrate_dense<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, panel: f64, tol: f64) -> f64 {
    let n = ((hi - lo) / panel).ceil().clamp(1.0, 10_000.0) as usize;
    let h = (hi - lo) / n as f64;
    (0..n)
        .map(|k| {
            let a = lo + k as f64 * h;
            let b = if k + 1 == n { hi } else { a + h };
            simpson_adaptive(f, a, b, tol / n as f64)
        })
        .sum()
}

/// Weights of the quadratic interpolant through grid points `i-1, i, i+1`
/// (or `i, i+1, i+2`) integrated over `[t_i, t_{i+1}]`.
pub(crate) fn dense_interval_weights(grid: &Grid, i: usize) -> Vec<(usize, f64)> {
    let pts = grid.points();
    let seg = pts[i].segment;
    let idx: Vec<usize> = if i + 2 < pts.len() && pts[i + 2].segment == seg && pts[i + 1].mu == 0.0 {
        vec![i, i + 1, i + 2]
    } else if i > 0 && pts[i - 1].segment == seg && pts[i - 1].mu == 0.0 {
        vec![i - 1, i, i + 1]
    } else {
        let h = pts[i + 1].t - pts[i].t;
        return vec![(i, h / 2.0), (i + 1, h / 2.0)];
    };
    let xs: Vec<f64> = idx.iter().map(|&j| pts[j].t).collect();
    let (a, b) = (pts[i].t, pts[i + 1].t);
    // Two-point Gauss–Legendre is exact for the quadratic interpolant.
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let g = half / 3f64.sqrt();
    let nodes = [mid - g, mid + g];
    idx.iter()
        .enumerate()
        .map(|(k, &j)| {
            let w: f64 = nodes
                .iter()
                .map(|&x| {
                    let mut l = 1.0;
                    for (m, &xm) in xs.iter().enumerate() {
                        if m != k {
                            l *= (x - xm) / (xs[k] - xm);
                        }
                    }
                    l * half
                })
                .sum();
            (j, w)
        })
        .collect()
}

/// Delta integral `∫_a^b f(t) Δt`.
///
/// Right-scattered points `t ∈ [a, b)` contribute `μ(t) f(t)`; dense parts
/// are integrated with adaptive Simpson (rule-based signals) or the
/// piecewise-quadratic rule on grid samples (tabulated signals, which
/// require `a` and `b` to be grid points).
pub fn delta_integral(f: &ScalarSignal, a: f64, b: f64) -> Result<f64> {
    let (dense, jumps) = integral_parts(f, a, b)?;
    let mut total = dense;
    for (s, mu) in jumps {
        total += mu * f.value(s)?;
    }
    Ok(total)
}

/// `(∫ over dense parts, [(scattered point, μ)])` for `[a, b)`.
fn integral_parts(f: &ScalarSignal, a: f64, b: f64) -> Result<(f64, Vec<(f64, f64)>)> {
    let parts = decompose(&f.grid, a, b)?;
    let dense = match &f.eval {
        Evaluation::Rule(rule) => parts
            .dense
            .iter()
            .map(|&(lo, hi)| integrate_dense(&|x| rule(x), lo, hi, f.grid.dense_step(), QUAD_TOL))
            .sum(),
        Evaluation::Tabulated(v) => {
            let ia = f
                .grid
                .index_of(a)
                .ok_or_else(|| Error::InvalidParameter(format!("tabulated signal has no sample at {a}")))?;
            let ib = f
                .grid
                .index_of(b)
                .ok_or_else(|| Error::InvalidParameter(format!("tabulated signal has no sample at {b}")))?;
            (ia..ib)
                .filter(|&i| !f.grid.is_scattered(i))
                .map(|i| {
                    dense_interval_weights(&f.grid, i)
                        .iter()
                        .map(|&(j, w)| w * v[j])
                        .sum::<f64>()
                })
                .sum()
        }
    };
    Ok((dense, parts.jumps))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegressivityVerdict {
    NotRegressive,
    Regressive,
    PositivelyRegressive,
}

/// Regressivity verdict with the grid points that decided it.
///
/// `witnesses` holds `(t, 1 + μ(t)p(t))` (or `(t, det(I + μ(t)A(t)))` for
/// matrices): the vanishing values when not regressive, the non-positive
/// ones when regressive but not positively so.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressivityClass {
    pub verdict: RegressivityVerdict,
    pub witnesses: Vec<(f64, f64)>,
}

impl RegressivityClass {
    pub fn is_regressive(&self) -> bool {
        self.verdict != RegressivityVerdict::NotRegressive
    }

    pub fn is_positively_regressive(&self) -> bool {
        self.verdict == RegressivityVerdict::PositivelyRegressive
    }
}

/// Checks `1 + μ(t)p(t)` on every grid point of `𝕋^κ`.
pub fn regressivity(p: &ScalarSignal) -> RegressivityClass {
    regressivity_with_tol(p, TOL_REG)
}

pub fn regressivity_with_tol(p: &ScalarSignal, tol: f64) -> RegressivityClass {
    let grid = &p.grid;
    let mut zeros = Vec::new();
    let mut nonpositive = Vec::new();
    for i in 0..grid.last() {
        let v = 1.0 + grid.mu(i) * p.at_index(i);
        if v.abs() <= tol {
            zeros.push((grid.t(i), v));
        } else if v <= tol {
            nonpositive.push((grid.t(i), v));
        }
    }
    if !zeros.is_empty() {
        RegressivityClass {
            verdict: RegressivityVerdict::NotRegressive,
            witnesses: zeros,
        }
    } else if !nonpositive.is_empty() {
        RegressivityClass {
            verdict: RegressivityVerdict::Regressive,
            witnesses: nonpositive,
        }
    } else {
        RegressivityClass {
            verdict: RegressivityVerdict::PositivelyRegressive,
            witnesses: Vec::new(),
        }
    }
}

/// Generalized exponential `e_p(t, t0)`, the solution of `x^Δ = p x`,
/// `x(t0) = 1`.
///
/// For `t ≥ t0` this is `∏ (1 + μ(s)p(s)) · exp(∫ p)` over the scattered
/// points and dense parts of `[t0, t)`; the product may vanish when `p` is
/// not regressive. For `t < t0` the reciprocal `1 / e_p(t0, t)` is
/// returned, which requires regressivity on `[t, t0)`.
pub fn exp_ts(p: &ScalarSignal, t: f64, t0: f64) -> Result<f64> {
    if t < t0 {
        let forward = exp_forward(p, t0, t, true)?;
        return Ok(1.0 / forward);
    }
    exp_forward(p, t, t0, false)
}

fn exp_forward(p: &ScalarSignal, t: f64, t0: f64, need_regressive: bool) -> Result<f64> {
    let (dense, jumps) = integral_parts(p, t0, t)?;
    let mut prod = dense.exp();
    for (s, mu) in jumps {
        let factor = 1.0 + mu * p.value(s)?;
        if need_regressive && factor.abs() <= TOL_REG {
            return Err(Error::NotRegressive {
                t: s,
                detail: format!("1 + μp = {factor:e}"),
            });
        }
        prod *= factor;
    }
    Ok(prod)
}
