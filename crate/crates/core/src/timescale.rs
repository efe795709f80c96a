//! Finite windows of time scales.
//!
//! A [`TimeScaleWindow`] stores `𝕋 ∩ [t0, t_end]` as an ordered list of
//! disjoint closed intervals. Degenerate intervals are isolated points. The
//! jump operators follow the usual conventions on a bounded set: `σ(t_end) =
//! t_end` and `ρ(t0) = t0`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance of the membership test.
pub const TOL_MEMBER: f64 = 1e-12;
/// Smallest point kept when a quantum window starts at its accumulation point 0.
pub const DEFAULT_MIN_SPACING: f64 = 1e-9;

/// Relative slack when deciding whether a dense segment needs one more
/// grid step; avoids a vanishing final sub-step from rounding.
const GRID_STEP_SLACK: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
}

impl Segment {
    pub fn new(start: f64, end: f64) -> Self {
        Segment { start, end }
    }

    pub fn point(t: f64) -> Self {
        Segment { start: t, end: t }
    }

    pub fn is_degenerate(&self) -> bool {
        self.end - self.start <= TOL_MEMBER
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    fn contains(&self, t: f64) -> bool {
        t >= self.start - TOL_MEMBER && t <= self.end + TOL_MEMBER
    }
}

/// The canonical time scales.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScaleKind {
    Reals,
    Integers,
    HUniform {
        h: f64,
    },
    /// `{q^k : k ∈ ℤ} ∪ {0}`.
    Quantum {
        q: f64,
        #[serde(default = "default_min_spacing")]
        min_spacing: f64,
    },
    /// `⋃_k [k(a+b), k(a+b)+a]`: intervals of length `a` separated by gaps `b`.
    Pulse {
        a: f64,
        b: f64,
    },
}

fn default_min_spacing() -> f64 {
    DEFAULT_MIN_SPACING
}

impl ScaleKind {
    pub fn quantum(q: f64) -> Self {
        ScaleKind::Quantum {
            q,
            min_spacing: DEFAULT_MIN_SPACING,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        match *self {
            ScaleKind::Reals | ScaleKind::Integers => Ok(()),
            ScaleKind::HUniform { h } if !(h > 0.0 && h.is_finite()) => bad("h must be > 0"),
            ScaleKind::Quantum { q, .. } if !(q > 1.0 && q.is_finite()) => bad("q must be > 1"),
            ScaleKind::Quantum { min_spacing, .. } if !(min_spacing > 0.0) => {
                bad("min_spacing must be > 0")
            }
            ScaleKind::Pulse { a, b } if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) => {
                bad("pulse lengths a, b must be > 0")
            }
            _ => Ok(()),
        }
    }
}

/// Left/right scattered flags of a point. `isolated` and `dense` are derived.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PointClass {
    pub left_scattered: bool,
    pub right_scattered: bool,
}

impl PointClass {
    pub fn is_isolated(&self) -> bool {
        self.left_scattered && self.right_scattered
    }

    pub fn is_dense(&self) -> bool {
        !self.left_scattered && !self.right_scattered
    }

    pub fn is_right_dense(&self) -> bool {
        !self.right_scattered
    }

    pub fn is_left_dense(&self) -> bool {
        !self.left_scattered
    }

    /// All labels that apply, e.g. `["left-dense", "right-scattered"]`.
    pub fn labels(&self) -> Vec<&'static str> {
        let mut out = vec![
            if self.left_scattered { "left-scattered" } else { "left-dense" },
            if self.right_scattered { "right-scattered" } else { "right-dense" },
        ];
        if self.is_isolated() {
            out.push("isolated");
        }
        if self.is_dense() {
            out.push("dense");
        }
        out
    }
}

impl fmt::Display for PointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.labels().join("|"))
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Generator {
    kind: ScaleKind,
    window: [f64; 2],
}

/// `𝕋 ∩ [t0, t_end]` as disjoint closed intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeScaleWindow {
    segments: Vec<Segment>,
    generator: Option<Generator>,
}

impl TimeScaleWindow {
    /// Builds a window from explicit segments. Segments must be ordered,
    /// disjoint (`b_i < a_{i+1}`) and have `a_i ≤ b_i`.
    pub fn from_segments(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidParameter("no segments".into()));
        }
        for s in &segments {
            if !(s.start.is_finite() && s.end.is_finite()) || s.start > s.end {
                return Err(Error::InvalidParameter(format!(
                    "bad segment [{}, {}]",
                    s.start, s.end
                )));
            }
        }
        for w in segments.windows(2) {
            if !(w[0].end + TOL_MEMBER < w[1].start) {
                return Err(Error::InvalidParameter(format!(
                    "segments [{}, {}] and [{}, {}] overlap or are out of order",
                    w[0].start, w[0].end, w[1].start, w[1].end
                )));
            }
        }
        Ok(TimeScaleWindow {
            segments,
            generator: None,
        })
    }

    /// A purely discrete scale from user-supplied points (sorted and
    /// deduplicated here).
    pub fn from_points(mut points: Vec<f64>) -> Result<Self> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("non-finite point".into()));
        }
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        points.dedup_by(|a, b| (*a - *b).abs() <= TOL_MEMBER);
        Self::from_segments(points.into_iter().map(Segment::point).collect())
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn t0(&self) -> f64 {
        self.segments[0].start
    }

    pub fn t_end(&self) -> f64 {
        self.segments[self.segments.len() - 1].end
    }

    /// The canonical kind this window was generated from, if any.
    pub fn kind(&self) -> Option<&ScaleKind> {
        self.generator.as_ref().map(|g| &g.kind)
    }

    pub fn is_extendable(&self) -> bool {
        self.generator.is_some()
    }

    /// Quantum windows starting at 0 include the accumulation point.
    fn accumulates_at_start(&self) -> bool {
        matches!(
            self.generator,
            Some(Generator {
                kind: ScaleKind::Quantum { .. },
                ..
            })
        ) && self.t0() == 0.0
    }

    fn locate(&self, t: f64) -> Option<usize> {
        let idx = self.segments.partition_point(|s| s.end + TOL_MEMBER < t);
        if idx < self.segments.len() && self.segments[idx].contains(t) {
            Some(idx)
        } else {
            None
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.locate(t).is_some()
    }

    fn require(&self, t: f64) -> Result<usize> {
        self.locate(t).ok_or(Error::NotInTimeScale(t))
    }

    /// Forward jump `σ(t) = inf{s ∈ 𝕋 : s > t}`; `σ(t_end) = t_end`.
    pub fn sigma(&self, t: f64) -> Result<f64> {
        let i = self.require(t)?;
        let seg = self.segments[i];
        if t < seg.end - TOL_MEMBER {
            return Ok(t);
        }
        Ok(match self.segments.get(i + 1) {
            Some(next) => next.start,
            None => t,
        })
    }

    /// Backward jump `ρ(t) = sup{s ∈ 𝕋 : s < t}`; `ρ(t0) = t0`.
    pub fn rho(&self, t: f64) -> Result<f64> {
        let i = self.require(t)?;
        let seg = self.segments[i];
        if t > seg.start + TOL_MEMBER {
            return Ok(t);
        }
        Ok(if i == 0 { t } else { self.segments[i - 1].end })
    }

    /// Graininess `μ(t) = σ(t) − t`.
    pub fn mu(&self, t: f64) -> Result<f64> {
        Ok(self.sigma(t)? - t)
    }

    /// Classifies `t` by its jumps. The accumulation point 0 of a quantum
    /// window is reported right-dense even though the truncated
    /// representation has a first positive point.
    pub fn classify(&self, t: f64) -> Result<PointClass> {
        let s = self.sigma(t)?;
        let r = self.rho(t)?;
        let right_scattered = if self.accumulates_at_start() && t.abs() <= TOL_MEMBER {
            false
        } else {
            s > t
        };
        Ok(PointClass {
            left_scattered: r < t,
            right_scattered,
        })
    }

    /// Intersection with `[a, b]`.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Self> {
        if a > b {
            return Err(Error::ReversedBounds(a, b));
        }
        let segments: Vec<Segment> = self
            .segments
            .iter()
            .filter_map(|s| {
                let lo = s.start.max(a);
                let hi = s.end.min(b);
                if lo <= hi + TOL_MEMBER {
                    Some(Segment::new(lo, hi.max(lo)))
                } else {
                    None
                }
            })
            .collect();
        if segments.is_empty() {
            return Err(Error::EmptyWindow(a, b));
        }
        Ok(TimeScaleWindow {
            segments,
            generator: self.generator.as_ref().map(|g| Generator {
                kind: g.kind.clone(),
                window: [a.max(g.window[0]), b.min(g.window[1])],
            }),
        })
    }

    /// Regenerates a canonical window over `[t0, new_end]`.
    pub fn extended_to(&self, new_end: f64) -> Result<Self> {
        let g = self.generator.as_ref().ok_or(Error::NotExtendable)?;
        make_canonical(&g.kind, g.window[0], new_end.max(g.window[1]))
    }

    pub fn build_grid(&self, dense_step: f64) -> Result<Grid> {
        Grid::new(self.clone(), dense_step)
    }

    pub fn to_spec(&self) -> TimeScaleSpec {
        match &self.generator {
            Some(g) => TimeScaleSpec::Canonical {
                scale: g.kind.clone(),
                window: g.window,
            },
            None => TimeScaleSpec::Explicit {
                segments: self.segments.iter().map(|s| [s.start, s.end]).collect(),
            },
        }
    }

    pub fn from_spec(spec: &TimeScaleSpec) -> Result<Self> {
        match spec {
            TimeScaleSpec::Canonical { scale, window } => {
                make_canonical(scale, window[0], window[1])
            }
            TimeScaleSpec::Explicit { segments } => Self::from_segments(
                segments.iter().map(|s| Segment::new(s[0], s[1])).collect(),
            ),
        }
    }
}

/// Builds `𝕋 ∩ [t0, t_end]` for one of the canonical scales.
pub fn make_canonical(kind: &ScaleKind, t0: f64, t_end: f64) -> Result<TimeScaleWindow> {
    kind.validate()?;
    if !(t0.is_finite() && t_end.is_finite()) || t0 > t_end {
        return Err(Error::InvalidParameter(format!(
            "bad window [{t0}, {t_end}]"
        )));
    }
    let segments = match *kind {
        ScaleKind::Reals => vec![Segment::new(t0, t_end)],
        ScaleKind::Integers => uniform_points(1.0, t0, t_end),
        ScaleKind::HUniform { h } => uniform_points(h, t0, t_end),
        ScaleKind::Quantum { q, min_spacing } => quantum_points(q, min_spacing, t0, t_end),
        ScaleKind::Pulse { a, b } => pulse_segments(a, b, t0, t_end),
    };
    if segments.is_empty() {
        return Err(Error::EmptyWindow(t0, t_end));
    }
    Ok(TimeScaleWindow {
        segments,
        generator: Some(Generator {
            kind: kind.clone(),
            window: [t0, t_end],
        }),
    })
}

fn uniform_points(h: f64, t0: f64, t_end: f64) -> Vec<Segment> {
    let k0 = (t0 / h - 1e-9).ceil() as i64;
    let k1 = (t_end / h + 1e-9).floor() as i64;
    (k0..=k1).map(|k| Segment::point(k as f64 * h)).collect()
}

fn quantum_points(q: f64, min_spacing: f64, t0: f64, t_end: f64) -> Vec<Segment> {
    let mut out = Vec::new();
    if t_end <= 0.0 {
        if t0 <= 0.0 && t_end >= 0.0 {
            out.push(Segment::point(0.0));
        }
        return out;
    }
    let lower = if t0 <= 0.0 {
        if t0 == 0.0 {
            out.push(Segment::point(0.0));
        }
        min_spacing
    } else {
        t0
    };
    let mut k = (lower.ln() / q.ln() - 1e-9).ceil() as i32;
    loop {
        let p = q.powi(k);
        if p > t_end * (1.0 + 1e-12) {
            break;
        }
        if p >= lower * (1.0 - 1e-12) {
            out.push(Segment::point(p));
        }
        k += 1;
    }
    out
}

fn pulse_segments(a: f64, b: f64, t0: f64, t_end: f64) -> Vec<Segment> {
    let period = a + b;
    let k0 = (t0 / period).floor() as i64 - 1;
    let k1 = (t_end / period).ceil() as i64;
    let mut out = Vec::new();
    for k in k0..=k1 {
        let start = k as f64 * period;
        let lo = start.max(t0);
        let hi = (start + a).min(t_end);
        if lo <= hi + TOL_MEMBER {
            out.push(Segment::new(lo, hi.max(lo)));
        }
    }
    out
}

/// On-disk time-scale description.
///
/// ```json
/// {"kind": "pulse", "a": 1.0, "b": 1.0, "window": [0.0, 10.0]}
/// {"kind": "explicit", "segments": [[0.0, 1.0], [2.5, 2.5]]}
/// ```
#[derive(Clone, Debug, PartialEq)]
pub enum TimeScaleSpec {
    Explicit { segments: Vec<[f64; 2]> },
    Canonical { scale: ScaleKind, window: [f64; 2] },
}

impl TimeScaleSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        Self::from_value(value)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        let kind = value
            .get("kind")
            .and_then(|k| k.as_str())
            .ok_or_else(|| Error::Parse("time-scale spec needs a \"kind\"".into()))?;
        if kind == "explicit" {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Raw {
                #[allow(dead_code)]
                kind: String,
                segments: Vec<[f64; 2]>,
            }
            let raw: Raw = serde_json::from_value(value)?;
            Ok(TimeScaleSpec::Explicit {
                segments: raw.segments,
            })
        } else {
            #[derive(Deserialize)]
            struct Raw {
                #[serde(flatten)]
                scale: ScaleKind,
                window: [f64; 2],
            }
            let raw: Raw = serde_json::from_value(value)?;
            Ok(TimeScaleSpec::Canonical {
                scale: raw.scale,
                window: raw.window,
            })
        }
    }

    pub fn to_value(&self) -> serde_json::Value {
        match self {
            TimeScaleSpec::Explicit { segments } => serde_json::json!({
                "kind": "explicit",
                "segments": segments,
            }),
            TimeScaleSpec::Canonical { scale, window } => {
                let mut v = serde_json::to_value(scale).expect("scale kind serializes");
                v["window"] = serde_json::json!(window);
                v
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("spec serializes")
    }
}

/// A window point with its graininess and classification.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub t: f64,
    pub mu: f64,
    pub class: PointClass,
    /// Index of the window segment containing `t`.
    pub segment: usize,
}

/// Discretization of a window: every segment endpoint, plus sub-steps of
/// at most `dense_step` inside non-degenerate segments.
///
/// Interval `i → i + 1` is a *scattered jump* when `μ(t_i) > 0` and a
/// *dense step* otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    points: Vec<GridPoint>,
    dense_step: f64,
    window: TimeScaleWindow,
}

impl Grid {
    pub fn new(window: TimeScaleWindow, dense_step: f64) -> Result<Self> {
        if !(dense_step > 0.0 && dense_step.is_finite()) {
            return Err(Error::InvalidParameter("dense_step must be > 0".into()));
        }
        let mut points = Vec::new();
        let nseg = window.segments.len();
        for (si, seg) in window.segments.iter().enumerate() {
            let jump = if si + 1 < nseg {
                window.segments[si + 1].start - seg.end
            } else {
                0.0
            };
            let mut times = vec![seg.start];
            if !seg.is_degenerate() {
                let steps = ((seg.len() / dense_step) - GRID_STEP_SLACK).ceil().max(1.0) as usize;
                for k in 1..steps {
                    times.push(seg.start + k as f64 * dense_step);
                }
                times.push(seg.end);
            }
            let last = times.len() - 1;
            for (k, &t) in times.iter().enumerate() {
                let mu = if k == last { jump } else { 0.0 };
                let class = window.classify(t)?;
                points.push(GridPoint {
                    t,
                    mu,
                    class,
                    segment: si,
                });
            }
        }
        Ok(Grid {
            points,
            dense_step,
            window,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[GridPoint] {
        &self.points
    }

    pub fn t(&self, i: usize) -> f64 {
        self.points[i].t
    }

    pub fn mu(&self, i: usize) -> f64 {
        self.points[i].mu
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn dense_step(&self) -> f64 {
        self.dense_step
    }

    pub fn window(&self) -> &TimeScaleWindow {
        &self.window
    }

    pub fn last(&self) -> usize {
        self.points.len() - 1
    }

    /// Whether the interval starting at point `i` is a jump across a gap.
    pub fn is_scattered(&self, i: usize) -> bool {
        self.points[i].mu > 0.0
    }

    pub fn mu_max(&self) -> f64 {
        self.points.iter().map(|p| p.mu).fold(0.0, f64::max)
    }

    /// Index of the grid point equal to `t` (within the membership tolerance).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let idx = self.points.partition_point(|p| p.t + TOL_MEMBER < t);
        if idx < self.points.len() && (self.points[idx].t - t).abs() <= TOL_MEMBER {
            Some(idx)
        } else {
            None
        }
    }

    pub fn require_index(&self, t: f64) -> Result<usize> {
        self.index_of(t).ok_or(Error::NotInTimeScale(t))
    }

    /// Index of the last grid point `≤ t`.
    pub fn floor_index(&self, t: f64) -> usize {
        let idx = self.points.partition_point(|p| p.t <= t + TOL_MEMBER);
        idx.saturating_sub(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pulse11(t_end: f64) -> TimeScaleWindow {
        make_canonical(&ScaleKind::Pulse { a: 1.0, b: 1.0 }, 0.0, t_end).unwrap()
    }

    fn ints(a: f64, b: f64) -> TimeScaleWindow {
        make_canonical(&ScaleKind::Integers, a, b).unwrap()
    }

    #[test]
    fn sigma_examples() {
        let w = pulse11(3.0);
        assert_eq!(w.sigma(0.5).unwrap(), 0.5);
        assert_eq!(w.sigma(1.0).unwrap(), 2.0);
        let q = make_canonical(&ScaleKind::quantum(2.0), 1.0, 16.0).unwrap();
        assert_eq!(q.sigma(4.0).unwrap(), 8.0);
        assert_eq!(w.sigma(3.0).unwrap(), 3.0);
    }

    #[test]
    fn rho_examples() {
        assert_eq!(ints(0.0, 10.0).rho(3.0).unwrap(), 2.0);
        let r = make_canonical(&ScaleKind::Reals, 0.0, 1.0).unwrap();
        assert_eq!(r.rho(0.5).unwrap(), 0.5);
        assert_eq!(pulse11(3.0).rho(2.0).unwrap(), 1.0);
        assert_eq!(r.rho(0.0).unwrap(), 0.0);
    }

    #[test]
    fn mu_examples() {
        let h = make_canonical(&ScaleKind::HUniform { h: 0.25 }, 0.0, 2.0).unwrap();
        assert!((h.mu(0.75).unwrap() - 0.25).abs() < 1e-15);
        let r = make_canonical(&ScaleKind::Reals, 0.0, 1.0).unwrap();
        assert_eq!(r.mu(0.3).unwrap(), 0.0);
        let q = make_canonical(&ScaleKind::quantum(2.0), 1.0, 16.0).unwrap();
        assert_eq!(q.mu(4.0).unwrap(), 4.0);
    }

    #[test]
    fn classify_examples() {
        assert!(ints(0.0, 10.0).classify(5.0).unwrap().is_isolated());
        let r = make_canonical(&ScaleKind::Reals, 0.0, 1.0).unwrap();
        assert!(r.classify(0.5).unwrap().is_dense());
        let c = pulse11(3.0).classify(1.0).unwrap();
        assert!(c.is_left_dense() && c.right_scattered);
        assert!(!c.is_isolated() && !c.is_dense());
    }

    #[test]
    fn not_in_time_scale() {
        let w = pulse11(3.0);
        assert_eq!(w.sigma(1.5), Err(Error::NotInTimeScale(1.5)));
        assert!(w.mu(1.5).is_err());
        assert!(w.classify(-1.0).is_err());
    }

    #[test]
    fn canonical_constructors() {
        let h = make_canonical(&ScaleKind::HUniform { h: 1.0 }, 0.0, 5.0).unwrap();
        assert_eq!(h.segments().len(), 6);
        assert!(h.segments().iter().enumerate().all(|(k, s)| s.start == k as f64 && s.is_degenerate()));
        let p = pulse11(3.0);
        assert_eq!(p.segments(), &[Segment::new(0.0, 1.0), Segment::new(2.0, 3.0)]);
        let q = make_canonical(&ScaleKind::quantum(2.0), 1.0, 8.0).unwrap();
        let pts: Vec<f64> = q.segments().iter().map(|s| s.start).collect();
        assert_eq!(pts, vec![1.0, 2.0, 4.0, 8.0]);
    }

    #[test]
    fn pulse_window_ending_on_an_interval_start() {
        let p = pulse11(10.0);
        assert_eq!(p.segments().len(), 6);
        assert_eq!(p.segments()[5], Segment::point(10.0));
    }

    #[test]
    fn quantum_from_zero_keeps_accumulation_point() {
        let q = make_canonical(&ScaleKind::quantum(2.0), 0.0, 4.0).unwrap();
        assert_eq!(q.t0(), 0.0);
        assert!(q.segments()[1].start >= DEFAULT_MIN_SPACING);
        assert!(q.classify(0.0).unwrap().is_right_dense());
    }

    #[test]
    fn canonical_errors() {
        assert!(matches!(
            make_canonical(&ScaleKind::HUniform { h: 0.0 }, 0.0, 1.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            make_canonical(&ScaleKind::quantum(1.0), 1.0, 2.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            make_canonical(&ScaleKind::Integers, 0.2, 0.8),
            Err(Error::EmptyWindow(..))
        ));
        assert!(matches!(
            make_canonical(&ScaleKind::Pulse { a: 1.0, b: 1.0 }, 1.2, 1.8),
            Err(Error::EmptyWindow(..))
        ));
    }

    #[test]
    fn explicit_segments_validated() {
        assert!(TimeScaleWindow::from_segments(vec![Segment::new(0.0, 1.0), Segment::new(1.0, 2.0)]).is_err());
        assert!(TimeScaleWindow::from_segments(vec![Segment::new(1.0, 0.0)]).is_err());
        assert!(TimeScaleWindow::from_segments(vec![]).is_err());
        let w = TimeScaleWindow::from_points(vec![3.0, 1.0, 2.0, 1.0]).unwrap();
        assert_eq!(w.segments().len(), 3);
        assert!(!w.is_extendable());
    }

    #[test]
    fn grid_examples() {
        let r = make_canonical(&ScaleKind::Reals, 0.0, 1.0).unwrap();
        assert_eq!(r.build_grid(0.5).unwrap().times(), vec![0.0, 0.5, 1.0]);
        assert_eq!(ints(0.0, 2.0).build_grid(0.1).unwrap().times(), vec![0.0, 1.0, 2.0]);
        let g = pulse11(3.0).build_grid(0.5).unwrap();
        assert_eq!(g.times(), vec![0.0, 0.5, 1.0, 2.0, 2.5, 3.0]);
        let mus: Vec<f64> = g.points().iter().map(|p| p.mu).collect();
        assert_eq!(mus, vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert!(r.build_grid(0.0).is_err());
    }

    #[test]
    fn grid_final_substep_is_shortened() {
        let r = make_canonical(&ScaleKind::Reals, 0.0, 1.0).unwrap();
        let g = r.build_grid(0.3).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.t(4), 1.0);
        assert!((g.t(4) - g.t(3) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn restrict_and_extend() {
        let p = pulse11(10.0);
        let r = p.restrict(0.5, 2.5).unwrap();
        assert_eq!(r.segments(), &[Segment::new(0.5, 1.0), Segment::new(2.0, 2.5)]);
        let e = pulse11(3.0).extended_to(7.0).unwrap();
        assert_eq!(e.t_end(), 7.0);
        assert_eq!(e.segments().len(), 4);
        let x = TimeScaleWindow::from_points(vec![0.0, 1.0]).unwrap();
        assert_eq!(x.extended_to(5.0), Err(Error::NotExtendable));
    }

    #[test]
    fn spec_round_trip() {
        let text = r#"{"kind": "pulse", "a": 1.0, "b": 1.0, "window": [0.0, 10.0]}"#;
        let spec = TimeScaleSpec::from_json(text).unwrap();
        let w = TimeScaleWindow::from_spec(&spec).unwrap();
        assert_eq!(w.to_spec(), spec);
        assert_eq!(TimeScaleSpec::from_json(&spec.to_json()).unwrap(), spec);

        let text = r#"{"kind": "explicit", "segments": [[0.0, 1.0], [2.5, 2.5]]}"#;
        let spec = TimeScaleSpec::from_json(text).unwrap();
        let w = TimeScaleWindow::from_spec(&spec).unwrap();
        assert_eq!(w.to_spec(), spec);
        assert_eq!(TimeScaleSpec::from_json(&spec.to_json()).unwrap(), spec);

        let text = r#"{"kind": "quantum", "q": 2.0, "window": [1.0, 8.0]}"#;
        let spec = TimeScaleSpec::from_json(text).unwrap();
        assert_eq!(TimeScaleSpec::from_json(&spec.to_json()).unwrap(), spec);
        assert!(TimeScaleSpec::from_json(r#"{"kind": "bogus", "window": [0, 1]}"#).is_err());
        assert!(TimeScaleSpec::from_json(r#"{"window": [0, 1]}"#).is_err());
    }
}
