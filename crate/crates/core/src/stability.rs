//! Spectral stability analysis of `x^Δ = Ax` on a time-scale window.
//!
//! For a fixed graininess `μ > 0` the stability region of a scalar
//! equation is the open Hilger disk `|z + 1/μ| < 1/μ`; for `μ = 0` it is
//! the open left half-plane. The disk of the largest graininess, `H_min`,
//! sits inside every other disk and gives a cheap sufficient test.
//!
//! The exponent `γ(λ)` is a `limsup` over an unbounded scale. On a finite
//! window only the running average can be computed, so [`gamma_functional`]
//! returns the windowed value together with the averages at trailing
//! fractions of the window and their spread.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::timescale::Grid;
use crate::tscalc::TOL_REG;

/// Margin required for a strict `H_min` membership verdict.
pub const TOL_REGION: f64 = 1e-9;
/// Trailing window fractions used by the convergence diagnostic.
pub const GAMMA_FRACTIONS: [f64; 6] = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
/// The windowed `γ̂` counts as converged when the spread of the trailing
/// averages is below this fraction of `|γ̂|`.
pub const GAMMA_SPREAD_REL: f64 = 1e-3;

/// The open Hilger disk of graininess `μ` (a half-plane for `μ = 0`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HilgerDisk {
    pub mu: f64,
}

impl HilgerDisk {
    /// `None` for the half-plane limit.
    pub fn center(&self) -> Option<f64> {
        (self.mu > 0.0).then(|| -1.0 / self.mu)
    }

    pub fn radius(&self) -> Option<f64> {
        (self.mu > 0.0).then(|| 1.0 / self.mu)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        hilger_contains(z, self.mu)
    }

    /// Distance from `z` to the boundary, positive inside.
    pub fn margin(&self, z: Complex64) -> f64 {
        if self.mu > 0.0 {
            // r − |z + r| = −(|z|² + 2r Re z) / (r + |z + r|), which keeps
            // its relative accuracy where the circle passes through 0.
            let r = 1.0 / self.mu;
            -(z.norm_sqr() + 2.0 * r * z.re) / (r + (z + r).norm())
        } else {
            -z.re
        }
    }

    /// `n` points on the boundary circle (empty for `μ = 0`).
    pub fn boundary(&self, n: usize) -> Vec<Complex64> {
        match (self.center(), self.radius()) {
            (Some(c), Some(r)) => (0..n)
                .map(|k| {
                    let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    Complex64::new(c + r * th.cos(), r * th.sin())
                })
                .collect(),
            _ => Vec::new(),
        }
    }
}

/// Strict membership in the Hilger disk: `|λ + 1/μ| < 1/μ` for `μ > 0`,
/// `Re λ < 0` for `μ = 0`.
pub fn hilger_contains(lambda: Complex64, mu: f64) -> bool {
    if mu > 0.0 {
        // |λ + 1/μ| < 1/μ ⇔ μ|λ|² + 2 Re λ < 0, without the cancellation
        // near the origin.
        mu * lambda.norm_sqr() + 2.0 * lambda.re < 0.0
    } else {
        lambda.re < 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HminVerdict {
    AllIn,
    Partial,
    None,
}

/// Spectrum of `A` tested against `H_min`.
///
/// `AllIn` is a sufficient condition for exponential stability, never a
/// necessary one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HminReport {
    pub mu_max: f64,
    pub spectrum: Vec<Eigenvalue>,
    pub in_hmin: Vec<bool>,
    pub verdict: HminVerdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Eigenvalue {
    fn from(z: Complex64) -> Self {
        Eigenvalue { re: z.re, im: z.im }
    }
}

impl Eigenvalue {
    pub fn complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Per-point disks of the grid together with `μ_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityRegion {
    pub mu_max: f64,
    pub per_point: Vec<(f64, HilgerDisk)>,
}

impl StabilityRegion {
    pub fn of(grid: &Grid) -> Self {
        StabilityRegion {
            mu_max: grid.mu_max(),
            per_point: grid
                .points()
                .iter()
                .map(|p| (p.t, HilgerDisk { mu: p.mu }))
                .collect(),
        }
    }

    pub fn hmin(&self) -> HilgerDisk {
        HilgerDisk { mu: self.mu_max }
    }
}

pub fn hmin_verdict(a: &DMatrix<f64>, grid: &Grid) -> Result<HminReport> {
    let spectrum = linalg::eigenvalues(a)?;
    let disk = HilgerDisk { mu: grid.mu_max() };
    let in_hmin: Vec<bool> = spectrum.iter().map(|z| disk.margin(*z) > TOL_REGION).collect();
    let inside = in_hmin.iter().filter(|b| **b).count();
    let verdict = if inside == in_hmin.len() {
        HminVerdict::AllIn
    } else if inside > 0 {
        HminVerdict::Partial
    } else {
        HminVerdict::None
    };
    Ok(HminReport {
        mu_max: disk.mu,
        spectrum: spectrum.into_iter().map(Eigenvalue::from).collect(),
        in_hmin,
        verdict,
    })
}

/// Windowed estimate of `γ(λ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaEstimate {
    /// Average over `[t0, t_end]`.
    pub value: f64,
    /// `(T, average over [t0, T])` at the trailing window fractions.
    pub trailing: Vec<(f64, f64)>,
    pub spread: f64,
    pub converged: bool,
}

/// Running average `(1/(T − t0)) ∫_{t0}^{T} g Δt` at `T = t_end`, with
/// `g = Re λ` at right-dense points and `g = log|1 + μλ|/μ` at
/// right-scattered ones.
pub fn gamma_functional(lambda: Complex64, grid: &Grid, t0: f64) -> Result<GammaEstimate> {
    let base = grid.require_index(t0)?;
    let last = grid.last();
    if last == base {
        return Err(Error::InvalidParameter("window has no extent after t0".into()));
    }
    let mut cumulative = Vec::with_capacity(last - base + 1);
    let mut acc = 0.0;
    cumulative.push(acc);
    for i in base..last {
        let mu = grid.mu(i);
        if mu > 0.0 {
            let f = (Complex64::new(1.0, 0.0) + lambda * mu).norm();
            if f <= TOL_REG {
                return Err(Error::ZeroRegressivityPoint(grid.t(i)));
            }
            acc += f.ln();
        } else {
            acc += lambda.re * (grid.t(i + 1) - grid.t(i));
        }
        cumulative.push(acc);
    }
    let span = grid.t(last) - t0;
    let average_at = |j: usize| (grid.t(j), cumulative[j - base] / (grid.t(j) - t0));
    let value = acc / span;
    let mut trailing = Vec::new();
    for f in GAMMA_FRACTIONS {
        let target = t0 + f * span;
        let j = grid.floor_index(target).max(base + 1);
        trailing.push(average_at(j));
    }
    let (lo, hi) = trailing
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, v)| (lo.min(*v), hi.max(*v)));
    let spread = hi - lo;
    Ok(GammaEstimate {
        value,
        trailing,
        spread,
        converged: spread <= GAMMA_SPREAD_REL * value.abs(),
    })
}

/// Points where `1 + μ(t)λ` vanishes.
///
/// Membership of `λ` in the degenerate-regressivity set needs such points
/// arbitrarily far out; a finite window can only show evidence of it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SrDetection {
    pub lambda: f64,
    pub hits: Vec<f64>,
    pub note: &'static str,
}

const SR_NOTE: &str = "finite window: hits are evidence of 1 + μλ = 0 recurring, not a proof";

pub fn s_r_detect(lambda: f64, grid: &Grid) -> SrDetection {
    let hits = (0..grid.last())
        .filter(|&i| (1.0 + grid.mu(i) * lambda).abs() <= TOL_REG)
        .map(|i| grid.t(i))
        .collect();
    SrDetection {
        lambda,
        hits,
        note: SR_NOTE,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenAnalysis {
    pub eigenvalue: Eigenvalue,
    pub in_hmin: bool,
    /// `None` when `1 + μλ = 0` somewhere on the window.
    pub gamma: Option<GammaEstimate>,
    pub s_r_hits: Vec<f64>,
    /// `min_t |1 + μ(t)λ|` and `max_t |1 + μ(t)λ|` over the grid.
    pub regressivity_range: (f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityBasis {
    /// Whole spectrum strictly inside `H_min`.
    HminSufficient,
    /// Every eigenvalue has a negative, converged windowed `γ̂`, or recurring
    /// zeros of `1 + μλ`.
    SpectralExponent,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub mu_max: f64,
    pub hmin_verdict: HminVerdict,
    pub eigen: Vec<EigenAnalysis>,
    pub exponential_stability_indicated: bool,
    pub basis: Vec<StabilityBasis>,
    pub notes: Vec<String>,
}

/// Full spectral report for constant `A`.
pub fn stability_report(a: &DMatrix<f64>, grid: &Grid) -> Result<StabilityReport> {
    let hmin = hmin_verdict(a, grid)?;
    let t0 = grid.t(0);
    let mut eigen = Vec::new();
    let mut notes = Vec::new();
    let mut spectral_ok = true;
    for (ev, in_hmin) in hmin.spectrum.iter().zip(&hmin.in_hmin) {
        let z = ev.complex();
        let gamma = match gamma_functional(z, grid, t0) {
            Ok(g) => Some(g),
            Err(Error::ZeroRegressivityPoint(_)) => None,
            Err(e) => return Err(e),
        };
        let s_r_hits = if z.im == 0.0 {
            s_r_detect(z.re, grid).hits
        } else {
            Vec::new()
        };
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for p in grid.points() {
            let v = (Complex64::new(1.0, 0.0) + z * p.mu).norm();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let ok = match &gamma {
            Some(g) => g.value < 0.0 && g.converged,
            None => !s_r_hits.is_empty(),
        };
        if gamma.is_none() {
            notes.push(format!(
                "λ = {}{:+}i: 1 + μλ = 0 at {} grid point(s); stability via recurring annihilation",
                z.re,
                z.im,
                s_r_hits.len()
            ));
        }
        if let Some(g) = &gamma {
            if !g.converged {
                notes.push(format!(
                    "λ = {}{:+}i: windowed γ̂ = {} has not settled (spread {:e})",
                    z.re, z.im, g.value, g.spread
                ));
            }
        }
        spectral_ok &= ok;
        eigen.push(EigenAnalysis {
            eigenvalue: *ev,
            in_hmin: *in_hmin,
            gamma,
            s_r_hits,
            regressivity_range: (lo, hi),
        });
    }
    let mut basis = Vec::new();
    if hmin.verdict == HminVerdict::AllIn {
        basis.push(StabilityBasis::HminSufficient);
    }
    if spectral_ok {
        basis.push(StabilityBasis::SpectralExponent);
    }
    Ok(StabilityReport {
        mu_max: hmin.mu_max,
        hmin_verdict: hmin.verdict,
        exponential_stability_indicated: !basis.is_empty(),
        eigen,
        basis,
        notes,
    })
}
