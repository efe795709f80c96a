//! Linear systems `x^Δ = A(t)x` on time scales.
//!
//! A time scale is a closed subset of the real line. This crate works on a
//! finite window of one, represented as a union of closed intervals (a
//! degenerate interval is an isolated point), and provides:
//!
//! - [`timescale`]: jump operators, graininess and point classification;
//! - [`tscalc`]: delta derivative, delta integral, regressivity and the
//!   generalized exponential `e_p(t, t0)`;
//! - [`transition`]: the transition matrix `Φ_A(t, t0)`;
//! - [`lyapunov`]: algebraic and dynamic Lyapunov equations on `ℝ`, `ℤ`
//!   and arbitrary time scales, with brute-force Kronecker oracles;
//! - [`stability`]: Hilger-disk membership, the conservative region
//!   `H_min` and the averaged-logarithm exponent `γ(λ)`;
//! - [`verify`]: trajectory simulation and empirical Lyapunov checks;
//! - [`cli`]: the file-driven front end used by the `chronoslyap` binary.
//!
//! ```
//! use chronoslyap::timescale::{make_canonical, ScaleKind};
//!
//! let pulse = make_canonical(&ScaleKind::Pulse { a: 1.0, b: 1.0 }, 0.0, 3.0).unwrap();
//! assert_eq!(pulse.sigma(1.0).unwrap(), 2.0);
//! assert_eq!(pulse.mu(0.5).unwrap(), 0.0);
//! ```

pub mod cli;
pub mod error;
pub mod linalg;
pub mod lyapunov;
pub mod report;
pub mod stability;
pub mod timescale;
pub mod transition;
pub mod tscalc;
pub mod verify;

pub use error::{Error, Result};
