//! Delta derivatives, integrals and the exponential on several scales.

use std::sync::Arc;

use chronoslyap::timescale::{make_canonical, ScaleKind};
use chronoslyap::tscalc::{delta_derivative, delta_integral, exp_ts, regressivity, ScalarSignal};

fn main() -> chronoslyap::Result<()> {
    let kinds = [
        ("R", ScaleKind::Reals, 0.0, 8.0),
        ("Z", ScaleKind::Integers, 0.0, 8.0),
        ("0.25Z", ScaleKind::HUniform { h: 0.25 }, 0.0, 8.0),
        ("2^Z", ScaleKind::quantum(2.0), 1.0, 16.0),
        ("P(1,1)", ScaleKind::Pulse { a: 1.0, b: 1.0 }, 0.0, 8.0),
    ];
    for (name, kind, t0, t1) in kinds {
        let w = make_canonical(&kind, t0, t1)?;
        let grid = Arc::new(w.build_grid(1e-3)?);
        let square = ScalarSignal::from_fn(grid.clone(), |t| t * t);
        let t = grid.t(grid.len() / 3);
        // (t²)^Δ = t + σ(t)
        println!(
            "{name:7} (t^2)^Δ({t:.3}) = {:.6}  [t + sigma = {:.6}]",
            delta_derivative(&square, t)?,
            t + w.sigma(t)?
        );
        let one = ScalarSignal::constant(grid.clone(), 1.0);
        println!("        Δ-measure of [{t0}, {t1}) = {:.6}", delta_integral(&one, t0, t1)?);
        let p = ScalarSignal::constant(grid.clone(), -0.5);
        println!(
            "        e_(-0.5)({t1}, {t0}) = {:.6e}, {:?}",
            exp_ts(&p, t1, t0)?,
            regressivity(&p).verdict
        );
    }
    Ok(())
}
