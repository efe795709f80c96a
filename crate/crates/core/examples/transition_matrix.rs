//! The transition matrix of x^Δ = A x across dense pieces and gaps.

use std::sync::Arc;

use chronoslyap::timescale::{make_canonical, ScaleKind};
use chronoslyap::transition::{transition_inverse, SystemMatrix, TransitionMatrix, TransitionOptions};
use nalgebra::dmatrix;

fn main() -> chronoslyap::Result<()> {
    let a = SystemMatrix::constant(dmatrix![0.0, 1.0; -2.0, -0.4])?;
    let opts = TransitionOptions::default();

    let w = make_canonical(&ScaleKind::Pulse { a: 1.0, b: 0.5 }, 0.0, 6.0)?;
    let grid = Arc::new(w.build_grid(opts.dense_step)?);
    let phi = TransitionMatrix::compute(&a, grid, 0.0, &opts)?;
    for t in [1.0, 1.5, 3.0, 6.0] {
        println!("Phi({t}, 0) = {:.6}", phi.at(t)?);
    }
    println!("largest RK4 step error estimate: {:.2e}", phi.max_local_error());
    let inv = transition_inverse(&phi, 6.0)?;
    println!("cond_1 Phi(6, 0) = {:.3}", inv.cond);

    // Across a single gap, Phi is exactly I + mu A.
    let z = make_canonical(&ScaleKind::HUniform { h: 0.5 }, 0.0, 1.0)?;
    let g = Arc::new(z.build_grid(1.0)?);
    let step = TransitionMatrix::compute(&a, g, 0.0, &opts)?;
    println!("0.5Z: Phi(0.5, 0) = {:.3}", step.at(0.5)?);
    Ok(())
}
