//! V(t) = x^T P x along trajectories, with P the stationary solution.

use chronoslyap::lyapunov::{solve_tsdle_stationary, CostMatrix, StationaryOptions};
use chronoslyap::timescale::{make_canonical, ScaleKind};
use chronoslyap::transition::SystemMatrix;
use chronoslyap::verify::{empirical_decay, lyapunov_trace, simulate_on_grid};
use nalgebra::{dmatrix, dvector};

fn main() -> chronoslyap::Result<()> {
    let a = SystemMatrix::constant(dmatrix![-0.6, 0.8; -0.8, -0.6])?;
    let w = make_canonical(&ScaleKind::Pulse { a: 0.5, b: 0.5 }, 0.0, 8.0)?;
    let opts = StationaryOptions::default();
    let p = solve_tsdle_stationary(&a, &CostMatrix::identity(2), &w, 0.0, &opts)?;

    let x = simulate_on_grid(&a, p.grid().clone(), &dvector![1.0, -2.0], &opts.transition)?;
    let trace = lyapunov_trace(&a, &p, &x)?;
    println!("conclusion: {:?}", trace.conclusion());
    println!("two V^Δ evaluations agree to {:.2e}", trace.max_disagreement);
    for i in (0..trace.times.len()).step_by(trace.times.len() / 6) {
        println!(
            "  t={:.2}  V={:.6e}  V^Δ={:.6e}",
            trace.times[i],
            trace.v[i],
            trace.v_delta[i].unwrap_or(f64::NAN)
        );
    }
    println!("decays at least like e_(-0.2): {}", empirical_decay(&x, 0.2)?);
    Ok(())
}
