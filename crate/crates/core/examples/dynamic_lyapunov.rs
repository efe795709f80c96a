//! The dynamic equation: seeded solutions, the stationary solution and
//! how constant seeds drift once the graininess varies.

use chronoslyap::lyapunov::{solve_tsale, solve_tsdle, solve_tsdle_stationary, CostMatrix, StationaryOptions};
use chronoslyap::timescale::{make_canonical, ScaleKind};
use chronoslyap::transition::{SystemMatrix, TransitionOptions};
use nalgebra::{dvector, DMatrix};

fn main() -> chronoslyap::Result<()> {
    let opts = TransitionOptions::default();
    let a = SystemMatrix::scalar(-0.5);
    let m = CostMatrix::scalar(1.0);

    for (name, kind, mu0) in [
        ("Z", ScaleKind::Integers, 1.0),
        ("P(1,1)", ScaleKind::Pulse { a: 1.0, b: 1.0 }, 0.0),
    ] {
        let w = make_canonical(&kind, 0.0, 6.0)?;
        let p0 = solve_tsale(&DMatrix::from_element(1, 1, -0.5), &DMatrix::from_element(1, 1, 1.0), mu0, 1e-12)?.p;
        let sol = solve_tsdle(&a, &m, &p0, &w, 0.0, &opts)?;
        println!(
            "{name}: seed {:.4}, P(6) = {:.4}, max drift {:.3e}",
            p0[(0, 0)],
            sol.at(6.0)?[(0, 0)],
            sol.max_deviation_from_initial()
        );
    }

    let d = SystemMatrix::constant(DMatrix::from_diagonal(&dvector![-1.0, -2.0]))?;
    let w = make_canonical(&ScaleKind::Pulse { a: 1.0, b: 1.0 }, 0.0, 10.0)?;
    let sol = solve_tsdle_stationary(&d, &CostMatrix::identity(2), &w, 0.0, &StationaryOptions::default())?;
    println!(
        "stationary on P(1,1): {} points, horizon {:?}, tail {:.1e}, max residual {:.1e}",
        sol.len(),
        sol.meta.horizon,
        sol.meta.tail_bound.unwrap_or(0.0),
        sol.meta.max_residual
    );
    for t in [0.0, 0.5, 1.0, 2.0] {
        let p = sol.at(t)?;
        println!("  P({t}) = diag({:.5}, {:.5})", p[(0, 0)], p[(1, 1)]);
    }
    Ok(())
}
