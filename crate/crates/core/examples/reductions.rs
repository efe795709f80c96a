//! The unified solver on the real line and the integers against the
//! classical continuous and discrete equations.

use chronoslyap::lyapunov::{ddle_recursion, solve_cdle, solve_ddle, CostMatrix};
use chronoslyap::transition::{SystemMatrix, TransitionOptions};
use nalgebra::{dmatrix, DMatrix};

fn main() -> chronoslyap::Result<()> {
    let a = dmatrix![-0.5, 0.2; 0.1, -0.4];
    let sys = SystemMatrix::constant(a.clone())?;
    let m = CostMatrix::identity(2);
    let p0 = DMatrix::identity(2, 2) * 2.0;
    let opts = TransitionOptions::default();

    let c = solve_cdle(&sys, &m, &p0, 0.0, 3.0, &opts)?;
    // e^{-A^T t} (P0 - X) e^{-A t} + X with A^T X + X A = -I
    let x = chronoslyap::lyapunov::solve_cale_oracle(&a, &DMatrix::identity(2, 2))?;
    let e = (&a * -3.0).exp();
    let closed = e.transpose() * (&p0 - &x) * &e + &x;
    println!("R: P(3) = {:.8}   closed form differs by {:.2e}", c.at(3.0)?, (c.at(3.0)? - closed).norm());

    let d = solve_ddle(&sys, &m, &p0, 0.0, 6.0, &opts)?;
    let rec = ddle_recursion(&sys, &m, &p0, 0.0, 6)?;
    println!("Z: P(6) = {:.8}   recursion differs by {:.2e}", d.at(6.0)?, (d.at(6.0)? - &rec[6]).norm());
    Ok(())
}
