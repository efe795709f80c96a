//! The algebraic equation A^T P + P A + mu A^T P A = -M for several graininesses.

use chronoslyap::lyapunov::{solve_cale_oracle, solve_dale_oracle, solve_tsale, solve_tsale_oracle, DEFAULT_SERIES_TOL};
use nalgebra::{dmatrix, DMatrix};

fn main() -> chronoslyap::Result<()> {
    let a = dmatrix![-1.0, 0.5; -0.3, -0.8];
    let m = DMatrix::identity(2, 2);
    for mu in [0.0, 0.25, 0.5, 1.0, 1.5] {
        let sol = solve_tsale(&a, &m, mu, DEFAULT_SERIES_TOL)?;
        let oracle = solve_tsale_oracle(&a, &m, mu)?;
        println!(
            "mu={mu:<4} P = {:.6} residual {:.1e}, tail {:.1e}, |P - kron| {:.1e}, {:?}",
            sol.p,
            sol.residual,
            sol.tail_bound,
            (&sol.p - oracle).norm(),
            sol.seed
        );
    }
    let cont = solve_cale_oracle(&a, &m)?;
    let disc = solve_dale_oracle(&a, &m)?;
    println!("continuous {:.6}discrete {:.6}", cont, disc);

    match solve_tsale(&a, &m, 3.0, DEFAULT_SERIES_TOL) {
        Ok(_) => println!("mu=3 solved"),
        Err(e) => println!("mu=3: {e}"),
    }
    Ok(())
}
