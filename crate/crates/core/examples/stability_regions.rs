//! Hilger disks, the H_min test and the spectral exponent.

use chronoslyap::stability::{gamma_functional, hilger_contains, s_r_detect, stability_report, HilgerDisk};
use chronoslyap::timescale::{make_canonical, ScaleKind};
use nalgebra::{dmatrix, DMatrix};
use num_complex::Complex64;

fn main() -> chronoslyap::Result<()> {
    let z = Complex64::new(-1.5, 0.5);
    for mu in [0.0, 0.5, 1.0, 2.0] {
        let d = HilgerDisk { mu };
        println!("mu={mu}: contains {z}? {} (margin {:.3})", hilger_contains(z, mu), d.margin(z));
    }

    let pulse = make_canonical(&ScaleKind::Pulse { a: 1.0, b: 1.0 }, 0.0, 200.0)?.build_grid(1e-2)?;
    let lam = Complex64::new(-0.5, 0.0);
    let g = gamma_functional(lam, &pulse, 0.0)?;
    println!("gamma on P(1,1) for -0.5: {:.6} (converged {}, spread {:.1e})", g.value, g.converged, g.spread);

    let ints = make_canonical(&ScaleKind::Integers, 0.0, 30.0)?.build_grid(1.0)?;
    println!("1 + mu(-1) = 0 at {} points of Z", s_r_detect(-1.0, &ints).hits.len());

    for (name, a) in [
        ("A1", dmatrix![-0.5, 1.0; 0.0, -1.8]),
        ("A2", DMatrix::from_element(1, 1, -2.5)),
        ("A3", dmatrix![0.0, 1.0; -2.0, -3.0]),
    ] {
        let rep = stability_report(&a, &ints)?;
        println!(
            "{name} on Z: H_min {:?}, indicated {}, basis {:?}",
            rep.hmin_verdict, rep.exponential_stability_indicated, rep.basis
        );
    }
    Ok(())
}
