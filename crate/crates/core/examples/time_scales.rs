//! Canonical time scales, jump operators and grids.

use chronoslyap::timescale::{make_canonical, ScaleKind, Segment, TimeScaleWindow};

fn main() -> chronoslyap::Result<()> {
    let pulse = make_canonical(&ScaleKind::Pulse { a: 1.0, b: 0.5 }, 0.0, 4.0)?;
    for t in [0.5, 1.0, 1.5, 2.5] {
        let c = pulse.classify(t)?;
        println!(
            "P(1,0.5) t={t}: sigma={} rho={} mu={} {:?}",
            pulse.sigma(t)?,
            pulse.rho(t)?,
            pulse.mu(t)?,
            c.labels()
        );
    }

    let q = make_canonical(&ScaleKind::quantum(2.0), 1.0, 64.0)?;
    let g = q.build_grid(1.0)?;
    println!("2^Z on [1, 64]: {:?}", g.times());
    println!("  graininess {:?}", g.points().iter().map(|p| p.mu).collect::<Vec<_>>());

    // An irregular scale: two intervals and a few isolated instants.
    let w = TimeScaleWindow::from_segments(vec![
        Segment::new(0.0, 0.5),
        Segment::point(1.0),
        Segment::point(1.25),
        Segment::new(2.0, 2.2),
    ])?;
    let g = w.build_grid(0.1)?;
    println!("irregular grid {:?}, mu_max = {}", g.times(), g.mu_max());
    println!("as JSON: {}", w.to_spec().to_json());
    Ok(())
}
