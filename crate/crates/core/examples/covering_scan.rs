//! Samples A over a square and checks that the conformal modulus map
//! A -> tau is symmetric under A -> -A and otherwise injective.

use circle_pattern::crsys::AngleStructure;
use circle_pattern::solver::{covering_scan, SolverOptions};
use circle_pattern::surface::regular_torus;

fn main() -> circle_pattern::error::Result<()> {
    let n = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(7);
    let s = regular_torus(2, 2);
    let theta = AngleStructure::constant(s.n_edges(), std::f64::consts::FRAC_PI_3);
    let start = std::time::Instant::now();
    let r = covering_scan(&s, &theta, n, 1.0, &SolverOptions::default())?;
    println!("{n}x{n} grid solved in {:.2?}", start.elapsed());
    for (a, tau) in r.grid.iter().zip(&r.moduli).step_by(n + 1) {
        println!("  A = ({:+.3}, {:+.3})  tau = {:.8}", a[0], a[1], tau);
    }
    let min_det = r.jacobian_det.iter().flatten().fold(f64::INFINITY, |m, d| m.min(d.abs()));
    println!("symmetry error {:.1e}, duplicates {}, min |det dtau/dA| {min_det:.2e}", r.symmetry_error, r.duplicates.len());
    Ok(())
}
