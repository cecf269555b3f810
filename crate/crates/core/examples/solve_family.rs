//! Walks the affine family of an equilateral-angle torus: every A gives a
//! pattern whose modulus tau and holonomy stretch factors move with it.

use circle_pattern::crsys::AngleStructure;
use circle_pattern::solver::{continuation_path, rigidity_check, solve_pattern, SolverOptions};
use circle_pattern::surface::regular_torus;

fn main() -> circle_pattern::error::Result<()> {
    let s = regular_torus(3, 3);
    let theta = AngleStructure::constant(s.n_edges(), std::f64::consts::FRAC_PI_3);
    let opts = SolverOptions::default();

    println!("{:>14}  {:>24}  {:>18}  {:>9}", "A", "tau", "log|alpha|", "residual");
    for a in [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5], [-0.7, 0.4], [1.2, -0.8]] {
        let p = solve_pattern(&s, &theta, a, None, &opts)?;
        let la = p.holonomy.log_abs_alpha();
        println!(
            "({:+.1}, {:+.1})  {:>24.10}  ({:+.6}, {:+.6})  {:.1e}",
            a[0], a[1], p.modulus.tau, la[0], la[1], p.newton_residual
        );
    }

    // Following a closed loop comes back to the starting pattern.
    let path = continuation_path(&s, &theta, &[[0.2, 0.2], [0.9, 0.2], [0.9, 0.9], [0.2, 0.2]], &opts)?;
    let back = path[0].x.iter().zip(&path[3].x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("loop closes to {back:.1e}");

    // Random restarts land on the same pattern.
    let r = rigidity_check(&s, &theta, [0.5, -0.5], 10, 7, &opts)?;
    println!("{}/{} restarts converged, max cross ratio distance {:.1e}", r.converged, r.trials, r.max_cr_distance);
    Ok(())
}
