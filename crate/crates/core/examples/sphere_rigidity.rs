//! Patterns on the sphere are determined by their angles: solving from
//! different random starts always returns the same cross ratios.

use circle_pattern::fixtures::icosahedron_sphere;
use circle_pattern::hqd::{hqd_system_cr_form, kernel_basis, Field};
use circle_pattern::solver::{perturb_angles, solve_sphere_pattern, SolverOptions};

fn main() -> circle_pattern::error::Result<()> {
    let f = icosahedron_sphere()?;
    let opts = SolverOptions::default();
    for (label, theta) in [
        ("regular angles", f.theta.clone().unwrap()),
        ("perturbed angles", perturb_angles(&f.surface, f.theta.as_ref().unwrap(), 0.05, 11)),
    ] {
        let reference = solve_sphere_pattern(&f.surface, &theta, None, &opts)?;
        let mut worst: f64 = 0.0;
        for seed in 0..8 {
            let other = solve_sphere_pattern(&f.surface, &theta, Some(seed), &opts)?;
            for (a, b) in other.cr.iter().zip(&reference.cr) {
                worst = worst.max((a - b).norm());
            }
        }
        let dim = kernel_basis(&hqd_system_cr_form(&f.surface, &reference, None, Field::Real)?, 1e-8).dimension;
        println!("{label}: 8 restarts agree to {worst:.1e}; infinitesimal deformations: {dim}");
    }
    Ok(())
}
