//! One pattern of each holonomy type.

use circle_pattern::crsys::AngleStructure;
use circle_pattern::develop::{develop, holonomy, DevelopOptions, Holonomy};
use circle_pattern::fixtures::{equilateral_torus, one_vertex_case_b};
use circle_pattern::moebius::C64;
use circle_pattern::solver::{solve_pattern, SolverOptions};
use circle_pattern::surface::lift_patch;

fn show(name: &str, h: &Holonomy) {
    println!("{name}: {:?}", h.kind);
    println!("  alpha = {:.6}, {:.6}", h.alpha[0], h.alpha[1]);
    println!("  log|alpha| = {:.6?}", h.log_abs_alpha());
    println!("  fixed points: {:?}", h.fixed_points);
}

fn main() -> circle_pattern::error::Result<()> {
    let eq = equilateral_torus(2, 2);
    let patch = lift_patch(&eq.surface, -1..=1, -1..=1)?;
    let dev = develop(&eq.surface, eq.cr.as_ref().unwrap(), &patch, &DevelopOptions::default())?;
    show("equilateral torus", &holonomy(&dev, 1e-10)?);

    let theta = AngleStructure::constant(eq.surface.n_edges(), std::f64::consts::FRAC_PI_3);
    let p = solve_pattern(&eq.surface, &theta, [1.0, 0.0], None, &SolverOptions::default())?;
    show("same angles, A = (1, 0)", &p.holonomy);

    // Not a Delaunay pattern, but its developing map still has holonomy.
    let b = one_vertex_case_b(C64::new(2.0, 0.0))?;
    let patch = lift_patch(&b.surface, -1..=1, -1..=1)?;
    let dev = develop(&b.surface, b.cr.as_ref().unwrap(), &patch, &DevelopOptions::default())?;
    show("one-vertex torus, b = 2", &holonomy(&dev, 1e-10)?);
    Ok(())
}
