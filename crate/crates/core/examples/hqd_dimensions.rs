//! Real and complex dimensions of the space of holomorphic quadratic
//! differentials for a few patterns.

use circle_pattern::crsys::{AngleStructure, CrossRatioSystem};
use circle_pattern::fixtures::{one_vertex_case_a, one_vertex_case_b};
use circle_pattern::hqd::{hqd_system_cr_form, kernel_basis, Field};
use circle_pattern::moebius::C64;
use circle_pattern::solver::{solve_pattern, SolverOptions};
use circle_pattern::surface::{regular_torus, TriangulatedSurface};

fn dims(name: &str, s: &TriangulatedSurface, cr: &CrossRatioSystem) -> circle_pattern::error::Result<()> {
    let real = kernel_basis(&hqd_system_cr_form(s, cr, None, Field::Real)?, 1e-8);
    let complex = kernel_basis(&hqd_system_cr_form(s, cr, None, Field::Complex)?, 1e-8);
    println!(
        "{name:<28} |V| = {:<3} dim_R = {}  dim_C = {}  gap = {:.1e}",
        s.n_vertices(),
        real.dimension,
        complex.dimension,
        real.gap_ratio
    );
    Ok(())
}

fn main() -> circle_pattern::error::Result<()> {
    let a = one_vertex_case_a();
    dims("one-vertex torus (a)", &a.surface, a.cr.as_ref().unwrap())?;
    for b in [C64::new(2.0, 0.0), C64::new(2.0, 1.0)] {
        let f = one_vertex_case_b(b)?;
        dims(&format!("one-vertex torus b = {b}"), &f.surface, f.cr.as_ref().unwrap())?;
    }
    for (m, n) in [(2, 2), (3, 3), (3, 4)] {
        let s = regular_torus(m, n);
        let theta = AngleStructure::constant(s.n_edges(), std::f64::consts::FRAC_PI_3);
        let p = solve_pattern(&s, &theta, [0.3, -0.6], None, &SolverOptions::default())?;
        dims(&format!("{m}x{n} torus, A = (0.3, -0.6)"), &s, &p.cr)?;
    }
    Ok(())
}
