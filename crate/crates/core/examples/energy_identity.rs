//! Each holomorphic quadratic differential gives a discrete harmonic
//! function u with conjugate u*. Its Dirichlet energy equals
//! -Im(P1 conj(P2)) where P_r are the periods of u + i u*.

use circle_pattern::crsys::AngleStructure;
use circle_pattern::develop::{develop, normalized_positions, DevelopOptions};
use circle_pattern::hqd::{
    constant_period_gauge, deformation_to_harmonic, dirichlet_energy, hqd_system_cr_form, hqd_to_deformation,
    kernel_basis, Field,
};
use circle_pattern::solver::{solve_pattern, verification_patch, SolverOptions};
use circle_pattern::surface::regular_torus;

fn main() -> circle_pattern::error::Result<()> {
    let s = regular_torus(3, 3);
    let theta = AngleStructure::constant(s.n_edges(), std::f64::consts::FRAC_PI_3);
    let p = solve_pattern(&s, &theta, [0.4, 0.6], None, &SolverOptions::default())?;
    let patch = verification_patch(&s)?;
    let dev = develop(&s, &p.cr, &patch, &DevelopOptions::default())?;
    let z = normalized_positions(&dev, &p.holonomy)?;
    let basis = kernel_basis(&hqd_system_cr_form(&s, &p.cr, None, Field::Real)?, 1e-8);
    for (i, q) in basis.basis.iter().enumerate() {
        let zdot = hqd_to_deformation(&s, q, &z, &patch, None)?;
        let gauged = constant_period_gauge(&s, &z, &patch, &zdot, &p.holonomy)?;
        let u = deformation_to_harmonic(&s, &z, &patch, &gauged.zdot)?;
        let energy = dirichlet_energy(&s, &z, &patch, &u)?;
        let periods = -(u.periods[0] * u.periods[1].conj()).im;
        println!("q{i}: E = {energy:.12}  -Im(P1 conj P2) = {periods:.12}  periods {:.4} {:.4}", u.periods[0], u.periods[1]);
    }
    Ok(())
}
