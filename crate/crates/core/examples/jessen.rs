//! Jessen's orthogonal icosahedron: the projected vertex positions carry
//! an infinitesimal isometric deformation, visible as a one-dimensional
//! kernel of the z-form system.

use circle_pattern::fixtures::jessen_fixture;
use circle_pattern::hqd::{hqd_system_z_form, kernel_basis, Field};
use circle_pattern::moebius::C64;
use circle_pattern::surface::sphere_patch;

fn main() -> circle_pattern::error::Result<()> {
    let f = jessen_fixture()?;
    let z = f.positions.as_ref().unwrap();
    let q = f.q.as_ref().unwrap();
    let patch = sphere_patch(&f.surface);
    let op = hqd_system_z_form(&f.surface, z, &patch, None, Field::Real)?;
    let k = kernel_basis(&op, 1e-8);
    println!("vertices {}, edges {}, kernel dimension {}", f.surface.n_vertices(), f.surface.n_edges(), k.dimension);
    let long = q.iter().filter(|&&x| x < 0.0).count();
    println!("q = -4 on {long} long edges, 1 on the other {}", q.len() - long);
    let qc: Vec<C64> = q.iter().map(|&x| C64::new(x, 0.0)).collect();
    println!("distance of q from the kernel: {:.2e}", k.projection_residual(&qc));
    Ok(())
}
