//! Develops the one-vertex torus with cr = (1, e^{2pi i/3}, e^{-2pi i/3})
//! over a 5x5 block of fundamental domains and prints the resulting lattice.

use circle_pattern::develop::{develop, holonomy, normalized_positions, DevelopOptions, Traversal};
use circle_pattern::fixtures::one_vertex_case_a;
use circle_pattern::surface::lift_patch;

fn main() -> circle_pattern::error::Result<()> {
    let f = one_vertex_case_a();
    let cr = f.cr.as_ref().expect("fixture carries cross ratios");
    let patch = lift_patch(&f.surface, -2..=2, -2..=2)?;
    let dev = develop(&f.surface, cr, &patch, &DevelopOptions::default())?;
    let hol = holonomy(&dev, 1e-10)?;
    println!("{} lifted vertices, holonomy {:?}", patch.vertices.len(), hol.kind);
    println!("translations: {:.6} and {:.6}", hol.beta[0], hol.beta[1]);

    let z = normalized_positions(&dev, &hol)?;
    for (lift, p) in patch.vertices.iter().zip(&z).take(6) {
        println!("  deck word {:?}: {:+.6}", lift.word, p);
    }

    // Any spanning-tree order yields the same map.
    let dfs = develop(&f.surface, cr, &patch, &DevelopOptions { traversal: Traversal::DepthFirst, ..Default::default() })?;
    let diff = dev.positions.iter().zip(&dfs.positions).map(|(a, b)| a.chordal_distance(b)).fold(0.0, f64::max);
    println!("BFS vs DFS chordal difference: {diff:.2e}");
    Ok(())
}
