//! Solves a torus pattern and writes an SVG picture of 3x3 fundamental
//! domains. Usage: `render_pattern [out.svg]` (stdout by default).

use circle_pattern::crsys::AngleStructure;
use circle_pattern::render::{layout_for_render, render_svg, RenderOptions};
use circle_pattern::solver::{solve_pattern, SolverOptions};
use circle_pattern::surface::regular_torus;

fn main() -> circle_pattern::error::Result<()> {
    let s = regular_torus(3, 3);
    let theta = AngleStructure::constant(s.n_edges(), std::f64::consts::FRAC_PI_3);
    let p = solve_pattern(&s, &theta, [0.4, 0.1], None, &SolverOptions::default())?;
    let layout = layout_for_render(&s, &p.cr, 3)?;
    let svg = render_svg(&layout, &RenderOptions { copies: 3, ..Default::default() })?;
    match std::env::args().nth(1) {
        Some(path) => {
            std::fs::write(&path, &svg)?;
            eprintln!("wrote {path} ({} circles)", svg.matches("<circle").count());
        }
        None => print!("{svg}"),
    }
    Ok(())
}
