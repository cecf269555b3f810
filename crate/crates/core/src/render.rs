//! Deterministic SVG pictures of circle patterns.
//!
//! Edges are `<line>` elements, vertices small `<rect>` squares and
//! circumcircles `<circle>` elements (one per lifted face with a finite
//! circumcircle), so circles can be counted in the output.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::crsys::CrossRatioSystem;
use crate::develop::{develop, holonomy, normalized_positions, DevelopOptions, HolonomyType};
use crate::error::{Error, Result};
use crate::moebius::{circumcircle, Circumcircle, ExtComplex, MoebiusMap, C64};
use crate::surface::{lift_patch, sphere_patch, CoverPatch, TriangulatedSurface};

#[derive(Debug, Clone)]
pub struct RenderOptions {
    pub circles: bool,
    /// Stroke width in layout units; defaults to 0.2% of the view size.
    pub stroke: Option<f64>,
    /// Width of the picture in pixels.
    pub width: u32,
    /// Torus patch: words `0..copies` in both directions.
    pub copies: i64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { circles: true, stroke: None, width: 800, copies: 2 }
    }
}

/// A finite planar layout of a patch.
#[derive(Debug, Clone)]
pub struct PlanarLayout {
    pub patch: CoverPatch,
    pub positions: Vec<C64>,
}

/// Develops `cr` for drawing. Tori are normalized by their holonomy when it
/// is affine; on spheres the circumdisk of face 0 is sent to the outside.
pub fn layout_for_render(s: &TriangulatedSurface, cr: &CrossRatioSystem, copies: i64) -> Result<PlanarLayout> {
    if s.is_torus() {
        if copies < 1 {
            return Err(Error::InvalidMesh("need at least one copy".into()));
        }
        let patch = lift_patch(s, 0..=copies - 1, 0..=copies - 1)?;
        let dev = develop(s, cr, &patch, &DevelopOptions::default())?;
        let normalized = if copies >= 2 {
            holonomy(&dev, crate::tolerance::global().parabolic)
                .ok()
                .filter(|h| matches!(h.kind, HolonomyType::Translation | HolonomyType::StretchRotation))
                .and_then(|h| normalized_positions(&dev, &h).ok())
        } else {
            None
        };
        let positions = match normalized {
            Some(p) => p,
            None => dev.finite_positions()?,
        };
        Ok(PlanarLayout { patch, positions })
    } else {
        let patch = sphere_patch(s);
        let dev = develop(s, cr, &patch, &DevelopOptions::default())?;
        let f = &patch.faces[0];
        let corners: [ExtComplex; 3] = std::array::from_fn(|t| dev.positions[f.corners[t]]);
        let p = match circumcircle(corners[0], corners[1], corners[2])? {
            Circumcircle::Circle { center, .. } => center,
            Circumcircle::Line { point, direction } => point + direction * 0.5,
        };
        let m = MoebiusMap::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), -p)?;
        let positions = dev.transformed(&m).finite_positions()?;
        Ok(PlanarLayout { patch, positions })
    }
}

/// Planar layout of a sphere from given base vertex positions.
pub fn sphere_layout(s: &TriangulatedSurface, z: &[C64]) -> Result<PlanarLayout> {
    if z.len() != s.n_vertices() {
        return Err(Error::InvalidMesh("one position per vertex expected".into()));
    }
    let patch = sphere_patch(s);
    let positions = patch.vertices.iter().map(|l| z[l.vertex]).collect();
    Ok(PlanarLayout { patch, positions })
}

fn num(x: f64) -> String {
    // Avoid "-0.000000".
    let s = format!("{x:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') { "0.000000".into() } else { s }
}

/// Renders a layout as an SVG 1.1 document.
pub fn render_svg(layout: &PlanarLayout, opts: &RenderOptions) -> Result<String> {
    let z = &layout.positions;
    if z.is_empty() || layout.patch.faces.is_empty() {
        return Err(Error::InvalidMesh("empty layout".into()));
    }
    if z.iter().any(|p| !p.is_finite()) {
        return Err(Error::Numeric("layout has non-finite positions".into()));
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in z {
        x0 = x0.min(p.re);
        x1 = x1.max(p.re);
        y0 = y0.min(-p.im);
        y1 = y1.max(-p.im);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let margin = 0.05 * span;
    let (vx, vy) = (x0 - margin, y0 - margin);
    let (vw, vh) = (x1 - x0 + 2.0 * margin, y1 - y0 + 2.0 * margin);
    let height = ((opts.width as f64) * vh / vw).round().max(1.0) as u32;
    let stroke = opts.stroke.unwrap_or(0.002 * span);
    let dot = 2.0 * stroke;

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"{} {} {} {}\">",
        opts.width,
        height,
        num(vx),
        num(vy),
        num(vw),
        num(vh)
    );
    if opts.circles {
        let _ = writeln!(out, "<g fill=\"none\" stroke=\"#3b6fb6\" stroke-width=\"{}\">", num(stroke));
        for f in &layout.patch.faces {
            let c: [ExtComplex; 3] = std::array::from_fn(|t| z[f.corners[t]].into());
            if let Ok(Circumcircle::Circle { center, radius, .. }) = circumcircle(c[0], c[1], c[2]) {
                let _ = writeln!(out, "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>", num(center.re), num(-center.im), num(radius));
            }
        }
        out.push_str("</g>\n");
    }
    let mut edges = BTreeSet::new();
    for f in &layout.patch.faces {
        for t in 0..3 {
            let (a, b) = (f.corners[t], f.corners[(t + 1) % 3]);
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let _ = writeln!(out, "<g stroke=\"#222222\" stroke-width=\"{}\">", num(stroke));
    for (a, b) in edges {
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
            num(z[a].re),
            num(-z[a].im),
            num(z[b].re),
            num(-z[b].im)
        );
    }
    out.push_str("</g>\n<g fill=\"#b22222\">\n");
    for p in z {
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/>",
            num(p.re - dot / 2.0),
            num(-p.im - dot / 2.0),
            num(dot),
            num(dot)
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::equilateral_torus;

    fn circles(svg: &str) -> usize {
        svg.matches("<circle").count()
    }

    #[test]
    fn equilateral_circles_are_congruent() {
        let f = equilateral_torus(2, 2);
        let layout = layout_for_render(&f.surface, f.cr.as_ref().unwrap(), 2).unwrap();
        let svg = render_svg(&layout, &RenderOptions::default()).unwrap();
        assert_eq!(circles(&svg), f.surface.n_faces() * 4);
        let radii: BTreeSet<&str> = svg
            .lines()
            .filter(|l| l.starts_with("<circle"))
            .map(|l| l.split("r=\"").nth(1).unwrap())
            .collect();
        assert_eq!(radii.len(), 1);
        let again = render_svg(&layout, &RenderOptions::default()).unwrap();
        assert_eq!(svg, again);
        let off = render_svg(&layout, &RenderOptions { circles: false, ..Default::default() }).unwrap();
        assert_eq!(circles(&off), 0);
    }

    #[test]
    fn sphere_layout_is_finite() {
        let f = crate::fixtures::icosahedron_sphere().unwrap();
        let layout = layout_for_render(&f.surface, f.cr.as_ref().unwrap(), 1).unwrap();
        let svg = render_svg(&layout, &RenderOptions::default()).unwrap();
        assert_eq!(circles(&svg), 20);
    }
}
