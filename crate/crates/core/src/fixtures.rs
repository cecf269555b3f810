//! Named example surfaces with their cross ratio or angle data.

use std::collections::{BTreeSet, VecDeque};
use std::f64::consts::{FRAC_PI_3, PI, TAU};

use crate::crsys::{AngleStructure, CrossRatioSystem};
use crate::develop::{extract_cross_ratios, DevelopingMap};
use crate::error::{Error, Result};
use crate::moebius::{orientation, stereographic, ExtComplex, C64};
use crate::surface::{build_surface, one_vertex_torus, regular_torus, sphere_patch, TriangulatedSurface};

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub surface: TriangulatedSurface,
    pub cr: Option<CrossRatioSystem>,
    pub theta: Option<AngleStructure>,
    /// Planar positions of the base vertices (sphere fixtures only).
    pub positions: Option<Vec<C64>>,
    /// An edge function attached to the fixture.
    pub q: Option<Vec<f64>>,
    /// False for fixtures that are deliberately not Delaunay or not valid.
    pub valid: bool,
}

/// Fixture names accepted by [`by_name`].
pub const NAMES: &[&str] = &[
    "one-vertex-torus-a",
    "one-vertex-torus-b",
    "regular-torus",
    "jessen",
    "icosahedron-sphere",
    "octahedron-bad-angles",
];

/// Looks up a fixture; `regular-torus` takes `m n`, `one-vertex-torus-b`
/// takes `b` (`re` or `re,im`).
pub fn by_name(name: &str, args: &[String]) -> Result<Fixture> {
    let bad = |msg: &str| Error::InvalidMesh(format!("fixture {name}: {msg}"));
    match name {
        "one-vertex-torus-a" => Ok(one_vertex_case_a()),
        "one-vertex-torus-b" => {
            let b = match args.first() {
                None => C64::new(2.0, 0.0),
                Some(a) => parse_complex(a).ok_or_else(|| bad("expected b as re or re,im"))?,
            };
            one_vertex_case_b(b)
        }
        "regular-torus" => {
            let m = args.first().map(|a| a.parse::<usize>()).transpose().map_err(|_| bad("m must be a positive integer"))?;
            let n = args.get(1).map(|a| a.parse::<usize>()).transpose().map_err(|_| bad("n must be a positive integer"))?;
            let (m, n) = (m.unwrap_or(2), n.or(m).unwrap_or(2));
            if m == 0 || n == 0 {
                return Err(bad("m and n must be positive"));
            }
            Ok(equilateral_torus(m, n))
        }
        "jessen" => jessen_fixture(),
        "icosahedron-sphere" => icosahedron_sphere(),
        "octahedron-bad-angles" => octahedron_bad_angles(),
        _ => Err(Error::InvalidMesh(format!("unknown fixture {name:?}; known: {}", NAMES.join(", ")))),
    }
}

fn parse_complex(s: &str) -> Option<C64> {
    let mut it = s.split(',').map(|p| p.trim().parse::<f64>());
    let re = it.next()?.ok()?;
    let im = match it.next() {
        Some(v) => v.ok()?,
        None => 0.0,
    };
    it.next().is_none().then_some(C64::new(re, im))
}

/// One-vertex torus with all cross ratios `e^{i pi/3}` (`cr1 cr2 cr3 = -1`).
pub fn one_vertex_case_a() -> Fixture {
    Fixture {
        name: "one-vertex-torus-a".into(),
        surface: one_vertex_torus(),
        cr: Some(CrossRatioSystem::constant(3, C64::from_polar(1.0, FRAC_PI_3))),
        theta: Some(AngleStructure::constant(3, FRAC_PI_3)),
        positions: None,
        q: None,
        valid: true,
    }
}

/// One-vertex torus with `cr = (b, -(b+1)/b, -1/(1+b))`, never Delaunay.
pub fn one_vertex_case_b(b: C64) -> Result<Fixture> {
    if b.norm() < 1e-12 || (b + 1.0).norm() < 1e-12 {
        return Err(Error::InvalidSystem("b must avoid 0 and -1".into()));
    }
    Ok(Fixture {
        name: "one-vertex-torus-b".into(),
        surface: one_vertex_torus(),
        cr: Some(CrossRatioSystem::new(vec![b, -(b + 1.0) / b, -(b + 1.0).inv()])?),
        theta: None,
        positions: None,
        q: None,
        valid: false,
    })
}

/// `regular_torus(m, n)` with the equilateral pattern.
pub fn equilateral_torus(m: usize, n: usize) -> Fixture {
    let s = regular_torus(m, n);
    let ne = s.n_edges();
    Fixture {
        name: format!("regular-torus-{m}x{n}"),
        surface: s,
        cr: Some(CrossRatioSystem::constant(ne, C64::from_polar(1.0, FRAC_PI_3))),
        theta: Some(AngleStructure::constant(ne, FRAC_PI_3)),
        positions: None,
        q: None,
        valid: true,
    }
}

/// Vertex coordinates of the orthogonal icosahedron, all of norm `sqrt 5`.
pub const JESSEN_VERTICES: [[f64; 3]; 12] = [
    [1.0, -2.0, 0.0],
    [-1.0, -2.0, 0.0],
    [2.0, 0.0, 1.0],
    [2.0, 0.0, -1.0],
    [0.0, -1.0, 2.0],
    [0.0, 1.0, 2.0],
    [-2.0, 0.0, 1.0],
    [-2.0, 0.0, -1.0],
    [1.0, 2.0, 0.0],
    [-1.0, 2.0, 0.0],
    [0.0, -1.0, -2.0],
    [0.0, 1.0, -2.0],
];

/// The 30 edges of the orthogonal icosahedron, indices into [`JESSEN_VERTICES`].
pub const JESSEN_EDGES: [[usize; 2]; 30] = [
    [0, 4], [4, 10], [10, 0], [4, 1], [1, 10], [0, 2], [2, 4], [4, 6], [6, 1], [1, 7],
    [7, 10], [0, 3], [3, 10], [2, 5], [5, 6], [6, 2], [0, 8], [8, 2], [3, 8], [1, 9],
    [5, 8], [5, 9], [5, 11], [11, 3], [11, 7], [11, 8], [11, 9], [3, 7], [7, 9], [6, 9],
];

/// Consistently oriented triangles of a graph whose 3-cliques are exactly
/// the faces of a sphere triangulation.
fn faces_from_edges(n: usize, edges: &[[usize; 2]]) -> Result<Vec<[usize; 3]>> {
    let adj: Vec<BTreeSet<usize>> = (0..n)
        .map(|v| edges.iter().filter_map(|e| if e[0] == v { Some(e[1]) } else if e[1] == v { Some(e[0]) } else { None }).collect())
        .collect();
    let mut tri = Vec::new();
    for a in 0..n {
        for &b in adj[a].range(a + 1..) {
            for &c in adj[b].range(b + 1..) {
                if adj[a].contains(&c) {
                    tri.push([a, b, c]);
                }
            }
        }
    }
    // Propagate an orientation across shared edges.
    let mut oriented: Vec<Option<[usize; 3]>> = vec![None; tri.len()];
    oriented[0] = Some(tri[0]);
    let mut queue = VecDeque::from([0]);
    let directed = |f: [usize; 3]| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])];
    while let Some(i) = queue.pop_front() {
        let fi = oriented[i].unwrap();
        for (j, t) in tri.iter().enumerate() {
            if oriented[j].is_some() {
                continue;
            }
            for (a, b) in directed(fi) {
                if t.contains(&a) && t.contains(&b) {
                    let c = *t.iter().find(|&&x| x != a && x != b).unwrap();
                    oriented[j] = Some([b, a, c]);
                    queue.push_back(j);
                    break;
                }
            }
        }
    }
    oriented
        .into_iter()
        .map(|f| f.ok_or_else(|| Error::InvalidMesh("disconnected triangle set".into())))
        .collect()
}

/// Projects sphere vertices and orients the faces so that most of them are
/// counterclockwise in the plane.
fn projected_sphere(
    faces: Vec<[usize; 3]>,
    points: &[[f64; 3]],
    pole: [f64; 3],
) -> Result<(TriangulatedSurface, Vec<C64>)> {
    let z: Vec<C64> = points
        .iter()
        .map(|&p| stereographic(p, pole).finite().ok_or_else(|| Error::InvalidMesh("vertex at the pole".into())))
        .collect::<Result<_>>()?;
    let ccw = faces.iter().filter(|f| orientation(z[f[0]], z[f[1]], z[f[2]]) > 0.0).count();
    let faces = if 2 * ccw >= faces.len() { faces } else { faces.into_iter().map(|f| [f[0], f[2], f[1]]).collect() };
    Ok((build_surface(&faces, 0)?, z))
}

fn cross_ratios_of_positions(s: &TriangulatedSurface, z: &[C64]) -> Result<CrossRatioSystem> {
    let patch = sphere_patch(s);
    let positions: Vec<ExtComplex> = patch.vertices.iter().map(|l| z[l.vertex].into()).collect();
    let f = s.face_vertices(0);
    let dev = DevelopingMap {
        patch,
        seed: [z[f[0]].into(), z[f[1]].into(), z[f[2]].into()],
        positions,
        seed_face: 0,
        closure_error: 0.0,
    };
    extract_cross_ratios(s, &dev, 1e-9)
}

/// Stereographic image of the orthogonal icosahedron from `(0, 0, sqrt 5)`,
/// with `q = 1` on the short edges and `-4` on the long ones.
pub fn jessen_fixture() -> Result<Fixture> {
    let faces = faces_from_edges(12, &JESSEN_EDGES)?;
    let pole = [0.0, 0.0, 5f64.sqrt()];
    let (s, z) = projected_sphere(faces, &JESSEN_VERTICES, pole)?;
    let q: Vec<f64> = (0..s.n_edges())
        .map(|e| {
            let (a, b) = s.edge_vertices(e);
            let d2: f64 = (0..3).map(|k| (JESSEN_VERTICES[a][k] - JESSEN_VERTICES[b][k]).powi(2)).sum();
            if d2 > 10.0 { -4.0 } else { 1.0 }
        })
        .collect();
    let cr = cross_ratios_of_positions(&s, &z)?;
    Ok(Fixture {
        name: "jessen".into(),
        surface: s,
        cr: Some(cr),
        theta: None,
        positions: Some(z),
        q: Some(q),
        valid: false,
    })
}

/// Vertex 0 on top, 1..=5 upper ring, 6..=10 lower ring, 11 at the bottom.
pub fn icosahedron_faces() -> Vec<[usize; 3]> {
    let mut f = Vec::with_capacity(20);
    for i in 0..5 {
        let a = 1 + i;
        let b = 1 + (i + 1) % 5;
        let c = 6 + i;
        let d = 6 + (i + 1) % 5;
        f.extend([[0, a, b], [a, c, b], [b, c, d], [11, d, c]]);
    }
    f
}

/// Regular icosahedron on the unit sphere, matching [`icosahedron_faces`].
pub fn icosahedron_vertices() -> Vec<[f64; 3]> {
    let h = 1.0 / 5f64.sqrt();
    let r = 2.0 * h;
    let mut p = vec![[0.0, 0.0, 1.0]];
    for k in 0..5 {
        let t = TAU * k as f64 / 5.0;
        p.push([r * t.cos(), r * t.sin(), h]);
    }
    for k in 0..5 {
        let t = TAU * k as f64 / 5.0 + PI / 5.0;
        p.push([r * t.cos(), r * t.sin(), -h]);
    }
    p.push([0.0, 0.0, -1.0]);
    p
}

/// Icosahedron with all angles `2 pi / 5`, plus the projected regular
/// icosahedron as a reference solution.
pub fn icosahedron_sphere() -> Result<Fixture> {
    let pts = icosahedron_vertices();
    // Pole through the center of a bottom face, away from every vertex.
    let c: Vec<f64> = (0..3).map(|k| pts[11][k] + pts[6][k] + pts[7][k]).collect();
    let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    let (s, z) = projected_sphere(icosahedron_faces(), &pts, [c[0] / n, c[1] / n, c[2] / n])?;
    let cr = cross_ratios_of_positions(&s, &z)?;
    let ne = s.n_edges();
    Ok(Fixture {
        name: "icosahedron-sphere".into(),
        surface: s,
        cr: Some(cr),
        theta: Some(AngleStructure::constant(ne, TAU / 5.0)),
        positions: Some(z),
        q: None,
        valid: true,
    })
}

/// Octahedron angles with every vertex sum `2 pi` and all angles in
/// `(0, pi)`, but the six edges between two opposite faces sum to `1.8 pi`.
pub fn octahedron_bad_angles() -> Result<Fixture> {
    // 0,1,2 = +x,+y,+z; 3,4,5 = -x,-y,-z.
    let faces = vec![
        [0, 1, 2], [1, 3, 2], [3, 4, 2], [4, 0, 2],
        [1, 0, 5], [3, 1, 5], [4, 3, 5], [0, 4, 5],
    ];
    let s = build_surface(&faces, 0)?;
    let heavy = |a: usize, b: usize| (a < 3 && b < 3) || (a >= 3 && b >= 3);
    let theta = (0..s.n_edges())
        .map(|e| {
            let (a, b) = s.edge_vertices(e);
            if heavy(a, b) { 0.7 * PI } else { 0.3 * PI }
        })
        .collect();
    Ok(Fixture {
        name: "octahedron-bad-angles".into(),
        surface: s,
        cr: None,
        theta: Some(AngleStructure { theta }),
        positions: None,
        q: None,
        valid: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crsys::{is_delaunay, residual_norm, star_edges, validate_angle_structure};

    #[test]
    fn jessen_structure() {
        let f = jessen_fixture().unwrap();
        let s = &f.surface;
        assert_eq!((s.n_vertices(), s.n_edges(), s.n_faces()), (12, 30, 20));
        let q = f.q.as_ref().unwrap();
        assert_eq!(q.iter().filter(|&&x| x == 1.0).count(), 24);
        for v in 0..12 {
            let n: f64 = JESSEN_VERTICES[v].iter().map(|x| x * x).sum();
            assert!((n - 5.0).abs() < 1e-12);
            let sum: f64 = star_edges(s, v).iter().map(|&e| q[e]).sum();
            assert_eq!(sum, 0.0);
        }
        let z = f.positions.as_ref().unwrap();
        assert!((z[0] - C64::new(1.0, -2.0)).norm() < 1e-12);
        let cr = f.cr.as_ref().unwrap();
        assert!(residual_norm(s, cr) < 1e-10);
        let args: Vec<f64> = cr.arguments();
        assert!(args.iter().any(|&a| a < 0.0) && args.iter().any(|&a| a > 0.0));
    }

    #[test]
    fn icosahedron_reference_is_delaunay() {
        let f = icosahedron_sphere().unwrap();
        let cr = f.cr.unwrap();
        assert!(residual_norm(&f.surface, &cr) < 1e-10);
        for a in cr.arguments() {
            assert!((a - TAU / 5.0).abs() < 1e-10, "{a}");
        }
        assert!(is_delaunay(&f.surface, &cr, 1e-8, 1e-9).unwrap().is_ok());
    }

    #[test]
    fn octahedron_angles_rejected_with_witness() {
        let f = octahedron_bad_angles().unwrap();
        let theta = f.theta.unwrap();
        for v in 0..6 {
            let sum: f64 = star_edges(&f.surface, v).iter().map(|&e| theta.theta[e]).sum();
            assert!((sum - TAU).abs() < 1e-12);
        }
        assert!(validate_angle_structure(&f.surface, &theta, 8).unwrap().is_err());
    }

    #[test]
    fn case_b_not_delaunay() {
        let f = one_vertex_case_b(C64::new(2.0, 0.0)).unwrap();
        let r = is_delaunay(&f.surface, f.cr.as_ref().unwrap(), 1e-8, 1e-9).unwrap();
        assert!(r.unwrap_err().to_string().contains("non-Delaunay"));
    }

    #[test]
    fn lookup() {
        assert!(by_name("regular-torus", &["3".into(), "2".into()]).is_ok());
        assert!(by_name("one-vertex-torus-b", &["2,1".into()]).is_ok());
        assert!(by_name("nope", &[]).is_err());
    }
}
