//! Cross ratio systems on a triangulated surface: the vertex residual, its
//! Jacobian, Delaunay predicates, ramification and angle structures.
//!
//! Around a vertex the incident edges are read in clockwise order (see
//! [`TriangulatedSurface::outgoing`]); a loop contributes two slots.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moebius::C64;
use crate::surface::{dual_cycles, DualCycle, TriangulatedSurface};

/// One nonzero complex number per edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossRatioSystem {
    pub cr: Vec<C64>,
}

/// Prescribed intersection angles, one per edge, in `[0, pi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleStructure {
    pub theta: Vec<f64>,
}

impl AngleStructure {
    pub fn constant(n_edges: usize, value: f64) -> Self {
        Self { theta: vec![value; n_edges] }
    }
}

impl CrossRatioSystem {
    pub fn new(cr: Vec<C64>) -> Result<Self> {
        if let Some(e) = cr.iter().position(|z| !z.is_finite() || z.norm() == 0.0) {
            return Err(Error::InvalidSystem(format!("cross ratio of edge {e} is zero or not finite")));
        }
        Ok(Self { cr })
    }

    pub fn constant(n_edges: usize, value: C64) -> Self {
        Self { cr: vec![value; n_edges] }
    }

    pub fn len(&self) -> usize {
        self.cr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cr.is_empty()
    }

    /// Principal arguments in `(-pi, pi]`.
    pub fn arguments(&self) -> Vec<f64> {
        self.cr.iter().map(|z| z.arg()).collect()
    }

    /// Log-moduli `X = log |cr|`.
    pub fn log_moduli(&self) -> Vec<f64> {
        self.cr.iter().map(|z| z.norm().ln()).collect()
    }
}

/// `cr = exp(X + i Theta)` entrywise.
pub fn exp_theta(x: &[f64], theta: &AngleStructure) -> CrossRatioSystem {
    assert_eq!(x.len(), theta.theta.len(), "shape mismatch");
    CrossRatioSystem {
        cr: x.iter().zip(&theta.theta).map(|(&x, &t)| C64::from_polar(x.exp(), t)).collect(),
    }
}

/// Edge ids around `v` in clockwise order, one per slot.
pub fn star_edges(s: &TriangulatedSurface, v: usize) -> Vec<usize> {
    s.outgoing(v).into_iter().map(|h| s.edge(h)).collect()
}

/// Partial products `P_k = cr_1 ... cr_k` along the star of `v`.
fn partial_products(s: &TriangulatedSurface, sys: &CrossRatioSystem, v: usize) -> Vec<C64> {
    let mut acc = C64::new(1.0, 0.0);
    star_edges(s, v)
        .into_iter()
        .map(|e| {
            acc *= sys.cr[e];
            acc
        })
        .collect()
}

/// Per vertex: `(prod cr - 1, sum of partial products)`.
pub fn phi_residual(s: &TriangulatedSurface, sys: &CrossRatioSystem) -> Vec<[C64; 2]> {
    (0..s.n_vertices())
        .map(|v| {
            let p = partial_products(s, sys, v);
            let last = *p.last().unwrap();
            [last - 1.0, p.iter().sum()]
        })
        .collect()
}

/// Largest residual entry, relative to the size of the partial products.
pub fn residual_norm(s: &TriangulatedSurface, sys: &CrossRatioSystem) -> f64 {
    let mut worst: f64 = 0.0;
    for v in 0..s.n_vertices() {
        let p = partial_products(s, sys, v);
        let scale = p.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let r1 = (p.last().unwrap() - 1.0).norm();
        let r2 = p.iter().sum::<C64>().norm();
        worst = worst.max(r1.max(r2) / scale);
    }
    worst
}

/// Real residual rows `[Re r1, Re r2, Im r2]` per vertex. With arguments
/// summing to `2 pi` at every vertex the product is real, so `Im r1`
/// carries no information.
pub fn phi_real_rows(s: &TriangulatedSurface, sys: &CrossRatioSystem) -> Vec<f64> {
    phi_residual(s, sys)
        .into_iter()
        .flat_map(|[r1, r2]| [r1.re, r2.re, r2.im])
        .collect()
}

/// Jacobian of the residual with respect to `log cr`: a `2|V| x |E|` complex
/// matrix with rows `(v, 1)` and `(v, 2)` interleaved.
pub fn phi_jacobian(s: &TriangulatedSurface, sys: &CrossRatioSystem) -> DMatrix<C64> {
    let mut jac = DMatrix::from_element(2 * s.n_vertices(), s.n_edges(), C64::new(0.0, 0.0));
    for v in 0..s.n_vertices() {
        let edges = star_edges(s, v);
        let p = partial_products(s, sys, v);
        let last = *p.last().unwrap();
        // Suffix sums: slot j enters every P_k with k >= j.
        let mut suffix = vec![C64::new(0.0, 0.0); p.len() + 1];
        for k in (0..p.len()).rev() {
            suffix[k] = suffix[k + 1] + p[k];
        }
        for (j, &e) in edges.iter().enumerate() {
            jac[(2 * v, e)] += last;
            jac[(2 * v + 1, e)] += suffix[j];
        }
    }
    jac
}

/// Real Jacobian rows matching [`phi_real_rows`], with respect to `X`.
pub fn phi_real_jacobian(s: &TriangulatedSurface, sys: &CrossRatioSystem) -> DMatrix<f64> {
    let jc = phi_jacobian(s, sys);
    let mut j = DMatrix::zeros(3 * s.n_vertices(), s.n_edges());
    for v in 0..s.n_vertices() {
        for e in 0..s.n_edges() {
            j[(3 * v, e)] = jc[(2 * v, e)].re;
            j[(3 * v + 1, e)] = jc[(2 * v + 1, e)].re;
            j[(3 * v + 2, e)] = jc[(2 * v + 1, e)].im;
        }
    }
    j
}

/// Whether the residual vanishes within `tol` (relative).
pub fn is_valid(s: &TriangulatedSurface, sys: &CrossRatioSystem, tol: f64) -> bool {
    residual_norm(s, sys) <= tol
}

/// Why a system fails to be Delaunay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonDelaunay {
    /// Some argument lies outside `[0, pi)`.
    ArgumentOutOfRange { edge: usize, argument: f64 },
    /// Deleting cocircular edges merges faces into a region that is not a
    /// disk; `edge` closes a cycle among merged faces.
    MergedFaceNotDisk { edge: usize },
}

impl std::fmt::Display for NonDelaunay {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NonDelaunay::ArgumentOutOfRange { edge, argument } => {
                write!(f, "non-Delaunay: argument {argument:.6} of edge {edge} is outside [0, pi)")
            }
            NonDelaunay::MergedFaceNotDisk { edge } => {
                write!(f, "non-Delaunay: deleting cocircular edge {edge} leaves a merged face that is not a disk")
            }
        }
    }
}

/// Checks the Delaunay conditions. Arguments with `|Arg| < zero_angle`
/// count as cocircular pairs whose faces get merged.
pub fn is_delaunay(
    s: &TriangulatedSurface,
    sys: &CrossRatioSystem,
    zero_angle: f64,
    residual_tol: f64,
) -> Result<std::result::Result<(), NonDelaunay>> {
    let r = residual_norm(s, sys);
    if r > residual_tol {
        return Err(Error::InvalidSystem(format!("residual {r:.3e} exceeds {residual_tol:.1e}")));
    }
    for (edge, z) in sys.cr.iter().enumerate() {
        let argument = z.arg();
        if argument <= -zero_angle || argument >= PI - zero_angle {
            return Ok(Err(NonDelaunay::ArgumentOutOfRange { edge, argument }));
        }
    }
    let mut uf = UnionFind::new(s.n_faces());
    for (edge, z) in sys.cr.iter().enumerate() {
        if z.arg().abs() < zero_angle {
            let h = s.edge_half_edge(edge);
            if !uf.union(s.face(h), s.face(s.twin(h))) {
                return Ok(Err(NonDelaunay::MergedFaceNotDisk { edge }));
            }
        }
    }
    Ok(Ok(()))
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut x = x;
        while self.parent[x] != r {
            let n = self.parent[x];
            self.parent[x] = r;
            x = n;
        }
        r
    }

    /// Returns false if `a` and `b` were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Ramification index `s_v = (sum of Arg cr over the star) / 2 pi`.
pub fn ramification_index(s: &TriangulatedSurface, sys: &CrossRatioSystem) -> Result<Vec<i64>> {
    (0..s.n_vertices())
        .map(|v| {
            let total: f64 = star_edges(s, v).iter().map(|&e| sys.cr[e].arg()).sum();
            let k = total / TAU;
            let r = k.round();
            if (k - r).abs() > 1e-6 {
                Err(Error::InvalidSystem(format!("vertex {v}: argument sum {total:.6} is not a multiple of 2 pi")))
            } else {
                Ok(r as i64)
            }
        })
        .collect()
}

/// First violation of the angle structure conditions.
#[derive(Debug, Clone, PartialEq)]
pub enum AngleViolation {
    OutOfRange { edge: usize, value: f64 },
    VertexSum { vertex: usize, sum: f64 },
    /// A contractible dual cycle not around a single vertex with total
    /// angle at most `2 pi`.
    Cycle { cycle: DualCycle, sum: f64 },
}

impl std::fmt::Display for AngleViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AngleViolation::OutOfRange { edge, value } => write!(f, "angle {value} of edge {edge} outside [0, pi)"),
            AngleViolation::VertexSum { vertex, sum } => write!(f, "angle sum {sum:.6} at vertex {vertex} is not 2 pi"),
            AngleViolation::Cycle { cycle, sum } => {
                write!(f, "dual cycle through edges {:?} ", cycle.edges)?;
                match cycle.enclosed {
                    Some(n) => write!(f, "encloses {n} vertices")?,
                    None => write!(f, "is contractible")?,
                }
                write!(f, " with angle sum {sum:.6} <= 2 pi")
            }
        }
    }
}

/// Checks both angle structure conditions, the cycle condition over
/// contractible dual cycles of length at most `max_cycle`.
pub fn validate_angle_structure(
    s: &TriangulatedSurface,
    theta: &AngleStructure,
    max_cycle: usize,
) -> Result<std::result::Result<(), AngleViolation>> {
    if theta.theta.len() != s.n_edges() {
        return Err(Error::InvalidMesh(format!(
            "{} angles for {} edges",
            theta.theta.len(),
            s.n_edges()
        )));
    }
    for (edge, &value) in theta.theta.iter().enumerate() {
        if !(0.0..PI).contains(&value) {
            return Ok(Err(AngleViolation::OutOfRange { edge, value }));
        }
    }
    for vertex in 0..s.n_vertices() {
        let sum: f64 = star_edges(s, vertex).iter().map(|&e| theta.theta[e]).sum();
        if (sum - TAU).abs() > 1e-9 {
            return Ok(Err(AngleViolation::VertexSum { vertex, sum }));
        }
    }
    for cycle in dual_cycles(s, max_cycle) {
        if !cycle.contractible || cycle.enclosed == Some(1) {
            continue;
        }
        let sum: f64 = cycle.edges.iter().map(|&e| theta.theta[e]).sum();
        if sum <= TAU + 1e-10 {
            return Ok(Err(AngleViolation::Cycle { cycle, sum }));
        }
    }
    Ok(Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{one_vertex_torus, regular_torus};
    use std::f64::consts::FRAC_PI_3;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn max_res(r: &[[C64; 2]]) -> f64 {
        r.iter().flat_map(|x| x.iter().map(|z| z.norm())).fold(0.0, f64::max)
    }

    #[test]
    fn equilateral_one_vertex_residual_vanishes() {
        let s = one_vertex_torus();
        let sys = CrossRatioSystem::constant(3, C64::from_polar(1.0, FRAC_PI_3));
        assert!(max_res(&phi_residual(&s, &sys)) < 1e-14);
        assert_eq!(ramification_index(&s, &sys).unwrap(), vec![1]);
        assert_eq!(is_delaunay(&s, &sys, 1e-8, 1e-9).unwrap(), Ok(()));
    }

    #[test]
    fn case_b_family_residual_vanishes_and_is_not_delaunay() {
        let s = one_vertex_torus();
        for b in [c(2.0, 0.0), c(2.0, 1.0), c(-0.3, 0.7)] {
            let sys = CrossRatioSystem::new(vec![b, -(b + 1.0) / b, -(b + 1.0).inv()]).unwrap();
            assert!(max_res(&phi_residual(&s, &sys)) < 1e-14, "b = {b}");
        }
        let sys = CrossRatioSystem::new(vec![c(2.0, 0.0), c(-1.5, 0.0), c(-1.0 / 3.0, 0.0)]).unwrap();
        assert!(matches!(
            is_delaunay(&s, &sys, 1e-8, 1e-9).unwrap(),
            Err(NonDelaunay::ArgumentOutOfRange { .. })
        ));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let s = regular_torus(2, 2);
        let x: Vec<f64> = (0..s.n_edges()).map(|e| 0.1 * (e as f64).sin()).collect();
        let theta = AngleStructure::constant(s.n_edges(), FRAC_PI_3);
        let jac = phi_real_jacobian(&s, &exp_theta(&x, &theta));
        let h = 1e-6;
        for e in 0..s.n_edges() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[e] += h;
            xm[e] -= h;
            let rp = phi_real_rows(&s, &exp_theta(&xp, &theta));
            let rm = phi_real_rows(&s, &exp_theta(&xm, &theta));
            for r in 0..rp.len() {
                let fd = (rp[r] - rm[r]) / (2.0 * h);
                assert!((fd - jac[(r, e)]).abs() < 1e-7, "row {r} edge {e}");
            }
        }
    }

    #[test]
    fn exp_theta_round_trip() {
        let theta = AngleStructure { theta: vec![0.3, 1.2, 2.5] };
        let x = vec![-0.5, 0.0, 1.7];
        let sys = exp_theta(&x, &theta);
        for (a, b) in sys.log_moduli().iter().zip(&x) {
            assert!((a - b).abs() < 1e-14);
        }
        for (a, b) in sys.arguments().iter().zip(&theta.theta) {
            assert!((a - b).abs() < 1e-14);
        }
        let sys = exp_theta(&[0.0; 3], &AngleStructure::constant(3, FRAC_PI_3));
        assert!(sys.cr.iter().all(|z| (z - C64::from_polar(1.0, FRAC_PI_3)).norm() < 1e-15));
    }

    #[test]
    fn doubled_arguments_ramify() {
        let s = one_vertex_torus();
        let sys = CrossRatioSystem::constant(3, C64::from_polar(1.0, 2.0 * FRAC_PI_3));
        assert_eq!(ramification_index(&s, &sys).unwrap(), vec![2]);
    }

    #[test]
    fn angle_structures_on_tori() {
        for (m, n) in [(1, 1), (2, 2), (3, 3), (3, 2)] {
            let s = regular_torus(m, n);
            let theta = AngleStructure::constant(s.n_edges(), FRAC_PI_3);
            assert_eq!(validate_angle_structure(&s, &theta, 8).unwrap(), Ok(()), "{m}x{n}");
        }
        let s = regular_torus(2, 2);
        let theta = AngleStructure::constant(s.n_edges(), std::f64::consts::FRAC_PI_2);
        assert!(matches!(
            validate_angle_structure(&s, &theta, 8).unwrap(),
            Err(AngleViolation::VertexSum { .. })
        ));
    }
}
