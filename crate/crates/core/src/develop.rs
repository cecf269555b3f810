//! Developing maps on cover patches, holonomy and its affine normalization,
//! the geometric empty-circle check and the conformal modulus.

use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::crsys::CrossRatioSystem;
use crate::error::{Error, Result};
use crate::moebius::{
    circumcircle, cross_ratio, moebius_through, orientation, solve_fourth_point, Circumcircle, ExtComplex,
    FixedPoints, MoebiusMap, C64,
};
use crate::surface::{add, unit, CoverPatch, Lift, TriangulatedSurface};

/// Chordal distance above which two layouts of the same lifted vertex are
/// considered inconsistent.
const CLOSURE_FAIL: f64 = 1e-6;

/// Order in which faces are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Traversal {
    #[default]
    BreadthFirst,
    DepthFirst,
    /// Random frontier order from the given seed.
    Random(u64),
}

#[derive(Debug, Clone, Default)]
pub struct DevelopOptions {
    /// Positions of the three corners of the seed face.
    pub seed: Option<[ExtComplex; 3]>,
    /// Patch face laid out first; defaults to base face 0 at word 0.
    pub seed_face: Option<usize>,
    pub traversal: Traversal,
    /// Keep the first position of a vertex instead of failing when a star
    /// does not close.
    pub tolerate_gaps: bool,
}

/// The default seed `(0, 1, e^{i pi/3})`.
pub fn default_seed() -> [ExtComplex; 3] {
    [
        ExtComplex::new(0.0, 0.0),
        ExtComplex::new(1.0, 0.0),
        ExtComplex::new(0.5, 3f64.sqrt() / 2.0),
    ]
}

#[derive(Debug, Clone)]
pub struct DevelopingMap {
    pub patch: CoverPatch,
    /// One position per patch vertex.
    pub positions: Vec<ExtComplex>,
    pub seed_face: usize,
    pub seed: [ExtComplex; 3],
    /// Largest chordal disagreement met when a vertex was reached twice.
    pub closure_error: f64,
}

impl DevelopingMap {
    pub fn position(&self, lift: Lift) -> Option<ExtComplex> {
        self.patch.vertex_index(lift).map(|i| self.positions[i])
    }

    /// Positions after applying a Möbius map.
    pub fn transformed(&self, m: &MoebiusMap) -> DevelopingMap {
        let mut out = self.clone();
        out.positions = self.positions.iter().map(|&z| m.apply(z)).collect();
        out
    }

    /// All positions as finite numbers, if none is at infinity.
    pub fn finite_positions(&self) -> Result<Vec<C64>> {
        self.positions
            .iter()
            .map(|z| z.finite().ok_or_else(|| Error::Degenerate("layout hits infinity".into())))
            .collect()
    }
}

/// Lays out the patch face by face from a seed triangle.
pub fn develop(
    s: &TriangulatedSurface,
    sys: &CrossRatioSystem,
    patch: &CoverPatch,
    opts: &DevelopOptions,
) -> Result<DevelopingMap> {
    if sys.cr.len() != s.n_edges() {
        return Err(Error::InvalidSystem(format!("{} cross ratios for {} edges", sys.cr.len(), s.n_edges())));
    }
    let seed = opts.seed.unwrap_or_else(default_seed);
    for (a, b) in [(0, 1), (1, 2), (0, 2)] {
        if seed[a].coincides(&seed[b], 1e-12) {
            return Err(Error::Degenerate("seed positions must be distinct".into()));
        }
    }
    let seed_face = opts
        .seed_face
        .or_else(|| patch.face_index(0, [0, 0]))
        .unwrap_or(0);
    let nf = patch.faces.len();
    let mut positions: Vec<Option<ExtComplex>> = vec![None; patch.vertices.len()];
    for t in 0..3 {
        positions[patch.faces[seed_face].corners[t]] = Some(seed[t]);
    }
    let mut placed = vec![false; nf];
    placed[seed_face] = true;
    let mut frontier: VecDeque<usize> = VecDeque::from([seed_face]);
    let mut rng = match opts.traversal {
        Traversal::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut closure_error: f64 = 0.0;
    loop {
        let pf = match (&mut rng, opts.traversal) {
            (Some(rng), _) if !frontier.is_empty() => {
                let i = rng.gen_range(0..frontier.len());
                frontier.swap_remove_back(i).unwrap()
            }
            (_, Traversal::DepthFirst) => match frontier.pop_back() {
                Some(f) => f,
                None => break,
            },
            _ => match frontier.pop_front() {
                Some(f) => f,
                None => break,
            },
        };
        let face = &patch.faces[pf];
        for t in 0..3 {
            let h = 3 * face.face + t;
            let nw = s.cross(h, face.anchor);
            let Some(qf) = patch.face_index(s.face(s.twin(h)), nw) else {
                continue;
            };
            let zi = positions[face.corners[t]].unwrap();
            let zj = positions[face.corners[(t + 1) % 3]].unwrap();
            let zk = positions[face.corners[(t + 2) % 3]].unwrap();
            let tt = s.twin(h) % 3;
            let l_idx = patch.faces[qf].corners[(tt + 2) % 3];
            let zl = solve_fourth_point(sys.cr[s.edge(h)], zi, zj, zk).map_err(|e| {
                Error::InvalidSystem(format!("layout breaks down across edge {}: {e}", s.edge(h)))
            })?;
            match positions[l_idx] {
                None => positions[l_idx] = Some(zl),
                Some(prev) => {
                    let d = prev.chordal_distance(&zl);
                    closure_error = closure_error.max(d);
                    if d > CLOSURE_FAIL && !opts.tolerate_gaps {
                        let v = patch.vertices[l_idx].vertex;
                        return Err(Error::InvalidSystem(format!(
                            "layout does not close around vertex {v} (gap {d:.3e}); the star of {v} violates the closing conditions"
                        )));
                    }
                }
            }
            if !placed[qf] {
                placed[qf] = true;
                frontier.push_back(qf);
            }
        }
    }
    if let Some(i) = positions.iter().position(|p| p.is_none()) {
        return Err(Error::InvalidMesh(format!("patch vertex {i} is not reachable from the seed face")));
    }
    Ok(DevelopingMap {
        patch: patch.clone(),
        positions: positions.into_iter().map(Option::unwrap).collect(),
        seed_face,
        seed,
        closure_error,
    })
}

/// Cross ratios read off a layout, checked for consistency across all lifted
/// copies of each edge.
pub fn extract_cross_ratios(s: &TriangulatedSurface, dev: &DevelopingMap, tol: f64) -> Result<CrossRatioSystem> {
    let patch = &dev.patch;
    let mut cr: Vec<Option<C64>> = vec![None; s.n_edges()];
    for face in &patch.faces {
        for t in 0..3 {
            let h = 3 * face.face + t;
            let Some(qf) = patch.face_index(s.face(s.twin(h)), s.cross(h, face.anchor)) else {
                continue;
            };
            let z = |i: usize| dev.positions[i];
            let tt = s.twin(h) % 3;
            let value = cross_ratio(
                z(face.corners[t]),
                z(face.corners[(t + 1) % 3]),
                z(face.corners[(t + 2) % 3]),
                z(patch.faces[qf].corners[(tt + 2) % 3]),
            )?;
            let e = s.edge(h);
            match cr[e] {
                None => cr[e] = Some(value),
                Some(prev) => {
                    if (prev - value).norm() > tol * (1.0 + prev.norm()) {
                        return Err(Error::InvalidSystem(format!(
                            "layout is not equivariant: edge {e} has cross ratios {prev} and {value}"
                        )));
                    }
                }
            }
        }
    }
    let cr = cr
        .into_iter()
        .enumerate()
        .map(|(e, c)| c.ok_or_else(|| Error::InvalidMesh(format!("edge {e} has no interior lift in the patch"))))
        .collect::<Result<Vec<_>>>()?;
    CrossRatioSystem::new(cr)
}

/// Cross ratios of a vertex star: `center` surrounded by `ring` in clockwise
/// order. Entry `j` belongs to the edge towards `ring[j]`.
pub fn star_cross_ratios(center: ExtComplex, ring: &[ExtComplex]) -> Result<Vec<C64>> {
    let n = ring.len();
    (0..n)
        .map(|j| cross_ratio(center, ring[j], ring[(j + n - 1) % n], ring[(j + 1) % n]))
        .collect()
}

/// A vertex star laid out with its center at infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct StarLayout {
    /// `z_0, ..., z_{n+1}` with `z_0 = 0`, `z_1 = 1`.
    pub points: Vec<C64>,
    /// `max(|z_n - z_0|, |z_{n+1} - z_1|)`.
    pub gap: f64,
    /// Some `z_{k+1}` coincides with `z_{k-1}`.
    pub degenerate: bool,
}

/// Lays out a star from its cross ratios with the center at infinity, via
/// `z_{k+1} = z_k + cr_1 ... cr_k`.
pub fn close_vertex_star(cr: &[C64], tol: f64) -> Result<StarLayout> {
    let n = cr.len();
    if n < 2 {
        return Err(Error::InvalidSystem("a vertex star needs at least two edges".into()));
    }
    let mut points = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    let mut p = C64::new(1.0, 0.0);
    for c in cr {
        p *= c;
        let last = *points.last().unwrap();
        points.push(last + p);
    }
    let scale = points.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let gap = (points[n] - points[0]).norm().max((points[n + 1] - points[1]).norm());
    if gap > tol * scale {
        return Err(Error::InvalidSystem(format!("vertex star does not close: gap {gap:.3e}")));
    }
    let degenerate = (1..=n).any(|k| (points[k + 1] - points[k - 1]).norm() <= tol * scale);
    Ok(StarLayout { points, gap, degenerate })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HolonomyType {
    Identity,
    /// Type I: common single fixed point, translations after normalization.
    Translation,
    /// Type II: two common fixed points, `z -> alpha z` after normalization.
    StretchRotation,
    /// Type III: one generator exchanges the fixed points of the other.
    Exchanging,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Holonomy {
    pub rho: [MoebiusMap; 2],
    pub kind: HolonomyType,
    /// Map taking the developing map to its affine normalization (types I/II).
    pub normalization: Option<MoebiusMap>,
    pub alpha: [C64; 2],
    pub beta: [C64; 2],
    pub fixed_points: Vec<ExtComplex>,
    pub commutator_error: f64,
    pub equivariance_error: f64,
}

impl Holonomy {
    /// For type II, swap the roles of the two fixed points (alpha -> 1/alpha).
    pub fn flipped(&self) -> Holonomy {
        let mut out = self.clone();
        if self.kind == HolonomyType::StretchRotation {
            let [p, q] = [self.fixed_points[0], self.fixed_points[1]];
            out.fixed_points = vec![q, p];
            out.normalization = normalizer_two(q, p).ok();
            out.alpha = self.alpha.map(|a| a.inv());
        }
        out
    }

    pub fn log_abs_alpha(&self) -> [f64; 2] {
        self.alpha.map(|a| a.norm().ln())
    }
}

/// Lift pairs `(x, x + e_r)` present in the patch.
fn matched_pairs(patch: &CoverPatch, r: usize) -> Vec<(usize, usize)> {
    patch
        .vertices
        .iter()
        .enumerate()
        .filter_map(|(i, l)| {
            patch
                .vertex_index(Lift { vertex: l.vertex, word: add(l.word, unit(r)) })
                .map(|j| (i, j))
        })
        .collect()
}

/// Three pairs whose sources and targets are well separated.
fn pick_pairs(dev: &DevelopingMap, pairs: &[(usize, usize)]) -> Option<[(usize, usize); 3]> {
    let z = |i: usize| dev.positions[i];
    let sep = |a: &(usize, usize), b: &(usize, usize)| {
        z(a.0).chordal_distance(&z(b.0)).min(z(a.1).chordal_distance(&z(b.1)))
    };
    let first = *pairs.first()?;
    let second = *pairs.iter().max_by(|a, b| sep(a, &first).total_cmp(&sep(b, &first)))?;
    let third = *pairs
        .iter()
        .max_by(|a, b| sep(a, &first).min(sep(a, &second)).total_cmp(&sep(b, &first).min(sep(b, &second))))?;
    let chosen = [first, second, third];
    let min_sep = sep(&first, &second).min(sep(&first, &third)).min(sep(&second, &third));
    (min_sep > 1e-9).then_some(chosen)
}

fn normalizer_one(p: ExtComplex) -> Result<MoebiusMap> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    match p {
        ExtComplex::Infinity => Ok(MoebiusMap::identity()),
        ExtComplex::Finite(p) => MoebiusMap::new(zero, one, one, -p),
    }
}

fn normalizer_two(p: ExtComplex, q: ExtComplex) -> Result<MoebiusMap> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    match (p, q) {
        (ExtComplex::Finite(p), ExtComplex::Finite(q)) => MoebiusMap::new(one, -p, one, -q),
        (ExtComplex::Finite(p), ExtComplex::Infinity) => MoebiusMap::new(one, -p, zero, one),
        (ExtComplex::Infinity, ExtComplex::Finite(q)) => MoebiusMap::new(zero, one, one, -q),
        _ => Err(Error::Holonomy("coincident fixed points".into())),
    }
}

/// Generators through a fixed choice of three lift pairs, without any
/// consistency checks. Smooth in the cross ratios even when the layout does
/// not close.
pub fn holonomy_generators(dev: &DevelopingMap) -> Result<[MoebiusMap; 2]> {
    let mut rho = [MoebiusMap::identity(); 2];
    for (r, m) in rho.iter_mut().enumerate() {
        let pairs = matched_pairs(&dev.patch, r);
        if pairs.len() < 3 {
            return Err(Error::Holonomy(format!("patch lacks lift pairs for generator {}", r + 1)));
        }
        let pick = [pairs[0], pairs[pairs.len() / 2], pairs[pairs.len() - 1]];
        let z = |i: usize| dev.positions[i];
        *m = moebius_through(pick.map(|p| z(p.0)), pick.map(|p| z(p.1)))?;
    }
    Ok(rho)
}

/// Holonomy generators, their type and the affine normalization.
pub fn holonomy(dev: &DevelopingMap, parabolic_tol: f64) -> Result<Holonomy> {
    let patch = &dev.patch;
    let mut rho = [MoebiusMap::identity(); 2];
    let mut equivariance_error: f64 = 0.0;
    for r in 0..2 {
        let pairs = matched_pairs(patch, r);
        let [a, b, c] = pick_pairs(dev, &pairs).ok_or_else(|| {
            Error::Holonomy(format!("patch lacks three separated lift pairs for generator {}", r + 1))
        })?;
        let z = |i: usize| dev.positions[i];
        rho[r] = moebius_through([z(a.0), z(b.0), z(c.0)], [z(a.1), z(b.1), z(c.1)])?;
        for &(x, y) in &pairs {
            equivariance_error = equivariance_error.max(rho[r].apply(z(x)).chordal_distance(&z(y)));
        }
    }
    if equivariance_error > 1e-6 {
        return Err(Error::Holonomy(format!("layout is not equivariant (error {equivariance_error:.3e})")));
    }
    let commutator_error = rho[0].compose(&rho[1]).distance(&rho[1].compose(&rho[0]));
    let fp = [rho[0].fixed_points(parabolic_tol), rho[1].fixed_points(parabolic_tol)];
    let fixes = |m: &MoebiusMap, p: ExtComplex| m.apply(p).chordal_distance(&p) < 1e-7;
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let mut hol = Holonomy {
        rho,
        kind: HolonomyType::Identity,
        normalization: Some(MoebiusMap::identity()),
        alpha: [one; 2],
        beta: [zero; 2],
        fixed_points: Vec::new(),
        commutator_error,
        equivariance_error,
    };
    match fp {
        [FixedPoints::Identity, FixedPoints::Identity] => return Ok(hol),
        [FixedPoints::One(p), _] | [FixedPoints::Identity, FixedPoints::One(p)] => {
            let other = if matches!(fp[0], FixedPoints::One(_)) { 1 } else { 0 };
            if !matches!(fp[other], FixedPoints::Identity) && !(matches!(fp[other], FixedPoints::One(_)) && fixes(&rho[other], p)) {
                return Err(Error::Holonomy("generators do not share a parabolic fixed point".into()));
            }
            let m = normalizer_one(p)?;
            hol.kind = HolonomyType::Translation;
            hol.fixed_points = vec![p];
            for r in 0..2 {
                let n = rho[r].conjugate_by(&m);
                hol.alpha[r] = n.a / n.d;
                hol.beta[r] = n.b / n.d;
            }
            hol.normalization = Some(m);
        }
        [FixedPoints::Two(p, q), _] | [FixedPoints::Identity, FixedPoints::Two(p, q)] => {
            let reference = if matches!(fp[0], FixedPoints::Two(..)) { 0 } else { 1 };
            let other = &rho[1 - reference];
            if fixes(other, p) && fixes(other, q) {
                // Prefer |alpha_1| >= 1, then |alpha_2| >= 1.
                let mut m = normalizer_two(p, q)?;
                let mut pts = vec![p, q];
                let la = |m: &MoebiusMap, r: usize| {
                    let n = rho[r].conjugate_by(m);
                    (n.a / n.d).norm().ln()
                };
                let (l1, l2) = (la(&m, 0), la(&m, 1));
                if l1 < -1e-12 || (l1.abs() <= 1e-12 && l2 < 0.0) {
                    m = normalizer_two(q, p)?;
                    pts = vec![q, p];
                }
                hol.kind = HolonomyType::StretchRotation;
                hol.fixed_points = pts;
                for r in 0..2 {
                    let n = rho[r].conjugate_by(&m);
                    hol.alpha[r] = n.a / n.d;
                    hol.beta[r] = n.b / n.d;
                }
                hol.normalization = Some(m);
            } else if other.apply(p).chordal_distance(&q) < 1e-7 && other.apply(q).chordal_distance(&p) < 1e-7 {
                hol.kind = HolonomyType::Exchanging;
                hol.fixed_points = vec![p, q];
                hol.normalization = None;
            } else {
                return Err(Error::Holonomy(format!(
                    "holonomy generators do not commute (commutator error {commutator_error:.3e})"
                )));
            }
        }
    }
    Ok(hol)
}

/// Why the geometric empty-circle check failed at an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailReason {
    /// An apex lies strictly inside the opposite circumdisk.
    ApexInsideDisk,
    /// Both apexes lie on the same side of the edge, so the two disks do not
    /// overlap across it.
    DisjointDisks,
    /// A face is negatively oriented.
    Fold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricFailure {
    pub edge: usize,
    pub reason: FailReason,
}

/// The local empty-circle condition at one edge, for apexes `zk` (left of
/// `zi -> zj`) and `zl` (right).
pub fn empty_circle_at_edge(zi: C64, zj: C64, zk: C64, zl: C64, tol: f64) -> std::result::Result<(), FailReason> {
    let ok = orientation(zi, zj, zk);
    let ol = orientation(zj, zi, zl);
    let scale = (zj - zi).norm_sqr().max(1e-300);
    if ok.signum() != ol.signum() && ok.abs() > tol * scale && ol.abs() > tol * scale {
        return Err(FailReason::DisjointDisks);
    }
    if ok <= 0.0 || ol <= 0.0 {
        return Err(FailReason::Fold);
    }
    let dk = circumcircle(zi.into(), zj.into(), zk.into()).map_err(|_| FailReason::Fold)?;
    let dl = circumcircle(zj.into(), zi.into(), zl.into()).map_err(|_| FailReason::Fold)?;
    if dk.disk_contains(zl, tol) || dl.disk_contains(zk, tol) {
        return Err(FailReason::ApexInsideDisk);
    }
    Ok(())
}

/// Checks the empty-circle condition on every interior lifted edge of an
/// affine-normalized layout.
pub fn geometric_delaunay_check(
    s: &TriangulatedSurface,
    positions: &[C64],
    patch: &CoverPatch,
    tol: f64,
) -> std::result::Result<(), GeometricFailure> {
    for face in &patch.faces {
        for t in 0..3 {
            let h = 3 * face.face + t;
            let Some(qf) = patch.face_index(s.face(s.twin(h)), s.cross(h, face.anchor)) else {
                continue;
            };
            let tt = s.twin(h) % 3;
            let z = |i: usize| positions[i];
            empty_circle_at_edge(
                z(face.corners[t]),
                z(face.corners[(t + 1) % 3]),
                z(face.corners[(t + 2) % 3]),
                z(patch.faces[qf].corners[(tt + 2) % 3]),
                tol,
            )
            .map_err(|reason| GeometricFailure { edge: s.edge(h), reason })?;
        }
    }
    Ok(())
}

/// Affine-normalized finite positions of a developing map.
pub fn normalized_positions(dev: &DevelopingMap, hol: &Holonomy) -> Result<Vec<C64>> {
    let m = hol
        .normalization
        .ok_or_else(|| Error::Holonomy("exchanging holonomy has no affine normalization".into()))?;
    dev.transformed(&m).finite_positions().map_err(|_| {
        Error::Degenerate("affine normalization sends a vertex to infinity (unbounded circumdisk)".into())
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModulusReport {
    pub h: [C64; 2],
    pub c: C64,
    pub tau: C64,
    pub euclidean: bool,
    /// Generator 2 was reversed to put `tau` in the upper half plane.
    pub generator2_reversed: bool,
}

/// Shortest walk of patch faces from `start` to its translate by `e_r`.
pub fn dual_path(s: &TriangulatedSurface, patch: &CoverPatch, start: usize, r: usize) -> Result<Vec<usize>> {
    let f0 = &patch.faces[start];
    let goal = patch
        .face_index(f0.face, add(f0.anchor, unit(r)))
        .ok_or_else(|| Error::Holonomy("patch too small for a dual generator path".into()))?;
    let mut prev: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    prev.insert(start, usize::MAX);
    while let Some(f) = queue.pop_front() {
        if f == goal {
            let mut path = vec![goal];
            let mut cur = goal;
            while prev[&cur] != usize::MAX {
                cur = prev[&cur];
                path.push(cur);
            }
            path.reverse();
            return Ok(path);
        }
        let face = &patch.faces[f];
        for t in 0..3 {
            let h = 3 * face.face + t;
            if let Some(g) = patch.face_index(s.face(s.twin(h)), s.cross(h, face.anchor)) {
                if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(g) {
                    e.insert(f);
                    queue.push_back(g);
                }
            }
        }
    }
    Err(Error::Holonomy("no dual path inside the patch".into()))
}

/// `h = sum log((c_{i+1} - c_i)/(c_i - c_{i-1}))` along a closed dual walk
/// whose last face is the first translated by `z -> alpha z`.
pub fn log_circumcenter_sum(centers: &[C64], alpha: C64) -> Result<C64> {
    let mut l: Vec<C64> = Vec::with_capacity(centers.len());
    for &c in centers {
        match l.last() {
            Some(&p) if (p - c).norm() <= 1e-12 * (1.0 + c.norm()) => {}
            _ => l.push(c),
        }
    }
    let m = l.len() - 1;
    if m < 1 {
        return Err(Error::Holonomy("dual path collapses to a single circumcenter".into()));
    }
    let mut h = C64::new(0.0, 0.0);
    for i in 1..=m {
        let next = if i < m { l[i + 1] } else { alpha * l[1] };
        h += ((next - l[i]) / (l[i] - l[i - 1])).ln();
    }
    Ok(h)
}

fn face_center(positions: &[C64], corners: [usize; 3]) -> Result<C64> {
    match circumcircle(positions[corners[0]].into(), positions[corners[1]].into(), positions[corners[2]].into())? {
        Circumcircle::Circle { center, .. } => Ok(center),
        Circumcircle::Line { .. } => Err(Error::Degenerate("degenerate triangle in layout".into())),
    }
}

/// The conformal modulus from the affine holonomy, using shortest dual paths
/// from the seed face.
pub fn conformal_modulus(s: &TriangulatedSurface, dev: &DevelopingMap, hol: &Holonomy) -> Result<ModulusReport> {
    let paths = [dual_path(s, &dev.patch, dev.seed_face, 0)?, dual_path(s, &dev.patch, dev.seed_face, 1)?];
    conformal_modulus_along(dev, hol, &paths)
}

/// As [`conformal_modulus`], with explicit dual walks (patch face indices,
/// each ending at the translate of its first face).
pub fn conformal_modulus_along(dev: &DevelopingMap, hol: &Holonomy, paths: &[Vec<usize>; 2]) -> Result<ModulusReport> {
    let positions = normalized_positions(dev, hol)?;
    let mut h = [C64::new(0.0, 0.0); 2];
    for r in 0..2 {
        let centers = paths[r]
            .iter()
            .map(|&f| face_center(&positions, dev.patch.faces[f].corners))
            .collect::<Result<Vec<_>>>()?;
        h[r] = match hol.kind {
            HolonomyType::StretchRotation => log_circumcenter_sum(&centers, hol.alpha[r])?,
            _ => C64::new(0.0, 0.0),
        };
    }
    let (mut tau, euclidean) = match hol.kind {
        HolonomyType::Translation | HolonomyType::Identity => {
            if hol.beta[0].norm() == 0.0 {
                return Err(Error::Holonomy("trivial translation holonomy".into()));
            }
            (hol.beta[1] / hol.beta[0], true)
        }
        HolonomyType::StretchRotation => (h[1] / h[0], false),
        HolonomyType::Exchanging => {
            return Err(Error::Holonomy("no conformal modulus for exchanging holonomy".into()));
        }
    };
    let mut generator2_reversed = false;
    if tau.im < 0.0 {
        tau = -tau;
        h[1] = -h[1];
        generator2_reversed = true;
    }
    if tau.im <= 0.0 {
        return Err(Error::Holonomy(format!("modulus {tau} is not in the upper half plane")));
    }
    Ok(ModulusReport {
        h,
        c: if euclidean { C64::new(0.0, 0.0) } else { h[0] },
        tau,
        euclidean,
        generator2_reversed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{lift_patch, one_vertex_torus, regular_torus};
    use std::f64::consts::FRAC_PI_3;

    fn equilateral(s: &TriangulatedSurface) -> CrossRatioSystem {
        CrossRatioSystem::constant(s.n_edges(), C64::from_polar(1.0, FRAC_PI_3))
    }

    #[test]
    fn equilateral_lattice_layout() {
        let s = one_vertex_torus();
        let patch = lift_patch(&s, -1..=1, -1..=1).unwrap();
        let dev = develop(&s, &equilateral(&s), &patch, &DevelopOptions::default()).unwrap();
        let w = C64::from_polar(1.0, FRAC_PI_3);
        for (i, l) in patch.vertices.iter().enumerate() {
            let expected = C64::new(l.word[0] as f64, 0.0) + w * l.word[1] as f64;
            assert!(dev.positions[i].coincides(&expected.into(), 1e-12), "{l:?}");
        }
        let hol = holonomy(&dev, 1e-10).unwrap();
        assert_eq!(hol.kind, HolonomyType::Translation);
        assert!((hol.beta[0] - 1.0).norm() < 1e-10);
        assert!((hol.beta[1] - w).norm() < 1e-10);
        let m = conformal_modulus(&s, &dev, &hol).unwrap();
        assert!(m.euclidean);
        assert!((m.tau - w).norm() < 1e-10);
        let pos = normalized_positions(&dev, &hol).unwrap();
        assert!(geometric_delaunay_check(&s, &pos, &patch, 1e-9).is_ok());
    }

    #[test]
    fn traversal_orders_agree() {
        let s = regular_torus(3, 2);
        let patch = lift_patch(&s, 0..=1, 0..=1).unwrap();
        let sys = equilateral(&s);
        let base = develop(&s, &sys, &patch, &DevelopOptions::default()).unwrap();
        for traversal in [Traversal::DepthFirst, Traversal::Random(7)] {
            let opts = DevelopOptions { traversal, ..Default::default() };
            let other = develop(&s, &sys, &patch, &opts).unwrap();
            for (a, b) in base.positions.iter().zip(&other.positions) {
                assert!(a.coincides(b, 1e-10));
            }
        }
    }

    #[test]
    fn extracted_cross_ratios_round_trip() {
        let s = regular_torus(2, 2);
        let patch = lift_patch(&s, 0..=1, 0..=1).unwrap();
        let sys = equilateral(&s);
        let dev = develop(&s, &sys, &patch, &DevelopOptions::default()).unwrap();
        let back = extract_cross_ratios(&s, &dev, 1e-9).unwrap();
        for (a, b) in back.cr.iter().zip(&sys.cr) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn closing_star_examples() {
        let six = vec![C64::from_polar(1.0, FRAC_PI_3); 6];
        let star = close_vertex_star(&six, 1e-12).unwrap();
        assert!(star.gap < 1e-14);
        assert!(!star.degenerate);
        let four = vec![C64::new(-1.0, 0.0); 4];
        let star = close_vertex_star(&four, 1e-12).unwrap();
        assert!(star.degenerate);
        assert!(close_vertex_star(&[C64::new(2.0, 0.0); 3], 1e-9).is_err());
    }

    #[test]
    fn case_b_is_exchanging() {
        let s = one_vertex_torus();
        let b = C64::new(2.0, 0.0);
        let sys = CrossRatioSystem::new(vec![b, -(b + 1.0) / b, -(b + 1.0).inv()]).unwrap();
        let patch = lift_patch(&s, -1..=1, -1..=1).unwrap();
        let dev = develop(&s, &sys, &patch, &DevelopOptions::default()).unwrap();
        // Two lifts of the same neighbor land on the same point.
        let z = |w| dev.position(Lift { vertex: 0, word: w }).unwrap();
        assert!(z([1, 0]).coincides(&z([-1, 0]), 1e-12));
        let hol = holonomy(&dev, 1e-10).unwrap();
        assert_eq!(hol.kind, HolonomyType::Exchanging, "{hol:?}");
    }

    #[test]
    fn folded_pair_fails() {
        let r = empty_circle_at_edge(
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 2.0),
            C64::new(0.0, 1.0),
            1e-9,
        );
        assert_eq!(r, Err(FailReason::DisjointDisks));
        let square = empty_circle_at_edge(
            C64::new(0.0, 0.0),
            C64::new(1.0, 1.0),
            C64::new(0.0, 1.0),
            C64::new(1.0, 0.0),
            1e-9,
        );
        assert_eq!(square, Ok(()));
    }

    #[test]
    fn log_sum_of_a_square_spiral() {
        // Centers on a geometric sequence c_k = alpha^(k/n): every term equals
        // log(alpha)/n.
        let alpha = C64::new(2.0, 0.5);
        let n = 4;
        let step = alpha.powf(1.0 / n as f64);
        let centers: Vec<C64> = (0..=n).map(|k| C64::new(1.0, 1.0) * step.powi(k)).collect();
        let h = log_circumcenter_sum(&centers, alpha).unwrap();
        assert!((h - alpha.ln()).norm() < 1e-12);
    }
}
