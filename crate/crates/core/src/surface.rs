//! Closed oriented triangulated surfaces (spheres and tori) as half-edge
//! meshes, deck labels for the torus cover, cover patches and dual cycles.
//!
//! Half-edge `3f + t` runs from corner `t` to corner `t + 1` of face `f`.
//! Faces are oriented counterclockwise. On a torus every half-edge carries a
//! deck label `(m, n)`: if its origin is lifted to the deck word `w`, its
//! target lifts to `w + label`.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::ops::RangeInclusive;

use crate::error::{Error, Result};

/// Element of the deck group `Z^2`.
pub type Word = [i64; 2];

pub const ZERO: Word = [0, 0];

pub fn add(a: Word, b: Word) -> Word {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn sub(a: Word, b: Word) -> Word {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn neg(a: Word) -> Word {
    [-a[0], -a[1]]
}

/// Unit word of generator `r` (0 or 1).
pub fn unit(r: usize) -> Word {
    if r == 0 { [1, 0] } else { [0, 1] }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangulatedSurface {
    genus: u32,
    n_vertices: usize,
    faces: Vec<[usize; 3]>,
    twin: Vec<usize>,
    edge_of: Vec<usize>,
    edge_half: Vec<usize>,
    labels: Vec<Word>,
}

/// Builds a surface from oriented vertex triples. Tori without labels get a
/// tree-cotree labelling.
pub fn build_surface(faces: &[[usize; 3]], genus: u32) -> Result<TriangulatedSurface> {
    TriangulatedSurface::new(faces.to_vec(), genus, None)
}

/// Builds a torus from vertex triples and one deck label per half-edge.
pub fn build_labeled_surface(
    faces: &[[usize; 3]],
    genus: u32,
    labels: &[Word],
) -> Result<TriangulatedSurface> {
    TriangulatedSurface::new(faces.to_vec(), genus, Some(labels.to_vec()))
}

impl TriangulatedSurface {
    pub fn new(faces: Vec<[usize; 3]>, genus: u32, labels: Option<Vec<Word>>) -> Result<Self> {
        if genus > 1 {
            return Err(Error::UnsupportedGenus(genus));
        }
        if faces.is_empty() {
            return Err(Error::InvalidMesh("no faces".into()));
        }
        let n_half = 3 * faces.len();
        let n_vertices = faces.iter().flatten().copied().max().unwrap() + 1;
        let mut used = vec![false; n_vertices];
        for f in &faces {
            for &v in f {
                used[v] = true;
            }
            if genus == 0 && (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
                return Err(Error::InvalidMesh(format!("face {f:?} repeats a vertex")));
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::InvalidMesh(format!("vertex {v} is not used by any face")));
        }
        if let Some(l) = &labels {
            if l.len() != n_half {
                return Err(Error::InvalidMesh(format!(
                    "expected {n_half} deck labels, got {}",
                    l.len()
                )));
            }
            if genus == 0 && l.iter().any(|w| *w != ZERO) {
                return Err(Error::InvalidMesh("sphere with nonzero deck labels".into()));
            }
        }
        let origin = |h: usize| faces[h / 3][h % 3];
        let target = |h: usize| faces[h / 3][(h + 1) % 3];

        // Group half-edges by their undirected key; an edge is a group of two
        // half-edges in opposite directions.
        let label_of = |h: usize| labels.as_ref().map_or(ZERO, |l| l[h]);
        let mut groups: BTreeMap<(usize, usize, Word), Vec<usize>> = BTreeMap::new();
        for h in 0..n_half {
            let fwd = (origin(h), target(h), label_of(h));
            let bwd = (target(h), origin(h), neg(label_of(h)));
            groups.entry(fwd.min(bwd)).or_default().push(h);
        }
        let mut twin = vec![usize::MAX; n_half];
        for ((a, b, _), hs) in &groups {
            match hs.len() {
                1 => return Err(Error::UnmatchedHalfEdge(hs[0])),
                2 => {}
                n if n % 2 == 1 || genus == 0 || labels.is_some() => {
                    return Err(Error::NonManifoldEdge(*a, *b))
                }
                _ => return Err(Error::AmbiguousEdge(*a, *b)),
            }
            let (h1, h2) = (hs[0], hs[1]);
            let opposite = origin(h1) == target(h2)
                && target(h1) == origin(h2)
                && add(label_of(h1), label_of(h2)) == ZERO;
            // A loop with identical labels on both sides is traversed twice in
            // the same direction.
            if !opposite || (origin(h1) == target(h1) && labels.is_some() && label_of(h1) == ZERO) {
                return Err(Error::InconsistentOrientation(*a, *b));
            }
            twin[h1] = h2;
            twin[h2] = h1;
        }

        let mut edge_of = vec![usize::MAX; n_half];
        let mut edge_half = Vec::with_capacity(n_half / 2);
        for h in 0..n_half {
            if edge_of[h] == usize::MAX {
                edge_of[h] = edge_half.len();
                edge_of[twin[h]] = edge_half.len();
                edge_half.push(h);
            }
        }

        let mut surface = Self {
            genus,
            n_vertices,
            faces,
            twin,
            edge_of,
            edge_half,
            labels: labels.unwrap_or_else(|| vec![ZERO; n_half]),
        };
        surface.check_connected()?;
        let chi = surface.euler_characteristic();
        if chi != 2 - 2 * genus as i64 {
            return Err(Error::EulerCharacteristic { chi, genus });
        }
        if genus == 1 {
            if surface.labels.iter().all(|l| *l == ZERO) {
                surface.labels = surface.tree_cotree_labels()?;
            }
            surface.check_labels()?;
        }
        Ok(surface)
    }

    fn check_connected(&self) -> Result<()> {
        let mut seen = vec![false; self.n_faces()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(f) = queue.pop_front() {
            for t in 0..3 {
                let g = self.twin[3 * f + t] / 3;
                if !seen[g] {
                    seen[g] = true;
                    queue.push_back(g);
                }
            }
        }
        if seen.iter().all(|s| *s) {
            Ok(())
        } else {
            Err(Error::InvalidMesh("surface is not connected".into()))
        }
    }

    fn check_labels(&self) -> Result<()> {
        for h in 0..self.n_half_edges() {
            if add(self.labels[h], self.labels[self.twin[h]]) != ZERO {
                return Err(Error::InvalidMesh(format!("deck label of half-edge {h} is not antisymmetric")));
            }
        }
        for f in 0..self.n_faces() {
            let s = (0..3).fold(ZERO, |acc, t| add(acc, self.labels[3 * f + t]));
            if s != ZERO {
                return Err(Error::InvalidMesh(format!("deck labels around face {f} do not sum to zero")));
            }
        }
        // The labels must generate Z^2: the two generator walks must exist.
        for r in 0..2 {
            if self.lifted_path(0, unit(r), 64).is_none() {
                return Err(Error::InvalidMesh("deck labels do not generate Z^2".into()));
            }
        }
        Ok(())
    }

    /// Tree-cotree labelling: labels vanish on a primal spanning tree, the
    /// two leftover edges get `(1,0)` and `(0,1)`, and the dual tree edges are
    /// solved from face sums.
    fn tree_cotree_labels(&self) -> Result<Vec<Word>> {
        let n_e = self.n_edges();
        let mut in_tree = vec![false; n_e];
        let mut seen = vec![false; self.n_vertices];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        let stars: Vec<Vec<usize>> = (0..self.n_vertices).map(|v| self.outgoing(v)).collect();
        while let Some(v) = queue.pop_front() {
            for &h in &stars[v] {
                let u = self.target(h);
                if !seen[u] {
                    seen[u] = true;
                    in_tree[self.edge_of[h]] = true;
                    queue.push_back(u);
                }
            }
        }
        let mut in_cotree = vec![false; n_e];
        let mut fseen = vec![false; self.n_faces()];
        fseen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(f) = queue.pop_front() {
            for t in 0..3 {
                let h = 3 * f + t;
                let e = self.edge_of[h];
                let g = self.twin[h] / 3;
                if !in_tree[e] && !fseen[g] {
                    fseen[g] = true;
                    in_cotree[e] = true;
                    queue.push_back(g);
                }
            }
        }
        let leftover: Vec<usize> = (0..n_e).filter(|&e| !in_tree[e] && !in_cotree[e]).collect();
        if leftover.len() != 2 {
            return Err(Error::InvalidMesh(format!(
                "tree-cotree left {} generator edges instead of 2",
                leftover.len()
            )));
        }
        let mut label: Vec<Option<Word>> = vec![None; n_e];
        for e in 0..n_e {
            if in_tree[e] {
                label[e] = Some(ZERO);
            }
        }
        label[leftover[0]] = Some([1, 0]);
        label[leftover[1]] = Some([0, 1]);
        // Label of half-edge h from the label of its edge's canonical half-edge.
        let he = |label: &Vec<Option<Word>>, h: usize| {
            let e = self.edge_of[h];
            label[e].map(|l| if self.edge_half[e] == h { l } else { neg(l) })
        };
        loop {
            let mut progress = false;
            let mut pending = false;
            for f in 0..self.n_faces() {
                let unknown: Vec<usize> = (0..3).map(|t| 3 * f + t).filter(|&h| he(&label, h).is_none()).collect();
                if unknown.is_empty() {
                    continue;
                }
                pending = true;
                let edges: HashSet<usize> = unknown.iter().map(|&h| self.edge_of[h]).collect();
                if edges.len() != 1 || unknown.len() != 1 {
                    continue;
                }
                let h = unknown[0];
                let known = (0..3)
                    .map(|t| 3 * f + t)
                    .filter(|&g| g != h)
                    .fold(ZERO, |acc, g| add(acc, he(&label, g).unwrap()));
                let lh = neg(known);
                let e = self.edge_of[h];
                label[e] = Some(if self.edge_half[e] == h { lh } else { neg(lh) });
                progress = true;
            }
            if !pending {
                break;
            }
            if !progress {
                return Err(Error::InvalidMesh("could not solve deck labels".into()));
            }
        }
        Ok((0..self.n_half_edges()).map(|h| he(&label, h).unwrap()).collect())
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn is_torus(&self) -> bool {
        self.genus == 1
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edge_half.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_half_edges(&self) -> usize {
        self.twin.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices as i64 - self.n_edges() as i64 + self.n_faces() as i64
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn face_vertices(&self, f: usize) -> [usize; 3] {
        self.faces[f]
    }

    pub fn origin(&self, h: usize) -> usize {
        self.faces[h / 3][h % 3]
    }

    pub fn target(&self, h: usize) -> usize {
        self.faces[h / 3][(h + 1) % 3]
    }

    pub fn next(&self, h: usize) -> usize {
        3 * (h / 3) + (h + 1) % 3
    }

    pub fn prev(&self, h: usize) -> usize {
        3 * (h / 3) + (h + 2) % 3
    }

    pub fn twin(&self, h: usize) -> usize {
        self.twin[h]
    }

    pub fn face(&self, h: usize) -> usize {
        h / 3
    }

    pub fn edge(&self, h: usize) -> usize {
        self.edge_of[h]
    }

    /// The smallest half-edge index of edge `e`.
    pub fn edge_half_edge(&self, e: usize) -> usize {
        self.edge_half[e]
    }

    /// Endpoints `(origin, target)` of the canonical half-edge of `e`.
    pub fn edge_vertices(&self, e: usize) -> (usize, usize) {
        let h = self.edge_half[e];
        (self.origin(h), self.target(h))
    }

    pub fn is_loop(&self, e: usize) -> bool {
        let (a, b) = self.edge_vertices(e);
        a == b
    }

    pub fn label(&self, h: usize) -> Word {
        self.labels[h]
    }

    pub fn labels(&self) -> &[Word] {
        &self.labels
    }

    /// The vertex opposite to half-edge `h` in its face.
    pub fn apex(&self, h: usize) -> usize {
        self.origin(self.prev(h))
    }

    /// Outgoing half-edges of `v` in clockwise order, starting at the
    /// smallest index. Loops appear twice.
    pub fn outgoing(&self, v: usize) -> Vec<usize> {
        let Some(start) = (0..self.n_half_edges()).find(|&h| self.origin(h) == v) else {
            return Vec::new();
        };
        let mut star = vec![start];
        let mut h = self.next(self.twin[start]);
        while h != start {
            star.push(h);
            h = self.next(self.twin[h]);
        }
        star
    }

    pub fn degree(&self, v: usize) -> usize {
        self.outgoing(v).len()
    }

    /// Deck offsets of the three corners of face `f` relative to corner 0.
    pub fn corner_offsets(&self, f: usize) -> [Word; 3] {
        let l0 = self.labels[3 * f];
        let l1 = self.labels[3 * f + 1];
        [ZERO, l0, add(l0, l1)]
    }

    /// Offset of the origin of half-edge `h` within its face.
    pub fn origin_offset(&self, h: usize) -> Word {
        self.corner_offsets(h / 3)[h % 3]
    }

    /// Anchor word of the face across `h`, given that `h`'s face is anchored
    /// at `w`.
    pub fn cross(&self, h: usize, w: Word) -> Word {
        let t = self.twin[h];
        // The origin of h at w + off(h) is the target of t at
        // w' + off(t) + label(t).
        sub(sub(add(w, self.origin_offset(h)), self.origin_offset(t)), self.labels[t])
    }

    /// Shortest half-edge walk from vertex `v` at word 0 to `v` at word `goal`,
    /// searched within `|m|, |n| <= bound`.
    pub fn lifted_path(&self, v: usize, goal: Word, bound: i64) -> Option<Vec<usize>> {
        let mut prev: HashMap<(usize, Word), (usize, Word, usize)> = HashMap::new();
        let stars: Vec<Vec<usize>> = (0..self.n_vertices).map(|u| self.outgoing(u)).collect();
        let start = (v, ZERO);
        let mut queue = VecDeque::from([start]);
        let mut seen = HashSet::from([start]);
        while let Some((u, w)) = queue.pop_front() {
            if (u, w) == (v, goal) {
                let mut walk = Vec::new();
                let mut cur = (u, w);
                while cur != start {
                    let (pu, pw, h) = prev[&cur];
                    walk.push(h);
                    cur = (pu, pw);
                }
                walk.reverse();
                return Some(walk);
            }
            for &h in &stars[u] {
                let next = (self.target(h), add(w, self.labels[h]));
                if next.1[0].abs() > bound || next.1[1].abs() > bound {
                    continue;
                }
                if seen.insert(next) {
                    prev.insert(next, (u, w, h));
                    queue.push_back(next);
                }
            }
        }
        None
    }
}

/// A lifted vertex: base vertex and deck word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lift {
    pub vertex: usize,
    pub word: Word,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedFace {
    pub face: usize,
    /// Deck word of corner 0.
    pub anchor: Word,
    /// Indices into [`CoverPatch::vertices`].
    pub corners: [usize; 3],
}

/// A finite piece of the universal cover: every face whose anchor lies in
/// the requested word range, plus the vertices they touch. Core vertices
/// (one lift per base vertex and word in range) come first; halo vertices
/// reached only through faces follow.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverPatch {
    pub vertices: Vec<Lift>,
    pub faces: Vec<LiftedFace>,
    pub core_vertex_count: usize,
    /// Closed half-edge walks from vertex 0 realising the generators.
    pub generators: [Vec<usize>; 2],
    index: HashMap<Lift, usize>,
    face_index: HashMap<(usize, Word), usize>,
}

impl CoverPatch {
    pub fn vertex_index(&self, lift: Lift) -> Option<usize> {
        self.index.get(&lift).copied()
    }

    pub fn face_index(&self, face: usize, anchor: Word) -> Option<usize> {
        self.face_index.get(&(face, anchor)).copied()
    }

    pub fn words(&self) -> Vec<Word> {
        let mut ws: Vec<Word> = self.faces.iter().map(|f| f.anchor).collect();
        ws.sort();
        ws.dedup();
        ws
    }

    /// Lifted faces incident to a lifted vertex.
    pub fn incident_faces(&self, v: usize) -> Vec<usize> {
        (0..self.faces.len()).filter(|&f| self.faces[f].corners.contains(&v)).collect()
    }
}

/// Patch of the universal cover over the given deck word ranges.
pub fn lift_patch(
    surface: &TriangulatedSurface,
    m_range: RangeInclusive<i64>,
    n_range: RangeInclusive<i64>,
) -> Result<CoverPatch> {
    if !surface.is_torus() {
        return Err(Error::NotATorus);
    }
    if m_range.is_empty() || n_range.is_empty() {
        return Err(Error::InvalidMesh("empty patch range".into()));
    }
    let words: Vec<Word> = n_range
        .clone()
        .flat_map(|n| m_range.clone().map(move |m| [m, n]))
        .collect();
    Ok(patch_over(surface, &words))
}

/// The single-copy patch of a sphere (all words zero).
pub fn sphere_patch(surface: &TriangulatedSurface) -> CoverPatch {
    patch_over(surface, &[ZERO])
}

fn patch_over(surface: &TriangulatedSurface, words: &[Word]) -> CoverPatch {
    let mut vertices = Vec::new();
    let mut index = HashMap::new();
    for &w in words {
        for v in 0..surface.n_vertices() {
            let lift = Lift { vertex: v, word: w };
            index.insert(lift, vertices.len());
            vertices.push(lift);
        }
    }
    let core_vertex_count = vertices.len();
    let mut faces = Vec::new();
    let mut face_index = HashMap::new();
    for &w in words {
        for f in 0..surface.n_faces() {
            let off = surface.corner_offsets(f);
            let fv = surface.face_vertices(f);
            let mut corners = [0; 3];
            for t in 0..3 {
                let lift = Lift { vertex: fv[t], word: add(w, off[t]) };
                corners[t] = *index.entry(lift).or_insert_with(|| {
                    vertices.push(lift);
                    vertices.len() - 1
                });
            }
            face_index.insert((f, w), faces.len());
            faces.push(LiftedFace { face: f, anchor: w, corners });
        }
    }
    let generators = if surface.is_torus() {
        [0, 1].map(|r| surface.lifted_path(0, unit(r), 64).unwrap_or_default())
    } else {
        [Vec::new(), Vec::new()]
    };
    CoverPatch {
        vertices,
        faces,
        core_vertex_count,
        generators,
        index,
        face_index,
    }
}

/// The `m × n` triangular-lattice torus. Vertex `(a, b)` has index `a + m b`;
/// each lattice cell contributes the triangles
/// `[(a,b), (a+1,b), (a,b+1)]` and `[(a+1,b), (a+1,b+1), (a,b+1)]`.
pub fn regular_torus(m: usize, n: usize) -> TriangulatedSurface {
    assert!(m >= 1 && n >= 1, "regular_torus needs m, n >= 1");
    let (mi, ni) = (m as i64, n as i64);
    let mut faces = Vec::with_capacity(2 * m * n);
    let mut labels = Vec::with_capacity(6 * m * n);
    let idx = |a: i64, b: i64| (a.rem_euclid(mi) + mi * b.rem_euclid(ni)) as usize;
    let wrap = |a: i64, b: i64| [a.div_euclid(mi), b.div_euclid(ni)];
    for b in 0..ni {
        for a in 0..mi {
            for tri in [
                [(a, b), (a + 1, b), (a, b + 1)],
                [(a + 1, b), (a + 1, b + 1), (a, b + 1)],
            ] {
                faces.push(tri.map(|(x, y)| idx(x, y)));
                for t in 0..3 {
                    let (x0, y0) = tri[t];
                    let (x1, y1) = tri[(t + 1) % 3];
                    labels.push(sub(wrap(x1, y1), wrap(x0, y0)));
                }
            }
        }
    }
    TriangulatedSurface::new(faces, 1, Some(labels)).expect("lattice torus is valid")
}

/// The one-vertex torus: three loop edges, two faces.
pub fn one_vertex_torus() -> TriangulatedSurface {
    regular_torus(1, 1)
}

/// A simple closed walk in the dual graph.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCycle {
    /// Crossed half-edges; `half_edges[i]` leads from `faces[i]` to `faces[i+1]`.
    pub half_edges: Vec<usize>,
    pub faces: Vec<usize>,
    /// Edge ids, same order as `half_edges`.
    pub edges: Vec<usize>,
    /// Deck word picked up along the lifted walk.
    pub word: Word,
    pub contractible: bool,
    /// Primal vertices on the bounded side (the smaller side on a sphere).
    pub enclosed: Option<usize>,
}

/// Default bound on dual cycle length.
pub const DEFAULT_CYCLE_BOUND: usize = 12;

/// All simple cycles of the dual graph of length at most `max_len`, each
/// reported once.
pub fn dual_cycles(surface: &TriangulatedSurface, max_len: usize) -> Vec<DualCycle> {
    let nf = surface.n_faces();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut out = Vec::new();
    for start in 0..nf {
        let mut path_h: Vec<usize> = Vec::new();
        let mut path_f: Vec<usize> = vec![start];
        let mut on_path = vec![false; nf];
        on_path[start] = true;
        dfs(surface, start, max_len, &mut path_h, &mut path_f, &mut on_path, &mut seen, &mut out);
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    s: &TriangulatedSurface,
    start: usize,
    max_len: usize,
    path_h: &mut Vec<usize>,
    path_f: &mut Vec<usize>,
    on_path: &mut [bool],
    seen: &mut HashSet<Vec<usize>>,
    out: &mut Vec<DualCycle>,
) {
    let f = *path_f.last().unwrap();
    for t in 0..3 {
        let h = 3 * f + t;
        let e = s.edge(h);
        if path_h.iter().any(|&g| s.edge(g) == e) {
            continue;
        }
        let g = s.twin(h) / 3;
        if g == start {
            path_h.push(h);
            let mut key: Vec<usize> = path_h.iter().map(|&x| s.edge(x)).collect();
            key.sort_unstable();
            if seen.insert(key) {
                out.push(annotate(s, path_h.clone(), path_f.clone()));
            }
            path_h.pop();
        } else if g > start && !on_path[g] && path_h.len() + 1 < max_len {
            on_path[g] = true;
            path_h.push(h);
            path_f.push(g);
            dfs(s, start, max_len, path_h, path_f, on_path, seen, out);
            path_f.pop();
            path_h.pop();
            on_path[g] = false;
        }
    }
}

/// Key of a lifted edge: edge id and the word of its canonical origin.
fn lifted_edge_key(s: &TriangulatedSurface, h: usize, origin_word: Word) -> (usize, Word) {
    let e = s.edge(h);
    if s.edge_half_edge(e) == h {
        (e, origin_word)
    } else {
        (e, add(origin_word, s.label(h)))
    }
}

fn annotate(s: &TriangulatedSurface, half_edges: Vec<usize>, faces: Vec<usize>) -> DualCycle {
    let mut w = ZERO;
    let mut blocked = HashSet::new();
    let mut first_side = None;
    for &h in &half_edges {
        let ow = add(w, s.origin_offset(h));
        blocked.insert(lifted_edge_key(s, h, ow));
        if first_side.is_none() {
            first_side = Some((
                Lift { vertex: s.origin(h), word: ow },
                Lift { vertex: s.target(h), word: add(ow, s.label(h)) },
            ));
        }
        w = s.cross(h, w);
    }
    let contractible = w == ZERO;
    let enclosed = if contractible {
        let (a, b) = first_side.unwrap();
        let ca = side_count(s, a, &blocked);
        let cb = side_count(s, b, &blocked);
        match (ca, cb) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (Some(x), None) | (None, Some(x)) => Some(x),
            (None, None) => None,
        }
    } else {
        None
    };
    let edges = half_edges.iter().map(|&h| s.edge(h)).collect();
    DualCycle {
        half_edges,
        faces,
        edges,
        word: w,
        contractible,
        enclosed,
    }
}

/// Number of lifted vertices reachable from `start` without crossing a
/// blocked lifted edge, or `None` if that side is unbounded.
fn side_count(s: &TriangulatedSurface, start: Lift, blocked: &HashSet<(usize, Word)>) -> Option<usize> {
    let mut word_of: HashMap<usize, Word> = HashMap::from([(start.vertex, start.word)]);
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(cur) = queue.pop_front() {
        for h in s.outgoing(cur.vertex) {
            if blocked.contains(&lifted_edge_key(s, h, cur.word)) {
                continue;
            }
            let next = Lift { vertex: s.target(h), word: add(cur.word, s.label(h)) };
            if seen.insert(next) {
                match word_of.get(&next.vertex) {
                    Some(w) if *w != next.word => return None,
                    _ => {
                        word_of.insert(next.vertex, next.word);
                    }
                }
                queue.push_back(next);
            }
        }
    }
    Some(seen.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn icosahedron_faces() -> Vec<[usize; 3]> {
        // Vertex 0 top, 1..=5 upper ring, 6..=10 lower ring, 11 bottom.
        let mut f = Vec::new();
        for i in 0..5 {
            let a = 1 + i;
            let b = 1 + (i + 1) % 5;
            let c = 6 + i;
            let d = 6 + (i + 1) % 5;
            f.push([0, a, b]);
            f.push([a, c, b]);
            f.push([b, c, d]);
            f.push([11, d, c]);
        }
        f
    }

    #[test]
    fn one_vertex_torus_counts() {
        let s = one_vertex_torus();
        assert_eq!((s.n_vertices(), s.n_edges(), s.n_faces()), (1, 3, 2));
        assert_eq!(s.labels()[0..3], [[1, 0], [-1, 1], [0, -1]]);
        assert_eq!(s.labels()[3..6], [[0, 1], [-1, 0], [1, -1]]);
        assert_eq!(s.degree(0), 6);
    }

    #[test]
    fn regular_torus_counts() {
        for (m, n, v, e, f) in [(2, 2, 4, 12, 8), (3, 1, 3, 9, 6), (3, 3, 9, 27, 18)] {
            let s = regular_torus(m, n);
            assert_eq!((s.n_vertices(), s.n_edges(), s.n_faces()), (v, e, f));
            assert!((0..v).all(|x| s.degree(x) == 6));
        }
    }

    #[test]
    fn icosahedron_counts() {
        let s = build_surface(&icosahedron_faces(), 0).unwrap();
        assert_eq!((s.n_vertices(), s.n_edges(), s.n_faces()), (12, 30, 20));
        assert!((0..12).all(|v| s.degree(v) == 5));
    }

    #[test]
    fn build_errors() {
        let mut f = icosahedron_faces();
        f.push([0, 1, 2]);
        assert!(matches!(build_surface(&f, 0), Err(Error::NonManifoldEdge(..))));
        let mut f = icosahedron_faces();
        f[0] = [0, 2, 1];
        assert!(matches!(build_surface(&f, 0), Err(Error::InconsistentOrientation(..))));
        assert!(matches!(build_surface(&icosahedron_faces(), 1), Err(Error::EulerCharacteristic { .. })));
        assert!(matches!(build_surface(&icosahedron_faces(), 2), Err(Error::UnsupportedGenus(2))));
    }

    #[test]
    fn tree_cotree_labels_are_consistent() {
        let t = regular_torus(3, 3);
        let s = build_surface(t.faces(), 1).unwrap();
        for h in 0..s.n_half_edges() {
            assert_eq!(add(s.label(h), s.label(s.twin(h))), ZERO);
        }
        assert!(s.lifted_path(0, [1, 0], 8).is_some());
        assert!(s.lifted_path(0, [0, 1], 8).is_some());
        // A labelless one-vertex torus is ambiguous only if pairs repeat; it
        // has a single vertex, so all three edges are loops on (0, 0).
        assert!(matches!(build_surface(&[[0, 0, 0], [0, 0, 0]], 1), Err(Error::AmbiguousEdge(0, 0))));
    }

    #[test]
    fn cross_updates_anchor() {
        let s = regular_torus(2, 2);
        for h in 0..s.n_half_edges() {
            let w = s.cross(h, [3, -1]);
            assert_eq!(s.cross(s.twin(h), w), [3, -1]);
            // The shared edge has matching lifted endpoints on both sides.
            let t = s.twin(h);
            let o_h = add([3, -1], s.origin_offset(h));
            let tgt_t = add(add(w, s.origin_offset(t)), s.label(t));
            assert_eq!(o_h, tgt_t);
        }
    }

    #[test]
    fn patch_examples() {
        let s = one_vertex_torus();
        assert_eq!(lift_patch(&s, 0..=1, 0..=1).unwrap().core_vertex_count, 4);
        let p = lift_patch(&regular_torus(2, 2), 0..=0, 0..=0).unwrap();
        assert_eq!((p.core_vertex_count, p.faces.len()), (4, 8));
        let p = lift_patch(&s, -1..=1, -1..=1).unwrap();
        assert_eq!(p.core_vertex_count, 9);
        let center = p.vertex_index(Lift { vertex: 0, word: ZERO }).unwrap();
        assert_eq!(p.incident_faces(center).len(), 6);
        assert!(lift_patch(&build_surface(&icosahedron_faces(), 0).unwrap(), 0..=0, 0..=0).is_err());
    }

    #[test]
    fn generator_walks_close_up() {
        let s = regular_torus(3, 2);
        let p = lift_patch(&s, 0..=0, 0..=0).unwrap();
        for r in 0..2 {
            let walk = &p.generators[r];
            let total = walk.iter().fold(ZERO, |acc, &h| add(acc, s.label(h)));
            assert_eq!(total, unit(r));
            assert_eq!(s.origin(walk[0]), 0);
            assert_eq!(s.target(*walk.last().unwrap()), 0);
        }
    }

    #[test]
    fn icosahedron_dual_cycles() {
        let s = build_surface(&icosahedron_faces(), 0).unwrap();
        let cycles = dual_cycles(&s, 5);
        assert!(cycles.iter().all(|c| c.len_ok(5)));
        assert!(cycles.iter().all(|c| c.half_edges.len() >= 5));
        let around_vertex: Vec<_> = cycles.iter().filter(|c| c.enclosed == Some(1)).collect();
        assert_eq!(around_vertex.len(), 12);
    }

    #[test]
    fn torus_vertex_star_cycle() {
        let s = regular_torus(3, 3);
        let cycles = dual_cycles(&s, 6);
        let stars: Vec<_> = cycles.iter().filter(|c| c.enclosed == Some(1)).collect();
        assert_eq!(stars.len(), 9);
        assert!(stars.iter().all(|c| c.half_edges.len() == 6));
        // Shorter contractible cycles do not exist on this torus.
        assert!(cycles.iter().filter(|c| c.contractible).all(|c| c.half_edges.len() == 6));
    }

    #[test]
    fn one_vertex_torus_short_cycles() {
        let s = one_vertex_torus();
        for c in dual_cycles(&s, 6) {
            assert!(!c.contractible || c.enclosed == Some(1), "{c:?}");
        }
    }

    impl DualCycle {
        fn len_ok(&self, l: usize) -> bool {
            self.half_edges.len() <= l && self.faces.len() == self.half_edges.len()
        }
    }
}
