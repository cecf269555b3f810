//! Discrete holomorphic quadratic differentials: the two linear systems,
//! kernel bases, cotangent weights, infinitesimal deformations, harmonic
//! functions with their conjugates, and the Dirichlet energy.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::crsys::{phi_jacobian, phi_real_jacobian, AngleStructure, CrossRatioSystem};
use crate::develop::{HolonomyType, Holonomy};
use crate::error::{Error, Result};
use crate::linalg::{complex_basis, kernel, lstsq, realify};
use crate::moebius::C64;
use crate::surface::{add, unit, CoverPatch, Lift, TriangulatedSurface};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Real,
    Complex,
}

/// The assembled linear system, one column per edge.
#[derive(Debug, Clone)]
pub enum HqdOperator {
    Real(DMatrix<f64>),
    Complex(DMatrix<C64>),
}

impl HqdOperator {
    pub fn field(&self) -> Field {
        match self {
            HqdOperator::Real(_) => Field::Real,
            HqdOperator::Complex(_) => Field::Complex,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            HqdOperator::Real(m) => m.shape(),
            HqdOperator::Complex(m) => m.shape(),
        }
    }

    /// Largest entry of `A q`, relative to `|A| |q|`.
    pub fn residual(&self, q: &[C64]) -> f64 {
        let qv = DVector::from_column_slice(q);
        match self {
            HqdOperator::Real(m) => {
                let x = qv.map(|z| z.re);
                (m * &x).amax() / (m.amax() * x.amax()).max(f64::MIN_POSITIVE)
            }
            HqdOperator::Complex(m) => {
                let r = m * &qv;
                let rmax = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let mmax = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let qmax = qv.iter().map(|z| z.norm()).fold(0.0, f64::max);
                rmax / (mmax * qmax).max(f64::MIN_POSITIVE)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadDiffBasis {
    /// Orthonormal basis vectors, one entry per edge (imaginary parts zero
    /// over the reals).
    pub basis: Vec<Vec<C64>>,
    /// Singular values of the (realified) operator, descending.
    pub singular_values: Vec<f64>,
    pub dimension: usize,
    pub field: Field,
    pub gap_ratio: f64,
    /// The gap between kept and discarded singular values is below 10.
    pub ill_conditioned: bool,
}

impl QuadDiffBasis {
    /// Distance from `q` to the span of the basis, relative to `|q|`.
    pub fn projection_residual(&self, q: &[C64]) -> f64 {
        let qv = DVector::from_column_slice(q);
        let mut r = qv.clone();
        for b in &self.basis {
            let bv = DVector::from_column_slice(b);
            let c = bv.dotc(&qv);
            r -= bv * c;
        }
        r.norm() / qv.norm().max(f64::MIN_POSITIVE)
    }
}

/// The cross-ratio form: the Jacobian of the vertex residual with respect to
/// `log cr`. Over the reals: rows `[Re d1, Re d2, Im d2]` per vertex.
pub fn hqd_system_cr_form(
    s: &TriangulatedSurface,
    sys: &CrossRatioSystem,
    theta: Option<&AngleStructure>,
    field: Field,
) -> Result<HqdOperator> {
    if let Some(theta) = theta {
        for (e, (z, t)) in sys.cr.iter().zip(&theta.theta).enumerate() {
            let d = (z.arg() - t).rem_euclid(std::f64::consts::TAU);
            if d.min(std::f64::consts::TAU - d) > 1e-9 {
                return Err(Error::InvalidSystem(format!("argument of edge {e} does not match its angle")));
            }
        }
    }
    Ok(match field {
        Field::Real => HqdOperator::Real(phi_real_jacobian(s, sys)),
        Field::Complex => HqdOperator::Complex(phi_jacobian(s, sys)),
    })
}

/// For every base vertex, a patch lift whose whole star lies in the patch.
pub fn star_lifts(s: &TriangulatedSurface, patch: &CoverPatch) -> Result<Vec<usize>> {
    (0..s.n_vertices())
        .map(|v| {
            patch
                .vertices
                .iter()
                .enumerate()
                .filter(|(_, l)| l.vertex == v)
                .find(|(_, l)| {
                    s.outgoing(v).iter().all(|&h| {
                        patch
                            .vertex_index(Lift { vertex: s.target(h), word: add(l.word, s.label(h)) })
                            .is_some()
                    })
                })
                .map(|(i, _)| i)
                .ok_or_else(|| Error::InvalidMesh(format!("patch contains no full star of vertex {v}")))
        })
        .collect()
}

/// The position form: at one lift of every vertex, `sum q = 0` and
/// `sum q / (z_j - z_i) = 0`.
pub fn hqd_system_z_form(
    s: &TriangulatedSurface,
    positions: &[C64],
    patch: &CoverPatch,
    lifts: Option<&[usize]>,
    field: Field,
) -> Result<HqdOperator> {
    let lifts = match lifts {
        Some(l) => l.to_vec(),
        None => star_lifts(s, patch)?,
    };
    let nv = s.n_vertices();
    let ne = s.n_edges();
    let mut a = DMatrix::from_element(2 * nv, ne, C64::new(0.0, 0.0));
    for v in 0..nv {
        let li = lifts[v];
        let lift = patch.vertices[li];
        let zi = positions[li];
        for h in s.outgoing(v) {
            let j = patch
                .vertex_index(Lift { vertex: s.target(h), word: add(lift.word, s.label(h)) })
                .ok_or_else(|| Error::InvalidMesh(format!("star of vertex {v} leaves the patch")))?;
            let dz = positions[j] - zi;
            if dz.norm() <= 1e-14 * (1.0 + zi.norm()) {
                return Err(Error::Degenerate(format!("edge {} has coincident endpoints", s.edge(h))));
            }
            a[(2 * v, s.edge(h))] += 1.0;
            a[(2 * v + 1, s.edge(h))] += dz.inv();
        }
    }
    Ok(match field {
        Field::Complex => HqdOperator::Complex(a),
        Field::Real => {
            let mut r = DMatrix::zeros(3 * nv, ne);
            for v in 0..nv {
                for e in 0..ne {
                    r[(3 * v, e)] = a[(2 * v, e)].re;
                    r[(3 * v + 1, e)] = a[(2 * v + 1, e)].re;
                    r[(3 * v + 2, e)] = a[(2 * v + 1, e)].im;
                }
            }
            HqdOperator::Real(r)
        }
    })
}

/// Kernel basis with singular values below `rank_tol * sigma_max` treated as
/// zero.
pub fn kernel_basis(op: &HqdOperator, rank_tol: f64) -> QuadDiffBasis {
    match op {
        HqdOperator::Real(m) => {
            let k = kernel(m, rank_tol);
            QuadDiffBasis {
                basis: k.basis.iter().map(|v| v.iter().map(|&x| C64::new(x, 0.0)).collect()).collect(),
                singular_values: k.singular_values,
                dimension: k.dimension,
                field: Field::Real,
                gap_ratio: k.gap_ratio,
                ill_conditioned: k.gap_ratio < 10.0,
            }
        }
        HqdOperator::Complex(m) => {
            let n = m.ncols();
            let k = kernel(&realify(m), rank_tol);
            // Realified singular values come in equal pairs.
            let dimension = k.dimension / 2;
            let basis = complex_basis(&k.basis, n, dimension);
            QuadDiffBasis {
                basis: basis.into_iter().map(|v| v.iter().copied().collect()).collect(),
                singular_values: k.singular_values.iter().step_by(2).copied().collect(),
                dimension,
                field: Field::Complex,
                gap_ratio: k.gap_ratio,
                ill_conditioned: k.gap_ratio < 10.0 || k.dimension % 2 == 1,
            }
        }
    }
}

/// Twin face and the apex index of `h` crossed from patch face `pf`.
fn across(s: &TriangulatedSurface, patch: &CoverPatch, pf: usize, t: usize) -> Option<(usize, usize)> {
    let face = &patch.faces[pf];
    let h = 3 * face.face + t;
    let qf = patch.face_index(s.face(s.twin(h)), s.cross(h, face.anchor))?;
    let tt = s.twin(h) % 3;
    Some((qf, patch.faces[qf].corners[(tt + 2) % 3]))
}

fn cot_at(apex: C64, a: C64, b: C64) -> Result<f64> {
    // Angle at `apex` from the ray towards `a` to the ray towards `b`.
    let w = (b - apex) / (a - apex);
    if w.im.abs() <= 1e-14 * w.norm() {
        return Err(Error::Degenerate("zero-area triangle".into()));
    }
    Ok(w.re / w.im)
}

/// `c_ij = cot(angle at k) + cot(angle at l)` for every edge, read from one
/// interior lift of each edge.
pub fn cotangent_weights(s: &TriangulatedSurface, positions: &[C64], patch: &CoverPatch) -> Result<Vec<f64>> {
    let mut c: Vec<Option<f64>> = vec![None; s.n_edges()];
    for (pf, face) in patch.faces.iter().enumerate() {
        for t in 0..3 {
            let e = s.edge(3 * face.face + t);
            if c[e].is_some() {
                continue;
            }
            let Some((_, l)) = across(s, patch, pf, t) else {
                continue;
            };
            let zi = positions[face.corners[t]];
            let zj = positions[face.corners[(t + 1) % 3]];
            let zk = positions[face.corners[(t + 2) % 3]];
            let zl = positions[l];
            c[e] = Some(cot_at(zk, zi, zj)? + cot_at(zl, zj, zi)?);
        }
    }
    c.into_iter()
        .enumerate()
        .map(|(e, w)| w.ok_or_else(|| Error::InvalidMesh(format!("edge {e} has no interior lift in the patch"))))
        .collect()
}

/// `d log cr` along a velocity field, for the edge `ij` with apexes `k`, `l`.
fn dlog_cr(z: [C64; 4], v: [C64; 4]) -> C64 {
    let [zi, zj, zk, zl] = z;
    let [vi, vj, vk, vl] = v;
    (vk - vi) / (zk - zi) + (vl - vj) / (zl - zj) - (vi - vl) / (zi - zl) - (vj - vk) / (zj - zk)
}

fn seed_face(patch: &CoverPatch) -> usize {
    patch.face_index(0, [0, 0]).unwrap_or(0)
}

/// Velocity field on the patch whose logarithmic cross ratio derivative is
/// `q`, with the given velocities on the seed face (zero by default).
pub fn hqd_to_deformation(
    s: &TriangulatedSurface,
    q: &[C64],
    positions: &[C64],
    patch: &CoverPatch,
    seed_velocities: Option<[C64; 3]>,
) -> Result<Vec<C64>> {
    let seed = seed_face(patch);
    let mut v: Vec<Option<C64>> = vec![None; patch.vertices.len()];
    for (t, &x) in seed_velocities.unwrap_or([C64::new(0.0, 0.0); 3]).iter().enumerate() {
        v[patch.faces[seed].corners[t]] = Some(x);
    }
    let mut seen = vec![false; patch.faces.len()];
    seen[seed] = true;
    let mut queue = VecDeque::from([seed]);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 1.0;
    while let Some(pf) = queue.pop_front() {
        let face = patch.faces[pf].clone();
        for t in 0..3 {
            let Some((qf, l)) = across(s, patch, pf, t) else {
                continue;
            };
            let c = [face.corners[t], face.corners[(t + 1) % 3], face.corners[(t + 2) % 3]];
            let [zi, zj, zk] = c.map(|i| positions[i]);
            let zl = positions[l];
            let [vi, vj, vk] = c.map(|i| v[i].unwrap());
            let rest = dlog_cr([zi, zj, zk, zl], [vi, vj, vk, C64::new(0.0, 0.0)]);
            let coef = (zl - zj).inv() + (zi - zl).inv();
            let vl = (q[s.edge(3 * face.face + t)] - rest) / coef;
            scale = scale.max(vl.norm());
            match v[l] {
                None => v[l] = Some(vl),
                Some(prev) => worst = worst.max((prev - vl).norm()),
            }
            if !seen[qf] {
                seen[qf] = true;
                queue.push_back(qf);
            }
        }
    }
    if worst > 1e-6 * scale {
        return Err(Error::InvalidSystem(format!(
            "q is not in the kernel: propagated velocities disagree by {worst:.3e}"
        )));
    }
    v.into_iter()
        .enumerate()
        .map(|(i, x)| x.ok_or_else(|| Error::InvalidMesh(format!("patch vertex {i} unreachable"))))
        .collect()
}

/// The logarithmic cross ratio derivative of a velocity field, per edge.
pub fn deformation_to_q(s: &TriangulatedSurface, positions: &[C64], patch: &CoverPatch, zdot: &[C64]) -> Vec<C64> {
    let mut q = vec![C64::new(f64::NAN, 0.0); s.n_edges()];
    for (pf, face) in patch.faces.iter().enumerate() {
        for t in 0..3 {
            let e = s.edge(3 * face.face + t);
            if !q[e].re.is_nan() {
                continue;
            }
            if let Some((_, l)) = across(s, patch, pf, t) {
                let c = [face.corners[t], face.corners[(t + 1) % 3], face.corners[(t + 2) % 3], l];
                q[e] = dlog_cr(c.map(|i| positions[i]), c.map(|i| zdot[i]));
            }
        }
    }
    q
}

/// A harmonic function on the patch with its conjugate on faces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarmonicFunction {
    /// One value per patch vertex.
    pub u: Vec<f64>,
    /// One value per patch face.
    pub u_star: Vec<f64>,
    /// Per generator: period of `u` plus `i` times the period of `u*`.
    pub periods: [C64; 2],
    /// Largest deviation of the periods from constants over the patch.
    pub period_spread: f64,
}

fn im_quot(zdot: &[C64], positions: &[C64], a: usize, b: usize) -> f64 {
    ((zdot[b] - zdot[a]) / (positions[b] - positions[a])).im
}

/// The harmonic function `u` of an argument-preserving velocity field, its
/// conjugate `u*` and their periods.
pub fn deformation_to_harmonic(
    s: &TriangulatedSurface,
    positions: &[C64],
    patch: &CoverPatch,
    zdot: &[C64],
) -> Result<HarmonicFunction> {
    let mut u: Vec<Option<f64>> = vec![None; patch.vertices.len()];
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for face in &patch.faces {
        for t in 0..3 {
            let i = face.corners[t];
            let j = face.corners[(t + 1) % 3];
            let k = face.corners[(t + 2) % 3];
            let ui = im_quot(zdot, positions, i, j) + im_quot(zdot, positions, k, i) - im_quot(zdot, positions, j, k);
            scale = scale.max(ui.abs());
            match u[i] {
                None => u[i] = Some(ui),
                Some(prev) => worst = worst.max((prev - ui).abs()),
            }
        }
    }
    if worst > 1e-6 * scale {
        return Err(Error::InvalidSystem(format!(
            "velocity field changes intersection angles (face inconsistency {worst:.3e})"
        )));
    }
    let u: Vec<f64> = u.into_iter().map(|x| x.unwrap_or(f64::NAN)).collect();
    let c = cotangent_weights(s, positions, patch)?;

    let seed = seed_face(patch);
    let mut u_star: Vec<Option<f64>> = vec![None; patch.faces.len()];
    u_star[seed] = Some(0.0);
    let mut queue = VecDeque::from([seed]);
    while let Some(pf) = queue.pop_front() {
        let face = patch.faces[pf].clone();
        for t in 0..3 {
            let Some((qf, _)) = across(s, patch, pf, t) else {
                continue;
            };
            if u_star[qf].is_some() {
                continue;
            }
            let (i, j) = (face.corners[t], face.corners[(t + 1) % 3]);
            let e = s.edge(3 * face.face + t);
            u_star[qf] = Some(u_star[pf].unwrap() - 0.5 * c[e] * (u[j] - u[i]));
            queue.push_back(qf);
        }
    }
    let u_star: Vec<f64> = u_star.into_iter().map(|x| x.unwrap_or(f64::NAN)).collect();

    let mut periods = [C64::new(0.0, 0.0); 2];
    let mut period_spread: f64 = 0.0;
    for r in 0..2 {
        let mut du = Vec::new();
        for (x, l) in patch.vertices.iter().enumerate() {
            if let Some(y) = patch.vertex_index(Lift { vertex: l.vertex, word: add(l.word, unit(r)) }) {
                du.push(u[y] - u[x]);
            }
        }
        let mut dus = Vec::new();
        for (f, face) in patch.faces.iter().enumerate() {
            if let Some(g) = patch.face_index(face.face, add(face.anchor, unit(r))) {
                dus.push(u_star[g] - u_star[f]);
            }
        }
        if du.is_empty() || dus.is_empty() {
            return Err(Error::InvalidMesh("patch too small to read periods".into()));
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (mu, mus) = (mean(&du), mean(&dus));
        for d in &du {
            period_spread = period_spread.max((d - mu).abs());
        }
        for d in &dus {
            period_spread = period_spread.max((d - mus).abs());
        }
        periods[r] = C64::new(mu, mus);
    }
    Ok(HarmonicFunction { u, u_star, periods, period_spread })
}

/// Output of [`constant_period_gauge`].
#[derive(Debug, Clone)]
pub struct GaugedDeformation {
    pub zdot: Vec<C64>,
    /// Derivatives of `log alpha_r`.
    pub h_dot: [C64; 2],
}

fn fit_quadratic(points: &[(C64, C64)]) -> Result<[C64; 3]> {
    let n = points.len();
    let mut a = DMatrix::from_element(n, 3, C64::new(0.0, 0.0));
    let mut b = DVector::from_element(n, C64::new(0.0, 0.0));
    for (row, &(z, w)) in points.iter().enumerate() {
        a[(row, 0)] = C64::new(1.0, 0.0);
        a[(row, 1)] = z;
        a[(row, 2)] = z * z;
        b[row] = w;
    }
    let ar = realify(&a);
    let br = DVector::from_fn(2 * n, |i, _| if i < n { b[i].re } else { b[i - n].im });
    let x = lstsq(&ar, &br, 1e-14);
    let coeffs = [C64::new(x[0], x[3]), C64::new(x[1], x[4]), C64::new(x[2], x[5])];
    let fit_err = points
        .iter()
        .map(|&(z, w)| (coeffs[0] + coeffs[1] * z + coeffs[2] * z * z - w).norm())
        .fold(0.0, f64::max);
    let scale = points.iter().map(|&(_, w)| w.norm()).fold(1.0, f64::max);
    if fit_err > 1e-6 * scale {
        return Err(Error::InvalidSystem(format!(
            "velocity field is not equivariant up to an infinitesimal Möbius map (error {fit_err:.3e})"
        )));
    }
    Ok(coeffs)
}

/// Adds an infinitesimal Möbius field so that the velocities transform like
/// `zdot(gamma x) = alpha zdot(x) + alpha_dot z(x)`; then `u` has constant
/// periods. Refused for Euclidean (translation) holonomy.
pub fn constant_period_gauge(
    s: &TriangulatedSurface,
    positions: &[C64],
    patch: &CoverPatch,
    zdot: &[C64],
    hol: &Holonomy,
) -> Result<GaugedDeformation> {
    let _ = s;
    if hol.kind != HolonomyType::StretchRotation {
        return Err(Error::InvalidSystem(
            "periods are not constant on a Euclidean torus; the Dirichlet energy is not defined".into(),
        ));
    }
    let samples = |zd: &[C64], r: usize| -> Vec<(C64, C64)> {
        patch
            .vertices
            .iter()
            .enumerate()
            .filter_map(|(x, l)| {
                patch
                    .vertex_index(Lift { vertex: l.vertex, word: add(l.word, unit(r)) })
                    .map(|y| (positions[x], zd[y] - hol.alpha[r] * zd[x]))
            })
            .collect()
    };
    let fits = [fit_quadratic(&samples(zdot, 0))?, fit_quadratic(&samples(zdot, 1))?];
    let r = if (hol.alpha[0] - 1.0).norm() >= (hol.alpha[1] - 1.0).norm() { 0 } else { 1 };
    let a = hol.alpha[r];
    if (a - 1.0).norm() < 1e-9 {
        return Err(Error::InvalidSystem("holonomy is too close to the identity".into()));
    }
    let y0 = -fits[r][0] / (1.0 - a);
    let y2 = -fits[r][2] / (a * a - a);
    let gauged: Vec<C64> = zdot
        .iter()
        .zip(positions)
        .map(|(&v, &z)| v + y0 + y2 * z * z)
        .collect();
    let mut h_dot = [C64::new(0.0, 0.0); 2];
    for r in 0..2 {
        let f = fit_quadratic(&samples(&gauged, r))?;
        let scale = f[1].norm().max(1.0);
        if f[0].norm() > 1e-6 * scale || f[2].norm() > 1e-6 * scale {
            return Err(Error::InvalidSystem("could not reach constant periods".into()));
        }
        h_dot[r] = f[1] / hol.alpha[r];
    }
    Ok(GaugedDeformation { zdot: gauged, h_dot })
}

/// `E = 1/2 sum_e c_e (u_j - u_i)^2` over the edges of the base surface.
pub fn dirichlet_energy(s: &TriangulatedSurface, positions: &[C64], patch: &CoverPatch, u: &HarmonicFunction) -> Result<f64> {
    if u.period_spread > 1e-6 * (1.0 + u.periods[0].norm() + u.periods[1].norm()) {
        return Err(Error::InvalidSystem("harmonic function has non-constant periods".into()));
    }
    let c = cotangent_weights(s, positions, patch)?;
    let mut du: Vec<Option<f64>> = vec![None; s.n_edges()];
    for face in &patch.faces {
        for t in 0..3 {
            let e = s.edge(3 * face.face + t);
            if du[e].is_none() {
                du[e] = Some(u.u[face.corners[(t + 1) % 3]] - u.u[face.corners[t]]);
            }
        }
    }
    Ok(0.5 * du.iter().zip(&c).map(|(d, c)| c * d.unwrap().powi(2)).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crsys::CrossRatioSystem;
    use crate::develop::{develop, DevelopOptions};
    use crate::surface::{lift_patch, one_vertex_torus, regular_torus};
    use std::f64::consts::FRAC_PI_3;

    fn lattice(m: usize, n: usize) -> (TriangulatedSurface, Vec<C64>, CoverPatch, CrossRatioSystem) {
        let s = regular_torus(m, n);
        let sys = CrossRatioSystem::constant(s.n_edges(), C64::from_polar(1.0, FRAC_PI_3));
        let patch = lift_patch(&s, -1..=1, -1..=1).unwrap();
        let dev = develop(&s, &sys, &patch, &DevelopOptions::default()).unwrap();
        (s, dev.finite_positions().unwrap(), patch, sys)
    }

    #[test]
    fn equilateral_dimensions() {
        for (m, n) in [(1, 1), (2, 2), (3, 3)] {
            let (s, pos, patch, sys) = lattice(m, n);
            let k = kernel_basis(&hqd_system_cr_form(&s, &sys, None, Field::Real).unwrap(), 1e-8);
            assert_eq!(k.dimension, 2, "{m}x{n}");
            let kz = kernel_basis(&hqd_system_z_form(&s, &pos, &patch, None, Field::Real).unwrap(), 1e-8);
            assert_eq!(kz.dimension, 2, "{m}x{n}");
            let a: Vec<_> = k.basis.iter().map(|b| DVector::from_iterator(b.len(), b.iter().map(|z| z.re))).collect();
            let bz: Vec<_> = kz.basis.iter().map(|b| DVector::from_iterator(b.len(), b.iter().map(|z| z.re))).collect();
            assert!(crate::linalg::subspace_angle(&a, &bz) < 1e-7);
        }
    }

    #[test]
    fn case_a_constraint() {
        let (s, _, _, sys) = lattice(1, 1);
        let op = hqd_system_cr_form(&s, &sys, None, Field::Real).unwrap();
        let q = [1.0, -2.0, 1.0].map(|x| C64::new(x, 0.0));
        assert!(op.residual(&q) < 1e-12);
        let q = [1.0, 1.0, 1.0].map(|x| C64::new(x, 0.0));
        assert!(op.residual(&q) > 1e-3);
    }

    #[test]
    fn equilateral_cotangent_weights() {
        let (s, pos, patch, _) = lattice(2, 2);
        for c in cotangent_weights(&s, &pos, &patch).unwrap() {
            assert!((c - 2.0 / 3f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn deformation_round_trip() {
        let (s, pos, patch, sys) = lattice(2, 2);
        let k = kernel_basis(&hqd_system_cr_form(&s, &sys, None, Field::Real).unwrap(), 1e-8);
        for q in &k.basis {
            let zdot = hqd_to_deformation(&s, q, &pos, &patch, None).unwrap();
            let back = deformation_to_q(&s, &pos, &patch, &zdot);
            for (a, b) in back.iter().zip(q) {
                assert!((a - b).norm() < 1e-8);
            }
        }
        let bad = vec![C64::new(1.0, 0.0); s.n_edges()];
        assert!(hqd_to_deformation(&s, &bad, &pos, &patch, None).is_err());
    }

    #[test]
    fn moebius_velocity_gives_linear_u() {
        let (s, pos, patch, _) = lattice(2, 2);
        let (a, b, c) = (C64::new(0.3, -0.2), C64::new(0.1, 0.7), C64::new(-1.0, 2.0));
        let zdot: Vec<C64> = pos.iter().map(|&z| a * z * z + b * z + c).collect();
        let h = deformation_to_harmonic(&s, &pos, &patch, &zdot).unwrap();
        for (ui, z) in h.u.iter().zip(&pos) {
            assert!((ui - (2.0 * (a * z).im + b.im)).abs() < 1e-9);
        }
        // Its conjugate at circumcenters is 2 Im(a (-i) z*) up to a constant.
        let centers: Vec<C64> = patch
            .faces
            .iter()
            .map(|f| {
                crate::moebius::circumcircle(pos[f.corners[0]].into(), pos[f.corners[1]].into(), pos[f.corners[2]].into())
                    .unwrap()
                    .center()
                    .unwrap()
            })
            .collect();
        let expect = |f: usize| 2.0 * (a * C64::new(0.0, -1.0) * centers[f]).im;
        let off = h.u_star[0] - expect(0);
        for f in 0..patch.faces.len() {
            assert!((h.u_star[f] - expect(f) - off).abs() < 1e-9, "face {f}");
        }
        let zero: Vec<C64> = vec![c; pos.len()];
        let h0 = deformation_to_harmonic(&s, &pos, &patch, &zero).unwrap();
        assert!(h0.u.iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn one_vertex_case_b_dimensions() {
        let s = one_vertex_torus();
        let b = C64::new(2.0, 0.0);
        let sys = CrossRatioSystem::new(vec![b, -(b + 1.0) / b, -(b + 1.0).inv()]).unwrap();
        let r = kernel_basis(&hqd_system_cr_form(&s, &sys, None, Field::Real).unwrap(), 1e-8);
        let c = kernel_basis(&hqd_system_cr_form(&s, &sys, None, Field::Complex).unwrap(), 1e-8);
        assert_eq!((r.dimension, c.dimension), (1, 1));
    }
}
