//! Solving for Delaunay circle patterns with prescribed intersection angles.
//!
//! Torus patterns are computed in layout coordinates: one position per base
//! vertex plus the holonomy. For targets `(A1, A2) != 0` the layout is
//! normalized so the holonomy is `z -> alpha_r z` with `|alpha_r| = e^{A_r}`;
//! the unknowns are the positions and `arg alpha_r`. The Euclidean point uses
//! translations `z -> z + beta_r` with `beta_1 = 1`. The equations are
//! `Arg cr_e = Theta_e`, and the log-moduli `X` are read off the result.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::crsys::{
    exp_theta, is_delaunay, phi_real_jacobian, phi_real_rows, ramification_index, residual_norm, star_edges,
    validate_angle_structure, AngleStructure, CrossRatioSystem,
};
use crate::develop::{
    conformal_modulus, develop, geometric_delaunay_check, holonomy, normalized_positions, DevelopOptions, Holonomy,
    HolonomyType, ModulusReport,
};
use crate::error::{Error, Result};
use crate::hqd::{hqd_system_cr_form, kernel_basis, Field};
use crate::linalg::{kernel, lstsq};
use crate::moebius::{moebius_through, ExtComplex, FixedPoints, C64};
use crate::surface::{lift_patch, sphere_patch, CoverPatch, TriangulatedSurface, Word, ZERO};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Stop when the largest angle residual falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Dual cycle bound for angle structure validation; 0 skips it.
    pub cycle_bound: usize,
    /// Largest step in `(A1, A2)` taken by continuation.
    pub max_step: f64,
    /// Bisection depth for failed continuation steps.
    pub max_bisect: u32,
    pub tolerances: Tolerances,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 80,
            cycle_bound: crate::surface::DEFAULT_CYCLE_BOUND,
            max_step: 0.25,
            max_bisect: 8,
            tolerances: *crate::tolerance::global(),
        }
    }
}

/// Normalization of a torus layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayoutModel {
    /// Translations `beta_1 = 1`, `beta_2` free.
    Euclidean,
    /// Dilations `alpha_r = exp(A_r + i B_r)`, `B_r` free.
    Affine { a: [f64; 2] },
    /// All words zero.
    Sphere,
}

/// Base vertex positions plus holonomy parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyLayout {
    pub model: LayoutModel,
    pub z: Vec<C64>,
    /// `beta_2` (Euclidean) or `(B_1, B_2)` (affine).
    pub params: [f64; 2],
}

impl FamilyLayout {
    fn to_vec(&self) -> DVector<f64> {
        let mut v = DVector::zeros(2 * self.z.len() + self.n_params());
        for (i, z) in self.z.iter().enumerate() {
            v[2 * i] = z.re;
            v[2 * i + 1] = z.im;
        }
        for p in 0..self.n_params() {
            v[2 * self.z.len() + p] = self.params[p];
        }
        v
    }

    fn from_vec(model: LayoutModel, v: &DVector<f64>, nv: usize) -> Self {
        let z = (0..nv).map(|i| C64::new(v[2 * i], v[2 * i + 1])).collect();
        let mut params = [0.0; 2];
        let np = if model == LayoutModel::Sphere { 0 } else { 2 };
        for p in 0..np {
            params[p] = v[2 * nv + p];
        }
        Self { model, z, params }
    }

    fn n_params(&self) -> usize {
        if self.model == LayoutModel::Sphere { 0 } else { 2 }
    }

    /// Holonomy generators in this normalization.
    pub fn generators(&self) -> [C64; 2] {
        match self.model {
            LayoutModel::Euclidean => [C64::new(1.0, 0.0), C64::new(self.params[0], self.params[1])],
            LayoutModel::Affine { a } => [
                C64::new(a[0], self.params[0]).exp(),
                C64::new(a[1], self.params[1]).exp(),
            ],
            LayoutModel::Sphere => [C64::new(1.0, 0.0); 2],
        }
    }

    /// Position of vertex `v` lifted to word `w`.
    pub fn lifted(&self, v: usize, w: Word) -> C64 {
        let z = self.z[v];
        match self.model {
            LayoutModel::Sphere => z,
            LayoutModel::Euclidean => {
                let b = self.generators();
                z + b[0] * w[0] as f64 + b[1] * w[1] as f64
            }
            LayoutModel::Affine { a } => {
                let e = C64::new(a[0], self.params[0]) * w[0] as f64 + C64::new(a[1], self.params[1]) * w[1] as f64;
                z * e.exp()
            }
        }
    }
}

/// The four lifted corners `i, j, k, l` of an edge.
#[derive(Debug, Clone, Copy)]
struct Stencil {
    v: [usize; 4],
    w: [Word; 4],
}

fn stencils(s: &TriangulatedSurface) -> Vec<Stencil> {
    (0..s.n_edges())
        .map(|e| {
            let h = s.edge_half_edge(e);
            let f = s.face(h);
            let t = h % 3;
            let off = s.corner_offsets(f);
            let fv = s.face_vertices(f);
            let tw = s.twin(h);
            let g = s.face(tw);
            let wg = s.cross(h, ZERO);
            let tt = (tw % 3 + 2) % 3;
            Stencil {
                v: [fv[t], fv[(t + 1) % 3], fv[(t + 2) % 3], s.face_vertices(g)[tt]],
                w: [off[t], off[(t + 1) % 3], off[(t + 2) % 3], crate::surface::add(wg, s.corner_offsets(g)[tt])],
            }
        })
        .collect()
}

fn wrap(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y <= -PI { y + TAU } else { y }
}

/// Cross ratio of a stencil and the factors needed for derivatives.
fn stencil_cr(layout: &FamilyLayout, st: &Stencil) -> Option<([C64; 4], C64)> {
    let p: [C64; 4] = std::array::from_fn(|a| layout.lifted(st.v[a], st.w[a]));
    let [zi, zj, zk, zl] = p;
    let den = (zi - zl) * (zj - zk);
    let num = (zk - zi) * (zl - zj);
    if den.norm() == 0.0 || num.norm() == 0.0 {
        return None;
    }
    let cr = -num / den;
    cr.is_finite().then_some((p, cr))
}

fn residual(layout: &FamilyLayout, sts: &[Stencil], theta: &[f64]) -> Option<DVector<f64>> {
    let mut r = DVector::zeros(sts.len());
    for (e, st) in sts.iter().enumerate() {
        let (_, cr) = stencil_cr(layout, st)?;
        r[e] = wrap(cr.arg() - theta[e]);
    }
    Some(r)
}

fn jacobian(layout: &FamilyLayout, sts: &[Stencil]) -> DMatrix<f64> {
    let nv = layout.z.len();
    let np = layout.n_params();
    let mut j = DMatrix::zeros(sts.len(), 2 * nv + np);
    for (e, st) in sts.iter().enumerate() {
        let Some((p, _)) = stencil_cr(layout, st) else { continue };
        let [zi, zj, zk, zl] = p;
        // d log cr = sum_a g_a dP_a
        let g = [
            -(zk - zi).inv() - (zi - zl).inv(),
            -(zl - zj).inv() - (zj - zk).inv(),
            (zk - zi).inv() + (zj - zk).inv(),
            (zl - zj).inv() + (zi - zl).inv(),
        ];
        for a in 0..4 {
            let v = st.v[a];
            let w = st.w[a];
            // dP = (dP/dz_v) dz_v + dP/dparams
            let (dz, dparams): (C64, [C64; 2]) = match layout.model {
                LayoutModel::Sphere => (C64::new(1.0, 0.0), [C64::new(0.0, 0.0); 2]),
                LayoutModel::Euclidean => (
                    C64::new(1.0, 0.0),
                    // d/d Re beta_2 and d/d Im beta_2
                    [C64::new(w[1] as f64, 0.0), C64::new(0.0, w[1] as f64)],
                ),
                LayoutModel::Affine { .. } => {
                    let pa = p[a];
                    let scale = if layout.z[v].norm() > 0.0 { pa / layout.z[v] } else { C64::new(0.0, 0.0) };
                    (scale, [pa * C64::new(0.0, w[0] as f64), pa * C64::new(0.0, w[1] as f64)])
                }
            };
            let gz = g[a] * dz;
            j[(e, 2 * v)] += gz.im;
            j[(e, 2 * v + 1)] += gz.re;
            for q in 0..np {
                j[(e, 2 * nv + q)] += (g[a] * dparams[q]).im;
            }
        }
    }
    j
}

#[derive(Debug, Clone)]
struct NewtonOutcome {
    layout: FamilyLayout,
    residual: f64,
    iterations: usize,
}

fn newton(
    init: FamilyLayout,
    sts: &[Stencil],
    theta: &[f64],
    opts: &SolverOptions,
) -> Result<NewtonOutcome> {
    let model = init.model;
    let nv = init.z.len();
    let mut x = init.to_vec();
    let mut layout = init;
    let mut r = residual(&layout, sts, theta).ok_or_else(|| Error::Numeric("degenerate initial layout".into()))?;
    let mut trace = vec![r.amax()];
    let mut lambda = 0.0;
    for it in 0..opts.max_iter {
        let rmax = r.amax();
        if rmax <= opts.tol {
            return Ok(NewtonOutcome { layout, residual: rmax, iterations: it });
        }
        let j = jacobian(&layout, sts);
        let mut accepted = false;
        // Gauss-Newton with backtracking, then Levenberg-Marquardt.
        let gn = lstsq(&j, &(-&r), 1e-11);
        let mut t = 1.0;
        for _ in 0..30 {
            let xn = &x + &gn * t;
            let ln = FamilyLayout::from_vec(model, &xn, nv);
            if let Some(rn) = residual(&ln, sts, theta) {
                if rn.norm() < r.norm() {
                    x = xn;
                    layout = ln;
                    r = rn;
                    accepted = true;
                    lambda = 0.0;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            let jtj = j.transpose() * &j;
            let jtr = j.transpose() * &r;
            lambda = if lambda == 0.0 { 1e-6 * jtj.diagonal().amax().max(1e-12) } else { lambda };
            for _ in 0..40 {
                let mut m = jtj.clone();
                for d in 0..m.nrows() {
                    m[(d, d)] += lambda;
                }
                if let Some(step) = m.cholesky().map(|c| c.solve(&(-&jtr))) {
                    let xn = &x + &step;
                    let ln = FamilyLayout::from_vec(model, &xn, nv);
                    if let Some(rn) = residual(&ln, sts, theta) {
                        if rn.norm() < r.norm() {
                            x = xn;
                            layout = ln;
                            r = rn;
                            accepted = true;
                            lambda *= 0.3;
                            break;
                        }
                    }
                }
                lambda *= 10.0;
            }
        }
        trace.push(r.amax());
        if !accepted {
            return Err(Error::Divergence { reason: "no descent step found".into(), trace });
        }
    }
    let rmax = r.amax();
    if rmax <= opts.tol * 100.0 {
        return Ok(NewtonOutcome { layout, residual: rmax, iterations: opts.max_iter });
    }
    Err(Error::Divergence { reason: format!("no convergence in {} iterations", opts.max_iter), trace })
}

/// Uniform-weight periodic embedding with `beta = (1, +-i)`, used to start
/// the Euclidean solve.
fn tutte_torus(s: &TriangulatedSurface) -> Result<FamilyLayout> {
    let nv = s.n_vertices();
    for sign in [1.0, -1.0] {
        let beta = [C64::new(1.0, 0.0), C64::new(0.0, sign)];
        let z = if nv == 1 {
            vec![C64::new(0.0, 0.0)]
        } else {
            // Unknowns z_1..z_{n-1}; z_0 = 0.
            let n = nv - 1;
            let mut a = DMatrix::from_element(nv, n, C64::new(0.0, 0.0));
            let mut b = DVector::from_element(nv, C64::new(0.0, 0.0));
            for v in 0..nv {
                for h in s.outgoing(v) {
                    let t = s.target(h);
                    let l = s.label(h);
                    b[v] += beta[0] * l[0] as f64 + beta[1] * l[1] as f64;
                    if v > 0 {
                        a[(v, v - 1)] += 1.0;
                    }
                    if t > 0 {
                        a[(v, t - 1)] -= 1.0;
                    }
                }
            }
            let ar = crate::linalg::realify(&a);
            let br = DVector::from_fn(2 * nv, |i, _| if i < nv { b[i].re } else { b[i - nv].im });
            let x = lstsq(&ar, &br, 1e-12);
            std::iter::once(C64::new(0.0, 0.0))
                .chain((0..n).map(|i| C64::new(x[i], x[i + n])))
                .collect()
        };
        let layout = FamilyLayout { model: LayoutModel::Euclidean, z, params: [beta[1].re, beta[1].im] };
        if faces_positive(s, &layout) {
            return Ok(layout);
        }
    }
    Err(Error::Numeric("periodic embedding of the torus has folded faces".into()))
}

fn faces_positive(s: &TriangulatedSurface, layout: &FamilyLayout) -> bool {
    (0..s.n_faces()).all(|f| {
        let off = s.corner_offsets(f);
        let v = s.face_vertices(f);
        let p: [C64; 3] = std::array::from_fn(|t| layout.lifted(v[t], off[t]));
        crate::moebius::orientation(p[0], p[1], p[2]) > 0.0
    })
}

/// Solves the Euclidean point, by homotopy in the angles from the angles of
/// the starting layout when a direct solve fails.
fn solve_euclidean(
    s: &TriangulatedSurface,
    theta: &AngleStructure,
    init: Option<FamilyLayout>,
    opts: &SolverOptions,
) -> Result<NewtonOutcome> {
    let sts = stencils(s);
    let start = match init {
        Some(l) => l,
        None => tutte_torus(s)?,
    };
    solve_with_homotopy(start, &sts, &theta.theta, opts)
}

fn solve_with_homotopy(start: FamilyLayout, sts: &[Stencil], theta: &[f64], opts: &SolverOptions) -> Result<NewtonOutcome> {
    if let Ok(out) = newton(start.clone(), sts, theta, opts) {
        return Ok(out);
    }
    // Angles of the starting layout solve their own system exactly.
    let theta0: Vec<f64> = sts
        .iter()
        .map(|st| stencil_cr(&start, st).map(|(_, c)| c.arg()).unwrap_or(0.0))
        .collect();
    let at = |t: f64| -> Vec<f64> {
        theta0
            .iter()
            .zip(theta)
            .map(|(a, b)| a + t * wrap(b - a))
            .collect()
    };
    let mut current = start;
    let mut t: f64 = 0.0;
    let mut dt: f64 = 1.0 / 16.0;
    let mut iterations = 0;
    while t < 1.0 {
        let next = (t + dt).min(1.0);
        match newton(current.clone(), sts, &at(next), opts) {
            Ok(out) => {
                current = out.layout;
                iterations += out.iterations;
                t = next;
                dt = (dt * 1.5).min(0.25);
            }
            Err(e) => {
                dt *= 0.5;
                if dt < 1.0 / 4096.0 {
                    return Err(e);
                }
            }
        }
    }
    let mut out = newton(current, sts, theta, opts)?;
    out.iterations += iterations;
    Ok(out)
}

/// `z = exp(c zeta)` with `Re(c beta_r) = A_r`, from a Euclidean layout.
fn exponential_init(eu: &FamilyLayout, a: [f64; 2]) -> Result<FamilyLayout> {
    let b = eu.generators();
    // Re(c b) = c_re b_re - c_im b_im
    let m = nalgebra::Matrix2::new(b[0].re, -b[0].im, b[1].re, -b[1].im);
    let c = m
        .try_inverse()
        .map(|inv| inv * nalgebra::Vector2::new(a[0], a[1]))
        .ok_or_else(|| Error::Numeric("degenerate translation lattice".into()))?;
    let c = C64::new(c[0], c[1]);
    Ok(FamilyLayout {
        model: LayoutModel::Affine { a },
        z: eu.z.iter().map(|&z| (c * z).exp()).collect(),
        params: [(c * b[0]).im, (c * b[1]).im],
    })
}

/// Moves an affine layout to new targets, inverting it if the new target
/// lies on the other side of the origin.
fn retarget(layout: &FamilyLayout, a: [f64; 2]) -> FamilyLayout {
    let LayoutModel::Affine { a: old } = layout.model else {
        return layout.clone();
    };
    let flip = old[0] * a[0] + old[1] * a[1] < 0.0;
    FamilyLayout {
        model: LayoutModel::Affine { a },
        z: if flip { layout.z.iter().map(|z| z.inv()).collect() } else { layout.z.clone() },
        params: if flip { [-layout.params[0], -layout.params[1]] } else { layout.params },
    }
}

/// A solved point of the family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AffineFamilyPoint {
    pub theta: AngleStructure,
    pub a: [f64; 2],
    pub x: Vec<f64>,
    pub cr: CrossRatioSystem,
    pub holonomy: Holonomy,
    pub modulus: ModulusReport,
    pub newton_residual: f64,
    pub iterations: usize,
    pub layout: FamilyLayout,
}

/// Patch used to verify solutions: all faces anchored in `{-1, 0, 1}^2`.
pub fn verification_patch(s: &TriangulatedSurface) -> Result<CoverPatch> {
    lift_patch(s, -1..=1, -1..=1)
}

/// Builds the family point from a converged layout, verifying it along the
/// way through an independent developing map.
fn finish(
    s: &TriangulatedSurface,
    theta: &AngleStructure,
    a: [f64; 2],
    out: NewtonOutcome,
    opts: &SolverOptions,
) -> Result<AffineFamilyPoint> {
    let sts = stencils(s);
    let x: Vec<f64> = sts
        .iter()
        .map(|st| {
            stencil_cr(&out.layout, st)
                .map(|(_, c)| c.norm().ln())
                .ok_or_else(|| Error::Numeric("degenerate converged layout".into()))
        })
        .collect::<Result<_>>()?;
    let cr = exp_theta(&x, theta);
    let tol = &opts.tolerances;
    let res = residual_norm(s, &cr);
    if res > 1e-10 {
        return Err(Error::Numeric(format!("residual {res:.3e} after convergence")));
    }
    if let Err(reason) = is_delaunay(s, &cr, tol.zero_angle, 1e-9)? {
        return Err(Error::NotDelaunay(format!("converged point: {reason}")));
    }
    if ramification_index(s, &cr)?.iter().any(|&k| k != 1) {
        return Err(Error::NotDelaunay("converged point is branched".into()));
    }
    let patch = verification_patch(s)?;
    let dev = develop(s, &cr, &patch, &DevelopOptions::default())?;
    let mut hol = holonomy(&dev, tol.parabolic)?;
    let la = hol.log_abs_alpha();
    if la[0] * a[0] + la[1] * a[1] < 0.0 {
        hol = hol.flipped();
    }
    if !matches!(hol.kind, HolonomyType::Translation | HolonomyType::StretchRotation | HolonomyType::Identity) {
        return Err(Error::Holonomy(format!("unexpected holonomy type {:?}", hol.kind)));
    }
    let positions = normalized_positions(&dev, &hol)?;
    if let Err(f) = geometric_delaunay_check(s, &positions, &patch, 1e-9) {
        return Err(Error::NotDelaunay(format!("layout fails the empty-circle test at edge {} ({:?})", f.edge, f.reason)));
    }
    let modulus = conformal_modulus(s, &dev, &hol)?;
    Ok(AffineFamilyPoint {
        theta: theta.clone(),
        a,
        x,
        cr,
        holonomy: hol,
        modulus,
        newton_residual: out.residual.max(res),
        iterations: out.iterations,
        layout: out.layout,
    })
}

fn check_torus_input(s: &TriangulatedSurface, theta: &AngleStructure, opts: &SolverOptions) -> Result<()> {
    if !s.is_torus() {
        return Err(Error::NotATorus);
    }
    if opts.cycle_bound > 0 {
        if let Err(v) = validate_angle_structure(s, theta, opts.cycle_bound)? {
            return Err(Error::InvalidAngles(v.to_string()));
        }
    } else if theta.theta.len() != s.n_edges() {
        return Err(Error::InvalidAngles("wrong number of angles".into()));
    }
    Ok(())
}

fn is_origin(a: [f64; 2]) -> bool {
    a[0] == 0.0 && a[1] == 0.0
}

/// Solves from a known layout (continuation), subdividing and bisecting the
/// step from the layout's target to `a`.
fn continue_to(
    s: &TriangulatedSurface,
    theta: &AngleStructure,
    from: &FamilyLayout,
    a: [f64; 2],
    opts: &SolverOptions,
) -> Result<NewtonOutcome> {
    let sts = stencils(s);
    let LayoutModel::Affine { a: a0 } = from.model else {
        return Err(Error::Numeric("continuation needs an affine layout".into()));
    };
    let dist = ((a[0] - a0[0]).powi(2) + (a[1] - a0[1]).powi(2)).sqrt();
    let pieces = (dist / opts.max_step).ceil().max(1.0) as usize;
    let mut current = from.clone();
    let mut iterations = 0;
    let mut prev_target = a0;
    for k in 1..=pieces {
        let t = k as f64 / pieces as f64;
        let target = [a0[0] + t * (a[0] - a0[0]), a0[1] + t * (a[1] - a0[1])];
        let out = step_with_bisection(&current, prev_target, target, &sts, theta, opts, 0)?;
        iterations += out.iterations;
        current = out.layout;
        prev_target = target;
    }
    Ok(NewtonOutcome {
        residual: residual(&current, &sts, &theta.theta).map(|r| r.amax()).unwrap_or(f64::INFINITY),
        layout: current,
        iterations,
    })
}

fn step_with_bisection(
    from: &FamilyLayout,
    a_from: [f64; 2],
    a_to: [f64; 2],
    sts: &[Stencil],
    theta: &AngleStructure,
    opts: &SolverOptions,
    depth: u32,
) -> Result<NewtonOutcome> {
    match newton(retarget(from, a_to), sts, &theta.theta, opts) {
        Ok(out) => Ok(out),
        Err(e) if depth >= opts.max_bisect => Err(e),
        Err(_) => {
            let mid = [(a_from[0] + a_to[0]) / 2.0, (a_from[1] + a_to[1]) / 2.0];
            let half = step_with_bisection(from, a_from, mid, sts, theta, opts, depth + 1)?;
            let rest = step_with_bisection(&half.layout, mid, a_to, sts, theta, opts, depth + 1)?;
            Ok(NewtonOutcome { iterations: half.iterations + rest.iterations, ..rest })
        }
    }
}

/// Solves for the Delaunay pattern with angles `theta` whose affine holonomy
/// satisfies `log |alpha_r| = A_r`. `init` may be a nearby solved layout.
pub fn solve_pattern(
    s: &TriangulatedSurface,
    theta: &AngleStructure,
    a: [f64; 2],
    init: Option<&FamilyLayout>,
    opts: &SolverOptions,
) -> Result<AffineFamilyPoint> {
    check_torus_input(s, theta, opts)?;
    let quiet = SolverOptions { cycle_bound: 0, ..opts.clone() };
    solve_unchecked(s, theta, a, init, &quiet)
}

fn solve_unchecked(
    s: &TriangulatedSurface,
    theta: &AngleStructure,
    a: [f64; 2],
    init: Option<&FamilyLayout>,
    opts: &SolverOptions,
) -> Result<AffineFamilyPoint> {
    let sts = stencils(s);
    if is_origin(a) {
        let start = init.filter(|l| l.model == LayoutModel::Euclidean).cloned();
        let out = solve_euclidean(s, theta, start, opts)?;
        return finish(s, theta, a, out, opts);
    }
    // A nearby affine layout: continue from it.
    if let Some(l) = init.filter(|l| matches!(l.model, LayoutModel::Affine { .. })) {
        if let Ok(out) = continue_to(s, theta, l, a, opts) {
            return finish(s, theta, a, out, opts);
        }
    }
    let eu_init = init.filter(|l| l.model == LayoutModel::Euclidean).cloned();
    let eu = solve_euclidean(s, theta, eu_init, opts)?;
    let start = exponential_init(&eu.layout, a)?;
    let out = match newton(start.clone(), &sts, &theta.theta, opts) {
        Ok(out) => out,
        Err(_) => {
            // Walk out from a small target along the ray.
            let norm = (a[0] * a[0] + a[1] * a[1]).sqrt();
            let t0 = (opts.max_step / norm).min(1.0);
            let a0 = [a[0] * t0, a[1] * t0];
            let first = newton(exponential_init(&eu.layout, a0)?, &sts, &theta.theta, opts)?;
            continue_to(s, theta, &first.layout, a, opts)?
        }
    };
    finish(s, theta, a, out, opts)
}

/// Solves a sequence of waypoints, each from the previous solution.
pub fn continuation_path(
    s: &TriangulatedSurface,
    theta: &AngleStructure,
    waypoints: &[[f64; 2]],
    opts: &SolverOptions,
) -> Result<Vec<AffineFamilyPoint>> {
    check_torus_input(s, theta, opts)?;
    let quiet = SolverOptions { cycle_bound: 0, ..opts.clone() };
    let mut out: Vec<AffineFamilyPoint> = Vec::new();
    let mut euclid: Option<FamilyLayout> = None;
    for &a in waypoints {
        let prev = out.last().map(|p| p.layout.clone());
        let init = match (&prev, is_origin(a)) {
            (_, true) => euclid.clone(),
            (Some(l), false) if matches!(l.model, LayoutModel::Affine { .. }) => {
                // Go through the origin instead of near it.
                let LayoutModel::Affine { a: a0 } = l.model else { unreachable!() };
                if segment_distance_to_origin(a0, a) < 0.5 * opts.max_step {
                    euclid.clone()
                } else {
                    Some(l.clone())
                }
            }
            (Some(l), false) => Some(l.clone()),
            (None, false) => None,
        };
        let point = solve_unchecked(s, theta, a, init.as_ref(), &quiet)?;
        if point.layout.model == LayoutModel::Euclidean {
            euclid = Some(point.layout.clone());
        }
        out.push(point);
    }
    Ok(out)
}

fn segment_distance_to_origin(p: [f64; 2], q: [f64; 2]) -> f64 {
    let d = [q[0] - p[0], q[1] - p[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 == 0.0 { 0.0 } else { (-(p[0] * d[0] + p[1] * d[1]) / len2).clamp(0.0, 1.0) };
    ((p[0] + t * d[0]).powi(2) + (p[1] + t * d[1]).powi(2)).sqrt()
}

/// Evidence for injectivity of `A -> tau` modulo `A -> -A`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanResult {
    pub grid: Vec<[f64; 2]>,
    pub moduli: Vec<C64>,
    /// Grid index pairs with equal moduli that are not negatives of each other.
    pub duplicates: Vec<(usize, usize)>,
    /// Largest `|tau(A) - tau(-A)|` over the grid.
    pub symmetry_error: f64,
    /// Central-difference Jacobian determinant of `tau` at every grid point
    /// (`None` at the origin).
    pub jacobian_det: Vec<Option<f64>>,
}

/// Solves an `n x n` grid on `[-range, range]^2` and compares moduli.
pub fn covering_scan(
    s: &TriangulatedSurface,
    theta: &AngleStructure,
    n: usize,
    range: f64,
    opts: &SolverOptions,
) -> Result<ScanResult> {
    check_torus_input(s, theta, opts)?;
    let quiet = SolverOptions { cycle_bound: 0, ..opts.clone() };
    let coord = |i: usize| if n == 1 { 0.0 } else { -range + 2.0 * range * i as f64 / (n - 1) as f64 };
    let mut grid = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            grid.push([coord(j), coord(i)]);
        }
    }
    let origin = solve_unchecked(s, theta, [0.0, 0.0], None, &quiet)?;
    let eu = origin.layout.clone();
    let mut points: Vec<Option<AffineFamilyPoint>> = vec![None; grid.len()];
    // Visit points by distance from the origin so each has a solved neighbour.
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&p, &q| {
        let r = |k: usize| grid[k][0].hypot(grid[k][1]);
        r(p).total_cmp(&r(q)).then(p.cmp(&q))
    });
    for &k in &order {
        let a = grid[k];
        let point = if is_origin(a) {
            origin.clone()
        } else {
            let near = nearest_solved(&grid, &points, a);
            let init = near.map(|p| p.layout.clone()).unwrap_or_else(|| eu.clone());
            solve_unchecked(s, theta, a, Some(&init), &quiet)
                .or_else(|_| solve_unchecked(s, theta, a, Some(&eu), &quiet))?
        };
        points[k] = Some(point);
    }
    let points: Vec<AffineFamilyPoint> = points.into_iter().map(Option::unwrap).collect();
    let moduli: Vec<C64> = points.iter().map(|p| p.modulus.tau).collect();
    let mut duplicates = Vec::new();
    let mut symmetry_error: f64 = 0.0;
    let same = |p: [f64; 2], q: [f64; 2]| (p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12;
    for p in 0..grid.len() {
        for q in p + 1..grid.len() {
            let d = (moduli[p] - moduli[q]).norm();
            if same(grid[p], [-grid[q][0], -grid[q][1]]) {
                symmetry_error = symmetry_error.max(d);
            } else if d < 1e-6 {
                duplicates.push((p, q));
            }
        }
    }
    let delta = 1e-3;
    let mut jacobian_det = Vec::with_capacity(grid.len());
    for (k, a) in grid.iter().enumerate() {
        if is_origin(*a) {
            jacobian_det.push(None);
            continue;
        }
        let init = points[k].layout.clone();
        let tau_at = |b: [f64; 2]| solve_unchecked(s, theta, b, Some(&init), &quiet).map(|p| p.modulus.tau);
        let d1 = (tau_at([a[0] + delta, a[1]])? - tau_at([a[0] - delta, a[1]])?) / (2.0 * delta);
        let d2 = (tau_at([a[0], a[1] + delta])? - tau_at([a[0], a[1] - delta])?) / (2.0 * delta);
        jacobian_det.push(Some(d1.re * d2.im - d1.im * d2.re));
    }
    Ok(ScanResult { grid, moduli, duplicates, symmetry_error, jacobian_det })
}

fn nearest_solved<'a>(grid: &[[f64; 2]], points: &'a [Option<AffineFamilyPoint>], a: [f64; 2]) -> Option<&'a AffineFamilyPoint> {
    points
        .iter()
        .enumerate()
        .filter_map(|(k, p)| p.as_ref().map(|p| (k, p)))
        .filter(|(_, p)| !is_origin(p.a))
        .map(|(k, p)| {
            // -A carries the same pattern, so reflect when that is closer.
            let d = |b: [f64; 2]| (b[0] - a[0]).hypot(b[1] - a[1]);
            (d(grid[k]).min(d([-grid[k][0], -grid[k][1]])), p)
        })
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .map(|(_, p)| p)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RigidityReport {
    pub trials: usize,
    pub converged: usize,
    /// Largest cross ratio distance from the reference solution.
    pub max_cr_distance: f64,
    /// Largest relative spread of circumradius ratios against the reference
    /// (tori only; radii on the sphere depend on the Möbius normalization).
    pub max_radius_ratio_spread: Option<f64>,
}

/// Solves from randomly perturbed starting layouts and compares solutions.
/// On the sphere `a` is ignored and each trial is a jittered restart.
pub fn rigidity_check(
    s: &TriangulatedSurface,
    theta: &AngleStructure,
    a: [f64; 2],
    trials: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<RigidityReport> {
    if s.genus() == 0 {
        return sphere_rigidity(s, theta, trials, seed, opts);
    }
    let reference = solve_pattern(s, theta, a, None, opts)?;
    let quiet = SolverOptions { cycle_bound: 0, ..opts.clone() };
    let sts = stencils(s);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut converged = 0;
    let mut max_cr_distance: f64 = 0.0;
    let mut max_spread: f64 = 0.0;
    let ref_radii = radii(&reference.layout, s);
    for _ in 0..trials {
        let mut start = reference.layout.clone();
        let scale = start.z.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let noise = |rng: &mut ChaCha8Rng| C64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
        // Perturb well away from the solution while keeping the faces of the
        // starting layout positively oriented where possible.
        for z in &mut start.z {
            *z += noise(&mut rng) * scale * 0.3;
        }
        for p in &mut start.params {
            *p += rng.gen_range(-0.3..0.3);
        }
        if !faces_positive(s, &start) {
            start = reference.layout.clone();
            for z in &mut start.z {
                *z += noise(&mut rng) * scale * 0.05;
            }
        }
        let Ok(out) = solve_with_homotopy(start, &sts, &theta.theta, &quiet) else {
            continue;
        };
        let Ok(point) = finish(s, theta, a, out, &quiet) else {
            continue;
        };
        converged += 1;
        for (p, q) in point.cr.cr.iter().zip(&reference.cr.cr) {
            max_cr_distance = max_cr_distance.max((p - q).norm());
        }
        let r = radii(&point.layout, s);
        let ratios: Vec<f64> = r.iter().zip(&ref_radii).map(|(x, y)| x / y).collect();
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let spread = ratios.iter().map(|x| (x / mean - 1.0).abs()).fold(0.0, f64::max);
        max_spread = max_spread.max(spread);
    }
    if max_cr_distance > 1e-7 {
        return Err(Error::RigidityCounterexample(format!(
            "found a second Delaunay solution at A = {a:?} (cross ratio distance {max_cr_distance:.3e})"
        )));
    }
    Ok(RigidityReport { trials, converged, max_cr_distance, max_radius_ratio_spread: Some(max_spread) })
}

fn sphere_rigidity(
    s: &TriangulatedSurface,
    theta: &AngleStructure,
    trials: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<RigidityReport> {
    let reference = solve_sphere_pattern(s, theta, None, opts)?;
    let quiet = SolverOptions { cycle_bound: 0, ..opts.clone() };
    let mut converged = 0;
    let mut max_cr_distance: f64 = 0.0;
    for t in 0..trials as u64 {
        let Ok(cr) = solve_sphere_pattern(s, theta, Some(seed.wrapping_add(t)), &quiet) else {
            continue;
        };
        converged += 1;
        for (p, q) in cr.cr.iter().zip(&reference.cr) {
            max_cr_distance = max_cr_distance.max((p - q).norm());
        }
    }
    if max_cr_distance > 1e-7 {
        return Err(Error::RigidityCounterexample(format!(
            "found a second Delaunay solution on the sphere (cross ratio distance {max_cr_distance:.3e})"
        )));
    }
    Ok(RigidityReport { trials, converged, max_cr_distance, max_radius_ratio_spread: None })
}

/// Circumradius of every base face at word 0.
fn radii(layout: &FamilyLayout, s: &TriangulatedSurface) -> Vec<f64> {
    (0..s.n_faces())
        .map(|f| {
            let off = s.corner_offsets(f);
            let v = s.face_vertices(f);
            let p: [ExtComplex; 3] = std::array::from_fn(|t| layout.lifted(v[t], off[t]).into());
            crate::moebius::circumcircle(p[0], p[1], p[2])
                .ok()
                .and_then(|c| c.radius())
                .unwrap_or(f64::NAN)
        })
        .collect()
}

/// Result of one damped Newton step in log-modulus coordinates.
#[derive(Debug, Clone)]
pub struct NewtonStep {
    pub x: Vec<f64>,
    pub residual_before: f64,
    pub residual_after: f64,
    /// Dimension of the kernel of the vertex-residual Jacobian at the new point.
    pub phi_kernel_dim: usize,
}

/// The augmented residual in log-modulus coordinates: vertex residual rows
/// followed by `log |alpha_r| - A_r` (or the parabolicity `tr^2 - 4` of both
/// generators at the Euclidean point). The holonomy is read from a
/// breadth-first layout that does not need to close.
pub fn augmented_residual(
    s: &TriangulatedSurface,
    theta: &AngleStructure,
    x: &[f64],
    a: [f64; 2],
    patch: &CoverPatch,
) -> Result<DVector<f64>> {
    let cr = exp_theta(x, theta);
    let mut rows = phi_real_rows(s, &cr);
    let opts = DevelopOptions { tolerate_gaps: true, ..Default::default() };
    let dev = develop(s, &cr, patch, &opts)?;
    let rho = crate::develop::holonomy_generators(&dev)?;
    if is_origin(a) {
        for m in &rho {
            let t = m.trace() * m.trace() - 4.0;
            rows.push(t.re);
            rows.push(t.im);
        }
    } else {
        let reference = if rho[0].fixed_points(0.0) == FixedPoints::Identity { 1 } else { 0 };
        let candidates: Vec<ExtComplex> = match rho[reference].fixed_points(0.0) {
            FixedPoints::Two(p, q) => vec![p, q],
            FixedPoints::One(p) => vec![p],
            FixedPoints::Identity => return Err(Error::Holonomy("trivial holonomy".into())),
        };
        let best = candidates
            .iter()
            .map(|&p| rho.map(|m| m.multiplier_at(p).norm().ln()))
            .min_by(|u, v| {
                let d = |w: &[f64; 2]| (w[0] - a[0]).powi(2) + (w[1] - a[1]).powi(2);
                d(u).total_cmp(&d(v))
            })
            .unwrap();
        rows.push(best[0] - a[0]);
        rows.push(best[1] - a[1]);
    }
    Ok(DVector::from_vec(rows))
}

/// One damped Gauss-Newton step on the augmented residual, accepted only if
/// the residual norm decreases (otherwise `x` is returned unchanged).
pub fn newton_step(
    s: &TriangulatedSurface,
    theta: &AngleStructure,
    x: &[f64],
    a: [f64; 2],
    patch: &CoverPatch,
) -> Result<NewtonStep> {
    let r0 = augmented_residual(s, theta, x, a, patch)?;
    let ne = x.len();
    let nphi = 3 * s.n_vertices();
    let mut j = DMatrix::zeros(r0.len(), ne);
    let jphi = phi_real_jacobian(s, &exp_theta(x, theta));
    j.rows_mut(0, nphi).copy_from(&jphi);
    let h = 1e-7;
    for e in 0..ne {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[e] += h;
        xm[e] -= h;
        let rp = augmented_residual(s, theta, &xp, a, patch)?;
        let rm = augmented_residual(s, theta, &xm, a, patch)?;
        for row in nphi..r0.len() {
            j[(row, e)] = (rp[row] - rm[row]) / (2.0 * h);
        }
    }
    let step = lstsq(&j, &(-&r0), 1e-12);
    let mut t = 1.0;
    let mut best = (x.to_vec(), r0.norm());
    for _ in 0..30 {
        let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + t * b).collect();
        if let Ok(rn) = augmented_residual(s, theta, &xn, a, patch) {
            if rn.norm() < r0.norm() {
                best = (xn, rn.norm());
                break;
            }
        }
        t *= 0.5;
    }
    let phi_kernel_dim = kernel(&phi_real_jacobian(s, &exp_theta(&best.0, theta)), 1e-8).dimension;
    Ok(NewtonStep { x: best.0, residual_before: r0.norm(), residual_after: best.1, phi_kernel_dim })
}

/// Planar starting layout of a sphere: face 0 is the outer face, the other
/// vertices sit at the average of their neighbours.
fn tutte_sphere(s: &TriangulatedSurface, jitter: Option<&mut ChaCha8Rng>) -> Result<FamilyLayout> {
    let nv = s.n_vertices();
    let outer = s.face_vertices(0);
    let mut fixed: Vec<Option<C64>> = vec![None; nv];
    for (k, &v) in outer.iter().enumerate() {
        // Clockwise in the plane: the outer face contains infinity.
        fixed[v] = Some(C64::from_polar(10.0, -TAU * k as f64 / 3.0 + PI / 2.0));
    }
    let free: Vec<usize> = (0..nv).filter(|&v| fixed[v].is_none()).collect();
    let col: Vec<Option<usize>> = {
        let mut c = vec![None; nv];
        for (i, &v) in free.iter().enumerate() {
            c[v] = Some(i);
        }
        c
    };
    let n = free.len();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DVector::from_element(n, C64::new(0.0, 0.0));
    for (i, &v) in free.iter().enumerate() {
        for h in s.outgoing(v) {
            let t = s.target(h);
            a[(i, i)] += 1.0;
            match col[t] {
                Some(j) => a[(i, j)] -= 1.0,
                None => b[i] += fixed[t].unwrap(),
            }
        }
    }
    let lu = a.lu();
    let re = lu
        .solve(&b.map(|z| z.re))
        .ok_or_else(|| Error::Numeric("singular planar embedding".into()))?;
    let im = lu.solve(&b.map(|z| z.im)).unwrap();
    let mut z: Vec<C64> = (0..nv).map(|v| fixed[v].unwrap_or(C64::new(0.0, 0.0))).collect();
    for (i, &v) in free.iter().enumerate() {
        z[v] = C64::new(re[i], im[i]);
    }
    if let Some(rng) = jitter {
        let spread = 0.2 * z.iter().map(|w| w.norm()).fold(0.0, f64::max) / (nv as f64).sqrt();
        for &v in &free {
            z[v] += C64::new(rng.gen_range(-spread..spread), rng.gen_range(-spread..spread));
        }
    }
    Ok(FamilyLayout { model: LayoutModel::Sphere, z, params: [0.0; 2] })
}

/// The Delaunay cross ratio system of a sphere with the given angles. With
/// `restart_seed`, the starting layout is randomly perturbed.
pub fn solve_sphere_pattern(
    s: &TriangulatedSurface,
    theta: &AngleStructure,
    restart_seed: Option<u64>,
    opts: &SolverOptions,
) -> Result<CrossRatioSystem> {
    if s.genus() != 0 {
        return Err(Error::UnsupportedGenus(s.genus()));
    }
    if opts.cycle_bound > 0 {
        if let Err(v) = validate_angle_structure(s, theta, opts.cycle_bound)? {
            return Err(Error::InvalidAngles(v.to_string()));
        }
    }
    let sts = stencils(s);
    let mut rng = restart_seed.map(ChaCha8Rng::seed_from_u64);
    let mut start = tutte_sphere(s, rng.as_mut())?;
    // Reject jitter that folds the starting layout.
    if rng.is_some() && !sphere_faces_consistent(s, &start) {
        start = tutte_sphere(s, None)?;
    }
    let out = solve_with_homotopy(start, &sts, &theta.theta, opts)?;
    let cr = CrossRatioSystem::new(
        sts.iter()
            .map(|st| stencil_cr(&out.layout, st).map(|(_, c)| c).ok_or_else(|| Error::Numeric("degenerate layout".into())))
            .collect::<Result<_>>()?,
    )?;
    let x = cr.log_moduli();
    let cr = exp_theta(&x, theta);
    if residual_norm(s, &cr) > 1e-10 {
        return Err(Error::Numeric("sphere solution has a large residual".into()));
    }
    if let Err(reason) = is_delaunay(s, &cr, opts.tolerances.zero_angle, 1e-9)? {
        return Err(Error::NotDelaunay(reason.to_string()));
    }
    Ok(cr)
}

fn sphere_faces_consistent(s: &TriangulatedSurface, layout: &FamilyLayout) -> bool {
    (1..s.n_faces()).all(|f| {
        let v = s.face_vertices(f);
        crate::moebius::orientation(layout.z[v[0]], layout.z[v[1]], layout.z[v[2]]) > 0.0
    })
}

/// Real kernel dimension of the linearized system at a solution.
pub fn hqd_dimension(s: &TriangulatedSurface, cr: &CrossRatioSystem, rank_tol: f64) -> Result<usize> {
    Ok(kernel_basis(&hqd_system_cr_form(s, cr, None, Field::Real)?, rank_tol).dimension)
}

/// Adds a random perturbation of size `eps` to the angles that keeps every
/// vertex sum fixed (projection onto the kernel of the vertex-sum map).
pub fn perturb_angles(s: &TriangulatedSurface, theta: &AngleStructure, eps: f64, seed: u64) -> AngleStructure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ne = s.n_edges();
    let nv = s.n_vertices();
    let mut m = DMatrix::zeros(nv, ne);
    for v in 0..nv {
        for e in star_edges(s, v) {
            m[(v, e)] += 1.0;
        }
    }
    let d = DVector::from_fn(ne, |_, _| rng.gen_range(-eps..eps));
    // d - M^T (M M^T)^+ M d
    let y = lstsq(&(&m * m.transpose()), &(&m * &d), 1e-12);
    let p = &d - m.transpose() * y;
    AngleStructure { theta: theta.theta.iter().zip(p.iter()).map(|(t, dp)| t + dp).collect() }
}

/// Möbius map normalizing three reference points, for comparing sphere
/// systems by their layouts.
pub fn normalize_three(points: [ExtComplex; 3]) -> Result<crate::moebius::MoebiusMap> {
    moebius_through(points, [ExtComplex::new(0.0, 0.0), ExtComplex::new(1.0, 0.0), ExtComplex::Infinity])
}

/// Patch used for sphere layouts.
pub fn sphere_layout_patch(s: &TriangulatedSurface) -> CoverPatch {
    sphere_patch(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{one_vertex_torus, regular_torus};
    use std::f64::consts::FRAC_PI_3;

    fn quick() -> SolverOptions {
        SolverOptions { cycle_bound: 6, ..Default::default() }
    }

    #[test]
    fn equilateral_origin() {
        let s = regular_torus(2, 2);
        let theta = AngleStructure::constant(s.n_edges(), FRAC_PI_3);
        let p = solve_pattern(&s, &theta, [0.0, 0.0], None, &quick()).unwrap();
        assert!(p.x.iter().all(|x| x.abs() < 1e-10));
        assert!(p.modulus.euclidean);
        assert!((p.modulus.tau - C64::from_polar(1.0, FRAC_PI_3)).norm() < 1e-9, "{}", p.modulus.tau);
    }

    #[test]
    fn one_vertex_case_a() {
        let s = one_vertex_torus();
        let theta = AngleStructure::constant(3, FRAC_PI_3);
        let p = solve_pattern(&s, &theta, [0.0, 0.0], None, &quick()).unwrap();
        let prod: C64 = p.cr.cr.iter().product();
        assert!((prod + 1.0).norm() < 1e-10);
    }

    #[test]
    fn affine_target_round_trip() {
        let s = regular_torus(2, 2);
        let theta = AngleStructure::constant(s.n_edges(), FRAC_PI_3);
        let p = solve_pattern(&s, &theta, [0.5, -0.3], None, &quick()).unwrap();
        assert_eq!(p.holonomy.kind, HolonomyType::StretchRotation);
        assert!((p.modulus.h[0].re - 0.5).abs() < 1e-8, "{:?}", p.modulus.h);
        let h2 = if p.modulus.generator2_reversed { -p.modulus.h[1] } else { p.modulus.h[1] };
        assert!((h2.re + 0.3).abs() < 1e-8, "{:?}", p.modulus.h);
        assert_eq!(hqd_dimension(&s, &p.cr, 1e-8).unwrap(), 2);
    }

    #[test]
    fn newton_step_at_solution_is_zero() {
        let s = regular_torus(2, 2);
        let theta = AngleStructure::constant(s.n_edges(), FRAC_PI_3);
        let p = solve_pattern(&s, &theta, [0.5, 0.2], None, &quick()).unwrap();
        let patch = lift_patch(&s, 0..=1, 0..=1).unwrap();
        let step = newton_step(&s, &theta, &p.x, [0.5, 0.2], &patch).unwrap();
        assert!(step.residual_before < 1e-9, "{}", step.residual_before);
        let moved: f64 = step.x.iter().zip(&p.x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(moved < 1e-8);
        assert_eq!(step.phi_kernel_dim, 2);
        // From a perturbed start the residual decreases.
        let xp: Vec<f64> = p.x.iter().enumerate().map(|(e, x)| x + 1e-3 * ((e * 7 % 5) as f64 - 2.0)).collect();
        let step = newton_step(&s, &theta, &xp, [0.5, 0.2], &patch).unwrap();
        assert!(step.residual_after < step.residual_before);
    }

    #[test]
    fn perturbed_angles_keep_vertex_sums() {
        let s = regular_torus(3, 3);
        let theta = AngleStructure::constant(s.n_edges(), FRAC_PI_3);
        let t = perturb_angles(&s, &theta, 0.05, 3);
        for v in 0..s.n_vertices() {
            let sum: f64 = star_edges(&s, v).iter().map(|&e| t.theta[e]).sum();
            assert!((sum - TAU).abs() < 1e-12);
        }
    }

    #[test]
    fn icosahedron_sphere_matches_reference() {
        let f = crate::fixtures::icosahedron_sphere().unwrap();
        let theta = f.theta.clone().unwrap();
        let cr = solve_sphere_pattern(&f.surface, &theta, None, &quick()).unwrap();
        let reference = f.cr.unwrap();
        for (a, b) in cr.cr.iter().zip(&reference.cr) {
            assert!((a - b).norm() < 1e-9, "{a} {b}");
        }
        assert_eq!(hqd_dimension(&f.surface, &cr, 1e-8).unwrap(), 0);
        for seed in 0..3 {
            let again = solve_sphere_pattern(&f.surface, &theta, Some(seed), &quick()).unwrap();
            for (a, b) in again.cr.iter().zip(&cr.cr) {
                assert!((a - b).norm() < 1e-7);
            }
        }
    }

    #[test]
    fn perturbed_sphere_angles_solve() {
        let f = crate::fixtures::icosahedron_sphere().unwrap();
        let theta = perturb_angles(&f.surface, f.theta.as_ref().unwrap(), 0.1, 7);
        let cr = solve_sphere_pattern(&f.surface, &theta, None, &quick()).unwrap();
        for (a, t) in cr.arguments().iter().zip(&theta.theta) {
            assert!((a - t).abs() < 1e-10);
        }
    }

    #[test]
    fn ray_to_three() {
        let s = regular_torus(2, 2);
        let theta = AngleStructure::constant(s.n_edges(), FRAC_PI_3);
        let p = solve_pattern(&s, &theta, [3.0, 0.0], None, &quick()).unwrap();
        assert!((p.holonomy.alpha[0].norm() - 3f64.exp()).abs() < 1e-6 * 3f64.exp());
    }

    #[test]
    fn closed_loop() {
        let s = regular_torus(2, 2);
        let theta = AngleStructure::constant(s.n_edges(), FRAC_PI_3);
        let path = continuation_path(&s, &theta, &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]], &quick()).unwrap();
        let d: f64 = path[0].x.iter().zip(&path[4].x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(d < 1e-7);
        let direct = solve_pattern(&s, &theta, [1.0, 1.0], None, &quick()).unwrap();
        let d: f64 = path[2].x.iter().zip(&direct.x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(d < 1e-7, "{d}");
    }

    #[test]
    fn rigidity_small() {
        let s = regular_torus(2, 2);
        let theta = AngleStructure::constant(s.n_edges(), FRAC_PI_3);
        let r = rigidity_check(&s, &theta, [0.7, -0.2], 5, 1, &quick()).unwrap();
        assert!(r.converged > 0);
        assert!(r.max_radius_ratio_spread.unwrap() < 1e-7, "{r:?}");
    }
}
