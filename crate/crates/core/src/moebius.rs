//! Points of the Riemann sphere, Möbius transformations, cross ratios and
//! circumcircles.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative threshold under which two points are considered coincident.
const COINCIDENT: f64 = 1e-13;

/// A point of the extended complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtComplex {
    Finite(C64),
    Infinity,
}

impl ExtComplex {
    pub fn new(re: f64, im: f64) -> Self {
        ExtComplex::Finite(C64::new(re, im))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtComplex::Infinity)
    }

    pub fn finite(&self) -> Option<C64> {
        match *self {
            ExtComplex::Finite(z) => Some(z),
            ExtComplex::Infinity => None,
        }
    }

    /// `1/z` on the sphere: `1/0 = inf`, `1/inf = 0`.
    pub fn recip(&self) -> Self {
        match *self {
            ExtComplex::Infinity => ExtComplex::Finite(C64::new(0.0, 0.0)),
            ExtComplex::Finite(z) if z.norm() == 0.0 => ExtComplex::Infinity,
            ExtComplex::Finite(z) => ExtComplex::Finite(z.inv()),
        }
    }

    /// Coincidence on the sphere, relative to the magnitude of the points.
    pub fn coincides(&self, other: &ExtComplex, tol: f64) -> bool {
        match (self, other) {
            (ExtComplex::Infinity, ExtComplex::Infinity) => true,
            (ExtComplex::Finite(a), ExtComplex::Finite(b)) => {
                (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
            }
            // A huge finite value is close to infinity on the sphere.
            (ExtComplex::Finite(a), ExtComplex::Infinity)
            | (ExtComplex::Infinity, ExtComplex::Finite(a)) => a.norm() * tol > 1.0,
        }
    }

    /// Chordal distance on the Riemann sphere of diameter one.
    pub fn chordal_distance(&self, other: &ExtComplex) -> f64 {
        match (self, other) {
            (ExtComplex::Infinity, ExtComplex::Infinity) => 0.0,
            (ExtComplex::Finite(a), ExtComplex::Infinity)
            | (ExtComplex::Infinity, ExtComplex::Finite(a)) => 1.0 / (1.0 + a.norm_sqr()).sqrt(),
            (ExtComplex::Finite(a), ExtComplex::Finite(b)) => {
                (a - b).norm() / ((1.0 + a.norm_sqr()).sqrt() * (1.0 + b.norm_sqr()).sqrt())
            }
        }
    }
}

impl From<C64> for ExtComplex {
    fn from(z: C64) -> Self {
        ExtComplex::Finite(z)
    }
}

impl fmt::Display for ExtComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtComplex::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            ExtComplex::Infinity => write!(f, "inf"),
        }
    }
}

// JSON: finite points as `[re, im]`, infinity as the string "inf".
impl Serialize for ExtComplex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtComplex::Finite(z) => [z.re, z.im].serialize(s),
            ExtComplex::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Pair([f64; 2]),
            Tag(String),
        }
        match Repr::deserialize(d)? {
            Repr::Pair([re, im]) => Ok(ExtComplex::new(re, im)),
            Repr::Tag(s) if s == "inf" => Ok(ExtComplex::Infinity),
            Repr::Tag(s) => Err(serde::de::Error::custom(format!("bad point {s:?}"))),
        }
    }
}

/// Fixed-point structure of a Möbius map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FixedPoints {
    Identity,
    /// Parabolic: a single (double) fixed point.
    One(ExtComplex),
    Two(ExtComplex, ExtComplex),
}

/// `z -> (az + b)/(cz + d)`, stored with `ad - bc = 1`.
///
/// The matrix is only defined up to sign, so comparisons go through
/// [`MoebiusMap::approx_eq`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoebiusMap {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl MoebiusMap {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if !(det.norm() > 1e-300) || det.norm() <= 1e-24 * scale * scale {
            return Err(Error::Degenerate("Möbius matrix is singular".into()));
        }
        let s = det.sqrt().inv();
        Ok(Self {
            a: a * s,
            b: b * s,
            c: c * s,
            d: d * s,
        })
    }

    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self {
            a: one,
            b: zero,
            c: zero,
            d: one,
        }
    }

    /// `z -> alpha z + beta`.
    pub fn affine(alpha: C64, beta: C64) -> Result<Self> {
        Self::new(alpha, beta, C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn apply(&self, z: ExtComplex) -> ExtComplex {
        match z {
            ExtComplex::Infinity => {
                if self.c.norm() == 0.0 {
                    ExtComplex::Infinity
                } else {
                    ExtComplex::Finite(self.a / self.c)
                }
            }
            ExtComplex::Finite(z) => {
                let num = self.a * z + self.b;
                let den = self.c * z + self.d;
                if den.norm() == 0.0 || den.norm() <= 1e-300 * num.norm() {
                    ExtComplex::Infinity
                } else {
                    ExtComplex::Finite(num / den)
                }
            }
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MoebiusMap) -> MoebiusMap {
        MoebiusMap {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn inverse(&self) -> MoebiusMap {
        MoebiusMap {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// `m ∘ self ∘ m⁻¹`.
    pub fn conjugate_by(&self, m: &MoebiusMap) -> MoebiusMap {
        m.compose(self).compose(&m.inverse())
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    pub fn max_entry(&self) -> f64 {
        self.a.norm().max(self.b.norm()).max(self.c.norm()).max(self.d.norm())
    }

    /// Equality in PSL(2, C): entries agree up to a global sign.
    pub fn approx_eq(&self, other: &MoebiusMap, tol: f64) -> bool {
        self.distance(other) <= tol
    }

    /// Max-entry distance in PSL(2, C), relative to the entry scale.
    pub fn distance(&self, other: &MoebiusMap) -> f64 {
        let diff = |s: f64| {
            [
                self.a - other.a * s,
                self.b - other.b * s,
                self.c - other.c * s,
                self.d - other.d * s,
            ]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
        };
        let scale = self.max_entry().max(other.max_entry()).max(1.0);
        diff(1.0).min(diff(-1.0)) / scale
    }

    /// Derivative at a fixed point, i.e. the multiplier of the map there.
    pub fn multiplier_at(&self, p: ExtComplex) -> C64 {
        match p {
            ExtComplex::Finite(p) => (self.c * p + self.d).powi(2).inv(),
            // In the chart w = 1/z the map is w -> (d/a) w + O(w^2) when c = 0.
            ExtComplex::Infinity => self.d / self.a,
        }
    }

    /// Fixed points, with parabolic detection on `|tr^2 - 4| < parabolic_tol`.
    pub fn fixed_points(&self, parabolic_tol: f64) -> FixedPoints {
        let scale = self.max_entry();
        let tiny = 1e-12 * scale.max(1.0);
        if self.b.norm() <= tiny && self.c.norm() <= tiny && (self.a - self.d).norm() <= tiny {
            return FixedPoints::Identity;
        }
        let tr = self.trace();
        let disc = tr * tr - C64::new(4.0, 0.0);
        if disc.norm() < parabolic_tol {
            let mu = tr * 0.5;
            return FixedPoints::One(self.eigen_point(mu));
        }
        let root = disc.sqrt();
        let mu_plus = (tr + root) * 0.5;
        let mu_minus = (tr - root) * 0.5;
        FixedPoints::Two(self.eigen_point(mu_plus), self.eigen_point(mu_minus))
    }

    /// Projective point of an eigenvector for eigenvalue `mu`.
    fn eigen_point(&self, mu: C64) -> ExtComplex {
        // Two candidate eigenvectors: (b, mu - a) and (mu - d, c).
        let v1 = (self.b, mu - self.a);
        let v2 = (mu - self.d, self.c);
        let n1 = v1.0.norm() + v1.1.norm();
        let n2 = v2.0.norm() + v2.1.norm();
        let (x, y) = if n1 >= n2 { v1 } else { v2 };
        if y.norm() <= 1e-10 * x.norm() {
            ExtComplex::Infinity
        } else {
            ExtComplex::Finite(x / y)
        }
    }
}

impl fmt::Display for MoebiusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z -> ({}z + {})/({}z + {})", self.a, self.b, self.c, self.d)
    }
}

fn sub(a: C64, b: C64) -> C64 {
    a - b
}

fn too_close(a: C64, b: C64) -> bool {
    (a - b).norm() <= COINCIDENT * (1.0 + a.norm().max(b.norm()))
}

/// The signed cross ratio of an edge `ij` with left apex `k` and right apex `l`:
///
/// `cr = -((z_k - z_i)(z_l - z_j)) / ((z_i - z_l)(z_j - z_k))`.
///
/// At most one argument may be infinite; its two factors cancel to `-1`.
pub fn cross_ratio(zi: ExtComplex, zj: ExtComplex, zk: ExtComplex, zl: ExtComplex) -> Result<C64> {
    let pts = [zi, zj, zk, zl];
    let n_inf = pts.iter().filter(|p| p.is_infinite()).count();
    if n_inf > 1 {
        return Err(Error::Degenerate("more than one point at infinity".into()));
    }
    for (x, y, what) in [
        (zi, zl, "z_i = z_l"),
        (zj, zk, "z_j = z_k"),
        (zi, zk, "z_i = z_k"),
        (zj, zl, "z_j = z_l"),
    ] {
        if let (ExtComplex::Finite(x), ExtComplex::Finite(y)) = (x, y) {
            if too_close(x, y) {
                return Err(Error::Degenerate(format!("coincident points: {what}")));
            }
        }
    }
    let f = |p: ExtComplex| p.finite();
    let value = match (f(zi), f(zj), f(zk), f(zl)) {
        (Some(i), Some(j), Some(k), Some(l)) => {
            -(sub(k, i) * sub(l, j)) / (sub(i, l) * sub(j, k))
        }
        // Drop the two factors containing the infinite point, times -1.
        (None, Some(j), Some(k), Some(l)) => sub(l, j) / sub(j, k),
        (Some(i), None, Some(k), Some(l)) => sub(k, i) / sub(i, l),
        (Some(i), Some(j), None, Some(l)) => sub(l, j) / sub(i, l),
        (Some(i), Some(j), Some(k), None) => sub(k, i) / sub(j, k),
        _ => unreachable!(),
    };
    if !value.is_finite() || value.norm() == 0.0 {
        return Err(Error::Degenerate("cross ratio is zero or infinite".into()));
    }
    Ok(value)
}

/// The unique `z_l` with `cross_ratio(z_i, z_j, z_k, z_l) = cr`.
pub fn solve_fourth_point(cr: C64, zi: ExtComplex, zj: ExtComplex, zk: ExtComplex) -> Result<ExtComplex> {
    if !(cr.norm() > 0.0) || !cr.is_finite() {
        return Err(Error::Degenerate("cross ratio must be nonzero and finite".into()));
    }
    // Send (z_i, z_j, z_k) to (inf, 0, 1); there cr = -w_l.
    let inf = ExtComplex::Infinity;
    let zero = ExtComplex::new(0.0, 0.0);
    let one = ExtComplex::new(1.0, 0.0);
    let m = moebius_through([zi, zj, zk], [inf, zero, one])?;
    let wl = ExtComplex::Finite(-cr);
    Ok(m.inverse().apply(wl))
}

/// Möbius map sending `(z1, z2, z3)` to `(0, 1, inf)`.
fn to_zero_one_inf(z: [ExtComplex; 3]) -> Result<MoebiusMap> {
    for (s, t) in [(0, 1), (1, 2), (0, 2)] {
        if z[s].coincides(&z[t], COINCIDENT) {
            return Err(Error::Degenerate(format!("points {s} and {t} coincide")));
        }
    }
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let (a, b, c, d) = match (z[0].finite(), z[1].finite(), z[2].finite()) {
        (Some(z1), Some(z2), Some(z3)) => {
            // (z - z1)(z2 - z3) / ((z - z3)(z2 - z1))
            let p = z2 - z3;
            let q = z2 - z1;
            (p, -z1 * p, q, -z3 * q)
        }
        // z1 = inf: (z2 - z3)/(z - z3)
        (None, Some(z2), Some(z3)) => (zero, z2 - z3, one, -z3),
        // z2 = inf: (z - z1)/(z - z3)
        (Some(z1), None, Some(z3)) => (one, -z1, one, -z3),
        // z3 = inf: (z - z1)/(z2 - z1)
        (Some(z1), Some(z2), None) => (one, -z1, zero, z2 - z1),
        _ => return Err(Error::Degenerate("two points at infinity".into())),
    };
    MoebiusMap::new(a, b, c, d)
}

/// The unique Möbius map with `p[t] -> q[t]` for `t = 0, 1, 2`.
pub fn moebius_through(p: [ExtComplex; 3], q: [ExtComplex; 3]) -> Result<MoebiusMap> {
    let mp = to_zero_one_inf(p)?;
    let mq = to_zero_one_inf(q)?;
    let m = mq.inverse().compose(&mp);
    MoebiusMap::new(m.a, m.b, m.c, m.d)
}

/// An oriented circle through three points, or the line case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Circumcircle {
    /// `ccw` is the turning of the generating triple; the positively
    /// oriented disk is the bounded one exactly when `ccw` holds.
    Circle { center: C64, radius: f64, ccw: bool },
    /// Collinear triple or a triple through infinity.
    Line { point: C64, direction: C64 },
}

impl Circumcircle {
    pub fn center(&self) -> Option<C64> {
        match self {
            Circumcircle::Circle { center, .. } => Some(*center),
            Circumcircle::Line { .. } => None,
        }
    }

    pub fn radius(&self) -> Option<f64> {
        match self {
            Circumcircle::Circle { radius, .. } => Some(*radius),
            Circumcircle::Line { .. } => None,
        }
    }

    /// Whether `z` lies strictly inside the positively oriented disk, with a
    /// relative margin `tol` (points on the circle are outside).
    pub fn disk_contains(&self, z: C64, tol: f64) -> bool {
        match *self {
            Circumcircle::Circle { center, radius, ccw } => {
                let d = (z - center).norm();
                if ccw {
                    d < radius * (1.0 - tol)
                } else {
                    d > radius * (1.0 + tol)
                }
            }
            Circumcircle::Line { point, direction } => {
                // Left half-plane of the directed line.
                let side = (direction.conj() * (z - point)).im;
                side > tol * direction.norm() * (1.0 + (z - point).norm())
            }
        }
    }
}

/// Circumcircle through `z_i, z_j, z_k` in this cyclic order.
pub fn circumcircle(zi: ExtComplex, zj: ExtComplex, zk: ExtComplex) -> Result<Circumcircle> {
    let pts = [zi, zj, zk];
    for (s, t) in [(0, 1), (1, 2), (0, 2)] {
        if pts[s].coincides(&pts[t], COINCIDENT) {
            return Err(Error::Degenerate("circumcircle of coincident points".into()));
        }
    }
    match (zi.finite(), zj.finite(), zk.finite()) {
        (Some(a), Some(b), Some(c)) => Ok(circle_from_finite(a, b, c)),
        // Through infinity: the line through the two finite points, directed
        // along the cyclic order.
        (None, Some(b), Some(c)) => Ok(Circumcircle::Line { point: b, direction: c - b }),
        (Some(a), None, Some(c)) => Ok(Circumcircle::Line { point: c, direction: a - c }),
        (Some(a), Some(b), None) => Ok(Circumcircle::Line { point: a, direction: b - a }),
        _ => Err(Error::Degenerate("two points at infinity".into())),
    }
}

fn circle_from_finite(a: C64, b: C64, c: C64) -> Circumcircle {
    let u = b - a;
    let v = c - a;
    let cross = (u.conj() * v).im;
    let scale = u.norm() * v.norm();
    if cross.abs() <= 1e-14 * scale {
        return Circumcircle::Line { point: a, direction: b - a };
    }
    let center_rel = (v * u.norm_sqr() - u * v.norm_sqr()) * C64::new(0.0, -1.0) / (2.0 * cross);
    let center = a + center_rel;
    Circumcircle::Circle {
        center,
        radius: center_rel.norm(),
        ccw: cross > 0.0,
    }
}

/// Signed orientation of a finite triangle: positive when counterclockwise.
pub fn orientation(a: C64, b: C64, c: C64) -> f64 {
    ((b - a).conj() * (c - a)).im
}

/// Stereographic projection of `p` on the sphere of radius `|pole|` from
/// `pole` onto the plane through the origin orthogonal to `pole`.
///
/// The plane carries the frame `(e1, e2)` with `e1` the projection of the
/// first coordinate axis not parallel to `pole`, and `e2 = n × e1`.
pub fn stereographic(p: [f64; 3], pole: [f64; 3]) -> ExtComplex {
    let r = norm3(pole);
    let n = [pole[0] / r, pole[1] / r, pole[2] / r];
    let axis = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let k = dot3(axis, n);
    let e1 = {
        let t = [axis[0] - k * n[0], axis[1] - k * n[1], axis[2] - k * n[2]];
        let m = norm3(t);
        [t[0] / m, t[1] / m, t[2] / m]
    };
    let e2 = [
        n[1] * e1[2] - n[2] * e1[1],
        n[2] * e1[0] - n[0] * e1[2],
        n[0] * e1[1] - n[1] * e1[0],
    ];
    let h = dot3(p, n);
    let denom = r - h;
    if denom.abs() <= 1e-14 * r {
        return ExtComplex::Infinity;
    }
    let s = r / denom;
    ExtComplex::new(dot3(p, e1) * s, dot3(p, e2) * s)
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> ExtComplex {
        ExtComplex::new(re, im)
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    const S3: f64 = 0.866_025_403_784_438_6; // sqrt(3)/2

    #[test]
    fn square_diagonal_cross_ratio_is_one() {
        let cr = cross_ratio(c(0.0, 0.0), c(1.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)).unwrap();
        assert!(close(cr, C64::new(1.0, 0.0), 1e-14), "{cr}");
    }

    #[test]
    fn rhombus_cross_ratio() {
        let cr = cross_ratio(c(0.0, 0.0), c(1.0, 0.0), c(0.5, S3), c(0.5, -S3)).unwrap();
        let expected = C64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
        assert!(close(cr, expected, 1e-14), "{cr}");
    }

    #[test]
    fn infinite_apex_limit() {
        // With z_i at infinity the cross ratio is (z_l - z_j)/(z_j - z_k).
        let (zj, zk, zl) = (C64::new(0.3, 0.1), C64::new(-1.0, 2.0), C64::new(2.0, -0.5));
        let cr = cross_ratio(ExtComplex::Infinity, zj.into(), zk.into(), zl.into()).unwrap();
        assert!(close(cr, (zl - zj) / (zj - zk), 1e-14));
        // Same value as the limit of a far away finite point.
        let far = cross_ratio(c(1e9, 1e9), zj.into(), zk.into(), zl.into()).unwrap();
        assert!(close(cr, far, 1e-7));
    }

    #[test]
    fn degenerate_cross_ratio_is_an_error() {
        let z = c(0.0, 0.0);
        assert!(cross_ratio(z, c(1.0, 0.0), c(0.0, 1.0), z).is_err());
        assert!(cross_ratio(z, c(1.0, 0.0), c(1.0, 0.0), c(2.0, 1.0)).is_err());
    }

    #[test]
    fn fourth_point_examples() {
        let l = solve_fourth_point(C64::new(1.0, 0.0), c(0.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)).unwrap();
        assert!(l.coincides(&c(1.0, 0.0), 1e-12), "{l}");
        let w = C64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
        let l = solve_fourth_point(w, c(0.0, 0.0), c(1.0, 0.0), c(0.5, S3)).unwrap();
        assert!(l.coincides(&c(0.5, -S3), 1e-12), "{l}");
        assert!(solve_fourth_point(C64::new(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.5, S3)).is_err());
    }

    #[test]
    fn moebius_through_examples() {
        let inf = ExtComplex::Infinity;
        let p = [c(0.0, 0.0), c(1.0, 0.0), inf];
        let id = moebius_through(p, p).unwrap();
        assert!(id.approx_eq(&MoebiusMap::identity(), 1e-14));
        let inv = moebius_through(p, [inf, c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let expected = MoebiusMap::new(
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
        )
        .unwrap();
        assert!(inv.approx_eq(&expected, 1e-14), "{inv}");
    }

    #[test]
    fn circumcircle_examples() {
        match circumcircle(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)).unwrap() {
            Circumcircle::Circle { center, radius, ccw } => {
                assert!(close(center, C64::new(0.5, 0.5), 1e-14));
                assert!((radius - 0.5f64.sqrt()).abs() < 1e-14);
                assert!(ccw);
            }
            other => panic!("{other:?}"),
        }
        match circumcircle(c(0.0, 0.0), c(1.0, 0.0), c(0.5, S3)).unwrap() {
            Circumcircle::Circle { center, radius, .. } => {
                assert!(close(center, C64::new(0.5, 3f64.sqrt() / 6.0), 1e-14));
                assert!((radius - 3f64.sqrt() / 3.0).abs() < 1e-14);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            circumcircle(c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)).unwrap(),
            Circumcircle::Line { .. }
        ));
        let cw = circumcircle(c(0.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)).unwrap();
        assert!(matches!(cw, Circumcircle::Circle { ccw: false, .. }));
    }

    #[test]
    fn stereographic_examples() {
        let r = 5f64.sqrt();
        let pole = [0.0, 0.0, r];
        assert!(stereographic([0.0, 0.0, -r], pole).coincides(&c(0.0, 0.0), 1e-14));
        let eq = stereographic([r, 0.0, 0.0], pole).finite().unwrap();
        assert!((eq.norm() - r).abs() < 1e-14);
        assert!(stereographic([1.0, -2.0, 0.0], pole).coincides(&c(1.0, -2.0), 1e-14));
        assert!(stereographic(pole, pole).is_infinite());
    }

    #[test]
    fn fixed_points_and_multipliers() {
        let m = MoebiusMap::affine(C64::new(2.0, 1.0), C64::new(1.0, 0.0)).unwrap();
        match m.fixed_points(1e-10) {
            FixedPoints::Two(p, q) => {
                let (fin, inf) = if p.is_infinite() { (q, p) } else { (p, q) };
                assert!(inf.is_infinite());
                let z = fin.finite().unwrap();
                assert!(close(z, -C64::new(1.0, 0.0) / C64::new(1.0, 1.0), 1e-12));
                assert!(close(m.multiplier_at(fin), C64::new(2.0, 1.0), 1e-12));
                assert!(close(m.multiplier_at(inf), C64::new(2.0, 1.0).inv(), 1e-12));
            }
            other => panic!("{other:?}"),
        }
        let t = MoebiusMap::affine(C64::new(1.0, 0.0), C64::new(0.0, 3.0)).unwrap();
        assert_eq!(t.fixed_points(1e-10), FixedPoints::One(ExtComplex::Infinity));
        assert_eq!(MoebiusMap::identity().fixed_points(1e-10), FixedPoints::Identity);
    }
}
