//! Spheres, circles, inversions, and the Möbius inner product.
//!
//! A surface is stored as the projective 5-vector `(a, b, c)` of the equation
//! `a·|x|² + ⟨b, x⟩ + c = 0`. Planes are the `a = 0` case, so one type covers
//! everything an inversion can produce.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vec3 = Vector3<f64>;

/// Relative tolerance for up-to-scale sphere equality.
pub const SPHERE_EQ_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("sphere radius must be positive (got {0})")]
    NonPositiveRadius(f64),
    #[error("cannot invert the center of the inversion sphere")]
    CenterSingularity,
    #[error("the surfaces do not intersect")]
    Disjoint,
    #[error("the surfaces meet in a single point")]
    Tangent,
    #[error("the surfaces are projectively identical")]
    Identical,
    #[error("points are coincident")]
    CoincidentPoints,
    #[error("operation requires a real sphere")]
    NotARealSphere,
}

/// The equation `a·|x|² + ⟨b, x⟩ + c = 0`, defined up to a nonzero factor.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(from = "SphereEqJson", into = "SphereEqJson")]
pub struct SphereEq {
    pub a: f64,
    pub b: Vec3,
    pub c: f64,
}

#[derive(Serialize, Deserialize)]
struct SphereEqJson {
    a: f64,
    b: [f64; 3],
    c: f64,
}

impl From<SphereEqJson> for SphereEq {
    fn from(j: SphereEqJson) -> Self {
        SphereEq::new(j.a, Vec3::from(j.b), j.c)
    }
}

impl From<SphereEq> for SphereEqJson {
    fn from(s: SphereEq) -> Self {
        SphereEqJson { a: s.a, b: [s.b.x, s.b.y, s.b.z], c: s.c }
    }
}

/// Classification of the point set of a sphere equation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SphereGeometry {
    Plane { normal: Vec3, offset: f64 },
    RealSphere { center: Vec3, radius: f64 },
    PointSphere { center: Vec3 },
    /// Negative discriminant (or the degenerate all-constant equation):
    /// no real points.
    Imaginary,
}

impl SphereEq {
    pub fn new(a: f64, b: Vec3, c: f64) -> Self {
        SphereEq { a, b, c }
    }

    /// The sphere `|x − center| = radius` as an equation with `a = 1`.
    pub fn from_center_radius(center: Vec3, radius: f64) -> Result<Self, GeomError> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(GeomError::NonPositiveRadius(radius));
        }
        Ok(SphereEq::new(1.0, -2.0 * center, center.norm_squared() - radius * radius))
    }

    /// The plane `⟨normal, x⟩ + offset = 0`.
    pub fn plane(normal: Vec3, offset: f64) -> Self {
        SphereEq::new(0.0, normal, offset)
    }

    /// Evaluates the defining polynomial at `x`; zero exactly on the surface.
    pub fn eval(&self, x: Vec3) -> f64 {
        self.a * x.norm_squared() + self.b.dot(&x) + self.c
    }

    /// Gradient of the defining polynomial at `x`.
    pub fn gradient(&self, x: Vec3) -> Vec3 {
        2.0 * self.a * x + self.b
    }

    /// The discriminant `|b|² − 4ac`; equals `mobius_inner(self, self)`.
    pub fn disc(&self) -> f64 {
        self.b.norm_squared() - 4.0 * self.a * self.c
    }

    /// Euclidean norm of the coefficient 5-vector.
    pub fn norm5(&self) -> f64 {
        (self.a * self.a + self.b.norm_squared() + self.c * self.c).sqrt()
    }

    /// Scales the coefficient vector to unit norm (sign untouched).
    pub fn normalized(&self) -> SphereEq {
        let n = self.norm5();
        SphereEq::new(self.a / n, self.b / n, self.c / n)
    }

    /// Up-to-scale equality with relative tolerance [`SPHERE_EQ_TOL`].
    pub fn approx_eq(&self, other: &SphereEq) -> bool {
        let u = self.normalized();
        let v = other.normalized();
        let dot = u.a * v.a + u.b.dot(&v.b) + u.c * v.c;
        let s = if dot >= 0.0 { 1.0 } else { -1.0 };
        let d = ((u.a - s * v.a).powi(2)
            + (u.b - s * v.b).norm_squared()
            + (u.c - s * v.c).powi(2))
        .sqrt();
        d <= 16.0 * SPHERE_EQ_TOL
    }

    /// Classifies the point set of the equation.
    pub fn geometry(&self) -> SphereGeometry {
        let scale = self.norm5();
        let disc = self.disc();
        if self.a.abs() <= SPHERE_EQ_TOL * scale {
            let bn = self.b.norm();
            if bn <= SPHERE_EQ_TOL * scale {
                // a = b = 0: the constant equation c = 0 has no real points.
                return SphereGeometry::Imaginary;
            }
            return SphereGeometry::Plane { normal: self.b / bn, offset: self.c / bn };
        }
        let center = -self.b / (2.0 * self.a);
        let tol = SPHERE_EQ_TOL * scale * scale;
        if disc > tol {
            SphereGeometry::RealSphere { center, radius: disc.sqrt() / (2.0 * self.a.abs()) }
        } else if disc < -tol {
            SphereGeometry::Imaginary
        } else {
            SphereGeometry::PointSphere { center }
        }
    }
}

/// Signature-(4,1) bilinear form `b·b' − 2(ac' + a'c)`; zero iff the two
/// surfaces are orthogonal.
pub fn mobius_inner(s: &SphereEq, t: &SphereEq) -> f64 {
    s.b.dot(&t.b) - 2.0 * (s.a * t.c + t.a * s.c)
}

/// `|x − q|² − r²` for a real sphere: positive outside, negative inside.
pub fn power_of_point(s: &SphereEq, x: Vec3) -> Result<f64, GeomError> {
    match s.geometry() {
        SphereGeometry::RealSphere { .. } => Ok(s.eval(x) / s.a),
        _ => Err(GeomError::NotARealSphere),
    }
}

/// Inversion in the sphere of the given center and radius.
#[derive(Clone, Copy, Debug)]
pub struct Inversion {
    pub center: Vec3,
    pub radius: f64,
}

impl Inversion {
    pub fn new(center: Vec3, radius: f64) -> Result<Self, GeomError> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(GeomError::NonPositiveRadius(radius));
        }
        Ok(Inversion { center, radius })
    }

    pub fn unit(center: Vec3) -> Self {
        Inversion { center, radius: 1.0 }
    }

    /// `x ↦ q + r²(x − q)/|x − q|²`; involutive, fixes the inversion sphere.
    pub fn apply(&self, x: Vec3) -> Result<Vec3, GeomError> {
        let w = x - self.center;
        let d2 = w.norm_squared();
        if d2 == 0.0 {
            return Err(GeomError::CenterSingularity);
        }
        Ok(self.center + (self.radius * self.radius / d2) * w)
    }

    /// Image of a sphere equation. Translation, scaling, and the unit
    /// inversion at the origin all act linearly on `(a, b, c)`; a general
    /// inversion is their composite.
    pub fn apply_sphere(&self, s: &SphereEq) -> SphereEq {
        let s = translate_sphere(s, -self.center);
        let s = scale_sphere(&s, 1.0 / self.radius);
        // Unit inversion at the origin swaps a and c.
        let s = SphereEq::new(s.c, s.b, s.a);
        let s = scale_sphere(&s, self.radius);
        translate_sphere(&s, self.center)
    }
}

/// Coefficients of the image surface under `x ↦ x + t`.
pub fn translate_sphere(s: &SphereEq, t: Vec3) -> SphereEq {
    SphereEq::new(
        s.a,
        s.b - 2.0 * s.a * t,
        s.a * t.norm_squared() - s.b.dot(&t) + s.c,
    )
}

/// Coefficients of the image surface under `x ↦ s·x`, s ≠ 0.
pub fn scale_sphere(eq: &SphereEq, s: f64) -> SphereEq {
    SphereEq::new(eq.a, s * eq.b, s * s * eq.c)
}

/// A circle or a straight line. Lines are first-class, not limit circles:
/// rectified images are lines and need exact handling.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(from = "CircleOrLineJson", into = "CircleOrLineJson")]
pub enum CircleOrLine {
    Circle { center: Vec3, radius: f64, normal: Vec3 },
    Line { point: Vec3, direction: Vec3 },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum CircleOrLineJson {
    Circle { center: [f64; 3], radius: f64, normal: [f64; 3] },
    Line { point: [f64; 3], direction: [f64; 3] },
}

impl From<CircleOrLineJson> for CircleOrLine {
    fn from(j: CircleOrLineJson) -> Self {
        match j {
            CircleOrLineJson::Circle { center, radius, normal } => {
                CircleOrLine::circle(Vec3::from(center), radius, Vec3::from(normal))
            }
            CircleOrLineJson::Line { point, direction } => {
                CircleOrLine::line(Vec3::from(point), Vec3::from(direction))
            }
        }
    }
}

impl From<CircleOrLine> for CircleOrLineJson {
    fn from(c: CircleOrLine) -> Self {
        match c {
            CircleOrLine::Circle { center, radius, normal } => CircleOrLineJson::Circle {
                center: [center.x, center.y, center.z],
                radius,
                normal: [normal.x, normal.y, normal.z],
            },
            CircleOrLine::Line { point, direction } => CircleOrLineJson::Line {
                point: [point.x, point.y, point.z],
                direction: [direction.x, direction.y, direction.z],
            },
        }
    }
}

/// Flips a unit vector so its first component above 1e−9 in magnitude is
/// positive; keeps equality tests deterministic.
pub fn canonical_sign(v: Vec3) -> Vec3 {
    for i in 0..3 {
        if v[i].abs() > 1e-9 {
            return if v[i] < 0.0 { -v } else { v };
        }
    }
    v
}

impl CircleOrLine {
    /// Circle from raw data; normalizes and sign-canonicalizes the normal.
    pub fn circle(center: Vec3, radius: f64, normal: Vec3) -> Self {
        CircleOrLine::Circle { center, radius, normal: canonical_sign(normal.normalize()) }
    }

    pub fn line(point: Vec3, direction: Vec3) -> Self {
        CircleOrLine::Line { point, direction: canonical_sign(direction.normalize()) }
    }

    /// Euclidean distance from `x` to the point set.
    pub fn distance_to(&self, x: Vec3) -> f64 {
        match *self {
            CircleOrLine::Circle { center, radius, normal } => {
                let w = x - center;
                let h = w.dot(&normal);
                let rho = (w - h * normal).norm();
                ((rho - radius).powi(2) + h * h).sqrt()
            }
            CircleOrLine::Line { point, direction } => {
                let w = x - point;
                (w - w.dot(&direction) * direction).norm()
            }
        }
    }

    /// `n` points spread over the curve: uniform angles on a circle, uniform
    /// parameters in `[−span, span]` on a line.
    pub fn sample_points(&self, n: usize, span: f64) -> Vec<Vec3> {
        match *self {
            CircleOrLine::Circle { center, radius, normal } => {
                let (e1, e2) = perp_basis(normal);
                (0..n)
                    .map(|i| {
                        let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                        center + radius * (t.cos() * e1 + t.sin() * e2)
                    })
                    .collect()
            }
            CircleOrLine::Line { point, direction } => (0..n)
                .map(|i| {
                    let t = if n == 1 { 0.0 } else { -span + 2.0 * span * i as f64 / (n - 1) as f64 };
                    point + t * direction
                })
                .collect(),
        }
    }

    /// Unit tangent at the curve point nearest to `x` (for circles) or the
    /// line direction.
    pub fn tangent_at(&self, x: Vec3) -> Vec3 {
        match *self {
            CircleOrLine::Circle { center, normal, .. } => {
                let radial = x - center;
                normal.cross(&radial).normalize()
            }
            CircleOrLine::Line { direction, .. } => direction,
        }
    }
}

/// Orthonormal pair spanning the plane perpendicular to the unit vector `n`.
pub fn perp_basis(n: Vec3) -> (Vec3, Vec3) {
    let pick = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = (pick - pick.dot(&n) * n).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}

/// Intersection of two sphere equations when it is a circle or a line.
///
/// Reduces sphere∧sphere to sphere∧plane through the radical plane
/// (the pencil member with zero quadratic part).
pub fn circle_from_sphere_pair(s1: &SphereEq, s2: &SphereEq) -> Result<CircleOrLine, GeomError> {
    if s1.approx_eq(s2) {
        return Err(GeomError::Identical);
    }
    let u = s1.normalized();
    let v = s2.normalized();
    match (u.geometry(), v.geometry()) {
        (SphereGeometry::Imaginary, _) | (_, SphereGeometry::Imaginary) => Err(GeomError::Disjoint),
        (SphereGeometry::PointSphere { center }, g) | (g, SphereGeometry::PointSphere { center }) => {
            // A point sphere meets anything in at most that point.
            let _ = g;
            let on_first = u.eval(center).abs() <= 1e-12;
            let on_second = v.eval(center).abs() <= 1e-12;
            if on_first && on_second {
                Err(GeomError::Tangent)
            } else {
                Err(GeomError::Disjoint)
            }
        }
        (SphereGeometry::Plane { .. }, SphereGeometry::Plane { .. }) => plane_plane(&u, &v),
        (SphereGeometry::Plane { .. }, SphereGeometry::RealSphere { center, radius }) => {
            sphere_plane(center, radius, &u)
        }
        (SphereGeometry::RealSphere { center, radius }, SphereGeometry::Plane { .. }) => {
            sphere_plane(center, radius, &v)
        }
        (
            SphereGeometry::RealSphere { center: c1, radius: r1 },
            SphereGeometry::RealSphere { center: c2, radius: r2 },
        ) => {
            // Radical plane: the pencil member with vanishing |x|² term.
            let radical = SphereEq::new(
                0.0,
                v.a * u.b - u.a * v.b,
                v.a * u.c - u.a * v.c,
            );
            if radical.b.norm() <= SPHERE_EQ_TOL {
                // Concentric spheres of distinct radii.
                return Err(GeomError::Disjoint);
            }
            // Cut with the smaller sphere: a near-plane partner has a huge
            // radius and the r² − t² cancellation would eat the accuracy.
            if r1 <= r2 {
                sphere_plane(c1, r1, &radical)
            } else {
                sphere_plane(c2, r2, &radical)
            }
        }
    }
}

fn plane_plane(p1: &SphereEq, p2: &SphereEq) -> Result<CircleOrLine, GeomError> {
    let n1 = p1.b;
    let n2 = p2.b;
    let cross = n1.cross(&n2);
    if cross.norm() <= 1e-12 * n1.norm() * n2.norm() {
        // Parallel planes; identical inputs were rejected earlier.
        return Err(GeomError::Disjoint);
    }
    // Minimum-norm point: x = α n1 + β n2 solving both plane equations.
    let g11 = n1.norm_squared();
    let g12 = n1.dot(&n2);
    let g22 = n2.norm_squared();
    let det = g11 * g22 - g12 * g12;
    let alpha = (-p1.c * g22 + p2.c * g12) / det;
    let beta = (-p2.c * g11 + p1.c * g12) / det;
    Ok(CircleOrLine::line(alpha * n1 + beta * n2, cross))
}

fn sphere_plane(center: Vec3, radius: f64, plane: &SphereEq) -> Result<CircleOrLine, GeomError> {
    let bn = plane.b.norm();
    let n = plane.b / bn;
    let signed = (plane.b.dot(&center) + plane.c) / bn;
    let disc = radius * radius - signed * signed;
    let scale = radius.max(signed.abs());
    if disc.abs() <= 1e-10 * scale * scale {
        return Err(GeomError::Tangent);
    }
    if disc < 0.0 {
        return Err(GeomError::Disjoint);
    }
    Ok(CircleOrLine::circle(center - signed * n, disc.sqrt(), n))
}

/// The unique circle (or line, when collinear) through three distinct points.
pub fn circle_through_points(p1: Vec3, p2: Vec3, p3: Vec3) -> Result<CircleOrLine, GeomError> {
    let u = p2 - p1;
    let v = p3 - p1;
    let w = p3 - p2;
    let scale = u.norm().max(v.norm()).max(1e-300);
    if u.norm() <= 1e-12 * scale || v.norm() <= 1e-12 * scale || w.norm() <= 1e-12 * scale {
        return Err(GeomError::CoincidentPoints);
    }
    let n = u.cross(&v);
    if n.norm() <= 1e-12 * u.norm() * v.norm() {
        return Ok(CircleOrLine::line(p1, u));
    }
    // Circumcenter p1 + αu + βv from the equidistance conditions.
    let uu = u.norm_squared();
    let vv = v.norm_squared();
    let uv = u.dot(&v);
    let det = uu * vv - uv * uv;
    let alpha = (uu * vv - vv * uv) / (2.0 * det);
    let beta = (uu * vv - uu * uv) / (2.0 * det);
    let center = p1 + alpha * u + beta * v;
    Ok(CircleOrLine::circle(center, (center - p1).norm(), n))
}
