//! Nets of spheres and their characteristic maps to RP³.
//!
//! A net is four independent sphere equations `S₁, …, S₄`; its
//! characteristic map is `x ↦ [S₁(x) : S₂(x) : S₃(x) : S₄(x)]`. The net's
//! orthogonal complement under the Möbius form sorts it into one of the
//! three geometries: complement of positive radius (hyperbolic), zero
//! radius (Euclidean), or imaginary radius (elliptic).

use crate::geom::{CircleOrLine, SphereEq, Vec3};
use nalgebra::{DMatrix, Matrix4, RowVector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("the four sphere equations are not linearly independent")]
    NotIndependent,
    #[error("all four equations vanish at the requested point")]
    BasePoint,
    #[error("a sampled point hits the base locus of the net")]
    BasePointHit,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
}

/// Threshold on the unit-norm discriminant separating the three geometries.
pub const CLASS_DISC_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryClass {
    Hyperbolic,
    Euclidean,
    Elliptic,
}

/// Four independent sphere equations spanning a 3-dimensional linear system.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "NetJson", into = "NetJson")]
pub struct SphereNet {
    basis: [SphereEq; 4],
}

#[derive(Serialize, Deserialize)]
struct NetJson {
    spheres: [SphereEq; 4],
}

impl TryFrom<NetJson> for SphereNet {
    type Error = NetError;
    fn try_from(j: NetJson) -> Result<Self, NetError> {
        SphereNet::new(j.spheres)
    }
}

impl From<SphereNet> for NetJson {
    fn from(n: SphereNet) -> Self {
        NetJson { spheres: n.basis }
    }
}

fn coeff_row(s: &SphereEq) -> [f64; 5] {
    [s.a, s.b.x, s.b.y, s.b.z, s.c]
}

impl SphereNet {
    pub fn new(basis: [SphereEq; 4]) -> Result<Self, NetError> {
        let m = DMatrix::from_fn(4, 5, |r, c| coeff_row(&basis[r])[c]);
        let svd = m.svd(false, false);
        let s = &svd.singular_values;
        if s[3] <= 1e-10 * s[0] {
            return Err(NetError::NotIndependent);
        }
        Ok(SphereNet { basis })
    }

    pub fn basis(&self) -> &[SphereEq; 4] {
        &self.basis
    }
}

/// Homogeneous coordinates in RP³, nonzero and defined up to scale.
#[derive(Clone, Copy, Debug)]
pub struct ProjPoint3(pub [f64; 4]);

impl ProjPoint3 {
    /// Unit norm with the first component above threshold made positive.
    pub fn canonical(&self) -> ProjPoint3 {
        let n = self.0.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut out = self.0.map(|v| v / n);
        for v in out {
            if v.abs() > 1e-9 {
                if v < 0.0 {
                    out = out.map(|w| -w);
                }
                break;
            }
        }
        ProjPoint3(out)
    }
}

/// Evaluates the characteristic map at `x`.
pub fn char_map_eval(net: &SphereNet, x: Vec3) -> Result<ProjPoint3, NetError> {
    let mut coords = [0.0; 4];
    let mut significant = false;
    for (i, s) in net.basis.iter().enumerate() {
        coords[i] = s.eval(x);
        let scale = s.norm5() * (1.0 + x.norm_squared());
        if coords[i].abs() > 1e-12 * scale {
            significant = true;
        }
    }
    if !significant {
        return Err(NetError::BasePoint);
    }
    Ok(ProjPoint3(coords))
}

/// The 4×4 determinant with rows `(∂Sᵢ/∂x, ∂Sᵢ/∂y, ∂Sᵢ/∂z, Sᵢ)`.
///
/// This is the projective realization of the Jacobian of the characteristic
/// map; for the three canonical nets it equals `1 − |x|²`, `−|x|²`, and
/// `1 + |x|²`.
pub fn degenerate_det(net: &SphereNet, x: Vec3) -> f64 {
    let rows: Vec<RowVector4<f64>> = net
        .basis
        .iter()
        .map(|s| {
            let g = s.gradient(x);
            RowVector4::new(g.x, g.y, g.z, s.eval(x))
        })
        .collect();
    Matrix4::from_rows(&rows).determinant()
}

/// True when the characteristic map degenerates at `x`: the determinant is
/// below 1e−10 of its Hadamard scale (the product of row norms).
pub fn degenerate_test(net: &SphereNet, x: Vec3) -> bool {
    let det = degenerate_det(net, x);
    let scale: f64 = net
        .basis
        .iter()
        .map(|s| {
            let g = s.gradient(x);
            (g.norm_squared() + s.eval(x).powi(2)).sqrt()
        })
        .product();
    det.abs() < 1e-10 * scale.max(1e-300)
}

// Gram matrix of the Möbius form on coefficient 5-vectors (a, b₁, b₂, b₃, c).
fn mobius_pairing(row: &[f64; 5]) -> [f64; 5] {
    [-2.0 * row[4], row[1], row[2], row[3], -2.0 * row[0]]
}

/// The unique (up to scale) sphere equation orthogonal to all four basis
/// spheres. The Möbius form has signature (4,1), so the complement of a
/// rank-4 system always exists and is one-dimensional.
pub fn orthogonal_complement(net: &SphereNet) -> SphereEq {
    // Padded square so the SVD exposes the full right-singular basis.
    let k = DMatrix::from_fn(5, 5, |r, c| {
        if r < 4 {
            mobius_pairing(&coeff_row(&net.basis[r]))[c]
        } else {
            0.0
        }
    });
    let svd = k.svd(false, true);
    let vt = svd.v_t.as_ref().expect("svd computed with vectors");
    // Null vector: right singular vector of the smallest singular value.
    let row = vt.nrows() - 1;
    let s0 = SphereEq::new(
        vt[(row, 0)],
        Vec3::new(vt[(row, 1)], vt[(row, 2)], vt[(row, 3)]),
        vt[(row, 4)],
    );
    canonical_sphere_sign(s0.normalized())
}

fn canonical_sphere_sign(s: SphereEq) -> SphereEq {
    for v in coeff_row(&s) {
        if v.abs() > 1e-9 {
            if v < 0.0 {
                return SphereEq::new(-s.a, -s.b, -s.c);
            }
            break;
        }
    }
    s
}

/// Classifies the net by the discriminant of its orthogonal complement,
/// evaluated on the unit-norm representative.
pub fn classify_net(net: &SphereNet) -> GeometryClass {
    let disc = orthogonal_complement(net).normalized().disc();
    if disc > CLASS_DISC_TOL {
        GeometryClass::Hyperbolic
    } else if disc < -CLASS_DISC_TOL {
        GeometryClass::Elliptic
    } else {
        GeometryClass::Euclidean
    }
}

/// The canonical net of each geometry: `{x, y, z, 1 + s·|x|²}` with
/// `s = +1, 0, −1` for hyperbolic, Euclidean, elliptic.
pub fn canonical_net(class: GeometryClass) -> SphereNet {
    let quad = match class {
        GeometryClass::Hyperbolic => SphereEq::new(1.0, Vec3::zeros(), 1.0),
        GeometryClass::Euclidean => SphereEq::new(0.0, Vec3::zeros(), 1.0),
        GeometryClass::Elliptic => SphereEq::new(-1.0, Vec3::zeros(), 1.0),
    };
    SphereNet::new([
        SphereEq::new(0.0, Vec3::x(), 0.0),
        SphereEq::new(0.0, Vec3::y(), 0.0),
        SphereEq::new(0.0, Vec3::z(), 0.0),
        quad,
    ])
    .expect("canonical bases are independent")
}

/// The origin-pencil presentation of the Euclidean system, `{x, y, z, |x|²}`,
/// whose degenerate locus is the single point at the origin (the plane
/// presentation `{x, y, z, 1}` is its Möbius conjugate with the origin and
/// infinity swapped).
pub fn euclidean_origin_net() -> SphereNet {
    SphereNet::new([
        SphereEq::new(0.0, Vec3::x(), 0.0),
        SphereEq::new(0.0, Vec3::y(), 0.0),
        SphereEq::new(0.0, Vec3::z(), 0.0),
        SphereEq::new(1.0, Vec3::zeros(), 0.0),
    ])
    .expect("origin pencil basis is independent")
}

/// σ₃ + σ₄ of the matrix of unit-normalized characteristic images of `n`
/// samples of the curve: zero exactly when the image lies on a projective
/// line (a 2-dimensional linear subspace of R⁴).
pub fn image_line_residual(
    net: &SphereNet,
    curve: &CircleOrLine,
    n_samples: usize,
) -> Result<f64, NetError> {
    if n_samples < 6 {
        return Err(NetError::TooFewSamples { needed: 6, got: n_samples });
    }
    let span = match curve {
        CircleOrLine::Line { point, .. } => 2.0 * (1.0 + point.norm()),
        CircleOrLine::Circle { .. } => 1.0,
    };
    let mut rows = Vec::with_capacity(n_samples);
    for p in curve.sample_points(n_samples, span) {
        let img = char_map_eval(net, p).map_err(|_| NetError::BasePointHit)?.canonical();
        rows.push(img.0);
    }
    let m = DMatrix::from_fn(rows.len(), 4, |r, c| rows[r][c]);
    let s = m.svd(false, false).singular_values;
    Ok(s[2] + s[3])
}
