//! Circle bundles through a center point: generation from a coefficient
//! pair `(A, B)`, the 54-direction genericity test, second-common-point
//! detection, and verification of the rectifying inversion.
//!
//! A bundle member with tangent direction `(1, k, m)` is the intersection of
//! the two spheres
//!
//! ```text
//! y = k·x + A(k,m)·(x² + y² + z²)
//! z = m·x + B(k,m)·(x² + y² + z²)
//! ```
//!
//! Both pass through the origin and meet transversally there, so every
//! member is a genuine circle (or a line when both coefficients vanish).

use crate::geom::{circle_from_sphere_pair, CircleOrLine, GeomError, Inversion, SphereEq, Vec3};
use crate::fit::{line_residual, FitError};
use crate::poly::BivarPoly;
use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of generic tangent directions that pin a degree-9 cone.
pub const GENERIC_DIRECTIONS: usize = 54;

/// Tangent directions steeper than this in `k` or `m` leave the `(1, k, m)`
/// chart and are rejected at construction.
pub const MAX_TANGENT_SLOPE: f64 = 1e6;

/// Minimum `(k, m)` separation for a bundle to count as simple.
pub const SIMPLE_SEPARATION: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("tangent parameters must be finite, |k|,|m| <= {MAX_TANGENT_SLOPE} (got k={k}, m={m})")]
    InvalidTangent { k: f64, m: f64 },
    #[error("direction list is empty")]
    EmptyDirections,
    #[error("genericity test needs exactly {GENERIC_DIRECTIONS} directions, got {0}")]
    CountMismatch(usize),
    #[error("member at (k={k}, m={m}) degenerates: {source}")]
    DegenerateMember { k: f64, m: f64, source: GeomError },
    #[error("second-point search needs at least 3 members, got {0}")]
    FewerThanThreeCircles(usize),
    #[error("images of the first two circle members are nearly parallel; permute the members")]
    NearParallelImages,
    #[error("need at least 4 samples per circle, got {0}")]
    TooFewSamples(usize),
    #[error("all usable samples of member {index} fall within the exclusion zone of the inversion center")]
    AllSamplesNearCenter { index: usize },
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// Chart coordinates of a tangent direction `(1, k, m)` at the bundle center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentParam {
    pub k: f64,
    pub m: f64,
}

impl TangentParam {
    pub fn new(k: f64, m: f64) -> Result<Self, BundleError> {
        if !k.is_finite() || !m.is_finite() || k.abs() > MAX_TANGENT_SLOPE || m.abs() > MAX_TANGENT_SLOPE {
            return Err(BundleError::InvalidTangent { k, m });
        }
        Ok(TangentParam { k, m })
    }

    /// The direction vector `(1, k, m)` (not normalized).
    pub fn direction(&self) -> Vec3 {
        Vec3::new(1.0, self.k, self.m)
    }

    pub fn dist(&self, other: &TangentParam) -> f64 {
        ((self.k - other.k).powi(2) + (self.m - other.m).powi(2)).sqrt()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BundleMember {
    #[serde(flatten)]
    pub tangent: TangentParam,
    pub curve: CircleOrLine,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircleBundle {
    pub center: Vec3Json,
    pub members: Vec<BundleMember>,
}

/// Plain `[x, y, z]` JSON encoding for points.
pub type Vec3Json = [f64; 3];

impl CircleBundle {
    pub fn center_vec(&self) -> Vec3 {
        Vec3::from(self.center)
    }

    /// Median radius of the circle members; 1 when there are none.
    /// Tolerances are interpreted in units of this scale.
    pub fn geometric_scale(&self) -> f64 {
        let mut radii: Vec<f64> = self
            .members
            .iter()
            .filter_map(|m| match m.curve {
                CircleOrLine::Circle { radius, .. } => Some(radius),
                CircleOrLine::Line { .. } => None,
            })
            .collect();
        if radii.is_empty() {
            return 1.0;
        }
        radii.sort_by(|a, b| a.total_cmp(b));
        radii[radii.len() / 2]
    }
}

/// The two spheres of the generating system at one direction.
pub fn member_spheres(a_val: f64, b_val: f64, dir: TangentParam) -> (SphereEq, SphereEq) {
    (
        SphereEq::new(a_val, Vec3::new(dir.k, -1.0, 0.0), 0.0),
        SphereEq::new(b_val, Vec3::new(dir.m, 0.0, -1.0), 0.0),
    )
}

/// Builds the bundle with center at the origin from coefficient polynomials
/// `A(k, m)` and `B(k, m)`, one member per direction.
pub fn bundle_from_ab(
    a: &BivarPoly,
    b: &BivarPoly,
    dirs: &[TangentParam],
) -> Result<CircleBundle, BundleError> {
    if dirs.is_empty() {
        return Err(BundleError::EmptyDirections);
    }
    let mut members = Vec::with_capacity(dirs.len());
    for &dir in dirs {
        TangentParam::new(dir.k, dir.m)?;
        let a_val = a.eval_f64(dir.k, dir.m);
        let b_val = b.eval_f64(dir.k, dir.m);
        let curve = if a_val == 0.0 && b_val == 0.0 {
            CircleOrLine::line(Vec3::zeros(), dir.direction())
        } else {
            let (sa, sb) = member_spheres(a_val, b_val, dir);
            circle_from_sphere_pair(&sa, &sb)
                .map_err(|source| BundleError::DegenerateMember { k: dir.k, m: dir.m, source })?
        };
        members.push(BundleMember { tangent: dir, curve });
    }
    Ok(CircleBundle { center: [0.0; 3], members })
}

/// A bundle is simple when distinct members have distinct tangent lines.
pub fn is_simple(bundle: &CircleBundle) -> bool {
    let n = bundle.members.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if bundle.members[i].tangent.dist(&bundle.members[j].tangent) <= SIMPLE_SEPARATION {
                return false;
            }
        }
    }
    true
}

/// Rows are the 55 degree-9 monomials evaluated at `v = (1, k, m)`.
pub fn degree9_monomial_matrix(dirs: &[TangentParam]) -> DMatrix<f64> {
    let cols: Vec<(u32, u32)> =
        (0..=9u32).flat_map(|j| (0..=(9 - j)).map(move |l| (j, l))).collect();
    DMatrix::from_fn(dirs.len(), cols.len(), |r, c| {
        let (j, l) = cols[c];
        dirs[r].k.powi(j as i32) * dirs[r].m.powi(l as i32)
    })
}

/// 54 directions are generic when they pin a unique degree-9 homogeneous
/// cone, i.e. the 54×55 monomial evaluation matrix has full row rank.
///
/// Rank is decided by SVD with relative threshold 1e−12, so inputs that sit
/// on a cone up to floating-point noise still count as non-generic. The
/// exact-arithmetic cross-check lives in the test suite.
pub fn is_generic_54(dirs: &[TangentParam]) -> Result<bool, BundleError> {
    if dirs.len() != GENERIC_DIRECTIONS {
        return Err(BundleError::CountMismatch(dirs.len()));
    }
    let m = degree9_monomial_matrix(dirs);
    let svd = m.svd(false, false);
    let smax = svd.singular_values[0];
    if !smax.is_finite() || smax == 0.0 {
        return Ok(false);
    }
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-12 * smax).count();
    Ok(rank == GENERIC_DIRECTIONS)
}

/// Image of a circle through the inversion center: the line through the
/// image of the antipode of the center, parallel to the tangent there.
fn invert_circle_through_center(inv: &Inversion, center: Vec3, radius: f64, normal: Vec3) -> CircleOrLine {
    let o = inv.center;
    let tangent = normal.cross(&(o - center));
    let image_point = o + (inv.radius * inv.radius / (2.0 * radius * radius)) * (center - o);
    CircleOrLine::line(image_point, tangent)
}

/// Searches for a common point of all members distinct from the bundle
/// center.
///
/// The unit inversion at the center turns the first two circle members into
/// lines; their near-intersection, inverted back, is the candidate, which
/// every member must then confirm to within `tol` (in units of the bundle's
/// geometric scale). Returns `None` when the members share nothing, in
/// particular for bundles of lines, whose only finite common point is the
/// center.
pub fn second_common_point(
    bundle: &CircleBundle,
    tol: f64,
) -> Result<Option<Vec3>, BundleError> {
    if bundle.members.len() < 3 {
        return Err(BundleError::FewerThanThreeCircles(bundle.members.len()));
    }
    let scale = bundle.geometric_scale();
    let threshold = tol * scale;
    let o = bundle.center_vec();
    let circles: Vec<(Vec3, f64, Vec3)> = bundle
        .members
        .iter()
        .filter_map(|m| match m.curve {
            CircleOrLine::Circle { center, radius, normal } => Some((center, radius, normal)),
            CircleOrLine::Line { .. } => None,
        })
        .collect();
    if circles.len() < 2 {
        // All (or all but one) members are lines through the center.
        return Ok(None);
    }

    let inv = Inversion::unit(o);
    let lines: Vec<CircleOrLine> = circles
        .iter()
        .take(2)
        .map(|&(c, r, n)| invert_circle_through_center(&inv, c, r, n))
        .collect();
    let (CircleOrLine::Line { point: p1, direction: d1 },
         CircleOrLine::Line { point: p2, direction: d2 }) = (lines[0], lines[1])
    else {
        unreachable!("circle images through the inversion center are lines")
    };

    // Closest points of the two image lines.
    let w = p1 - p2;
    let b = d1.dot(&d2);
    let denom = 1.0 - b * b;
    if denom < 1e-18 {
        return Err(BundleError::NearParallelImages);
    }
    let d = d1.dot(&w);
    let e = d2.dot(&w);
    let s = (b * e - d) / denom;
    let t = (e - b * d) / denom;
    let q1 = p1 + s * d1;
    let q2 = p2 + t * d2;
    if (q1 - q2).norm() >= threshold {
        return Ok(None);
    }
    let image = 0.5 * (q1 + q2);
    if (image - o).norm_squared() == 0.0 {
        return Ok(None);
    }
    let candidate = inv.apply(image).expect("image point is distinct from the center");
    if (candidate - o).norm() <= threshold {
        // A "second point" within tolerance of the center is not one.
        return Ok(None);
    }
    for member in &bundle.members {
        if member.curve.distance_to(candidate) >= threshold {
            return Ok(None);
        }
    }
    Ok(Some(candidate))
}

/// The rectifying inversion for a bundle whose members all pass through `q`:
/// unit radius, since a radius change only rescales the (already straight)
/// image.
pub fn build_rectifier(q: Vec3) -> Inversion {
    Inversion::unit(q)
}

/// Distance below which samples are discarded as too close to the inversion
/// center for stable mapping.
pub const SAMPLE_EXCLUSION_RADIUS: f64 = 1e-3;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RectificationReport {
    pub second_point: Option<Vec3Json>,
    #[serde(rename = "residuals")]
    pub per_circle_residual: Vec<f64>,
    pub max_residual: f64,
}

/// Maps samples of every member through the inversion and fits a
/// total-least-squares line to each image; a rectifying inversion leaves
/// residuals at the sampling noise floor.
pub fn verify_rectification(
    bundle: &CircleBundle,
    inv: &Inversion,
    samples_per_circle: usize,
    _tol: f64,
) -> Result<RectificationReport, BundleError> {
    if samples_per_circle < 4 {
        return Err(BundleError::TooFewSamples(samples_per_circle));
    }
    let span = 2.0 * bundle.geometric_scale();
    let mut residuals = Vec::with_capacity(bundle.members.len());
    for (index, member) in bundle.members.iter().enumerate() {
        // The exclusion zone grows with the member: a circle of radius r is
        // represented to about 1e−16·r, and mapping a sample at distance d
        // from the center amplifies that by 1/d², so d must scale with r
        // for the image noise to stay bounded.
        let member_scale = match member.curve {
            CircleOrLine::Circle { radius, .. } => radius.max(1.0),
            CircleOrLine::Line { .. } => 1.0,
        };
        let exclusion = SAMPLE_EXCLUSION_RADIUS * member_scale;
        let images: Vec<Vec3> = member
            .curve
            .sample_points(samples_per_circle, span)
            .into_iter()
            .filter(|p| (p - inv.center).norm() >= exclusion)
            .map(|p| inv.apply(p).expect("filtered points are off-center"))
            .collect();
        if images.len() < 3 {
            return Err(BundleError::AllSamplesNearCenter { index });
        }
        residuals.push(line_residual(&images)?);
    }
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    Ok(RectificationReport { second_point: None, per_circle_residual: residuals, max_residual })
}

/// Uniform directions in `[lo, hi]²`, deterministic for a given generator.
pub fn sample_directions<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<TangentParam> {
    (0..n)
        .map(|_| TangentParam { k: rng.random_range(lo..hi), m: rng.random_range(lo..hi) })
        .collect()
}

/// Closed-form second point `(−α, β, γ)/(α² + β² + γ²)` of the bundle with
/// `A = αk + β`, `B = αm + γ`; the point every member passes through.
pub fn linear_family_second_point(alpha: f64, beta: f64, gamma: f64) -> Vec3 {
    let n = alpha * alpha + beta * beta + gamma * gamma;
    Vec3::new(-alpha, beta, gamma) / n
}
