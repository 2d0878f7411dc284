//! The five metrics whose geodesics are straight lines or circles, with the
//! numerical machinery to verify it: finite-difference Christoffel symbols,
//! RK4 geodesic integration, sectional curvature, pullbacks, and the
//! gnomonic lifts to H³ and S³.
//!
//! Matrix forms of the line elements, with `r² = |x|²`:
//!
//! ```text
//! Euclidean           g = I
//! KleinHyperbolic     g = [(1 − r²)I + x xᵀ] / (1 − r²)²          on r < 1
//! GnomonicElliptic    g = I/(1 + r²) − x xᵀ/(1 + r²)²
//! CircularHyperbolic  g = (I − 3 x xᵀ/D)/D,   D = 1 + r² + r⁴    on r < 1
//! CircularElliptic    g = (I + 3 x xᵀ/D′)/D′, D′ = 1 − r² + r⁴   on r < 1
//! ```
//!
//! The circular forms are the pullbacks of the Klein and gnomonic-elliptic
//! metrics under `x ↦ x/(1 ± r²)`, which is what the pullback tests pin.

use crate::fit::FitError;
use crate::geom::{Inversion, Vec3};
use crate::nets::GeometryClass;
use nalgebra::{Matrix3, Vector4};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub use crate::fit::{circle_fit, line_residual, line_tls};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("point ({0}, {1}, {2}) is outside the metric's domain")]
    OutOfDomain(f64, f64, f64),
    #[error("metric matrix is numerically singular")]
    SingularMetric,
    #[error("u and v do not span a 2-plane")]
    DegeneratePlane,
    #[error("map is singular at the requested point")]
    MapSingular,
    #[error("gnomonic lift is not defined for the Euclidean class")]
    UnsupportedClass,
    #[error("geodesic integration needs at least 16 steps, got {0}")]
    TooFewSteps(usize),
    #[error("initial velocity must be nonzero")]
    ZeroVelocity,
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// One of the five closed-form metrics, each on its stated domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricField {
    Euclidean,
    KleinHyperbolic,
    GnomonicElliptic,
    CircularHyperbolic,
    CircularElliptic,
}

pub const ALL_METRICS: [MetricField; 5] = [
    MetricField::Euclidean,
    MetricField::KleinHyperbolic,
    MetricField::GnomonicElliptic,
    MetricField::CircularHyperbolic,
    MetricField::CircularElliptic,
];

impl MetricField {
    /// Radius of the open-ball domain; infinite for the two metrics defined
    /// on all of R³.
    pub fn domain_radius(&self) -> f64 {
        match self {
            MetricField::Euclidean | MetricField::GnomonicElliptic => f64::INFINITY,
            _ => 1.0,
        }
    }

    pub fn contains(&self, x: Vec3) -> bool {
        x.norm() < self.domain_radius()
    }

    fn contains_ball(&self, x: Vec3, rho: f64) -> bool {
        x.norm() + rho < self.domain_radius()
    }

    /// The constant sectional curvature the metric is expected to have.
    pub fn expected_curvature(&self) -> f64 {
        match self {
            MetricField::Euclidean => 0.0,
            MetricField::KleinHyperbolic | MetricField::CircularHyperbolic => -1.0,
            MetricField::GnomonicElliptic | MetricField::CircularElliptic => 1.0,
        }
    }

    /// The map that takes this metric's geodesics to straight lines.
    pub fn rectifying_map(&self) -> SpaceMap {
        match self {
            MetricField::CircularHyperbolic => SpaceMap::AffineCharPos,
            MetricField::CircularElliptic => SpaceMap::AffineCharNeg,
            _ => SpaceMap::Identity,
        }
    }

    /// Whether the metric's geodesics are circles rather than straight lines.
    pub fn has_circular_geodesics(&self) -> bool {
        matches!(self, MetricField::CircularHyperbolic | MetricField::CircularElliptic)
    }

    /// Closed-form metric matrix at `x`.
    pub fn eval(&self, x: Vec3) -> Result<Matrix3<f64>, MetricError> {
        if !self.contains(x) {
            return Err(MetricError::OutOfDomain(x.x, x.y, x.z));
        }
        let r2 = x.norm_squared();
        let outer = x * x.transpose();
        Ok(match self {
            MetricField::Euclidean => Matrix3::identity(),
            MetricField::KleinHyperbolic => {
                let w = 1.0 - r2;
                (Matrix3::identity() * w + outer) / (w * w)
            }
            MetricField::GnomonicElliptic => {
                let t = 1.0 + r2;
                Matrix3::identity() / t - outer / (t * t)
            }
            MetricField::CircularHyperbolic => {
                let d = 1.0 + r2 + r2 * r2;
                (Matrix3::identity() - outer * (3.0 / d)) / d
            }
            MetricField::CircularElliptic => {
                let d = 1.0 - r2 + r2 * r2;
                (Matrix3::identity() + outer * (3.0 / d)) / d
            }
        })
    }

    /// `g_x(u, v)`.
    pub fn inner(&self, x: Vec3, u: Vec3, v: Vec3) -> Result<f64, MetricError> {
        Ok((u.transpose() * self.eval(x)? * v)[(0, 0)])
    }
}

impl fmt::Display for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            MetricField::Euclidean => "euclidean",
            MetricField::KleinHyperbolic => "klein-hyperbolic",
            MetricField::GnomonicElliptic => "gnomonic-elliptic",
            MetricField::CircularHyperbolic => "circular-hyperbolic",
            MetricField::CircularElliptic => "circular-elliptic",
        };
        f.write_str(name)
    }
}

impl FromStr for MetricField {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "euclidean" => Ok(MetricField::Euclidean),
            "klein-hyperbolic" => Ok(MetricField::KleinHyperbolic),
            "gnomonic-elliptic" => Ok(MetricField::GnomonicElliptic),
            "circular-hyperbolic" => Ok(MetricField::CircularHyperbolic),
            "circular-elliptic" => Ok(MetricField::CircularElliptic),
            other => Err(format!(
                "unknown metric '{other}' (expected euclidean, klein-hyperbolic, \
                 gnomonic-elliptic, circular-hyperbolic, or circular-elliptic)"
            )),
        }
    }
}

/// Default central-difference step for metric derivatives at `x`.
pub fn default_fd_step(x: Vec3) -> f64 {
    1e-5 * (1.0 + x.norm())
}

/// Integration stops this far from a finite domain boundary: the circular
/// metrics degenerate there (the chart folds), and difference stencils
/// astride the fold are meaningless.
pub const BOUNDARY_STOP_MARGIN: f64 = 1e-3;

/// FD step for the integrator: the default step, shrunk near a finite
/// boundary so the stencil always resolves the remaining distance.
fn integrator_fd_step(metric: MetricField, x: Vec3) -> f64 {
    let base = default_fd_step(x);
    let r = metric.domain_radius();
    if r.is_finite() {
        base.min(0.005 * (r - x.norm()).max(0.0))
    } else {
        base
    }
}

pub type Christoffel = [[[f64; 3]; 3]; 3];

/// Levi-Civita connection coefficients `Γ^i_{jk}` by central differences of
/// the metric with step `h`; symmetric in `(j, k)` by construction.
pub fn christoffel(metric: MetricField, x: Vec3, h: f64) -> Result<Christoffel, MetricError> {
    if !metric.contains_ball(x, 2.0 * h) {
        return Err(MetricError::OutOfDomain(x.x, x.y, x.z));
    }
    let g = metric.eval(x)?;
    let ginv = g.try_inverse().ok_or(MetricError::SingularMetric)?;
    let mut dg = [Matrix3::zeros(); 3];
    for (j, slot) in dg.iter_mut().enumerate() {
        let mut e = Vec3::zeros();
        e[j] = h;
        *slot = (metric.eval(x + e)? - metric.eval(x - e)?) / (2.0 * h);
    }
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let mut sum = 0.0;
                for l in 0..3 {
                    sum += ginv[(i, l)] * (dg[j][(l, k)] + dg[k][(j, l)] - dg[l][(j, k)]);
                }
                gamma[i][j][k] = 0.5 * sum;
            }
        }
    }
    Ok(gamma)
}

fn gamma_quadratic(gamma: &Christoffel, v: Vec3) -> Vec3 {
    let mut a = Vec3::zeros();
    for i in 0..3 {
        let mut sum = 0.0;
        for j in 0..3 {
            for k in 0..3 {
                sum += gamma[i][j][k] * v[j] * v[k];
            }
        }
        a[i] = -sum;
    }
    a
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GeodesicSample {
    pub t: f64,
    pub x: [f64; 3],
    pub v: [f64; 3],
}

impl GeodesicSample {
    pub fn position(&self) -> Vec3 {
        Vec3::from(self.x)
    }

    pub fn velocity(&self) -> Vec3 {
        Vec3::from(self.v)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeodesicPath {
    pub samples: Vec<GeodesicSample>,
    pub step: f64,
}

impl GeodesicPath {
    pub fn positions(&self) -> Vec<Vec3> {
        self.samples.iter().map(GeodesicSample::position).collect()
    }

    pub fn endpoint(&self) -> Option<Vec3> {
        self.samples.last().map(GeodesicSample::position)
    }
}

/// Integration that left the metric's domain; carries the path up to the
/// last valid sample.
#[derive(Debug, Error)]
#[error("geodesic left the domain after {} samples: {cause}", partial.samples.len())]
pub struct GeodesicAbort {
    pub partial: GeodesicPath,
    pub cause: MetricError,
}

/// The computed path whether or not integration ran to completion.
pub fn path_or_partial(result: Result<GeodesicPath, GeodesicAbort>) -> GeodesicPath {
    result.unwrap_or_else(|abort| abort.partial)
}

/// Classical fixed-step RK4 for `x′ = v`, `v′ = −Γ(x)(v, v)`.
///
/// Stops early (with the partial path in the error) if any stage leaves the
/// domain.
pub fn geodesic_integrate(
    metric: MetricField,
    x0: Vec3,
    v0: Vec3,
    total_time: f64,
    n: usize,
) -> Result<GeodesicPath, GeodesicAbort> {
    let fail = |cause: MetricError| GeodesicAbort {
        partial: GeodesicPath { samples: Vec::new(), step: 0.0 },
        cause,
    };
    if n < 16 {
        return Err(fail(MetricError::TooFewSteps(n)));
    }
    if v0.norm() == 0.0 {
        return Err(fail(MetricError::ZeroVelocity));
    }
    if !metric.contains(x0) {
        return Err(fail(MetricError::OutOfDomain(x0.x, x0.y, x0.z)));
    }
    let h = total_time / n as f64;
    let deriv = |x: Vec3, v: Vec3| -> Result<(Vec3, Vec3), MetricError> {
        if !metric.contains_ball(x, BOUNDARY_STOP_MARGIN) {
            return Err(MetricError::OutOfDomain(x.x, x.y, x.z));
        }
        let gamma = christoffel(metric, x, integrator_fd_step(metric, x))?;
        Ok((v, gamma_quadratic(&gamma, v)))
    };
    let rk4 = |x: Vec3, v: Vec3, dt: f64| -> Result<(Vec3, Vec3), MetricError> {
        let (k1x, k1v) = deriv(x, v)?;
        let (k2x, k2v) = deriv(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v)?;
        let (k3x, k3v) = deriv(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v)?;
        let (k4x, k4v) = deriv(x + dt * k3x, v + dt * k3v)?;
        Ok((
            x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
            v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        ))
    };
    // Advances one recording stride. Near a finite boundary the coordinate
    // velocity blows up like 1/distance (the chart folds there), which a
    // fixed step cannot resolve; the stride is then split deterministically
    // into substeps no longer than a twentieth of the remaining distance.
    let advance = |mut x: Vec3, mut v: Vec3| -> Result<(Vec3, Vec3), MetricError> {
        let radius = metric.domain_radius();
        let mut remaining = h;
        while remaining > 0.0 {
            let mut dt = remaining;
            if radius.is_finite() {
                let dist = (radius - x.norm()).max(0.0);
                let speed = v.norm();
                if speed * dt > 0.05 * dist {
                    dt = (0.05 * dist / speed).min(remaining);
                }
                if dt < 1e-6 * h {
                    return Err(MetricError::OutOfDomain(x.x, x.y, x.z));
                }
            }
            let (nx, nv) = rk4(x, v, dt)?;
            if !metric.contains_ball(nx, BOUNDARY_STOP_MARGIN) {
                return Err(MetricError::OutOfDomain(nx.x, nx.y, nx.z));
            }
            x = nx;
            v = nv;
            remaining -= dt;
        }
        Ok((x, v))
    };
    let record = |t: f64, x: Vec3, v: Vec3| GeodesicSample {
        t,
        x: [x.x, x.y, x.z],
        v: [v.x, v.y, v.z],
    };
    let mut samples = Vec::with_capacity(n + 1);
    let (mut x, mut v) = (x0, v0);
    samples.push(record(0.0, x, v));
    for step in 0..n {
        let t = step as f64 * h;
        match advance(x, v) {
            Ok((nx, nv)) => {
                x = nx;
                v = nv;
            }
            Err(cause) => {
                return Err(GeodesicAbort {
                    partial: GeodesicPath { samples, step: h },
                    cause,
                })
            }
        }
        samples.push(record(t + h, x, v));
    }
    Ok(GeodesicPath { samples, step: h })
}

/// Outer step for differentiating Γ; coarser than the metric step so the
/// inner finite-difference noise stays below the outer truncation error,
/// shrunk near a finite boundary where Γ varies fast.
fn curvature_fd_step(metric: MetricField, x: Vec3) -> f64 {
    let base = 2e-4 * (1.0 + x.norm());
    let r = metric.domain_radius();
    if r.is_finite() {
        base.min(0.05 * (r - x.norm()).max(0.0))
    } else {
        base
    }
}

/// Sectional curvature `K(u, v) = ⟨R(u,v)v, u⟩ / (|u|²|v|² − ⟨u,v⟩²)` in the
/// metric at `x`, from finite differences of Γ plus the Γ·Γ terms.
///
/// The lowered tensor is antisymmetrized in its first index pair, which makes
/// the value exactly independent of the basis chosen for the 2-plane.
#[allow(clippy::needless_range_loop)] // tensor contractions read best with indices
pub fn sectional_curvature(
    metric: MetricField,
    x: Vec3,
    u: Vec3,
    v: Vec3,
) -> Result<f64, MetricError> {
    let g = metric.eval(x)?;
    let gu_u = (u.transpose() * g * u)[(0, 0)];
    let gv_v = (v.transpose() * g * v)[(0, 0)];
    let gu_v = (u.transpose() * g * v)[(0, 0)];
    let gram = gu_u * gv_v - gu_v * gu_v;
    if gram <= 1e-12 * gu_u * gv_v {
        return Err(MetricError::DegeneratePlane);
    }

    let h_inner = default_fd_step(x);
    let h_outer = curvature_fd_step(metric, x);
    let gamma = christoffel(metric, x, h_inner)?;
    let mut dgamma = [[[[0.0; 3]; 3]; 3]; 3]; // dgamma[k][i][j][l] = ∂_k Γ^i_{jl}
    for k in 0..3 {
        let mut e = Vec3::zeros();
        e[k] = h_outer;
        let plus = christoffel(metric, x + e, h_inner)?;
        let minus = christoffel(metric, x - e, h_inner)?;
        for i in 0..3 {
            for j in 0..3 {
                for l in 0..3 {
                    dgamma[k][i][j][l] = (plus[i][j][l] - minus[i][j][l]) / (2.0 * h_outer);
                }
            }
        }
    }

    // R^i_{jkl} = ∂_k Γ^i_{lj} − ∂_l Γ^i_{kj} + Γ^i_{km} Γ^m_{lj} − Γ^i_{lm} Γ^m_{kj}
    let mut riemann = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let mut val = dgamma[k][i][l][j] - dgamma[l][i][k][j];
                    for m in 0..3 {
                        val += gamma[i][k][m] * gamma[m][l][j] - gamma[i][l][m] * gamma[m][k][j];
                    }
                    riemann[i][j][k][l] = val;
                }
            }
        }
    }
    // Lower the first index and antisymmetrize in (i, j).
    let mut lowered = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let mut val = 0.0;
                    for m in 0..3 {
                        val += g[(i, m)] * riemann[m][j][k][l];
                    }
                    lowered[i][j][k][l] = val;
                }
            }
        }
    }
    let mut numerator = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let anti = 0.5 * (lowered[i][j][k][l] - lowered[j][i][k][l]);
                    numerator += anti * u[i] * v[j] * u[k] * v[l];
                }
            }
        }
    }
    Ok(numerator / gram)
}

/// A local diffeomorphism whose pullback action on metrics is needed by the
/// verification suite.
#[derive(Clone, Copy, Debug)]
pub enum SpaceMap {
    /// `x ↦ x/(1 + |x|²)`; straightens circular-hyperbolic geodesics.
    AffineCharPos,
    /// `x ↦ x/(1 − |x|²)`; undefined on `|x| = 1`, straightens
    /// circular-elliptic geodesics.
    AffineCharNeg,
    InversionMap(Inversion),
    Identity,
}

impl SpaceMap {
    fn affine_sign(&self) -> Option<f64> {
        match self {
            SpaceMap::AffineCharPos => Some(1.0),
            SpaceMap::AffineCharNeg => Some(-1.0),
            _ => None,
        }
    }

    pub fn apply(&self, x: Vec3) -> Result<Vec3, MetricError> {
        match self {
            SpaceMap::Identity => Ok(x),
            SpaceMap::InversionMap(inv) => inv.apply(x).map_err(|_| MetricError::MapSingular),
            _ => {
                let s = self.affine_sign().expect("affine variants only");
                let denom = 1.0 + s * x.norm_squared();
                if denom.abs() < 1e-12 {
                    return Err(MetricError::MapSingular);
                }
                Ok(x / denom)
            }
        }
    }

    /// Exact closed-form Jacobian.
    pub fn jacobian(&self, x: Vec3) -> Result<Matrix3<f64>, MetricError> {
        match self {
            SpaceMap::Identity => Ok(Matrix3::identity()),
            SpaceMap::InversionMap(inv) => {
                let w = x - inv.center;
                let rho2 = w.norm_squared();
                if rho2 == 0.0 {
                    return Err(MetricError::MapSingular);
                }
                let hat = w / rho2.sqrt();
                let factor = inv.radius * inv.radius / rho2;
                Ok((Matrix3::identity() - 2.0 * hat * hat.transpose()) * factor)
            }
            _ => {
                let s = self.affine_sign().expect("affine variants only");
                let denom = 1.0 + s * x.norm_squared();
                if denom.abs() < 1e-12 {
                    return Err(MetricError::MapSingular);
                }
                let w = 1.0 / denom;
                // Radial eigenvalue w²(1 − s·r²): singular where s·r² = 1.
                Ok(Matrix3::identity() * w - (2.0 * s * w * w) * x * x.transpose())
            }
        }
    }
}

/// Samples farther out than this are excluded from chart-image line tests:
/// toward `|x| = 1` the affine charts' Jacobians blow up or crush, and
/// mapping there only amplifies integration noise.
pub const CHART_SAMPLE_RADIUS: f64 = 0.85;

/// Images of the path's positions under `map`, restricted to the region
/// where the chart is well-conditioned.
pub fn chart_images(path: &GeodesicPath, map: &SpaceMap) -> Result<Vec<Vec3>, MetricError> {
    path.positions()
        .into_iter()
        .filter(|p| p.norm() <= CHART_SAMPLE_RADIUS)
        .map(|p| map.apply(p))
        .collect()
}

/// `J(x)ᵀ · g(Φ(x)) · J(x)`, the pullback of `metric` under `map` at `x`.
pub fn pullback_metric(
    metric: MetricField,
    map: &SpaceMap,
    x: Vec3,
) -> Result<Matrix3<f64>, MetricError> {
    let image = map.apply(x)?;
    let j = map.jacobian(x)?;
    let g = metric.eval(image)?;
    Ok(j.transpose() * g * j)
}

/// Gnomonic lift of a chart point: onto the hyperboloid
/// `z₁²+z₂²+z₃²−z₄² = −1` for the hyperbolic class (needs `|y| < 1`), onto
/// the unit 3-sphere for the elliptic class.
pub fn gnomonic_lift(y: Vec3, class: GeometryClass) -> Result<Vector4<f64>, MetricError> {
    let r2 = y.norm_squared();
    match class {
        GeometryClass::Hyperbolic => {
            if r2 >= 1.0 {
                return Err(MetricError::OutOfDomain(y.x, y.y, y.z));
            }
            let s = (1.0 - r2).sqrt();
            Ok(Vector4::new(y.x / s, y.y / s, y.z / s, 1.0 / s))
        }
        GeometryClass::Elliptic => {
            let s = (1.0 + r2).sqrt();
            Ok(Vector4::new(y.x / s, y.y / s, y.z / s, 1.0 / s))
        }
        GeometryClass::Euclidean => Err(MetricError::UnsupportedClass),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    fn random_ball_point<R: Rng>(rng: &mut R, radius: f64) -> Vec3 {
        loop {
            let p = v(
                rng.random_range(-radius..radius),
                rng.random_range(-radius..radius),
                rng.random_range(-radius..radius),
            );
            if p.norm() < radius {
                return p;
            }
        }
    }

    #[test]
    fn circular_hyperbolic_matrix_values() {
        let g = MetricField::CircularHyperbolic.eval(Vec3::zeros()).unwrap();
        assert_relative_eq!(g, Matrix3::identity());

        // At (1/2, 0, 0): D = 21/16, radial (1−r²)²/D² = 16/49, tangential 16/21.
        let g = MetricField::CircularHyperbolic.eval(v(0.5, 0.0, 0.0)).unwrap();
        assert_relative_eq!(g[(0, 0)], 16.0 / 49.0, epsilon = 1e-14);
        assert_relative_eq!(g[(1, 1)], 16.0 / 21.0, epsilon = 1e-14);
        assert_relative_eq!(g[(2, 2)], 16.0 / 21.0, epsilon = 1e-14);

        assert!(matches!(
            MetricField::KleinHyperbolic.eval(v(1.0, 0.0, 0.0)),
            Err(MetricError::OutOfDomain(..))
        ));
    }

    #[test]
    fn metrics_are_positive_definite_on_their_domains() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for metric in ALL_METRICS {
            for _ in 0..50 {
                let p = random_ball_point(&mut rng, 0.95_f64.min(metric.domain_radius()));
                let g = metric.eval(p).unwrap();
                assert!(g.cholesky().is_some(), "{metric} not PD at {p:?}");
            }
        }
    }

    #[test]
    fn degeneracy_at_the_ball_boundary() {
        // Radial eigenvalue of the circular-hyperbolic metric is (1−r²)²/D².
        for i in 1..10 {
            let r = i as f64 / 10.0;
            let g = MetricField::CircularHyperbolic.eval(v(r, 0.0, 0.0)).unwrap();
            let d = 1.0 + r * r + r.powi(4);
            let expect = (1.0 - r * r).powi(2) / (d * d);
            assert_relative_eq!(g[(0, 0)], expect, max_relative = 1e-9);
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn christoffel_values() {
        let zero = christoffel(MetricField::Euclidean, v(0.4, -1.0, 2.0), 1e-5).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert!(zero[i][j][k].abs() < 1e-12);
                }
            }
        }
        let at_origin = christoffel(MetricField::CircularHyperbolic, Vec3::zeros(), 1e-5).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert!(at_origin[i][j][k].abs() < 1e-9);
                    // Symmetry in the lower pair is structural.
                    assert_eq!(at_origin[i][j][k], at_origin[i][k][j]);
                }
            }
        }
    }

    #[test]
    fn christoffel_step_halving_consistency() {
        let x = v(0.3, 0.1, 0.0);
        let a = christoffel(MetricField::CircularHyperbolic, x, 1e-5).unwrap();
        let b = christoffel(MetricField::CircularHyperbolic, x, 5e-6).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert!(
                        (a[i][j][k] - b[i][j][k]).abs() < 1e-7,
                        "Richardson consistency failed at [{i}][{j}][{k}]"
                    );
                }
            }
        }
    }

    #[test]
    fn euclidean_geodesics_are_straight() {
        let path =
            geodesic_integrate(MetricField::Euclidean, Vec3::zeros(), v(1.0, 0.0, 0.0), 1.0, 64)
                .unwrap();
        assert_relative_eq!(path.endpoint().unwrap(), v(1.0, 0.0, 0.0), epsilon = 1e-12);
        for s in &path.samples {
            assert!(s.x[1].abs() < 1e-13 && s.x[2].abs() < 1e-13);
        }
    }

    #[test]
    fn klein_geodesics_are_chords() {
        let path = geodesic_integrate(
            MetricField::KleinHyperbolic,
            Vec3::zeros(),
            v(1.0, 0.0, 0.0),
            1.0,
            256,
        )
        .unwrap();
        for s in &path.samples {
            assert!(s.x[1].abs() < 1e-9 && s.x[2].abs() < 1e-9, "path left the chord");
        }
    }

    #[test]
    fn circular_hyperbolic_geodesics_are_circles() {
        let path = path_or_partial(geodesic_integrate(
            MetricField::CircularHyperbolic,
            v(0.1, 0.0, 0.0),
            v(0.0, 1.0, 0.0),
            2.0,
            2000,
        ));
        assert!(path.samples.len() > 100);
        let (_, rms) = circle_fit(&path.positions()).unwrap();
        assert!(rms < 1e-6, "geodesic does not fit a circle: rms {rms}");
    }

    #[test]
    fn geodesic_energy_is_conserved() {
        let metric = MetricField::CircularElliptic;
        let x0 = v(0.2, -0.1, 0.15);
        let v0 = v(0.4, 0.8, -0.2);
        let path = path_or_partial(geodesic_integrate(metric, x0, v0, 1.0, 2000));
        let e0 = metric.inner(x0, v0, v0).unwrap();
        for s in &path.samples {
            let e = metric.inner(s.position(), s.velocity(), s.velocity()).unwrap();
            assert!(
                ((e - e0) / e0).abs() < 1e-8,
                "energy drift {} at t = {}",
                (e - e0) / e0,
                s.t
            );
        }
    }

    #[test]
    fn out_of_domain_start_is_rejected() {
        let err = geodesic_integrate(
            MetricField::KleinHyperbolic,
            v(1.1, 0.0, 0.0),
            v(1.0, 0.0, 0.0),
            1.0,
            64,
        )
        .unwrap_err();
        assert!(matches!(err.cause, MetricError::OutOfDomain(..)));
        assert!(err.partial.samples.is_empty());
    }

    #[test]
    fn elliptic_geodesics_abort_at_the_boundary_with_partial_path() {
        // Fast outward geodesic exits the unit ball before T = 2.
        let result = geodesic_integrate(
            MetricField::CircularElliptic,
            v(0.5, 0.0, 0.0),
            v(1.0, 0.2, 0.0),
            2.0,
            2000,
        );
        let path = match result {
            Err(abort) => {
                assert!(matches!(abort.cause, MetricError::OutOfDomain(..)));
                assert!(abort.partial.samples.len() > 100);
                abort.partial
            }
            Ok(path) => path,
        };
        let (_, rms) = circle_fit(&path.positions()).unwrap();
        assert!(rms < 1e-6, "partial geodesic is not circular: rms {rms}");
    }

    #[test]
    fn sectional_curvature_of_all_five_metrics() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for metric in ALL_METRICS {
            let expect = metric.expected_curvature();
            for _ in 0..6 {
                let x = random_ball_point(&mut rng, 0.8);
                let u = v(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                let w = v(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                let k = sectional_curvature(metric, x, u, w).unwrap();
                assert!(
                    (k - expect).abs() < 1e-3,
                    "{metric}: K = {k} at {x:?}, expected {expect}"
                );
            }
        }
    }

    #[test]
    fn curvature_is_basis_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let metric = MetricField::CircularHyperbolic;
        let x = v(0.2, 0.3, -0.1);
        let u = v(1.0, 0.2, 0.0);
        let w = v(-0.1, 0.8, 0.5);
        let base = sectional_curvature(metric, x, u, w).unwrap();
        for _ in 0..10 {
            let (a, b, c, d): (f64, f64, f64, f64) = (
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            if (a * d - b * c).abs() < 0.1 {
                continue;
            }
            let k = sectional_curvature(metric, x, a * u + b * w, c * u + d * w).unwrap();
            assert!((k - base).abs() < 1e-6, "basis dependence: {k} vs {base}");
        }
        assert!(matches!(
            sectional_curvature(metric, x, u, 2.0 * u),
            Err(MetricError::DegeneratePlane)
        ));
    }

    #[test]
    fn pullback_oracle_for_the_circular_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        for _ in 0..20 {
            let x = random_ball_point(&mut rng, 0.9);
            let lhs = pullback_metric(MetricField::KleinHyperbolic, &SpaceMap::AffineCharPos, x)
                .unwrap();
            let rhs = MetricField::CircularHyperbolic.eval(x).unwrap();
            assert!((lhs - rhs).norm() < 1e-10, "hyperbolic pullback mismatch at {x:?}");

            let lhs = pullback_metric(MetricField::GnomonicElliptic, &SpaceMap::AffineCharNeg, x)
                .unwrap();
            let rhs = MetricField::CircularElliptic.eval(x).unwrap();
            assert!((lhs - rhs).norm() < 1e-10, "elliptic pullback mismatch at {x:?}");
        }
        let id = pullback_metric(MetricField::Euclidean, &SpaceMap::Identity, v(0.3, 0.4, 0.5))
            .unwrap();
        assert_relative_eq!(id, Matrix3::identity());
    }

    #[test]
    fn affine_chart_images_of_geodesics_are_straight() {
        let path = path_or_partial(geodesic_integrate(
            MetricField::CircularHyperbolic,
            v(0.1, 0.05, 0.0),
            v(0.3, 1.0, 0.4),
            2.0,
            2000,
        ));
        let images = chart_images(&path, &SpaceMap::AffineCharPos).unwrap();
        let res = line_residual(&images).unwrap();
        assert!(res < 1e-7, "mapped geodesic not straight: {res}");
    }

    #[test]
    fn gnomonic_lift_values() {
        let lift = gnomonic_lift(Vec3::zeros(), GeometryClass::Hyperbolic).unwrap();
        assert_relative_eq!(lift, Vector4::new(0.0, 0.0, 0.0, 1.0));

        let y = v(0.5, 0.0, 0.0) * 0.5f64.sqrt(); // |y| = 0.5/√2 … any |y| < 1 works
        let z = gnomonic_lift(y, GeometryClass::Hyperbolic).unwrap();
        let lorentz = z.x * z.x + z.y * z.y + z.z * z.z - z.w * z.w;
        assert_relative_eq!(lorentz, -1.0, epsilon = 1e-12);

        let z = gnomonic_lift(v(3.0, 0.0, 0.0), GeometryClass::Elliptic).unwrap();
        assert_relative_eq!(z, Vector4::new(3.0, 0.0, 0.0, 1.0) / 10f64.sqrt());
        assert_relative_eq!(z.norm(), 1.0);

        assert!(matches!(
            gnomonic_lift(v(1.0, 0.0, 0.0), GeometryClass::Hyperbolic),
            Err(MetricError::OutOfDomain(..))
        ));
        assert!(matches!(
            gnomonic_lift(Vec3::zeros(), GeometryClass::Euclidean),
            Err(MetricError::UnsupportedClass)
        ));
    }

    #[test]
    fn metric_names_round_trip() {
        for metric in ALL_METRICS {
            let name = metric.to_string();
            assert_eq!(name.parse::<MetricField>().unwrap(), metric);
        }
        assert!("spherical".parse::<MetricField>().is_err());
    }
}
