//! Least-squares instruments: total-least-squares lines and 3-D circle fits.
//!
//! These are verification tools, so the residuals they report are plain RMS
//! Euclidean distances that tests can threshold directly.

use crate::geom::{CircleOrLine, Vec3};
use nalgebra::{DMatrix, Matrix3, Vector2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("point cloud is degenerate (all points coincident)")]
    DegenerateCloud,
}

/// Ratio below which the best-fit curvature is treated as zero and a line is
/// returned instead of a giant circle.
const LINE_CURVATURE_RATIO: f64 = 1e-9;

fn centroid(points: &[Vec3]) -> Vec3 {
    points.iter().sum::<Vec3>() / points.len() as f64
}

fn centered_matrix(points: &[Vec3], mu: Vec3) -> DMatrix<f64> {
    DMatrix::from_fn(points.len(), 3, |r, c| (points[r] - mu)[c])
}

/// Total-least-squares line: centroid plus leading principal direction.
/// Returns the line and the RMS orthogonal distance.
pub fn line_tls(points: &[Vec3]) -> Result<(CircleOrLine, f64), FitError> {
    if points.len() < 2 {
        return Err(FitError::TooFewPoints { needed: 2, got: points.len() });
    }
    let mu = centroid(points);
    let m = centered_matrix(points, mu);
    let svd = m.svd(true, true);
    let s = &svd.singular_values;
    if s[0] <= 1e-300 {
        return Err(FitError::DegenerateCloud);
    }
    let vt = svd.v_t.as_ref().expect("svd computed with vectors");
    let dir = Vec3::new(vt[(0, 0)], vt[(0, 1)], vt[(0, 2)]);
    let rms = ((s[1] * s[1] + s[2] * s[2]) / points.len() as f64).sqrt();
    Ok((CircleOrLine::line(mu, dir), rms))
}

/// RMS orthogonal distance of the points to their TLS line.
pub fn line_residual(points: &[Vec3]) -> Result<f64, FitError> {
    line_tls(points).map(|(_, rms)| rms)
}

/// Fits a circle (or a line, when the best-fit curvature is negligible) to a
/// 3-D point cloud.
///
/// Plane through the centroid by SVD, algebraic in-plane circle fit, then a
/// Gauss-Newton polish of the geometric distance. Returns the curve and the
/// RMS 3-D distance of the points to it.
pub fn circle_fit(points: &[Vec3]) -> Result<(CircleOrLine, f64), FitError> {
    if points.len() < 5 {
        return Err(FitError::TooFewPoints { needed: 5, got: points.len() });
    }
    let n = points.len();
    let mu = centroid(points);
    let m = centered_matrix(points, mu);
    let svd = m.svd(true, true);
    let s = &svd.singular_values;
    let spread = s[0] / (n as f64).sqrt();
    if !spread.is_finite() || spread < 1e-13 * (1.0 + mu.norm()) {
        return Err(FitError::DegenerateCloud);
    }
    let vt = svd.v_t.as_ref().expect("svd computed with vectors");
    let axis = |r: usize| Vec3::new(vt[(r, 0)], vt[(r, 1)], vt[(r, 2)]);
    if s[1] <= 1e-9 * s[0] {
        // Collinear cloud.
        return finish(points, CircleOrLine::line(mu, axis(0)));
    }
    let (e1, e2, normal) = (axis(0), axis(1), axis(2));

    // Algebraic (Kåsa) fit in plane coordinates: u² + v² = A·u + B·v + C.
    let uv: Vec<Vector2<f64>> = points
        .iter()
        .map(|p| Vector2::new((p - mu).dot(&e1), (p - mu).dot(&e2)))
        .collect();
    let design = DMatrix::from_fn(n, 3, |r, c| match c {
        0 => uv[r].x,
        1 => uv[r].y,
        _ => 1.0,
    });
    let rhs = DMatrix::from_fn(n, 1, |r, _| uv[r].norm_squared());
    let sol = design
        .svd(true, true)
        .solve(&rhs, 1e-14 * spread.max(1.0))
        .map_err(|_| FitError::DegenerateCloud)?;
    let mut center2 = Vector2::new(sol[(0, 0)] / 2.0, sol[(1, 0)] / 2.0);
    let r2 = sol[(2, 0)] + center2.norm_squared();
    if !r2.is_finite() || r2 <= 0.0 {
        return finish(points, CircleOrLine::line(mu, e1));
    }
    let mut radius = r2.sqrt();

    // Gauss-Newton on the signed radial residual ρ_i − r.
    for _ in 0..30 {
        let mut jtj = Matrix3::<f64>::zeros();
        let mut jtr = nalgebra::Vector3::<f64>::zeros();
        for q in &uv {
            let d = q - center2;
            let rho = d.norm();
            if rho < 1e-14 * radius.max(1.0) {
                continue;
            }
            let res = rho - radius;
            let jac = nalgebra::Vector3::new(-d.x / rho, -d.y / rho, -1.0);
            jtj += jac * jac.transpose();
            jtr += jac * res;
        }
        let Some(step) = jtj.lu().solve(&(-jtr)) else { break };
        center2 += Vector2::new(step.x, step.y);
        radius += step.z;
        if !radius.is_finite() || radius <= 0.0 {
            return finish(points, CircleOrLine::line(mu, e1));
        }
        if step.norm() <= 1e-14 * (radius + spread) {
            break;
        }
    }

    if 1.0 / radius < LINE_CURVATURE_RATIO / spread {
        return finish(points, CircleOrLine::line(mu, e1));
    }
    let center3 = mu + center2.x * e1 + center2.y * e2;
    finish(points, CircleOrLine::circle(center3, radius, normal))
}

fn finish(points: &[Vec3], curve: CircleOrLine) -> Result<(CircleOrLine, f64), FitError> {
    let ms: f64 =
        points.iter().map(|&p| curve.distance_to(p).powi(2)).sum::<f64>() / points.len() as f64;
    Ok((curve, ms.sqrt()))
}
