//! Taylor coefficients of bundle members.
//!
//! On a member with tangent `(1, k, m)` the graph coordinates expand as
//!
//! ```text
//! y(x) = k·x + φ₂x² + φ₃x³ + φ₄x⁴ + …
//! z(x) = m·x + ψ₂x² + ψ₃x³ + ψ₄x⁴ + …
//! ```
//!
//! and with `f = 1 + k² + m²` and `g = kA + mB` the coefficients have the
//! closed forms
//!
//! ```text
//! φ₂ = A·f            ψ₂ = B·f
//! φ₃ = 2A·g·f         ψ₃ = 2B·g·f
//! φ₄ = A(A²+B²)f² + 4A·g²·f     (ψ₄ likewise with B)
//! ```
//!
//! Everything symbolic is exact rational arithmetic; the numeric extractor
//! recovers the same coefficients from the geometric circle alone and is the
//! independent cross-check.

use crate::bundle::{is_generic_54, TangentParam, GENERIC_DIRECTIONS};
use crate::geom::{perp_basis, CircleOrLine, SphereEq, Vec3};
use crate::poly::{fundamental_factor, poly_divrem, BivarPoly, PolyError};
use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num::rational::BigRational;
use num::traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TaylorError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("Newton iteration failed to converge at stencil node x = {x}")]
    NewtonDivergence { x: f64 },
    #[error("stencil fit is ill-conditioned")]
    IllConditionedStencil,
    #[error("curve does not pass through the origin")]
    CurveMissesOrigin,
    #[error("symmetry constraints apply to coefficients of degree <= 1 (got degree {0})")]
    DegreeTooHigh(u32),
    #[error("diagnostic grid is degenerate: {0}")]
    DegenerateGrid(String),
}

/// The six closed-form coefficient polynomials.
#[derive(Clone, Debug)]
pub struct TaylorSextet {
    pub phi2: BivarPoly,
    pub phi3: BivarPoly,
    pub phi4: BivarPoly,
    pub psi2: BivarPoly,
    pub psi3: BivarPoly,
    pub psi4: BivarPoly,
}

/// The six coefficients evaluated (or numerically estimated) at one `(k, m)`.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct TaylorEstimate {
    pub phi2: f64,
    pub phi3: f64,
    pub phi4: f64,
    pub psi2: f64,
    pub psi3: f64,
    pub psi4: f64,
}

impl TaylorEstimate {
    pub fn as_array(&self) -> [f64; 6] {
        [self.phi2, self.psi2, self.phi3, self.psi3, self.phi4, self.psi4]
    }
}

pub use crate::poly::fundamental_factor as fundamental;

/// Exact closed forms for the coefficients of orders 2–4.
pub fn closed_taylor(a: &BivarPoly, b: &BivarPoly) -> TaylorSextet {
    let f = fundamental_factor();
    let g = &(&BivarPoly::var_k() * a) + &(&BivarPoly::var_m() * b);
    let two = BivarPoly::from_int(2);
    let four = BivarPoly::from_int(4);
    let f2 = &f * &f;
    let sumsq = &(a * a) + &(b * b);
    let g2f = &(&g * &g) * &f;
    let order3 = |c: &BivarPoly| &(&(&two * c) * &g) * &f;
    let order4 = |c: &BivarPoly| &(&(c * &sumsq) * &f2) + &(&(&four * c) * &g2f);
    TaylorSextet {
        phi2: a * &f,
        psi2: b * &f,
        phi3: order3(a),
        psi3: order3(b),
        phi4: order4(a),
        psi4: order4(b),
    }
}

impl TaylorSextet {
    pub fn eval(&self, k: f64, m: f64) -> TaylorEstimate {
        TaylorEstimate {
            phi2: self.phi2.eval_f64(k, m),
            phi3: self.phi3.eval_f64(k, m),
            phi4: self.phi4.eval_f64(k, m),
            psi2: self.psi2.eval_f64(k, m),
            psi3: self.psi3.eval_f64(k, m),
            psi4: self.psi4.eval_f64(k, m),
        }
    }
}

/// Closed-form coefficient values from pointwise `A`, `B` values.
pub fn sextet_at(a_val: f64, b_val: f64, dir: TangentParam) -> TaylorEstimate {
    let f = 1.0 + dir.k * dir.k + dir.m * dir.m;
    let g = dir.k * a_val + dir.m * b_val;
    let sumsq = a_val * a_val + b_val * b_val;
    TaylorEstimate {
        phi2: a_val * f,
        psi2: b_val * f,
        phi3: 2.0 * a_val * g * f,
        psi3: 2.0 * b_val * g * f,
        phi4: a_val * sumsq * f * f + 4.0 * a_val * g * g * f,
        psi4: b_val * sumsq * f * f + 4.0 * b_val * g * g * f,
    }
}

/// Structural identities relating the order-3 coefficients to the order-2
/// ones: `f·φ₃ = 2φ₂(kφ₂ + mψ₂)` and `f·ψ₃ = 2ψ₂(kφ₂ + mψ₂)`.
///
/// Returns the two residual polynomials, identically zero for every `A`, `B`.
pub fn identity_check_eq7(a: &BivarPoly, b: &BivarPoly) -> (BivarPoly, BivarPoly) {
    let f = fundamental_factor();
    let t = closed_taylor(a, b);
    let mixed = &(&BivarPoly::var_k() * &t.phi2) + &(&BivarPoly::var_m() * &t.psi2);
    let two = BivarPoly::from_int(2);
    let r_phi = &(&f * &t.phi3) - &(&(&two * &t.phi2) * &mixed);
    let r_psi = &(&f * &t.psi3) - &(&(&two * &t.psi2) * &mixed);
    (r_phi, r_psi)
}

// Stencil geometry: nodes at j·h for j in −4..=4, with the exact value at
// the origin pinned by the curve passing through it. The degree-8
// interpolant makes the truncation error on the order-4 coefficient scale
// like (h/ρ)⁶ against the curve's convergence radius ρ.
const STENCIL_HALF_WIDTH: i32 = 4;
const STENCIL_STEP_FACTOR: f64 = 1e-2;

/// Recovers the order 2–4 coefficients from the geometric curve alone.
///
/// Solves the curve's two surface equations for `y(x)`, `z(x)` by Newton
/// iteration on a symmetric stencil and interpolates; the curve must pass
/// through the origin with tangent `(1, k, m)`.
pub fn numeric_taylor(
    curve: &CircleOrLine,
    tangent: TangentParam,
) -> Result<TaylorEstimate, TaylorError> {
    if curve.distance_to(Vec3::zeros()) > 1e-9 {
        return Err(TaylorError::CurveMissesOrigin);
    }
    // Both cut surfaces are built with exact zero constant term: the curve
    // passes through the origin, so its sphere does too (c = 0) and its
    // plane contains the radial vector to the origin (offset = 0). The
    // interpolation divides values by h⁴, so a rounding-level constant
    // offset in the surfaces would dominate the high-order coefficients.
    let (surf_f, surf_g, scale) = match *curve {
        CircleOrLine::Circle { center, radius, normal } => {
            (SphereEq::new(1.0, -2.0 * center, 0.0), SphereEq::plane(normal, 0.0), radius)
        }
        CircleOrLine::Line { direction, .. } => {
            let (u, w) = perp_basis(direction);
            (SphereEq::plane(u, 0.0), SphereEq::plane(w, 0.0), 1.0)
        }
    };
    // The graph y(x), z(x) folds where the tangent turns vertical; for a
    // steep tangent that happens after an x-run of roughly radius/f with
    // f = 1 + k² + m², so the stencil must shrink with the steepness.
    let steepness = 1.0 + tangent.k * tangent.k + tangent.m * tangent.m;
    let h = STENCIL_STEP_FACTOR * scale / steepness;
    if !h.is_finite() || h <= 0.0 {
        return Err(TaylorError::IllConditionedStencil);
    }

    let nodes: Vec<i32> = (-STENCIL_HALF_WIDTH..=STENCIL_HALF_WIDTH).collect();
    let mut ys = DVector::zeros(nodes.len());
    let mut zs = DVector::zeros(nodes.len());
    for (row, &j) in nodes.iter().enumerate() {
        if j == 0 {
            continue;
        }
        let x = j as f64 * h;
        let (y, z) = newton_on_curve(&surf_f, &surf_g, x, tangent, scale)?;
        ys[row] = y;
        zs[row] = z;
    }

    // Interpolate in the scaled variable u = x/h; coefficient of u^l is
    // φ_l·h^l.
    let n = nodes.len();
    let vand = DMatrix::from_fn(n, n, |r, c| (nodes[r] as f64).powi(c as i32));
    let lu = vand.lu();
    let by = lu.solve(&ys).ok_or(TaylorError::IllConditionedStencil)?;
    let bz = lu.solve(&zs).ok_or(TaylorError::IllConditionedStencil)?;
    let unscale = |b: &DVector<f64>, l: usize| b[l] / h.powi(l as i32);
    Ok(TaylorEstimate {
        phi2: unscale(&by, 2),
        phi3: unscale(&by, 3),
        phi4: unscale(&by, 4),
        psi2: unscale(&bz, 2),
        psi3: unscale(&bz, 3),
        psi4: unscale(&bz, 4),
    })
}

fn newton_on_curve(
    surf_f: &SphereEq,
    surf_g: &SphereEq,
    x: f64,
    tangent: TangentParam,
    scale: f64,
) -> Result<(f64, f64), TaylorError> {
    let mut y = tangent.k * x;
    let mut z = tangent.m * x;
    // Iterate to the machine floor: the interpolation divides these values
    // by h^4, so stopping at any fixed absolute tolerance is too coarse.
    // Quadratic convergence stalls within a few iterations; stop when the
    // step no longer shrinks.
    let mut prev = f64::INFINITY;
    for iter in 0..60 {
        let p = Vec3::new(x, y, z);
        let fv = surf_f.eval(p);
        let gv = surf_g.eval(p);
        let gf = surf_f.gradient(p);
        let gg = surf_g.gradient(p);
        let jac = Matrix2::new(gf.y, gf.z, gg.y, gg.z);
        let Some(inv) = jac.try_inverse() else {
            return Err(TaylorError::NewtonDivergence { x });
        };
        let step = inv * Vector2::new(fv, gv);
        y -= step.x;
        z -= step.y;
        let s = step.norm();
        if s == 0.0 || (iter >= 3 && s >= prev) {
            if s > 1e-6 * scale.max(x.abs()) {
                return Err(TaylorError::NewtonDivergence { x });
            }
            return Ok((y, z));
        }
        prev = s;
    }
    Err(TaylorError::NewtonDivergence { x })
}

/// Which of the three linear-coefficient constraints fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SymmetryConstraint {
    /// `A` must not depend on `m`.
    BZero,
    /// `B` must not depend on `k`.
    DZero,
    /// The `k`-slope of `A` must equal the `m`-slope of `B`.
    AEqualsE,
}

/// Result of the second-derivative symmetry constraints on linear
/// coefficients `A = a·k + b·m + c`, `B = d·k + e·m + g`: a rectifiable
/// bundle forces `b = d = 0` and `a = e`, i.e. `A = αk + β`, `B = αm + γ`.
#[derive(Clone, Debug)]
pub struct SymmetryReport {
    pub violated: Vec<SymmetryConstraint>,
    pub b: BigRational,
    pub d: BigRational,
    pub a_minus_e: BigRational,
}

impl SymmetryReport {
    pub fn passes(&self) -> bool {
        self.violated.is_empty()
    }
}

pub fn symmetry_check(a: &BivarPoly, b: &BivarPoly) -> Result<SymmetryReport, TaylorError> {
    for p in [a, b] {
        if let Some(d) = p.degree() {
            if d > 1 {
                return Err(TaylorError::DegreeTooHigh(d));
            }
        }
    }
    let coef_b = a.coeff(0, 1);
    let coef_d = b.coeff(1, 0);
    let a_minus_e = a.coeff(1, 0) - b.coeff(0, 1);
    let mut violated = Vec::new();
    if !coef_b.is_zero() {
        violated.push(SymmetryConstraint::BZero);
    }
    if !coef_d.is_zero() {
        violated.push(SymmetryConstraint::DZero);
    }
    if !a_minus_e.is_zero() {
        violated.push(SymmetryConstraint::AEqualsE);
    }
    Ok(SymmetryReport { violated, b: coef_b, d: coef_d, a_minus_e })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Rectifiable,
    NotRectifiable,
}

/// Relative thresholds for the diagnostic verdict.
pub const DIAGNOSTIC_FIT_TOL: f64 = 1e-4;
pub const DIAGNOSTIC_CONSTRAINT_TOL: f64 = 1e-5;

#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticReport {
    /// Relative degree-(3,3,5,5,7,7) fit residuals for
    /// (φ₂, ψ₂, φ₃, ψ₃, φ₄, ψ₄).
    pub fit_residuals: [f64; 6],
    /// Relative remainder norms of the degree-3 fits of φ₂, ψ₂ modulo f.
    pub remainders: [f64; 2],
    /// Coefficients (α, β, γ) of `A = αk + β`, `B = αm + γ` recovered from
    /// the fitted quotients.
    pub recovered: [f64; 3],
    /// Violations (|b|, |d|, |a − e|) of the linear-coefficient constraints.
    pub constraint_violations: [f64; 3],
    pub verdict: Verdict,
}

/// Degree-bound diagnostics on sampled coefficient data.
///
/// Fits φ₂, ψ₂ by total-degree-3 polynomials (φ₃, ψ₃ by degree 5 and
/// φ₄, ψ₄ by degree 7), reduces the degree-3 fits modulo `f`, and recovers
/// the linear coefficients of `A` and `B` from the quotients. A rectifiable
/// bundle fits exactly, divides exactly, and satisfies the symmetry
/// constraints.
pub fn rectifiability_diagnostic(
    grid: &[TangentParam],
    data: &[TaylorEstimate],
) -> Result<DiagnosticReport, TaylorError> {
    if grid.len() < GENERIC_DIRECTIONS || grid.len() != data.len() {
        return Err(TaylorError::DegenerateGrid(format!(
            "need {} directions with matching data, got {} / {}",
            GENERIC_DIRECTIONS,
            grid.len(),
            data.len()
        )));
    }
    match is_generic_54(&grid[..GENERIC_DIRECTIONS]) {
        Ok(true) => {}
        Ok(false) => {
            return Err(TaylorError::DegenerateGrid(
                "first 54 directions are not generic".into(),
            ))
        }
        Err(e) => return Err(TaylorError::DegenerateGrid(e.to_string())),
    }

    let columns: [(usize, u32); 6] = [(0, 3), (1, 3), (2, 5), (3, 5), (4, 7), (5, 7)];
    let mut fit_residuals = [0.0; 6];
    let mut deg3_fits: [BivarPoly; 2] = [BivarPoly::zero(), BivarPoly::zero()];
    for (slot, (field, degree)) in columns.iter().enumerate() {
        let values: Vec<f64> = data.iter().map(|e| e.as_array()[*field]).collect();
        let (poly, rel) = fit_bivariate(grid, &values, *degree)?;
        fit_residuals[slot] = rel;
        if slot < 2 {
            deg3_fits[slot] = poly;
        }
    }

    let f = fundamental_factor();
    let mut remainders = [0.0; 2];
    let mut quotients: [BivarPoly; 2] = [BivarPoly::zero(), BivarPoly::zero()];
    for (slot, fitted) in deg3_fits.iter().enumerate() {
        let (q, r) = poly_divrem(fitted, &f)?;
        let denom = fitted.coeff_norm().max(1e-300);
        remainders[slot] = r.coeff_norm() / denom;
        quotients[slot] = q;
    }

    let alpha = quotients[0].coeff(1, 0).to_f64().unwrap_or(f64::NAN);
    let beta = quotients[0].coeff(0, 0).to_f64().unwrap_or(f64::NAN);
    let gamma = quotients[1].coeff(0, 0).to_f64().unwrap_or(f64::NAN);
    let b_violation = quotients[0].coeff(0, 1).to_f64().unwrap_or(f64::NAN).abs();
    let d_violation = quotients[1].coeff(1, 0).to_f64().unwrap_or(f64::NAN).abs();
    let e = quotients[1].coeff(0, 1).to_f64().unwrap_or(f64::NAN);
    let ae_violation = (alpha - e).abs();

    let coeff_scale = 1.0 + quotients[0].coeff_norm().max(quotients[1].coeff_norm());
    let fits_ok = fit_residuals[0] <= DIAGNOSTIC_FIT_TOL && fit_residuals[1] <= DIAGNOSTIC_FIT_TOL;
    let divides_ok = remainders.iter().all(|&r| r <= DIAGNOSTIC_FIT_TOL);
    let constraints_ok = [b_violation, d_violation, ae_violation]
        .iter()
        .all(|&v| v <= DIAGNOSTIC_CONSTRAINT_TOL * coeff_scale);
    let verdict = if fits_ok && divides_ok && constraints_ok {
        Verdict::Rectifiable
    } else {
        Verdict::NotRectifiable
    };
    Ok(DiagnosticReport {
        fit_residuals,
        remainders,
        recovered: [alpha, beta, gamma],
        constraint_violations: [b_violation, d_violation, ae_violation],
        verdict,
    })
}

/// Diagnostic driven by coefficient functions, using the closed forms
/// pointwise (the route for symbolically given `A`, `B`).
pub fn diagnostic_from_functions(
    a: impl Fn(f64, f64) -> f64,
    b: impl Fn(f64, f64) -> f64,
    grid: &[TangentParam],
) -> Result<DiagnosticReport, TaylorError> {
    let data: Vec<TaylorEstimate> =
        grid.iter().map(|&d| sextet_at(a(d.k, d.m), b(d.k, d.m), d)).collect();
    rectifiability_diagnostic(grid, &data)
}

fn monomials_up_to(degree: u32) -> Vec<(u32, u32)> {
    (0..=degree).flat_map(|i| (0..=(degree - i)).map(move |j| (i, j))).collect()
}

/// Least-squares bivariate fit of total degree `degree`; returns the fitted
/// polynomial (coefficients rationalized exactly) and the relative residual.
fn fit_bivariate(
    grid: &[TangentParam],
    values: &[f64],
    degree: u32,
) -> Result<(BivarPoly, f64), TaylorError> {
    let monos = monomials_up_to(degree);
    let design = DMatrix::from_fn(grid.len(), monos.len(), |r, c| {
        let (i, j) = monos[c];
        grid[r].k.powi(i as i32) * grid[r].m.powi(j as i32)
    });
    let rhs = DVector::from_column_slice(values);
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values[0].max(1e-300);
    let sol =
        svd.solve(&rhs, 1e-13 * smax).map_err(|_| TaylorError::IllConditionedStencil)?;
    let residual = (&design * &sol - &rhs).norm();
    let rel = residual / rhs.norm().max(1e-300);
    let mut poly = BivarPoly::zero();
    for (c, &(i, j)) in monos.iter().enumerate() {
        if let Some(r) = BigRational::from_float(sol[c]) {
            if !r.is_zero() {
                poly = &poly + &BivarPoly::monomial(i, j, r);
            }
        }
    }
    Ok((poly, rel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{bundle_from_ab, sample_directions};
    use crate::poly::rational;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closed_forms_for_unit_a() {
        // A ≡ 1, B ≡ 0: φ₂ = f, φ₃ = 2k·f, φ₄ = f² + 4k²f, ψ's vanish.
        let t = closed_taylor(&BivarPoly::one(), &BivarPoly::zero());
        let f = fundamental_factor();
        assert_eq!(t.phi2, f);
        let two_k = BivarPoly::monomial(1, 0, rational(2, 1));
        assert_eq!(t.phi3, &two_k * &f);
        let expect4 = &(&f * &f) + &(&BivarPoly::monomial(2, 0, rational(4, 1)) * &f);
        assert_eq!(t.phi4, expect4);
        assert!(t.psi2.is_zero() && t.psi3.is_zero() && t.psi4.is_zero());

        let all_zero = closed_taylor(&BivarPoly::zero(), &BivarPoly::zero());
        assert!(all_zero.phi2.is_zero() && all_zero.psi4.is_zero());
    }

    #[test]
    fn closed_form_point_values() {
        // A = 2k+1, B = 2m+3 at the origin of the chart: φ₂ = 1, ψ₂ = 3.
        let a = BivarPoly::linear(2, 0, 1);
        let b = BivarPoly::linear(0, 2, 3);
        let t = closed_taylor(&a, &b).eval(0.0, 0.0);
        assert_eq!(t.phi2, 1.0);
        assert_eq!(t.psi2, 3.0);
    }

    #[test]
    fn closed_forms_match_direct_expansion() {
        // A ≡ 1, B ≡ 0, k = 1, m = 0: y = x + x² + y², whose branch through
        // the origin expands as y = x + 2x² + 4x³ + 12x⁴ + …
        let t = closed_taylor(&BivarPoly::one(), &BivarPoly::zero()).eval(1.0, 0.0);
        assert_eq!(t.phi2, 2.0);
        assert_eq!(t.phi3, 4.0);
        assert_eq!(t.phi4, 12.0);
    }

    #[test]
    fn degree_bounds_attained_for_linear_coefficients() {
        let a = BivarPoly::linear(3, 0, -1);
        let b = BivarPoly::linear(0, 3, 2);
        let t = closed_taylor(&a, &b);
        assert_eq!(t.phi2.degree(), Some(3));
        assert_eq!(t.phi3.degree(), Some(5));
        assert_eq!(t.phi4.degree(), Some(7));
        assert_eq!(t.psi2.degree(), Some(3));
        assert_eq!(t.psi3.degree(), Some(5));
        assert_eq!(t.psi4.degree(), Some(7));
    }

    #[test]
    fn eq7_identities_are_exactly_zero() {
        let cases = [
            (BivarPoly::one(), BivarPoly::zero()),
            (
                &BivarPoly::linear(3, -1, 0) + &BivarPoly::constant(rational(1, 2)),
                BivarPoly::monomial(2, 1, rational(1, 1)),
            ),
            (BivarPoly::monomial(2, 0, rational(1, 1)), BivarPoly::monomial(0, 3, rational(1, 1))),
        ];
        for (a, b) in cases {
            let (r1, r2) = identity_check_eq7(&a, &b);
            assert!(r1.is_zero(), "phi residual nonzero: {r1}");
            assert!(r2.is_zero(), "psi residual nonzero: {r2}");
        }
    }

    #[test]
    fn eq7_identities_for_random_rational_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let mut rand_poly = || {
                let mut p = BivarPoly::zero();
                for i in 0..=3u32 {
                    for j in 0..=(3 - i) {
                        if rng.random_bool(0.4) {
                            let num = rng.random_range(-9i64..=9);
                            let den = rng.random_range(1i64..=9);
                            p = &p + &BivarPoly::monomial(i, j, rational(num, den));
                        }
                    }
                }
                p
            };
            let (a, b) = (rand_poly(), rand_poly());
            let (r1, r2) = identity_check_eq7(&a, &b);
            assert!(r1.is_zero() && r2.is_zero());
        }
    }

    #[test]
    fn numeric_taylor_matches_closed_forms() {
        let a = BivarPoly::linear(1, 0, 1); // A = k + 1
        let b = BivarPoly::linear(0, 1, 0); // B = m
        let dir = TangentParam { k: 1.0, m: 1.0 };
        let bundle = bundle_from_ab(&a, &b, &[dir]).unwrap();
        let est = numeric_taylor(&bundle.members[0].curve, dir).unwrap();
        let exact = closed_taylor(&a, &b).eval(dir.k, dir.m);
        for (got, want) in est.as_array().iter().zip(exact.as_array()) {
            let rel = (got - want).abs() / want.abs().max(1.0);
            assert!(rel < 1e-6, "numeric {got} vs closed {want}");
        }
    }

    #[test]
    fn numeric_taylor_on_lines_is_zero() {
        let dir = TangentParam { k: 0.5, m: -1.5 };
        let bundle = bundle_from_ab(&BivarPoly::zero(), &BivarPoly::zero(), &[dir]).unwrap();
        let est = numeric_taylor(&bundle.members[0].curve, dir).unwrap();
        for v in est.as_array() {
            assert!(v.abs() < 1e-9, "line coefficient estimate {v} not ~0");
        }
    }

    #[test]
    fn numeric_taylor_simple_circle() {
        let dir = TangentParam { k: 0.0, m: 0.0 };
        let bundle = bundle_from_ab(&BivarPoly::one(), &BivarPoly::zero(), &[dir]).unwrap();
        let est = numeric_taylor(&bundle.members[0].curve, dir).unwrap();
        assert!((est.phi2 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn numeric_vs_closed_over_random_linear_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let a = BivarPoly::linear(
                rng.random_range(-2..=2),
                rng.random_range(-2..=2),
                rng.random_range(-2..=2),
            );
            let b = BivarPoly::linear(
                rng.random_range(-2..=2),
                rng.random_range(-2..=2),
                rng.random_range(-2..=2),
            );
            let dir = TangentParam {
                k: rng.random_range(-2.0..2.0),
                m: rng.random_range(-2.0..2.0),
            };
            let bundle = bundle_from_ab(&a, &b, &[dir]).unwrap();
            let est = numeric_taylor(&bundle.members[0].curve, dir).unwrap();
            let exact = closed_taylor(&a, &b).eval(dir.k, dir.m);
            for (got, want) in est.as_array().iter().zip(exact.as_array()) {
                let rel = (got - want).abs() / want.abs().max(1.0);
                assert!(rel < 1e-6, "numeric {got} vs closed {want} at {dir:?}");
            }
        }
    }

    #[test]
    fn symmetry_check_cases() {
        let report =
            symmetry_check(&BivarPoly::linear(2, 0, 1), &BivarPoly::linear(0, 2, 3)).unwrap();
        assert!(report.passes());

        let report = symmetry_check(&BivarPoly::var_m(), &BivarPoly::zero()).unwrap();
        assert_eq!(report.violated, vec![SymmetryConstraint::BZero]);

        let report = symmetry_check(&BivarPoly::var_k(), &BivarPoly::linear(0, 2, 0)).unwrap();
        assert_eq!(report.violated, vec![SymmetryConstraint::AEqualsE]);

        assert!(matches!(
            symmetry_check(&BivarPoly::monomial(2, 0, rational(1, 1)), &BivarPoly::zero()),
            Err(TaylorError::DegreeTooHigh(2))
        ));
    }

    fn grid_60(seed: u64) -> Vec<TangentParam> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sample_directions(&mut rng, 60, -2.0, 2.0)
    }

    #[test]
    fn diagnostic_recovers_linear_coefficients() {
        let grid = grid_60(21);
        let report =
            diagnostic_from_functions(|k, _| 2.0 * k + 1.0, |_, m| 2.0 * m + 3.0, &grid).unwrap();
        assert_eq!(report.verdict, Verdict::Rectifiable);
        assert!(report.fit_residuals.iter().all(|&r| r < 1e-10));
        assert!(report.remainders.iter().all(|&r| r < 1e-10));
        assert!((report.recovered[0] - 2.0).abs() < 1e-9);
        assert!((report.recovered[1] - 1.0).abs() < 1e-9);
        assert!((report.recovered[2] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn diagnostic_rejects_quadratic_coefficient() {
        let grid = grid_60(22);
        let report = diagnostic_from_functions(|k, _| k * k, |_, _| 0.0, &grid).unwrap();
        assert_eq!(report.verdict, Verdict::NotRectifiable);
        assert!(report.fit_residuals[0] > 1e-2, "φ₂ fit residual {}", report.fit_residuals[0]);
    }

    #[test]
    fn diagnostic_accepts_line_bundles() {
        let grid = grid_60(23);
        let report = diagnostic_from_functions(|_, _| 0.0, |_, _| 0.0, &grid).unwrap();
        assert_eq!(report.verdict, Verdict::Rectifiable);
        assert!(report.fit_residuals.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn diagnostic_rejects_degenerate_grids() {
        let cone: Vec<TangentParam> = (0..60)
            .map(|i| {
                let th = 0.07 + 6.0 * i as f64 / 60.0;
                TangentParam { k: th.cos(), m: th.sin() }
            })
            .collect();
        assert!(matches!(
            diagnostic_from_functions(|_, _| 1.0, |_, _| 0.0, &cone),
            Err(TaylorError::DegenerateGrid(_))
        ));
    }

    /// Best degree-3 approximation oracle: an independent normal-equations
    /// solve must agree with the reported φ₂ residual for A = k².
    #[test]
    fn diagnostic_residual_matches_normal_equations_oracle() {
        let grid = grid_60(24);
        let report = diagnostic_from_functions(|k, _| k * k, |_, _| 0.0, &grid).unwrap();

        let monos = super::monomials_up_to(3);
        let n = grid.len();
        let design = DMatrix::from_fn(n, monos.len(), |r, c| {
            let (i, j) = monos[c];
            grid[r].k.powi(i as i32) * grid[r].m.powi(j as i32)
        });
        let values = DVector::from_iterator(
            n,
            grid.iter().map(|d| {
                let f = 1.0 + d.k * d.k + d.m * d.m;
                d.k * d.k * f
            }),
        );
        // Normal equations, solved by Cholesky.
        let gram = design.transpose() * &design;
        let rhs = design.transpose() * &values;
        let sol = gram.cholesky().expect("gram matrix is positive definite").solve(&rhs);
        let oracle_rel = (&design * &sol - &values).norm() / values.norm();
        let got = report.fit_residuals[0];
        assert!((got - oracle_rel).abs() < 1e-8 * (1.0 + oracle_rel));
    }
}
