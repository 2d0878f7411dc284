//! Circle bundles and their rectification in three-dimensional inversive
//! geometry.
//!
//! The crate is organized around five pieces of machinery:
//!
//! - [`geom`]: sphere equations, circles, inversions, and the Möbius inner
//!   product — the exact and floating-point primitives everything else is
//!   built from.
//! - [`bundle`]: generation of circle bundles from a pair of bivariate
//!   coefficient functions, the 54-direction genericity test, detection of a
//!   second common point, and verification that an inversion straightens
//!   every member.
//! - [`taylor`]: exact bivariate polynomial arithmetic ([`poly`]) plus the
//!   closed-form and numerically extracted Taylor coefficients of bundle
//!   members, with the identities and degree diagnostics that decide
//!   rectifiability.
//! - [`nets`]: four-dimensional linear systems of spheres, characteristic
//!   maps to RP³, degenerate-point detection, and classification into the
//!   hyperbolic / Euclidean / elliptic families.
//! - [`metric`]: the five constant-curvature metrics with circular or
//!   straight geodesics, geodesic integration, circle fitting, and sectional
//!   curvature — the numerical verification that circular geodesics force
//!   constant curvature.

pub mod bundle;
pub mod fit;
pub mod geom;
pub mod metric;
pub mod nets;
pub mod poly;
pub mod taylor;
