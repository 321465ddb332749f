//! Gaussian Sobolev and BV calculus on domains, at finite dimension.
//!
//! The crate is a numerical laboratory for two families of objects living on
//! (truncations of) the standard Gaussian product measure:
//!
//! * the hat-function construction on rhombs `K_m` that produces Sobolev
//!   functions whose extension cost grows like `m^{1/p}`: weighted norms
//!   ([`norms`]), coarea and perimeter bounds ([`coarea`]), variational
//!   extension certificates ([`extend`]) and the product assembly
//!   ([`product`]);
//! * BV functions defined through conditional densities on lines: Skorohod
//!   derivatives, vector measures with variation and semivariation, the
//!   integration-by-parts characterization, chain rule, indicators of convex
//!   sets and extension by zero ([`bv`]).
//!
//! Gaussian weights that underflow (`ϱ((m²,0)) = e^{-m⁴/2}/2π`) are always
//! carried in log scale, see [`weight::LogWeight`].

pub mod bv;
pub mod coarea;
pub mod domains;
pub mod error;
pub mod extend;
pub mod gauss;
pub mod norms;
pub mod product;
pub mod quad;
pub mod weight;

pub use error::{Error, Result};

/// A point of the plane.
pub type Point2 = [f64; 2];

#[inline]
pub(crate) fn dot2(a: Point2, b: Point2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub(crate) fn norm2(a: Point2) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub(crate) fn sub2(a: Point2, b: Point2) -> Point2 {
    [a[0] - b[0], a[1] - b[1]]
}
