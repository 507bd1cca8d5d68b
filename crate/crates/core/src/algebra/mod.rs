//! Exact arithmetic layer: Gaussian rationals, sparse monomials, and
//! polynomials in the holomorphic and mixed (z, z̄) variables, plus the
//! invertible coordinate-change class used by the normalization steps.

mod coord;
mod gaussian;
mod holo;
mod mixed;
mod monomial;

pub use coord::{invert_matrix, ChangeStep, CoordChange};
pub use gaussian::GaussianRational;
pub use holo::HoloPoly;
pub use mixed::{expand_squares, MixedPoly};
pub use monomial::Monomial;
