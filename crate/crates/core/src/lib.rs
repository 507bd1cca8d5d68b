//! Exact computation of the Catlin commutator multitype, boundary systems,
//! boundary-system ideals and normalizing coordinate changes for
//! sum-of-squares domains
//!
//!   r = 2·Re(z₁) + Σ_j |f_j(z₂,…,z_n)|²
//!
//! with polynomial generators over the Gaussian rationals. Everything is
//! exact: rational arithmetic throughout, no floating point.
//!
//! Module map:
//! - [`algebra`]: Gaussian rationals, sparse holomorphic and mixed
//!   polynomials, invertible coordinate changes.
//! - [`weights`]: weight tuples, lexicographic order, weighted degrees,
//!   model extraction and the distinguished-weight verifier.
//! - [`machinery`]: Jacobians, vector-field application, derivative ideals,
//!   ordered/equally-ordered lists, Levi products.
//! - [`engine`]: Levi rank, the iterative commutator-multitype computation
//!   with boundary system and boundary-system ideal.
//! - [`normalizer`]: shear extraction, torsion checking, balanced chains,
//!   full boundary-system normalization.
//! - [`oracle`]: independent brute-force routes used to certify the engine.
//! - [`domain`]: the input language.
//! - [`report`]: command dispatch and machine-readable reports.

pub mod algebra;
pub mod domain;
pub mod engine;
mod error;
pub mod machinery;
pub mod normalizer;
pub mod oracle;
pub mod report;
pub mod suites;
pub mod weights;

pub use error::Error;
