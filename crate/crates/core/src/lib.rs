//! Steklov eigenvalues of the orthotropic p-Laplacian on convex planar
//! domains.
//!
//! The crate has three layers:
//!
//! * pointwise evaluators for `l^p` norms, dual exponents and the
//!   orthotropic interior/boundary operators ([`lp`], [`operators`]);
//! * convex bodies with their geometric functionals and a 2D triangle
//!   mesher ([`body`], [`mesh`]);
//! * a P1 finite-element eigensolver for the nonlinear Steklov Rayleigh
//!   quotient with continuation in `p` ([`fem`]), and a property-testing
//!   harness for the associated eigenvalue/geometry inequalities
//!   ([`harness`]).

// `!(x > a)` is the NaN-rejecting form of a domain check, and float match
// guards are the only way to match exponent values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::redundant_guards)]

pub mod body;
pub mod error;
pub mod fem;
pub mod harness;
pub mod lp;
pub mod mesh;
pub mod operators;
pub mod powint;
pub mod quad;

pub use body::{BallReference, ConvexBody, CoordinateBound, GeometricSummary, Polygon2d};
pub use error::{Error, Result};
pub use fem::{ScalarField, SpectralResult, SweepOutcome};
pub use harness::{CampaignConfig, CampaignReport, CheckRecord};
pub use lp::{Exponent, IndexSet};
