//! Compound-matrix toolkit for the analysis of dynamical systems.
//!
//! The crate provides, for a real n-by-n (or rectangular) matrix `A`:
//!
//! * multiplicative compounds `A^(k)` (all k-by-k minors, lexicographic order),
//! * additive compounds `A^[k]` (the derivative of `(I + eps*A)^(k)` at 0),
//! * their fractional-order interpolations `A^(alpha)` and `A^[alpha]`,
//! * induced matrix measures (logarithmic norms) of compounds in closed form,
//! * sign-variation counts and the associated variation-diminishing cones,
//! * certificates for k-contraction, k-positivity, k-cooperativity and
//!   diagonal stability of compounds, and
//! * a fixed-step integrator with compound-transition and k-volume helpers.
//!
//! Everything is desk-scale dense linear algebra: dimensions are expected to
//! stay in the tens, and the compound dimension cap guards against larger
//! requests (see [`combinat`]).

pub mod combinat;
pub mod compound;
pub mod classify;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod matrix;
pub mod measures;
pub mod signvar;

pub use error::{Error, Result};
pub use matrix::DenseMatrix;
