//! Exact finite-dimensional statistics of 2x2 Gram matrices W = H H† where
//! the entries of H are independent complex Gaussians with a per-entry
//! variance profile phi[i][j].
//!
//! The crate provides the matrix density of W, the joint density of its
//! ordered eigenvalues (quadrature form for arbitrary profiles, closed form
//! when one row of the profile is flat), closed-form CDFs and small-argument
//! expansions of the extreme eigenvalues, a seeded Monte Carlo sampler that
//! acts as an independent oracle, and zero-forcing outage-rate utilities
//! built on the minimum-eigenvalue law.

// Validation guards are spelled `!(x > 0.0)` rather than `x <= 0.0` so that
// NaN also fails them; a partial_cmp rewrite would lose that.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dist;
pub mod error;
pub mod gram;
pub mod mc;
pub mod outage;
pub mod profile;
pub mod quad;
pub mod specfun;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
