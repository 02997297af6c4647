//! Two-outcome synchronous quantum correlation sets.
//!
//! The crate is organised bottom-up:
//!
//! - [`corrsets`]: correlation tensors and matrices, class validation, the
//!   affine bijection between two-outcome synchronous tensors and correlation
//!   matrices, and the outcome embedding `C^s(n,m) -> C^s(nm,2)`.
//! - [`tracial`]: finite-dimensional tracial models (direct sums of matrix
//!   blocks with a block-weighted trace) used to synthesize correlations and
//!   to sample the quantum set by brute force.
//! - [`universal3`]: the explicit `C^8 ⊕ M_2` algebra for three projections
//!   satisfying the commutation relations of an optimal direction.
//! - [`slices`]: support values of diagonal slices of the local and quantum
//!   sets, solved exactly as small linear programs over trace atoms.
//! - [`cli`]: the `synccorr` command-line surface.

pub mod cli;
pub mod corrsets;
mod error;
pub mod pairs;
pub mod slices;
pub mod tracial;
pub mod universal3;

pub use error::{Error, Result};

/// Tolerance applied to every linear constraint unless a caller overrides it.
pub const DEFAULT_TOL: f64 = 1e-9;
