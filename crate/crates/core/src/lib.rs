//! Numerical laboratory for minimal-velocity propagation estimates.
//!
//! Everything lives on a one-dimensional Dirichlet grid with dense Hermitian
//! matrices. The crate builds Hamiltonian / conjugate-operator pairs, smooth
//! cutoffs and their functional calculus, commutator expansions, Mourre
//! certificates, and the dynamical decay experiments built on top of them.

// `!(x > 0.0)` is the NaN-rejecting form of a range test
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod commexp;
pub mod error;
pub mod funcalc;
pub mod jet;
pub mod lattice;
pub mod mourre;
pub mod operators;
pub mod propagation;
pub mod quad;
pub mod spectral;

pub use error::{Error, Result};
pub use faer::c64;
pub use lattice::{build_grid, canonical_operators, expectation, hermitize, Grid, HermitianOperator, WaveState};
