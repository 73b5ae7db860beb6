//! Explicit four-variable Bellman function for the weighted L² bound on
//! martingale transforms, together with the machinery that certifies its
//! properties numerically.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernels`] evaluates the one-dimensional kernels φ, ψ and ψ̂ on `[1, c]`.
//! * [`bellman`] assembles the building blocks b₁–b₆, the piecewise function
//!   `B`, the majorant `G` and the maximal extension, with closed-form
//!   gradients and Hessians.
//! * [`verifier`] scans parameter grids and checks the initial condition,
//!   majorization, piece ordering and continuity, the Hessian-matrix inequalities
//!   and the constrained concavity of `B`, using exact rational Sylvester
//!   minors where the matrices are rational.
//! * [`sim`] builds finite dyadic martingale models with A₂ weights and checks
//!   the supermartingale property of `B` and the resulting weighted L² and
//!   maximal inequalities by exact expectation.

pub mod bellman;
pub mod error;
pub mod kernels;
pub mod sim;
pub mod verifier;

pub use bellman::{
    BellmanEval, BellmanPoint, Block, Direction, Jet, MaxPoint, Piece, Region,
};
pub use error::{Error, Result};
pub use kernels::{DomainParams, KernelValue};
