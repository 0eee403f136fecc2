//! Latent consensus of continuous-time multi-agent consensus protocols.
//!
//! The crate computes the asymptotic states of the protocol `ẋ = −Lx` and of
//! its regularized variants (an auxiliary hub agent, weak background links,
//! orthogonal correction of the initial state) in closed form, using the
//! eigenprojection of the digraph Laplacian and the parametric forest matrix
//! `(I + τL)⁻¹`. Every closed form can be checked against a brute-force
//! in-forest enumeration ([`forest`]) and against direct fourth-order
//! integration of the dynamics ([`simulator`]).
//!
//! Matrices and vectors are dense `f64` values from `nalgebra`.

pub mod eigenprojection;
pub mod error;
pub mod forest;
pub mod graph;
pub mod linalg;
pub mod protocols;
pub mod simulator;

pub use error::{Error, Result};
pub use graph::{Arc, WeightedDigraph};
pub use linalg::ToleranceConfig;

/// Dense real matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense real column vector.
pub type Vector = nalgebra::DVector<f64>;
