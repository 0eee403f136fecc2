//! Consensus protocols and the closed forms of their asymptotic states.
//!
//! * plain: `ẋ = −Lx`, limit `L⊢x(0)`
//! * hub: an extra agent influencing everyone with intensity `δ` and
//!   influenced back by `v`
//! * background: weak complete links `δ(I − 1vᵀ)` superposed on `L`
//! * ortho: the plain protocol started from the orthogonal projection of
//!   `x(0)` onto the consensus subspace
//! * second order: double integrators `ξ̇ = ζ`, `ζ̇ = −Lξ − γLζ`

mod background;
mod hub;
mod ortho;
mod second_order;

pub use background::*;
pub use hub::*;
pub use ortho::*;
pub use second_order::*;

use crate::eigenprojection::eigenprojection;
use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// `lim_{t→∞} x(t) = L⊢x(0)` for `ẋ = −Lx`.
pub fn plain_limit(l: &Matrix, x0: &Vector) -> Result<Vector> {
    check_len("x0", x0, l.nrows())?;
    Ok(eigenprojection(l)?.projection * x0)
}

pub(crate) fn check_len(what: &str, v: &Vector, n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("{what} of length {n}"),
            actual: format!("length {}", v.len()),
        });
    }
    Ok(())
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("δ must be positive, got {delta}")));
    }
    Ok(())
}
