//! Latent consensus by orthogonal correction of the initial state.
//!
//! The plain protocol reaches agreement exactly from the consensus subspace
//! `T = span(1) + R(L) = {x : J̄x ∈ span(1)}`. The initial state is replaced by
//! its orthogonal projection `Sx(0)` onto `T` (the smallest Euclidean
//! correction), and the consensus is `J̄Sx(0)`.

use crate::eigenprojection::eigenprojection;
use crate::error::{Error, Result};
use crate::linalg::{self, ToleranceConfig};
use crate::{Matrix, Vector};

use super::check_len;

/// Bound on the disagreement between the two constructions of `S`.
pub const SUBSPACE_ROUTE_TOL: f64 = 1e-8;

/// Singular values of `(I − E)J̄` at or below this are treated as zero.
const NULL_CUTOFF: f64 = 1e-8;

/// `S` from an orthonormal basis of `span(1) + R(L)`.
pub fn subspace_projector_from_span(l: &Matrix) -> Result<Matrix> {
    let n = l.nrows();
    let mut gens = Matrix::zeros(n, n + 1);
    gens.column_mut(0).fill(1.0);
    gens.view_mut((0, 1), (n, n)).copy_from(l);
    let tol = ToleranceConfig::default();
    let basis = linalg::column_space_basis(&gens, &tol)?;
    linalg::orthogonal_projector(&basis, &tol)
}

/// `S` from the null space of `(I − E)J̄`, i.e. the states `x` with
/// `J̄x ∈ span(1)`.
pub fn subspace_projector_from_eigenprojection(jbar: &Matrix) -> Result<Matrix> {
    let n = jbar.nrows();
    let centering = Matrix::identity(n, n) - Matrix::from_element(n, n, 1.0 / n as f64);
    let basis = linalg::null_space_basis_abs(&(centering * jbar), NULL_CUTOFF)?;
    linalg::orthogonal_projector(&basis, &ToleranceConfig::default())
}

/// Orthogonal projector `S` onto the consensus subspace. Both constructions
/// are evaluated and must agree within [`SUBSPACE_ROUTE_TOL`].
pub fn consensus_subspace_projector(l: &Matrix) -> Result<Matrix> {
    let jbar = eigenprojection(l)?.projection;
    consensus_subspace_projector_with(l, &jbar)
}

fn consensus_subspace_projector_with(l: &Matrix, jbar: &Matrix) -> Result<Matrix> {
    let s = subspace_projector_from_span(l)?;
    let s2 = subspace_projector_from_eigenprojection(jbar)?;
    let diff = if s.shape() == s2.shape() { (&s - &s2).amax() } else { f64::INFINITY };
    if diff > SUBSPACE_ROUTE_TOL {
        return Err(Error::Residual {
            check: "consensus subspace routes disagree",
            value: diff,
            bound: SUBSPACE_ROUTE_TOL,
        });
    }
    Ok(s)
}

/// `J̄Sx(0)`; all components are equal.
pub fn ortho_consensus(l: &Matrix, x0: &Vector) -> Result<Vector> {
    check_len("x0", x0, l.nrows())?;
    let jbar = eigenprojection(l)?.projection;
    let s = consensus_subspace_projector_with(l, &jbar)?;
    let out = &jbar * (&s * x0);
    let spread = out.max() - out.min();
    let bound = 1e-8 * out.amax().max(1.0);
    if spread > bound {
        return Err(Error::Residual { check: "ortho consensus spread", value: spread, bound });
    }
    Ok(out)
}
