//! Eigenprojection of a Laplacian at the eigenvalue 0.
//!
//! `L⊢` is the idempotent with range `N(L)` and null space `R(L)`; the plain
//! protocol `ẋ = −Lx` converges to `L⊢x(0)`. The primary route builds it as an
//! oblique projector from orthonormal bases of `N(L)` and `N(Lᵀ)`. The second
//! route evaluates the parametric forest matrix `(I + τL)⁻¹` at a large `τ`
//! and carries an `O(1/τ)` bias.

use crate::error::{Error, Result};
use crate::linalg::{self, norm_inf, ToleranceConfig};
use crate::{Matrix, Vector};

pub const DEFAULT_LIMIT_TAU: f64 = 1e8;

/// Bound on `‖P² − P‖∞`, and on `‖PL‖∞`, `‖LP‖∞` relative to `max(1, ‖L‖∞)`.
pub const PROJECTION_RESIDUAL_TOL: f64 = 1e-8;

const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    NullSpace,
    ForestLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// `‖P² − P‖∞`
    pub idempotency: f64,
    /// `‖PL‖∞`
    pub left: f64,
    /// `‖LP‖∞`
    pub right: f64,
    /// `‖P·1 − 1‖∞`
    pub row_sum: f64,
}

impl Residuals {
    pub fn measure(p: &Matrix, l: &Matrix) -> Self {
        let n = p.nrows();
        let ones = Vector::from_element(n, 1.0);
        Self {
            idempotency: norm_inf(&(p * p - p)),
            left: norm_inf(&(p * l)),
            right: norm_inf(&(l * p)),
            row_sum: (p * &ones - &ones).amax(),
        }
    }

    pub fn max(&self) -> f64 {
        self.idempotency.max(self.left).max(self.right).max(self.row_sum)
    }

    fn check(&self, l: &Matrix, tol: f64) -> Result<()> {
        let scale = norm_inf(l).max(1.0);
        for (check, value, bound) in [
            ("‖P² − P‖∞", self.idempotency, tol),
            ("‖PL‖∞", self.left, tol * scale),
            ("‖LP‖∞", self.right, tol * scale),
            ("‖P·1 − 1‖∞", self.row_sum, tol),
        ] {
            if value > bound {
                return Err(Error::Residual { check, value, bound });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EigenprojectionResult {
    pub projection: Matrix,
    pub method: Method,
    pub rank_of_l: usize,
    pub residuals: Residuals,
}

/// Checks that `l` is square and finite with zero row sums up to
/// `1e-12 · max(1, max|l_ij|)`.
pub fn check_laplacian(l: &Matrix) -> Result<()> {
    if !l.is_square() {
        return Err(Error::NotLaplacian(format!("matrix is {}x{}", l.nrows(), l.ncols())));
    }
    linalg::ensure_finite(l)?;
    let bound = ROW_SUM_TOL * l.amax().max(1.0);
    for (i, row) in l.row_iter().enumerate() {
        let s: f64 = row.iter().sum();
        if s.abs() > bound {
            return Err(Error::NotLaplacian(format!("row {} sums to {s:e}", i + 1)));
        }
    }
    Ok(())
}

/// Parametric forest matrix `(I + τL)⁻¹`.
pub fn forest_matrix(l: &Matrix, tau: f64) -> Result<Matrix> {
    check_laplacian(l)?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("τ must be positive, got {tau}")));
    }
    let n = l.nrows();
    let id = Matrix::identity(n, n);
    linalg::lu_solve(&(&id + l * tau), &id)
}

pub fn eigenprojection(l: &Matrix) -> Result<EigenprojectionResult> {
    eigenprojection_with(l, &ToleranceConfig::default())
}

/// Eigenprojection via `U (WᵀU)⁻¹ Wᵀ`, `U` spanning `N(L)` and `W` spanning
/// `N(Lᵀ)`. Fails loudly if the index of `L` exceeds 1 or the residuals of
/// the result exceed [`PROJECTION_RESIDUAL_TOL`].
pub fn eigenprojection_with(l: &Matrix, tol: &ToleranceConfig) -> Result<EigenprojectionResult> {
    check_laplacian(l)?;
    let rank = linalg::rank(l, tol)?;
    let rank_sq = linalg::rank(&(l * l), tol)?;
    if rank_sq != rank {
        return Err(Error::IndexViolation { rank, rank_sq });
    }
    let u = linalg::null_space_basis(l, tol)?;
    let w = linalg::null_space_basis(&l.transpose(), tol)?;
    let projection = linalg::oblique_projector(&u, &w, tol)?;
    let residuals = Residuals::measure(&projection, l);
    residuals.check(l, PROJECTION_RESIDUAL_TOL)?;
    Ok(EigenprojectionResult { projection, method: Method::NullSpace, rank_of_l: rank, residuals })
}

/// `(I + τL)⁻¹` at large `τ`; agrees with [`eigenprojection`] to `O(1/τ)`.
pub fn eigenprojection_via_limit(l: &Matrix, tau: f64) -> Result<Matrix> {
    forest_matrix(l, tau)
}
