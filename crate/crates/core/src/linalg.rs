//! Dense linear-algebra primitives with explicit tolerances.
//!
//! Rank decisions are SVD based and relative to the largest singular value.
//! All routines are deterministic for identical inputs.

use nalgebra::SVD;

use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// Tolerances shared by rank and residual checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Singular values `<= rank_tol * σ_max` count as zero.
    pub rank_tol: f64,
    pub residual_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self { rank_tol: 1e-10, residual_tol: 1e-10 }
    }
}

impl ToleranceConfig {
    pub fn new(rank_tol: f64, residual_tol: f64) -> Result<Self> {
        if !(rank_tol >= 0.0 && residual_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerances must be nonnegative, got rank_tol = {rank_tol}, residual_tol = {residual_tol}"
            )));
        }
        Ok(Self { rank_tol, residual_tol })
    }
}

/// Induced ∞-norm (maximum absolute row sum). For a column vector this is the
/// maximum absolute entry.
pub fn norm_inf(m: &Matrix) -> f64 {
    m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn vec_norm_inf(v: &Vector) -> f64 {
    v.amax()
}

pub fn ensure_finite(m: &Matrix) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// SVD with full right singular vectors. Wide inputs are padded with zero rows
/// so that `V` always spans all of `R^cols`.
fn full_svd(m: &Matrix) -> Result<(Matrix, Vector, Matrix)> {
    ensure_finite(m)?;
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = Matrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::try_new(padded, true, true, f64::EPSILON, 0).ok_or_else(|| {
        Error::SolverFailure("singular value decomposition did not converge".into())
    })?;
    let u = svd.u.expect("requested U");
    let v = svd.v_t.expect("requested Vᵀ").transpose();
    Ok((u, svd.singular_values, v))
}

fn rank_threshold(sigma: &Vector, tol: &ToleranceConfig) -> f64 {
    tol.rank_tol * sigma.iter().copied().fold(0.0, f64::max)
}

/// Numerical rank: number of singular values above `rank_tol · σ_max`.
pub fn rank(m: &Matrix, tol: &ToleranceConfig) -> Result<usize> {
    if m.is_empty() {
        return Ok(0);
    }
    let (_, sigma, _) = full_svd(m)?;
    let cut = rank_threshold(&sigma, tol);
    Ok(sigma.iter().filter(|&&s| s > cut).count())
}

/// Orthonormal basis of `N(M)` as the columns of the returned `cols × d`
/// matrix, `d = cols − rank(M)`.
pub fn null_space_basis(m: &Matrix, tol: &ToleranceConfig) -> Result<Matrix> {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return Ok(Matrix::identity(cols, cols));
    }
    let (_, sigma, v) = full_svd(m)?;
    let cut = rank_threshold(&sigma, tol);
    Ok(select_columns(&v, |k| sigma.get(k).is_none_or(|&s| s <= cut)))
}

/// Null-space basis with an absolute singular-value cutoff. Used where the
/// matrix may be numerically zero, so a relative cutoff would classify
/// rounding noise as rank.
pub fn null_space_basis_abs(m: &Matrix, cutoff: f64) -> Result<Matrix> {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return Ok(Matrix::identity(cols, cols));
    }
    let (_, sigma, v) = full_svd(m)?;
    Ok(select_columns(&v, |k| sigma.get(k).is_none_or(|&s| s <= cutoff)))
}

/// Orthonormal basis of the column space `R(M)`.
pub fn column_space_basis(m: &Matrix, tol: &ToleranceConfig) -> Result<Matrix> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(Matrix::zeros(rows, 0));
    }
    // Left singular vectors of M are right singular vectors of Mᵀ.
    let (_, sigma, u) = full_svd(&m.transpose())?;
    let cut = rank_threshold(&sigma, tol);
    Ok(select_columns(&u, |k| sigma.get(k).is_some_and(|&s| s > cut)))
}

fn select_columns(m: &Matrix, keep: impl Fn(usize) -> bool) -> Matrix {
    let idx: Vec<usize> = (0..m.ncols()).filter(|&k| keep(k)).collect();
    m.select_columns(idx.iter())
}

/// LU solve with partial pivoting and no rank gate. Fails only when a pivot
/// is exactly zero or the result is not finite.
pub fn lu_solve(m: &Matrix, b: &Matrix) -> Result<Matrix> {
    check_solve_shapes(m, b)?;
    ensure_finite(m)?;
    ensure_finite(b)?;
    let x = m
        .clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::SolverFailure("zero pivot in LU factorization".into()))?;
    ensure_finite(&x).map_err(|_| Error::SolverFailure("solution is not finite".into()))?;
    Ok(x)
}

fn check_solve_shapes(m: &Matrix, b: &Matrix) -> Result<()> {
    if !m.is_square() || m.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            expected: format!("square M with {} rows in B", m.ncols()),
            actual: format!("M {}x{}, B {}x{}", m.nrows(), m.ncols(), b.nrows(), b.ncols()),
        });
    }
    Ok(())
}

/// Solves `M X = B`.
///
/// Rejects `M` whose numerical rank is below `n`. The returned solution
/// satisfies the backward-error bound
/// `‖MX − B‖∞ ≤ residual_tol · (‖M‖∞‖X‖∞ + ‖B‖∞)`.
pub fn solve(m: &Matrix, b: &Matrix, tol: &ToleranceConfig) -> Result<Matrix> {
    check_solve_shapes(m, b)?;
    let n = m.nrows();
    let r = rank(m, tol)?;
    if r < n {
        return Err(Error::Singular { rank: r, n });
    }
    let x = lu_solve(m, b)?;
    let resid = norm_inf(&(m * &x - b));
    let bound = tol.residual_tol * (norm_inf(m) * norm_inf(&x) + norm_inf(b));
    if resid > bound {
        return Err(Error::Residual { check: "‖MX − B‖∞", value: resid, bound });
    }
    Ok(x)
}

pub fn inverse(m: &Matrix, tol: &ToleranceConfig) -> Result<Matrix> {
    solve(m, &Matrix::identity(m.nrows(), m.nrows()), tol)
}

/// Oblique projector `P = U (WᵀU)⁻¹ Wᵀ` with range `col(U)` and null space
/// `col(W)^⊥`.
pub fn oblique_projector(u: &Matrix, w: &Matrix, tol: &ToleranceConfig) -> Result<Matrix> {
    if u.shape() != w.shape() {
        return Err(Error::DimensionMismatch {
            expected: format!("W of shape {}x{}", u.nrows(), u.ncols()),
            actual: format!("{}x{}", w.nrows(), w.ncols()),
        });
    }
    let n = u.nrows();
    let d = u.ncols();
    if d == 0 {
        return Ok(Matrix::zeros(n, n));
    }
    let wtu = w.transpose() * u;
    let r = rank(&wtu, tol)?;
    if r < d {
        return Err(Error::DegenerateProjection { rank: r, d });
    }
    let core = lu_solve(&wtu, &w.transpose())?;
    Ok(u * core)
}

/// Orthogonal projector `S = B (BᵀB)⁻¹ Bᵀ` onto `col(B)`, evaluated as `QQᵀ`
/// from a thin QR factorization so that the result is exactly symmetric.
pub fn orthogonal_projector(b: &Matrix, tol: &ToleranceConfig) -> Result<Matrix> {
    let n = b.nrows();
    let d = b.ncols();
    if d == 0 {
        return Ok(Matrix::zeros(n, n));
    }
    let r = rank(b, tol)?;
    if r < d {
        return Err(Error::RankDeficient { rank: r, d });
    }
    let q = b.clone().qr().q();
    Ok(&q * q.transpose())
}
