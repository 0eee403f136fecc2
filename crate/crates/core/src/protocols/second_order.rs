//! Second-order protocol `ξ̇ = ζ`, `ζ̇ = −Lξ − γLζ`.
//!
//! For large `t` the state approaches `[[L⊢, tL⊢], [0, L⊢]]·(ξ(0), ζ(0))`:
//! positions agree and drift with the agreed velocity. The approach only
//! happens when every nonzero eigenvalue `λ` of `L` makes
//! `s² + γλs + λ` Hurwitz, which [`second_order_stable`] checks.

use nalgebra::Complex;

use crate::eigenprojection::{check_laplacian, eigenprojection};
use crate::error::{Error, Result};
use crate::linalg::norm_inf;
use crate::{Matrix, Vector};

use super::check_len;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderConfig {
    gamma: f64,
}

impl SecondOrderConfig {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("γ must be positive, got {gamma}")));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// `[[0, I], [−L, −γL]]`, acting on `(ξ, ζ)`.
pub fn second_order_matrix(l: &Matrix, cfg: &SecondOrderConfig) -> Matrix {
    let n = l.nrows();
    let mut m = Matrix::zeros(2 * n, 2 * n);
    m.view_mut((0, n), (n, n)).fill_with_identity();
    m.view_mut((n, 0), (n, n)).copy_from(&(-l));
    m.view_mut((n, n), (n, n)).copy_from(&(l * -cfg.gamma));
    m
}

/// Predicted state at time `t`: `ξ = L⊢ξ0 + tL⊢ζ0`, `ζ = L⊢ζ0`.
pub fn second_order_asymptote(
    l: &Matrix,
    xi0: &Vector,
    zeta0: &Vector,
    t: f64,
) -> Result<(Vector, Vector)> {
    let p = eigenprojection(l)?.projection;
    second_order_asymptote_with(&p, xi0, zeta0, t)
}

/// [`second_order_asymptote`] with a precomputed eigenprojection.
pub fn second_order_asymptote_with(
    p: &Matrix,
    xi0: &Vector,
    zeta0: &Vector,
    t: f64,
) -> Result<(Vector, Vector)> {
    check_len("ξ0", xi0, p.nrows())?;
    check_len("ζ0", zeta0, p.nrows())?;
    let pz = p * zeta0;
    Ok((p * xi0 + &pz * t, pz))
}

/// Eigenvalues of `L`, with those of modulus below `1e-9·max(1, ‖L‖∞)`
/// dropped.
fn nonzero_eigenvalues(l: &Matrix) -> Result<Vec<Complex<f64>>> {
    check_laplacian(l)?;
    if l.is_empty() {
        return Ok(Vec::new());
    }
    let cutoff = 1e-9 * norm_inf(l).max(1.0);
    let schur = l.clone().try_schur(f64::EPSILON, 0).ok_or(Error::EigenFailure)?;
    Ok(schur.complex_eigenvalues().iter().copied().filter(|z| z.norm() > cutoff).collect())
}

/// Roots of `s² + γλs + λ = 0`.
fn quadratic_roots(lambda: Complex<f64>, gamma: f64) -> [Complex<f64>; 2] {
    let b = lambda * gamma;
    let disc = (b * b - lambda * 4.0).sqrt();
    [(-b + disc) / 2.0, (-b - disc) / 2.0]
}

/// Roots of `s² + γλs + λ` over the nonzero eigenvalues `λ` of `L`: the
/// nonzero eigenvalues of [`second_order_matrix`].
pub fn second_order_modes(l: &Matrix, cfg: &SecondOrderConfig) -> Result<Vec<Complex<f64>>> {
    Ok(nonzero_eigenvalues(l)?
        .into_iter()
        .flat_map(|lambda| quadratic_roots(lambda, cfg.gamma))
        .collect())
}

/// True iff every mode from [`second_order_modes`] has strictly negative real
/// part (beyond a `1e-12` relative margin). Vacuously true for `L = 0`.
pub fn second_order_stable(l: &Matrix, cfg: &SecondOrderConfig) -> Result<bool> {
    Ok(second_order_modes(l, cfg)?.iter().all(|s| s.re < -1e-12 * (1.0 + s.norm())))
}

/// Slowest decay rate of the non-consensus modes, `min |Re s|`, or `None`
/// when `L` has no nonzero eigenvalues.
pub fn second_order_decay_rate(l: &Matrix, cfg: &SecondOrderConfig) -> Result<Option<f64>> {
    Ok(second_order_modes(l, cfg)?.iter().map(|s| s.re.abs()).reduce(f64::min))
}
