//! Regularization by weak background links `δD`, `D = I − 1vᵀ`, where agent
//! `i` influences every agent with intensity `δ v_i`. Uniform `v` gives the
//! complete digraph with arc weights `δ/n`, i.e. `δK` with `K = I − E`.

use crate::eigenprojection::{eigenprojection, forest_matrix};
use crate::error::{Error, Result};
use crate::{Matrix, Vector};

use super::{check_delta, check_len};

const DISTRIBUTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundConfig {
    delta: f64,
    v: Vector,
}

impl BackgroundConfig {
    pub fn new(delta: f64, v: Vector) -> Result<Self> {
        check_delta(delta)?;
        check_distribution(&v)?;
        Ok(Self { delta, v })
    }

    pub fn uniform(n: usize, delta: f64) -> Result<Self> {
        Self::new(delta, uniform_distribution(n))
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn v(&self) -> &Vector {
        &self.v
    }
}

pub fn uniform_distribution(n: usize) -> Vector {
    Vector::from_element(n, 1.0 / n as f64)
}

/// Accepts nonnegative vectors summing to 1 within `1e-12`.
pub fn check_distribution(v: &Vector) -> Result<()> {
    if v.is_empty() || v.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter("v must be a nonempty nonnegative vector".into()));
    }
    let s = v.sum();
    if (s - 1.0).abs() > DISTRIBUTION_TOL {
        return Err(Error::InvalidParameter(format!(
            "v must sum to 1 (distribution), sums to {s}"
        )));
    }
    Ok(())
}

/// `L + δ(I − 1vᵀ)`.
pub fn background_matrix(l: &Matrix, cfg: &BackgroundConfig) -> Result<Matrix> {
    let n = l.nrows();
    check_len("v", &cfg.v, n)?;
    let ones = Vector::from_element(n, 1.0);
    let d = Matrix::identity(n, n) - ones * cfg.v.transpose();
    Ok(l + d * cfg.delta)
}

/// `vᵀ(I + L/δ)⁻¹`, the common row of the background eigenprojection.
pub fn background_consensus_weights(l: &Matrix, cfg: &BackgroundConfig) -> Result<Vector> {
    check_len("v", &cfg.v, l.nrows())?;
    let q = forest_matrix(l, 1.0 / cfg.delta)?;
    Ok(q.transpose() * &cfg.v)
}

/// `(L + δD)⊢ = 1vᵀ(I + L/δ)⁻¹`.
pub fn background_eigenprojection(l: &Matrix, cfg: &BackgroundConfig) -> Result<Matrix> {
    let row = background_consensus_weights(l, cfg)?;
    Ok(Vector::from_element(row.len(), 1.0) * row.transpose())
}

/// Common limit `c = vᵀ(I + L/δ)⁻¹x(0)` of the background protocol.
pub fn background_consensus(l: &Matrix, cfg: &BackgroundConfig, x0: &Vector) -> Result<f64> {
    check_len("x0", x0, l.nrows())?;
    Ok(background_consensus_weights(l, cfg)?.dot(x0))
}

/// Uniform-`v` consensus as the mean of `s_j^δ x_j(0)`, `s_j^δ` the column
/// sums of `(I + L/δ)⁻¹`.
pub fn uniform_background_consensus_by_column_sums(
    l: &Matrix,
    delta: f64,
    x0: &Vector,
) -> Result<f64> {
    check_delta(delta)?;
    check_len("x0", x0, l.nrows())?;
    let q = forest_matrix(l, 1.0 / delta)?;
    Ok(column_sum_mean(&q, x0))
}

/// `lim_{δ→0} c = vᵀJ̄x(0)`.
pub fn background_latent_limit(l: &Matrix, v: &Vector, x0: &Vector) -> Result<f64> {
    let n = l.nrows();
    check_len("v", v, n)?;
    check_len("x0", x0, n)?;
    check_distribution(v)?;
    let jbar = eigenprojection(l)?.projection;
    Ok((jbar.transpose() * v).dot(x0))
}

/// Uniform-`v` latent consensus `(1/n) Σ_j J̄_{·j} x_j(0)` from column sums.
pub fn uniform_latent_limit_by_column_sums(l: &Matrix, x0: &Vector) -> Result<f64> {
    check_len("x0", x0, l.nrows())?;
    let jbar = eigenprojection(l)?.projection;
    Ok(column_sum_mean(&jbar, x0))
}

fn column_sum_mean(m: &Matrix, x0: &Vector) -> f64 {
    let n = m.ncols() as f64;
    m.column_iter().zip(x0.iter()).map(|(c, x)| c.sum() * x).sum::<f64>() / n
}
