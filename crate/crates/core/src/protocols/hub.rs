//! Regularization by a hub: an `(n+1)`-st agent that influences every agent
//! with intensity `δ` and is influenced by agent `i` with intensity `v_i`.

use crate::eigenprojection::{eigenprojection, forest_matrix};
use crate::error::{Error, Result};
use crate::{Matrix, Vector};

use super::{check_delta, check_len};

#[derive(Debug, Clone, PartialEq)]
pub struct HubConfig {
    delta: f64,
    v: Vector,
}

impl HubConfig {
    pub fn new(delta: f64, v: Vector) -> Result<Self> {
        check_delta(delta)?;
        check_nonnegative(&v)?;
        Ok(Self { delta, v })
    }

    /// `v = (1/n)·1`, so `s = 1`.
    pub fn uniform(n: usize, delta: f64) -> Result<Self> {
        Self::new(delta, Vector::from_element(n, 1.0 / n as f64))
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn v(&self) -> &Vector {
        &self.v
    }

    /// `s = Σ v_i`
    pub fn s(&self) -> f64 {
        self.v.sum()
    }
}

fn check_nonnegative(v: &Vector) -> Result<()> {
    if v.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter("v must be finite and nonnegative".into()));
    }
    Ok(())
}

/// `L₀ + H_{δ,v} = [[L + δI, −δ1], [−vᵀ, s]]`.
pub fn hub_extended_laplacian(l: &Matrix, cfg: &HubConfig) -> Result<Matrix> {
    let n = l.nrows();
    check_len("v", &cfg.v, n)?;
    let mut m = Matrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(l);
    for i in 0..n {
        m[(i, i)] += cfg.delta;
        m[(i, n)] = -cfg.delta;
        m[(n, i)] = -cfg.v[i];
    }
    m[(n, n)] = cfg.s();
    Ok(m)
}

/// The common row `(1/(s+δ))·[vᵀ(I + L/δ)⁻¹, δ]` of the hub eigenprojection.
pub fn hub_consensus_weights(l: &Matrix, cfg: &HubConfig) -> Result<Vector> {
    let n = l.nrows();
    check_len("v", &cfg.v, n)?;
    let q = forest_matrix(l, 1.0 / cfg.delta)?;
    let denom = cfg.s() + cfg.delta;
    let mut row = Vector::zeros(n + 1);
    row.rows_mut(0, n).copy_from(&(q.transpose() * &cfg.v / denom));
    row[n] = cfg.delta / denom;
    Ok(row)
}

/// `(L₀ + H_{δ,v})⊢ = 1′·(1/(s+δ))·[vᵀ(I + L/δ)⁻¹, δ]`.
pub fn hub_eigenprojection(l: &Matrix, cfg: &HubConfig) -> Result<Matrix> {
    let row = hub_consensus_weights(l, cfg)?;
    Ok(Vector::from_element(row.len(), 1.0) * row.transpose())
}

/// Common limit value `c` of the hub protocol, `y(t) → c·1′`.
pub fn hub_consensus(l: &Matrix, cfg: &HubConfig, y0: &Vector) -> Result<f64> {
    let row = hub_consensus_weights(l, cfg)?;
    check_len("y0", y0, row.len())?;
    Ok(row.dot(y0))
}

/// `lim_{δ→0} c = (1/s)·vᵀ J̄ y0[1..n]`; the hub's own initial value drops
/// out. Requires `s > 0`.
pub fn hub_latent_limit(l: &Matrix, v: &Vector, y0: &Vector) -> Result<f64> {
    let n = l.nrows();
    check_len("v", v, n)?;
    check_len("y0", y0, n + 1)?;
    check_nonnegative(v)?;
    let s = v.sum();
    if s <= 0.0 {
        return Err(Error::UndefinedLimit("hub latent limit needs s = Σv_i > 0".into()));
    }
    let jbar = eigenprojection(l)?.projection;
    Ok((jbar.transpose() * v).dot(&y0.rows(0, n)) / s)
}
