//! Fixed-step classical Runge–Kutta integration of `ż = −Mz`.
//!
//! The integrator never looks at the closed forms; it exists to check them.

use std::io::Write;

use log::warn;

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, norm_inf};
use crate::protocols::{second_order_matrix, SecondOrderConfig};
use crate::{Matrix, Vector};

/// Convergence horizons are `HORIZON_FACTOR / (slowest decay rate)`.
pub const HORIZON_FACTOR: f64 = 40.0;

const MAX_DT: f64 = 1e-2;
const STABILITY_PRODUCT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub dt: f64,
    pub t_max: f64,
    /// Store every `record_every`-th step. The initial and final states are
    /// always stored.
    pub record_every: usize,
}

impl SimulationConfig {
    pub fn new(dt: f64, t_max: f64, record_every: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite() && t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dt and t_max must be positive, got dt = {dt}, t_max = {t_max}"
            )));
        }
        if record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be at least 1".into()));
        }
        Ok(Self { dt, t_max, record_every })
    }

    /// Default step `1e-3 / max|m_ii|`, capped at `1e-2`.
    pub fn for_system(m: &Matrix, t_max: f64) -> Result<Self> {
        Self::new(default_dt(m), t_max, 1)
    }
}

pub fn default_dt(m: &Matrix) -> f64 {
    let max_diag = m.diagonal().amax();
    if max_diag > 0.0 {
        (1e-3 / max_diag).min(MAX_DT)
    } else {
        MAX_DT
    }
}

/// Step satisfying the `dt·‖M‖∞ < 0.1` heuristic with a factor-two margin,
/// capped at `1e-2`.
pub fn stable_dt(m: &Matrix) -> f64 {
    let rho = norm_inf(m);
    if rho > 0.0 {
        (0.5 * STABILITY_PRODUCT / rho).min(MAX_DT)
    } else {
        MAX_DT
    }
}

/// `HORIZON_FACTOR / rate`.
pub fn horizon(rate: f64) -> f64 {
    HORIZON_FACTOR / rate
}

/// Slowest decay rate `min |Re λ|` over the nonzero eigenvalues of `m`, or
/// `None` if every eigenvalue is zero. Eigenvalues of modulus below
/// `1e-9·max(1, ‖m‖∞)` count as zero, which suits matrices whose zero
/// eigenvalue is semisimple (Laplacians).
pub fn decay_rate(m: &Matrix) -> Result<Option<f64>> {
    ensure_finite(m)?;
    if m.is_empty() {
        return Ok(None);
    }
    let cutoff = 1e-9 * norm_inf(m).max(1.0);
    let schur = m.clone().try_schur(f64::EPSILON, 0).ok_or(Error::EigenFailure)?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.norm() > cutoff)
        .map(|z| z.re.abs())
        .reduce(f64::min))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
}

impl Trajectory {
    pub fn dimension(&self) -> usize {
        self.states.first().map_or(0, |s| s.len())
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    pub fn final_state(&self) -> &Vector {
        self.states.last().expect("trajectory is never empty")
    }

    /// Recorded state nearest to `t`.
    pub fn state_near(&self, t: f64) -> (f64, &Vector) {
        let k = self.times.partition_point(|&s| s < t);
        let k = if k == self.times.len() || (k > 0 && (t - self.times[k - 1]) < (self.times[k] - t))
        {
            k - 1
        } else {
            k
        };
        (self.times[k], &self.states[k])
    }

    /// CSV with header `t,x1,...,xk` and 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let k = self.dimension();
        let header: Vec<String> =
            std::iter::once("t".to_string()).chain((1..=k).map(|i| format!("x{i}"))).collect();
        writeln!(w, "{}", header.join(","))?;
        for (t, s) in self.times.iter().zip(&self.states) {
            write!(w, "{t:.16e}")?;
            for x in s.iter() {
                write!(w, ",{x:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Integrates `ż = −Mz` from `z0` over `[0, t_max]`.
///
/// The step is shrunk so that a whole number of steps ends exactly at
/// `t_max`.
pub fn integrate(m: &Matrix, z0: &Vector, cfg: &SimulationConfig) -> Result<Trajectory> {
    if !m.is_square() || m.nrows() != z0.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("square matrix of order {}", z0.len()),
            actual: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    ensure_finite(m)?;
    if z0.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let steps = (cfg.t_max / cfg.dt - 1e-9).ceil().max(1.0) as usize;
    let h = cfg.t_max / steps as f64;
    let rho = norm_inf(m);
    if h * rho >= STABILITY_PRODUCT {
        warn!(
            "step {h:e} times norm estimate {rho:e} exceeds {STABILITY_PRODUCT}; integration may be inaccurate"
        );
    }

    let k = z0.len();
    let mut z = z0.clone();
    let mut k1 = Vector::zeros(k);
    let mut k2 = Vector::zeros(k);
    let mut k3 = Vector::zeros(k);
    let mut k4 = Vector::zeros(k);
    let mut tmp = Vector::zeros(k);

    let mut traj = Trajectory {
        times: Vec::with_capacity(steps / cfg.record_every + 2),
        states: Vec::with_capacity(steps / cfg.record_every + 2),
    };
    traj.times.push(0.0);
    traj.states.push(z.clone());

    for step in 1..=steps {
        k1.gemv(-1.0, m, &z, 0.0);
        tmp.copy_from(&z);
        tmp.axpy(0.5 * h, &k1, 1.0);
        k2.gemv(-1.0, m, &tmp, 0.0);
        tmp.copy_from(&z);
        tmp.axpy(0.5 * h, &k2, 1.0);
        k3.gemv(-1.0, m, &tmp, 0.0);
        tmp.copy_from(&z);
        tmp.axpy(h, &k3, 1.0);
        k4.gemv(-1.0, m, &tmp, 0.0);

        k2.axpy(1.0, &k3, 1.0);
        k1.axpy(2.0, &k2, 1.0);
        k1.axpy(1.0, &k4, 1.0);
        z.axpy(h / 6.0, &k1, 1.0);

        let t = step as f64 * h;
        if z.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence { time: t });
        }
        if step % cfg.record_every == 0 || step == steps {
            traj.times.push(t);
            traj.states.push(z.clone());
        }
    }
    Ok(traj)
}

/// Integrates the second-order protocol; states are `(ξ, ζ)` stacked.
pub fn integrate_second_order(
    l: &Matrix,
    cfg2: &SecondOrderConfig,
    xi0: &Vector,
    zeta0: &Vector,
    cfg: &SimulationConfig,
) -> Result<Trajectory> {
    let n = l.nrows();
    if xi0.len() != n || zeta0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("ξ0 and ζ0 of length {n}"),
            actual: format!("{} and {}", xi0.len(), zeta0.len()),
        });
    }
    let mut z0 = Vector::zeros(2 * n);
    z0.rows_mut(0, n).copy_from(xi0);
    z0.rows_mut(n, n).copy_from(zeta0);
    integrate(&(-second_order_matrix(l, cfg2)), &z0, cfg)
}

/// `‖z(t_i) − predicted(t_i)‖∞` at every recorded time.
pub fn asymptote_residual<F>(traj: &Trajectory, mut predictor: F) -> Result<Vec<(f64, f64)>>
where
    F: FnMut(f64) -> Vector,
{
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, z)| {
            let p = predictor(t);
            if p.len() != z.len() {
                return Err(Error::DimensionMismatch {
                    expected: format!("prediction of length {}", z.len()),
                    actual: format!("length {}", p.len()),
                });
            }
            Ok((t, (z - p).amax()))
        })
        .collect()
}
