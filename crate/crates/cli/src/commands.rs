use std::path::Path;
use std::thread;

use anyhow::{bail, Result};
use latent_consensus::eigenprojection::{
    self, eigenprojection_via_limit, Residuals, PROJECTION_RESIDUAL_TOL,
};
use latent_consensus::forest::{enumerate_in_forests, ForestSums};
use latent_consensus::linalg::norm_inf;
use latent_consensus::protocols::{
    background_consensus, background_latent_limit, hub_consensus, hub_latent_limit,
    ortho_consensus, uniform_distribution, BackgroundConfig, HubConfig,
};
use latent_consensus::{Error, Matrix, Vector, WeightedDigraph};
use serde::Serialize;

use crate::io::{matrix_rows, print_json, read_graph, read_vector, vector_values};
use crate::{LatentModel, ProjectionMethod, SweepProtocol};

/// Core errors that mean a computation ran but one of its checks failed, as
/// opposed to bad input.
pub fn is_check_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::Residual { .. }
            | Error::IndexViolation { .. }
            | Error::DegenerateProjection { .. }
            | Error::RankDeficient { .. }
            | Error::Singular { .. }
            | Error::SolverFailure(_)
            | Error::EigenFailure
            | Error::Divergence { .. }
    )
}

pub fn laplacian(graph: &Path) -> Result<bool> {
    let g = read_graph(graph)?;
    print_json(&matrix_rows(&g.laplacian()))?;
    Ok(true)
}

#[derive(Serialize)]
struct ResidualReport {
    idempotency: f64,
    left: f64,
    right: f64,
    row_sum: f64,
}

impl From<Residuals> for ResidualReport {
    fn from(r: Residuals) -> Self {
        Self { idempotency: r.idempotency, left: r.left, right: r.right, row_sum: r.row_sum }
    }
}

#[derive(Serialize)]
struct ProjectionReport {
    method: &'static str,
    n: usize,
    projection: Option<Vec<Vec<f64>>>,
    residuals: Option<ResidualReport>,
    failure: Option<String>,
}

/// Residual bound for `(I + τL)⁻¹`, whose residuals are `O(1/τ)`; the
/// default `τ` stays about three orders of magnitude below it.
const LIMIT_RESIDUAL_TOL: f64 = 1e-5;

fn residual_failure(r: &Residuals, l: &Matrix, tol: f64) -> Option<String> {
    let scale = norm_inf(l).max(1.0);
    [
        ("‖P² − P‖∞", r.idempotency, tol),
        ("‖PL‖∞", r.left, tol * scale),
        ("‖LP‖∞", r.right, tol * scale),
        ("‖P·1 − 1‖∞", r.row_sum, tol),
    ]
    .into_iter()
    .find(|&(_, value, bound)| value > bound)
    .map(|(check, value, bound)| format!("{check} = {value:e} exceeds {bound:e}"))
}

pub fn eigenprojection(graph: &Path, method: ProjectionMethod, tau: f64) -> Result<bool> {
    let g = read_graph(graph)?;
    let l = g.laplacian();
    let (name, computed) = match method {
        ProjectionMethod::Nullspace => (
            "nullspace",
            eigenprojection::eigenprojection(&l).map(|r| (r.projection, PROJECTION_RESIDUAL_TOL)),
        ),
        ProjectionMethod::Limit => {
            ("limit", eigenprojection_via_limit(&l, tau).map(|p| (p, LIMIT_RESIDUAL_TOL)))
        }
        ProjectionMethod::Oracle => (
            "oracle",
            ForestSums::compute(&g).map(|s| (s.max_in_forest_matrix(), PROJECTION_RESIDUAL_TOL)),
        ),
    };
    let report = match computed {
        Ok((p, tol)) => {
            let residuals = Residuals::measure(&p, &l);
            ProjectionReport {
                method: name,
                n: g.n(),
                projection: Some(matrix_rows(&p)),
                failure: residual_failure(&residuals, &l, tol),
                residuals: Some(residuals.into()),
            }
        }
        Err(e) if is_check_failure(&e) => ProjectionReport {
            method: name,
            n: g.n(),
            projection: None,
            residuals: None,
            failure: Some(e.to_string()),
        },
        Err(e) => return Err(e.into()),
    };
    print_json(&report)?;
    Ok(report.failure.is_none())
}

fn weights(path: Option<&Path>, n: usize) -> Result<Vector> {
    match path {
        Some(p) => read_vector(p),
        None => Ok(uniform_distribution(n)),
    }
}

#[derive(Serialize)]
struct LatentReport {
    model: &'static str,
    /// Common value, when the limit state is a consensus.
    consensus: Option<f64>,
    state: Vec<f64>,
    failure: Option<String>,
}

pub fn latent(model: LatentModel, graph: &Path, x0: &Path, v: Option<&Path>) -> Result<bool> {
    let l = read_graph(graph)?.laplacian();
    let n = l.nrows();
    let x0 = read_vector(x0)?;
    let computed = match model {
        LatentModel::Hub => {
            let v = weights(v, n)?;
            // the hub's initial value does not affect the limit
            let y0 = if x0.len() == n { x0.push(0.0) } else { x0 };
            hub_latent_limit(&l, &v, &y0).map(|c| (Some(c), vec![c; n]))
        }
        LatentModel::Background => {
            let v = weights(v, n)?;
            background_latent_limit(&l, &v, &x0).map(|c| (Some(c), vec![c; n]))
        }
        LatentModel::Ortho => {
            if v.is_some() {
                bail!("--v does not apply to the ortho model");
            }
            ortho_consensus(&l, &x0).map(|x| (x.get(0).copied(), vector_values(&x)))
        }
    };
    let name = match model {
        LatentModel::Hub => "hub",
        LatentModel::Background => "background",
        LatentModel::Ortho => "ortho",
    };
    let report = match computed {
        Ok((consensus, state)) => LatentReport { model: name, consensus, state, failure: None },
        Err(e) if is_check_failure(&e) => LatentReport {
            model: name,
            consensus: None,
            state: Vec::new(),
            failure: Some(e.to_string()),
        },
        Err(e) => return Err(e.into()),
    };
    print_json(&report)?;
    Ok(report.failure.is_none())
}

#[derive(Serialize)]
struct SweepPoint {
    delta: f64,
    consensus: f64,
}

#[derive(Serialize)]
struct SweepReport {
    protocol: &'static str,
    points: Vec<SweepPoint>,
    latent: f64,
}

pub fn sweep(
    protocol: SweepProtocol,
    graph: &Path,
    x0: &Path,
    v: Option<&Path>,
    deltas: &[f64],
    jobs: usize,
) -> Result<bool> {
    let l = read_graph(graph)?.laplacian();
    let n = l.nrows();
    let x0 = read_vector(x0)?;
    let v = weights(v, n)?;
    if jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    let (name, y0) = match protocol {
        SweepProtocol::Hub => ("hub", if x0.len() == n { x0.push(0.0) } else { x0 }),
        SweepProtocol::Background => ("background", x0),
    };
    let one = |delta: f64| -> latent_consensus::Result<f64> {
        match protocol {
            SweepProtocol::Hub => hub_consensus(&l, &HubConfig::new(delta, v.clone())?, &y0),
            SweepProtocol::Background => {
                background_consensus(&l, &BackgroundConfig::new(delta, v.clone())?, &y0)
            }
        }
    };
    let chunk = deltas.len().div_ceil(jobs).max(1);
    let results: Vec<latent_consensus::Result<f64>> = thread::scope(|s| {
        let handles: Vec<_> = deltas
            .chunks(chunk)
            .map(|part| s.spawn(|| part.iter().map(|&d| one(d)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut points = Vec::with_capacity(deltas.len());
    for (&delta, r) in deltas.iter().zip(results) {
        points.push(SweepPoint { delta, consensus: r? });
    }
    let latent = match protocol {
        SweepProtocol::Hub => hub_latent_limit(&l, &v, &y0)?,
        SweepProtocol::Background => background_latent_limit(&l, &v, &y0)?,
    };
    print_json(&SweepReport { protocol: name, points, latent })?;
    Ok(true)
}

#[derive(Serialize)]
struct ForestRecord {
    /// `[from, to, w]` with 1-based vertices.
    arcs: Vec<(usize, usize, f64)>,
    /// 1-based root of each vertex's tree.
    roots: Vec<usize>,
    weight: f64,
}

#[derive(Serialize)]
struct ForestReport {
    n: usize,
    count_by_size: Vec<usize>,
    weight_by_size: Vec<f64>,
    max_size: usize,
    max_in_forest_matrix: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    parametric_forest_matrix: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    forests: Option<Vec<ForestRecord>>,
}

pub fn forests(graph: &Path, tau: Option<f64>, list: bool) -> Result<bool> {
    let g = read_graph(graph)?;
    let sums = ForestSums::compute(&g)?;
    let parametric = tau.map(|t| sums.parametric_forest_matrix(t)).transpose()?;
    let forests = if list {
        Some(
            enumerate_in_forests(&g)?
                .into_iter()
                .map(|f| ForestRecord {
                    arcs: f.arcs.iter().map(|a| (a.tail + 1, a.head + 1, a.weight)).collect(),
                    roots: f.root_of.iter().map(|r| r + 1).collect(),
                    weight: f.weight,
                })
                .collect(),
        )
    } else {
        None
    };
    print_json(&ForestReport {
        n: g.n(),
        count_by_size: sums.count.clone(),
        weight_by_size: sums.total.clone(),
        max_size: sums.max_size(),
        max_in_forest_matrix: matrix_rows(&sums.max_in_forest_matrix()),
        parametric_forest_matrix: parametric.as_ref().map(matrix_rows),
        forests,
    })?;
    Ok(true)
}

pub fn generate(n: usize, p: f64, low: f64, high: f64, seed: u64) -> Result<bool> {
    let g = WeightedDigraph::random(n, p, low, high, seed)?;
    println!("{}", g.to_json_string());
    Ok(true)
}
