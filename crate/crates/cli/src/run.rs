use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use latent_consensus::protocols::{
    background_consensus, background_eigenprojection, background_matrix,
    consensus_subspace_projector, hub_consensus, hub_eigenprojection, hub_extended_laplacian,
    ortho_consensus, plain_limit, second_order_asymptote_with, second_order_decay_rate,
    second_order_matrix, second_order_stable, uniform_distribution, BackgroundConfig, HubConfig,
    SecondOrderConfig,
};
use latent_consensus::simulator::{
    decay_rate, default_dt, horizon, integrate, stable_dt, SimulationConfig, Trajectory,
};
use latent_consensus::{eigenprojection, Matrix, Vector};
use serde::Serialize;

use crate::commands::is_check_failure;
use crate::io::{read_graph, read_vector, vector_values, write_json};

/// Horizon used when the system has no decaying mode.
const FALLBACK_HORIZON: f64 = 10.0;
/// Rows kept in the trajectory CSV unless `--record-every` is given.
const TARGET_ROWS: usize = 2000;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Plain,
    Hub,
    Background,
    Ortho,
    SecondOrder,
}

#[derive(Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    protocol: Protocol,
    graph: PathBuf,
    /// JSON array: n entries; n + 1 for hub (hub last); 2n for second-order
    /// (positions, then velocities).
    #[arg(long)]
    x0: PathBuf,
    /// Coupling intensity (hub, background).
    #[arg(long)]
    delta: Option<f64>,
    /// JSON array of influence weights (hub, background; default uniform 1/n).
    #[arg(long)]
    v: Option<PathBuf>,
    /// Velocity damping (second-order).
    #[arg(long)]
    gamma: Option<f64>,
    /// Simulation horizon; default 40 over the slowest decay rate.
    #[arg(long)]
    t_max: Option<f64>,
    /// RK4 step; default 1e-3 over the largest diagonal entry of the system.
    #[arg(long)]
    dt: Option<f64>,
    /// Write every k-th step to the CSV.
    #[arg(long)]
    record_every: Option<usize>,
    /// Convergence tolerance on the terminal ∞-norm residual.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Serialize)]
struct Parameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    v: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    t_max: f64,
    dt: f64,
    tol: f64,
}

#[derive(Serialize)]
pub struct RunReport {
    protocol: Protocol,
    parameters: Parameters,
    /// Predicted terminal state.
    predicted: Vec<f64>,
    /// Common predicted value when the prediction is a consensus.
    predicted_consensus: Option<f64>,
    simulated: Vec<f64>,
    residual: f64,
    /// Second-order only: residual at half the horizon.
    #[serde(skip_serializing_if = "Option::is_none")]
    residual_half_horizon: Option<f64>,
    converged: bool,
    wall_time_s: f64,
    failure: Option<String>,
}

/// What the simulation runs and what it should approach.
struct Setup {
    /// `ż = −Mz`
    system: Matrix,
    z0: Vector,
    rate: Option<f64>,
    parameters: Parameters,
    consensus: Option<f64>,
    predict: Box<dyn Fn(f64) -> Vector>,
}

fn check_unused(args: &RunArgs) -> Result<()> {
    let uses_delta = matches!(args.protocol, Protocol::Hub | Protocol::Background);
    if args.delta.is_some() && !uses_delta {
        bail!("--delta applies only to hub and background");
    }
    if args.v.is_some() && !uses_delta {
        bail!("--v applies only to hub and background");
    }
    if args.gamma.is_some() && args.protocol != Protocol::SecondOrder {
        bail!("--gamma applies only to second-order");
    }
    if uses_delta && args.delta.is_none() {
        bail!("--delta is required for this protocol");
    }
    if args.protocol == Protocol::SecondOrder && args.gamma.is_none() {
        bail!("--gamma is required for second-order");
    }
    if args.tol.is_nan() || args.tol <= 0.0 {
        bail!("--tol must be positive");
    }
    Ok(())
}

fn expect_len(x0: &Vector, n: usize, what: &str) -> Result<()> {
    if x0.len() != n {
        bail!("--x0 must have {n} entries ({what}), got {}", x0.len());
    }
    Ok(())
}

fn constant(x: &Vector) -> Option<f64> {
    let first = *x.iter().next()?;
    let spread = x.max() - x.min();
    (spread <= 1e-12 * x.amax().max(1.0)).then_some(first)
}

fn setup(args: &RunArgs, l: &Matrix, x0: Vector) -> latent_consensus::Result<Setup> {
    let n = l.nrows();
    let v = || -> latent_consensus::Result<Vector> {
        match &args.v {
            Some(p) => read_vector(p)
                .map_err(|e| latent_consensus::Error::InvalidParameter(format!("{e:#}"))),
            None => Ok(uniform_distribution(n)),
        }
    };
    let base = |delta, v: Option<&Vector>| Parameters {
        delta,
        v: v.map(vector_values),
        gamma: None,
        t_max: 0.0,
        dt: 0.0,
        tol: args.tol,
    };
    Ok(match args.protocol {
        Protocol::Plain => {
            let predicted = plain_limit(l, &x0)?;
            Setup {
                system: l.clone(),
                rate: decay_rate(l)?,
                z0: x0,
                parameters: base(None, None),
                consensus: constant(&predicted),
                predict: Box::new(move |_| predicted.clone()),
            }
        }
        Protocol::Hub => {
            let cfg = HubConfig::new(args.delta.unwrap_or_default(), v()?)?;
            let system = hub_extended_laplacian(l, &cfg)?;
            let predicted = hub_eigenprojection(l, &cfg)? * &x0;
            let c = hub_consensus(l, &cfg, &x0)?;
            Setup {
                rate: decay_rate(&system)?,
                system,
                z0: x0,
                parameters: base(Some(cfg.delta()), Some(cfg.v())),
                consensus: Some(c),
                predict: Box::new(move |_| predicted.clone()),
            }
        }
        Protocol::Background => {
            let cfg = BackgroundConfig::new(args.delta.unwrap_or_default(), v()?)?;
            let system = background_matrix(l, &cfg)?;
            let predicted = background_eigenprojection(l, &cfg)? * &x0;
            let c = background_consensus(l, &cfg, &x0)?;
            Setup {
                rate: decay_rate(&system)?,
                system,
                z0: x0,
                parameters: base(Some(cfg.delta()), Some(cfg.v())),
                consensus: Some(c),
                predict: Box::new(move |_| predicted.clone()),
            }
        }
        Protocol::Ortho => {
            let s = consensus_subspace_projector(l)?;
            let predicted = ortho_consensus(l, &x0)?;
            Setup {
                system: l.clone(),
                rate: decay_rate(l)?,
                z0: s * x0,
                parameters: base(None, None),
                consensus: Some(predicted[0]),
                predict: Box::new(move |_| predicted.clone()),
            }
        }
        Protocol::SecondOrder => {
            let cfg = SecondOrderConfig::new(args.gamma.unwrap_or_default())?;
            if !second_order_stable(l, &cfg)? {
                return Err(latent_consensus::Error::UndefinedLimit(format!(
                    "second-order protocol with γ = {} has a mode with nonnegative real part; \
                     the asymptote does not apply",
                    cfg.gamma()
                )));
            }
            let p = eigenprojection::eigenprojection(l)?.projection;
            let xi0 = x0.rows(0, n).into_owned();
            let zeta0 = x0.rows(n, n).into_owned();
            let predict = move |t: f64| {
                let (xi, zeta) =
                    second_order_asymptote_with(&p, &xi0, &zeta0, t).expect("lengths checked");
                let mut z = Vector::zeros(2 * n);
                z.rows_mut(0, n).copy_from(&xi);
                z.rows_mut(n, n).copy_from(&zeta);
                z
            };
            let mut parameters = base(None, None);
            parameters.gamma = Some(cfg.gamma());
            Setup {
                system: -second_order_matrix(l, &cfg),
                rate: second_order_decay_rate(l, &cfg)?,
                z0: x0,
                parameters,
                consensus: None,
                predict: Box::new(predict),
            }
        }
    })
}

fn write_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    traj.write_csv(BufWriter::new(file)).with_context(|| format!("writing {}", path.display()))
}

pub fn run(args: &RunArgs) -> Result<bool> {
    check_unused(args)?;
    let started = Instant::now();
    let l = read_graph(&args.graph)?.laplacian();
    let n = l.nrows();
    let x0 = read_vector(&args.x0)?;
    match args.protocol {
        Protocol::Hub => expect_len(&x0, n + 1, "n agents, then the hub")?,
        Protocol::SecondOrder => expect_len(&x0, 2 * n, "positions, then velocities")?,
        _ => expect_len(&x0, n, "one per agent")?,
    }

    let mut setup = match setup(args, &l, x0) {
        Ok(s) => s,
        Err(e)
            if is_check_failure(&e) || matches!(e, latent_consensus::Error::UndefinedLimit(_)) =>
        {
            let report = RunReport {
                protocol: args.protocol,
                parameters: Parameters {
                    delta: args.delta,
                    v: None,
                    gamma: args.gamma,
                    t_max: args.t_max.unwrap_or(f64::NAN),
                    dt: args.dt.unwrap_or(f64::NAN),
                    tol: args.tol,
                },
                predicted: Vec::new(),
                predicted_consensus: None,
                simulated: Vec::new(),
                residual: f64::INFINITY,
                residual_half_horizon: None,
                converged: false,
                wall_time_s: started.elapsed().as_secs_f64(),
                failure: Some(e.to_string()),
            };
            write_json(&args.report, &report)?;
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };

    let t_max = args.t_max.unwrap_or_else(|| setup.rate.map_or(FALLBACK_HORIZON, horizon));
    // the default step also respects the stability heuristic, which matters
    // for second-order systems with small damping
    let dt = args.dt.unwrap_or_else(|| default_dt(&setup.system).min(stable_dt(&setup.system)));
    let steps = (t_max / dt).ceil() as usize;
    let record_every = args.record_every.unwrap_or((steps / TARGET_ROWS).max(1));
    let cfg = SimulationConfig::new(dt, t_max, record_every)?;
    setup.parameters.t_max = t_max;
    setup.parameters.dt = dt;

    let predicted = (setup.predict)(t_max);
    let mut report = RunReport {
        protocol: args.protocol,
        parameters: setup.parameters,
        predicted: vector_values(&predicted),
        predicted_consensus: setup.consensus,
        simulated: Vec::new(),
        residual: f64::INFINITY,
        residual_half_horizon: None,
        converged: false,
        wall_time_s: 0.0,
        failure: None,
    };
    match integrate(&setup.system, &setup.z0, &cfg) {
        Ok(traj) => {
            write_csv(&args.out, &traj)?;
            let end = traj.final_state();
            report.residual = (end - &predicted).amax();
            if args.protocol == Protocol::SecondOrder {
                let (t, z) = traj.state_near(t_max / 2.0);
                report.residual_half_horizon = Some((z - (setup.predict)(t)).amax());
            }
            report.simulated = vector_values(end);
            report.converged = report.residual <= args.tol;
            if !report.converged {
                report.failure = Some(format!(
                    "terminal residual {:e} exceeds tolerance {:e}",
                    report.residual, args.tol
                ));
            }
        }
        Err(e) if is_check_failure(&e) => report.failure = Some(e.to_string()),
        Err(e) => return Err(e.into()),
    }
    report.wall_time_s = started.elapsed().as_secs_f64();
    write_json(&args.report, &report)?;
    Ok(report.converged)
}
