//! `latcon`: closed-form latent consensus, eigenprojections, in-forest
//! enumeration and simulation reports from the command line.

mod commands;
mod io;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "latcon", version, about = "Latent consensus of multi-agent consensus protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Laplacian `diag(A·1) − A` as a JSON matrix.
    Laplacian { graph: PathBuf },

    /// Print the eigenprojection of the Laplacian at 0.
    Eigenprojection {
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = ProjectionMethod::Nullspace)]
        method: ProjectionMethod,
        /// Forest parameter for `--method limit`.
        #[arg(long, default_value_t = latent_consensus::eigenprojection::DEFAULT_LIMIT_TAU)]
        tau: f64,
    },

    /// Simulate a protocol and compare its terminal state with the closed form.
    Run(run::RunArgs),

    /// Print the δ → 0 latent consensus without simulating.
    Latent {
        #[arg(long, value_enum)]
        model: LatentModel,
        graph: PathBuf,
        /// JSON array with the initial state.
        #[arg(long)]
        x0: PathBuf,
        /// JSON array with the influence weights (default uniform 1/n).
        #[arg(long)]
        v: Option<PathBuf>,
    },

    /// Closed-form consensus values over a list of δ.
    Sweep {
        #[arg(long, value_enum)]
        protocol: SweepProtocol,
        graph: PathBuf,
        #[arg(long)]
        x0: PathBuf,
        #[arg(long)]
        v: Option<PathBuf>,
        /// Comma-separated positive values.
        #[arg(long, value_delimiter = ',', required = true)]
        deltas: Vec<f64>,
        /// Worker threads; output order does not depend on it.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },

    /// Enumerate spanning in-forests (at most 10 vertices).
    Forests {
        graph: PathBuf,
        /// Also print the parametric forest matrix at this τ.
        #[arg(long)]
        tau: Option<f64>,
        /// List every forest.
        #[arg(long)]
        list: bool,
    },

    /// Print a random weighted digraph in the graph file format.
    Generate {
        #[arg(long)]
        n: usize,
        /// Arc probability.
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0.1)]
        low: f64,
        #[arg(long, default_value_t = 2.0)]
        high: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProjectionMethod {
    Nullspace,
    Limit,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum LatentModel {
    Hub,
    Background,
    Ortho,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepProtocol {
    Hub,
    Background,
}

/// Exit status for a completed computation whose checks failed; the JSON
/// output carries a `"failure"` field.
const CHECK_FAILED: u8 = 1;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Laplacian { graph } => commands::laplacian(&graph),
        Command::Eigenprojection { graph, method, tau } => {
            commands::eigenprojection(&graph, method, tau)
        }
        Command::Run(args) => run::run(&args),
        Command::Latent { model, graph, x0, v } => {
            commands::latent(model, &graph, &x0, v.as_deref())
        }
        Command::Sweep { protocol, graph, x0, v, deltas, jobs } => {
            commands::sweep(protocol, &graph, &x0, v.as_deref(), &deltas, jobs)
        }
        Command::Forests { graph, tau, list } => commands::forests(&graph, tau, list),
        Command::Generate { n, p, low, high, seed } => commands::generate(n, p, low, high, seed),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(CHECK_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
