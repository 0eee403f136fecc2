use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dependency matrix: {0}")]
    InvalidDependencyMatrix(String),

    #[error("invalid digraph: {0}")]
    InvalidGraph(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is singular (rank {rank} < {n})")]
    Singular { rank: usize, n: usize },

    #[error("linear solve failed: {0}")]
    SolverFailure(String),

    #[error("degenerate projection: WᵀU is singular (rank {rank} < {d})")]
    DegenerateProjection { rank: usize, d: usize },

    #[error("basis is rank deficient (rank {rank} < {d} columns)")]
    RankDeficient { rank: usize, d: usize },

    #[error("not a Laplacian: {0}")]
    NotLaplacian(String),

    #[error("index of the matrix exceeds 1: rank(L²) = {rank_sq} but rank(L) = {rank}")]
    IndexViolation { rank: usize, rank_sq: usize },

    #[error("residual check `{check}` failed: {value:e} > {bound:e}")]
    Residual { check: &'static str, value: f64, bound: f64 },

    #[error("forest oracle limited to n <= {max} vertices, got n = {n}")]
    OracleTooLarge { n: usize, max: usize },

    #[error("limit undefined: {0}")]
    UndefinedLimit(String),

    #[error("simulation diverged at t = {time}")]
    Divergence { time: f64 },

    #[error("eigenvalue computation failed")]
    EigenFailure,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
