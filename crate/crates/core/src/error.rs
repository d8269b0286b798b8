use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid switching graph: {0}")]
    InvalidGraph(String),

    #[error("ill-posed interconnection in mode {mode}")]
    IllPosed { mode: usize },

    #[error("regulator equations have no solution (residual {residual:.3e})")]
    RegulatorInfeasible { residual: f64 },

    #[error("closed loop admits no regulation witness (residual {residual:.3e})")]
    NoWitness { residual: f64 },

    #[error("controller reconstruction failed: {0}")]
    Reconstruction(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
