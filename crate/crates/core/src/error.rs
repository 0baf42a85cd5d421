use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid reward: {0}")]
    InvalidReward(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point is not in the hypersimplex: {0}")]
    Infeasible(String),

    #[error("smoothing is degenerate: {0}")]
    DegenerateSmoothing(String),

    #[error("non-finite gradient at iteration {iteration}")]
    NonFiniteGradient { iteration: usize },

    #[error("hard instance construction failed: {0}")]
    Construction(String),

    #[error("search space too large: {0}")]
    TooLarge(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
