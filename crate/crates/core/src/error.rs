use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A tree or schedule does not agree with the graph it is checked against.
    #[error("inconsistent with graph: {0}")]
    Consistency(String),

    /// The `(B, D)` guess cannot be completed into a k-tree by the solver.
    #[error("guess is infeasible: {0}")]
    InfeasibleGuess(String),

    /// An iteration of the coverage loop made no progress before the target was reached.
    #[error("coverage stalled in iteration {iteration}: covered {covered} of {target}")]
    CoverStalled {
        iteration: usize,
        covered: usize,
        target: usize,
    },

    #[error("root reaches only {reachable} terminals, {k} required")]
    UnreachableK { reachable: usize, k: usize },

    #[error("instance too large for exhaustive search: {size} > {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("no k-tree exists")]
    NoKTree,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
