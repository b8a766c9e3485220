use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem size {0}: need n >= 2")]
    InvalidSize(usize),

    #[error("invalid oracle index j = {j} for n = {n}")]
    InvalidOracle { j: usize, n: usize },

    /// Malformed schedule, series or state data.
    #[error("schema error: {0}")]
    Schema(String),

    /// A precondition of an operation was violated by its input.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("no feasible solution: {0}")]
    Infeasible(String),

    #[error("composition failed: {0}")]
    Composition(String),

    #[error("synthesis failed at stage {stage}: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("linear program solver: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_stage(self, stage: usize) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
