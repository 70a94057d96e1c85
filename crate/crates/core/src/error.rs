use thiserror::Error;

use crate::game::Player;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("imperfect recall: information set {infoset} of {player} is reached by different own sequences")]
    ImperfectRecall { player: Player, infoset: usize },
    #[error("unknown leaf `{0}`")]
    UnknownLeaf(String),
    #[error("strategy has no distribution for information set {0}")]
    MissingInfoSet(usize),
    #[error("malformed distribution at information set {infoset}: {reason}")]
    BadDistribution { infoset: usize, reason: String },
    #[error("infeasible realization plan (constraint residual {residual:e})")]
    InfeasiblePlan { residual: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("objective undefined: non-positive weight at sequence {0}")]
    Domain(usize),
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("prior exponent {alpha} < 1 at sequence {sequence}; the posterior is not log-concave")]
    NonConcavePrior { sequence: usize, alpha: f64 },
    #[error("constraint matrix is not a sequence-form treeplex: {0}")]
    NotTreeplex(String),
    #[error("projection polytope is empty")]
    EmptyPolytope,
    #[error("projection did not converge in {iterations} iterations (KKT residual {residual:e})")]
    ProjectionStalled { iterations: usize, residual: f64 },
    #[error("posterior holds no usable samples")]
    EmptyPosterior,
    #[error("equilibrium check failed: {0}")]
    Equilibrium(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    /// True for errors caused by bad input or the environment rather than
    /// numerical failure.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::InvalidPrior(_) | Error::NonConcavePrior { .. } | Error::Io(_) | Error::Csv(_) => {
                true
            }
            Error::Context { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
