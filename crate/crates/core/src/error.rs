use thiserror::Error;

use crate::model::{Colour, ItemId, Packing};
use crate::rational::{Rational, RationalError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Rational(#[from] RationalError),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("item {id} has size {size}, outside (0, 1]")]
    ItemSize { id: ItemId, size: Rational },

    #[error("item {id} of size {size} is below the minimum item size ε = {epsilon}")]
    BelowMinimumSize {
        id: ItemId,
        size: Rational,
        epsilon: Rational,
    },

    #[error("item {id} of size {size} is not small (threshold {threshold})")]
    NotSmall {
        id: ItemId,
        size: Rational,
        threshold: Rational,
    },

    #[error("colour {0} is not part of the instance")]
    UnknownColour(Colour),

    #[error("colour {0} has already been isolated")]
    ColourIsolated(Colour),

    #[error("{what} budget of {limit} exhausted")]
    BudgetExceeded {
        what: &'static str,
        limit: u64,
        best_so_far: Option<Box<Packing>>,
    },

    #[error("oracle refused: {n} items exceeds the exact-solver limit of {limit}; use lower bounds instead")]
    OracleLimit { n: usize, limit: usize },

    #[error("oracle result does not describe this instance: {0}")]
    OracleMismatch(String),

    #[error("no packing satisfies colour stretch β = {0}")]
    Infeasible(Rational),

    #[error("no candidate packing meets colour stretch β = {0}")]
    EmptyCandidates(Rational),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn budget(what: &'static str, limit: u64) -> Self {
        Error::BudgetExceeded {
            what,
            limit,
            best_so_far: None,
        }
    }

    /// True for errors caused by the caller's input violating a documented precondition.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::InvalidInstance(_)
                | Error::InvalidParameter(_)
                | Error::ItemSize { .. }
                | Error::BelowMinimumSize { .. }
                | Error::NotSmall { .. }
                | Error::UnknownColour(_)
                | Error::ColourIsolated(_)
                | Error::OracleLimit { .. }
                | Error::OracleMismatch(_)
                | Error::Infeasible(_)
                | Error::EmptyCandidates(_)
                | Error::Rational(_)
        )
    }
}
