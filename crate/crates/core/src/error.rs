use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("user {id}: {field} must be positive and finite, got {value}")]
    InvalidUser {
        id: usize,
        field: &'static str,
        value: f64,
    },
    #[error("power budget must be positive and finite, got {0}")]
    InvalidBudget(f64),
    #[error("at least one user is required")]
    NoUsers,
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bid for user {index} must be non-negative and finite, got {value}")]
    InvalidBid { index: usize, value: f64 },
    #[error("invalid belief parameters: {0}")]
    InvalidBelief(&'static str),
    #[error("price {price} is outside the bidding domain ({lower}, {upper}]")]
    Domain { price: f64, lower: f64, upper: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("user ids must be contiguous from 0; position {position} holds id {id}")]
    NonContiguousIds { position: usize, id: usize },
    #[error("invalid sweep configuration: {0}")]
    InvalidSweep(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
