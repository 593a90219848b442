use thiserror::Error;

use crate::models::CaseTag;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {}", .0.join("; "))]
    InvalidSpec(Vec<String>),

    #[error("{case}: point {point:?} is outside the model domain")]
    OutOfDomain { case: CaseTag, point: Vec<f64> },

    #[error("expected a state of length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("operation not defined for {case}: {what}")]
    WrongCase { case: CaseTag, what: &'static str },

    #[error("finite-difference stencil leaves the domain at {point:?} (step {h})")]
    Stencil { point: Vec<f64>, h: f64 },

    #[error("closed-form guard violated: {0}")]
    Guard(String),

    #[error("closed-form family has a pole near t = {t}")]
    Pole { t: f64 },

    #[error("need at least {needed} {what}, got {got}")]
    TooFew { what: &'static str, needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Sign(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
