use thiserror::Error;

use crate::expr::ParseError;
use crate::girsanov::Violation;

#[derive(Debug, Error)]
pub enum Error {
    /// The field anticipates: some component depends on its own or a later
    /// increment.
    #[error("anticipating field: {}", describe(.0))]
    NotPredictable(Vec<Violation>),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("sample batch needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample batch of {count} × {dim} draws exceeds the budget of {budget} values")]
    MemoryBudget {
        count: usize,
        dim: usize,
        budget: usize,
    },
    #[error("{what} has degree {degree}; Monte Carlo accepts at most {cap}")]
    DegreeCap { what: String, degree: u32, cap: u32 },
    #[error("infeasible instance spec: {0}")]
    InfeasibleSpec(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn describe(v: &[Violation]) -> String {
    v.iter()
        .map(|x| format!("z_{} depends on ξ_{}", x.component, x.coord))
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
