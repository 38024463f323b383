//! Independent cross-checks for the analytic results: Monte-Carlo
//! simulation of first-passage times and truth-table enumeration of
//! minimal cut sets.

mod brute;
mod simulate;

use thiserror::Error;

use crate::quantitative::QuantError;

pub use brute::{brute_force_cut_sets, BRUTE_FORCE_EVENT_CAP};
pub use simulate::{default_horizon, simulate_first_passage, simulate_generator, SimulationEstimate, CHUNK_RUNS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{events} basic events exceed the brute-force cap of {cap}")]
    TooManyEvents { events: usize, cap: usize },
    #[error("runs must be at least 1 and the horizon positive")]
    InvalidRequest,
    #[error(transparent)]
    Quant(#[from] QuantError),
}
