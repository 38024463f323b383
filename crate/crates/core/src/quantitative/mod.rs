//! Quantitative analysis: Markov-chain numerics and system-level failure
//! rate evaluation.

mod absorption;
mod evaluate;
mod generator;
pub mod linalg;
mod stationary;
mod transient;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::{Finding, ModelError, OfmRef, SharedEventDiagnostic};

pub use absorption::{mttf_rate, series_path_rate, transient_rate};
pub use evaluate::evaluate_ghcft;
pub use generator::{build_generator, GeneratorView, InputTerm};
pub use stationary::{closed_classes, stationary_distribution, steady_state_frequency};
pub use transient::{transient_solve, InputProfiles, Trajectory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("model has {} validation error(s); run `validate` for details", .0.iter().filter(|f| f.severity == crate::model::Severity::Error).count())]
    InvalidModel(Vec<Finding>),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("invalid input rate: {0}")]
    InvalidInput(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("top event `{0}` is not an output failure mode of any component")]
    TopNotFound(OfmRef),
    #[error("singular linear system (condition number {condition:e})")]
    Singular { condition: f64 },
    #[error("state `{target}` is transient; its long-run entering frequency is zero. Use the mean-time-to-failure rate instead")]
    TransientTarget { target: String },
    #[error("stationary distribution is not unique: {classes} closed classes are reachable")]
    NotUnique { classes: usize },
    #[error("transient solver exceeded {0} steps")]
    MaxSteps(usize),
    #[error("transient solver cannot meet the tolerance at t = {t:e} (step {h:e})")]
    ToleranceUnachievable { t: f64, h: f64 },
    #[error("AND gate `{component}.{gate}` needs a mission time: combining rates of simultaneous failures requires a time window, so pass one")]
    AndNeedsMissionTime { component: String, gate: String },
    #[error(
        "repeated events reach the top event outside a single Markov-chain input ({}); \
         quantitative analysis only admits repeated events whose whole influence enters one CMC input",
        .0.iter().map(|d| d.event.as_str()).collect::<Vec<_>>().join(", ")
    )]
    SharedEvents(Vec<SharedEventDiagnostic>),
    #[error("component `{component}`: {source}")]
    InComponent {
        component: String,
        #[source]
        source: Box<QuantError>,
    },
}

impl QuantError {
    pub(crate) fn in_component(self, component: &str) -> QuantError {
        match self {
            e @ QuantError::InComponent { .. } => e,
            e => QuantError::InComponent {
                component: component.to_string(),
                source: Box::new(e),
            },
        }
    }
}

impl From<linalg::Singular> for QuantError {
    fn from(s: linalg::Singular) -> Self {
        QuantError::Singular { condition: s.condition }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Hours. Required for AND gates and for the transient method.
    pub mission_time: Option<f64>,
    /// Rate every CMC output over the mission time instead of by structure.
    pub prefer_transient: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rtol: 1e-8,
            atol: 1e-12,
            max_steps: 1_000_000,
            mission_time: None,
            prefer_transient: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), QuantError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.rtol) {
            return Err(QuantError::InvalidConfig(format!("relative tolerance must be > 0, got {}", self.rtol)));
        }
        if !positive(self.atol) {
            return Err(QuantError::InvalidConfig(format!("absolute tolerance must be > 0, got {}", self.atol)));
        }
        if self.max_steps == 0 {
            return Err(QuantError::InvalidConfig("max steps must be at least 1".into()));
        }
        if let Some(t) = self.mission_time {
            if !positive(t) {
                return Err(QuantError::InvalidConfig(format!("mission time must be > 0, got {t}")));
            }
        }
        if self.prefer_transient && self.mission_time.is_none() {
            return Err(QuantError::InvalidConfig("the transient method needs a mission time".into()));
        }
        Ok(())
    }
}

/// A rate with the warnings produced while computing it.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub rate: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateMethod {
    MttfReciprocal,
    SteadyStateFrequency,
    Transient,
    /// Rate combination through CFT gates.
    FaultTree,
    /// Several error states rated by different methods.
    Mixed,
}

impl fmt::Display for RateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateMethod::MttfReciprocal => "mttf-reciprocal",
            RateMethod::SteadyStateFrequency => "steady-state-frequency",
            RateMethod::Transient => "transient",
            RateMethod::FaultTree => "fault-tree",
            RateMethod::Mixed => "mixed",
        })
    }
}

/// Rate of one output failure mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OfmRate {
    pub ofm: OfmRef,
    /// Per hour.
    pub rate: f64,
    pub method: RateMethod,
    /// Hours; `None` when the rate is zero.
    pub mtbf: Option<f64>,
}

impl OfmRate {
    pub fn new(ofm: OfmRef, rate: f64, method: RateMethod) -> Self {
        OfmRate {
            ofm,
            rate,
            method,
            mtbf: mtbf(rate),
        }
    }
}

/// Result of [`evaluate_ghcft`]: the top event's rate plus the rates of all
/// output failure modes evaluated on the way, in evaluation order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateResult {
    pub top: OfmRef,
    pub rate: f64,
    pub method: RateMethod,
    pub mtbf: Option<f64>,
    pub per_ofm: Vec<OfmRate>,
    pub diagnostics: Vec<String>,
}

/// Mean time between failures for a rate, `None` for a zero rate.
pub fn mtbf(rate: f64) -> Option<f64> {
    (rate > 0.0).then(|| 1.0 / rate)
}
