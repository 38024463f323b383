//! System, component, and failure-logic types.
//!
//! A [`SystemModel`] is a set of components wired through their ports. Every
//! component carries exactly one failure logic model: either a component fault
//! tree ([`CftElement`]) or a component Markov chain ([`CmcElement`]). Failure
//! modes cross component boundaries through ports: an output failure mode of
//! one component feeds the input failure modes bound to the inport it is
//! connected to.
//!
//! All types here are plain values. Construction does not check invariants;
//! [`validate_model`] reports every violation at once.

mod rate;
mod shared;
mod topo;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

pub use rate::{Rate, RateKind, RateUnit, FIT_SCALE};
pub use shared::{detect_shared_events, SharedEventDiagnostic};
pub use topo::topological_order;
pub use validate::{validate_model, Finding, Severity, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("cyclic dependency between components: {}", .cycle.join(" -> "))]
    CyclicDependency { cycle: Vec<String> },
    #[error("unresolved input: no rate given for input failure mode `{ifm}`")]
    UnresolvedInput { ifm: String },
    #[error("unknown transition {from} -> {to}")]
    UnknownTransition { from: String, to: String },
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("malformed reference `{0}`: expected `component.name`")]
    MalformedReference(String),
}

/// `component.port` reference.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PortRef {
    pub component: String,
    pub port: String,
}

impl PortRef {
    pub fn new(component: impl Into<String>, port: impl Into<String>) -> Self {
        PortRef {
            component: component.into(),
            port: port.into(),
        }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.component, self.port)
    }
}

impl FromStr for PortRef {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        split_reference(s).map(|(c, p)| PortRef::new(c, p))
    }
}

/// `component.failure_mode` reference; names an output failure mode, e.g. an
/// analysis top event.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OfmRef {
    pub component: String,
    pub failure_mode: String,
}

impl OfmRef {
    pub fn new(component: impl Into<String>, failure_mode: impl Into<String>) -> Self {
        OfmRef {
            component: component.into(),
            failure_mode: failure_mode.into(),
        }
    }
}

impl fmt::Display for OfmRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.component, self.failure_mode)
    }
}

impl FromStr for OfmRef {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        split_reference(s).map(|(c, m)| OfmRef::new(c, m))
    }
}

// Component ids never contain '.', so the first dot separates the two halves.
fn split_reference(s: &str) -> Result<(&str, &str), ModelError> {
    match s.split_once('.') {
        Some((c, rest)) if !c.is_empty() && !rest.is_empty() => Ok((c, rest)),
        _ => Err(ModelError::MalformedReference(s.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Connection {
    pub from: PortRef,
    pub to: PortRef,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SystemModel {
    pub components: BTreeMap<String, Component>,
    pub connections: BTreeSet<Connection>,
}

impl SystemModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_component(mut self, component: Component) -> Self {
        self.components.insert(component.id.clone(), component);
        self
    }

    /// Adds a connection from an outport to an inport.
    ///
    /// Panics if either reference is not of the form `component.port`.
    pub fn with_connection(mut self, from: &str, to: &str) -> Self {
        let from = from.parse().expect("outport reference");
        let to = to.parse().expect("inport reference");
        self.connections.insert(Connection { from, to });
        self
    }

    pub fn component(&self, id: &str) -> Option<&Component> {
        self.components.get(id)
    }

    /// The outport connected to `inport`, if any.
    pub fn source_of(&self, inport: &PortRef) -> Option<&PortRef> {
        self.connections
            .iter()
            .find(|c| &c.to == inport)
            .map(|c| &c.from)
    }

    /// Resolves which upstream output failure mode drives an input failure
    /// mode bound on `component`.
    ///
    /// The IFM's `source_mode` (or, when absent, its own id) selects the
    /// same-named OFM on the connected outport. If no OFM carries that name
    /// and the outport has exactly one OFM, that one is used.
    pub fn resolve_input(&self, component: &str, ifm_id: &str, ifm: &InputFailureMode) -> InputSource {
        let inport = PortRef::new(component, ifm.port.clone());
        let Some(source) = self.source_of(&inport) else {
            return InputSource::Unconnected;
        };
        let Some(upstream) = self.components.get(&source.component) else {
            return InputSource::Unconnected;
        };
        let on_port = upstream.flm.ofms_on_port(&source.port);
        let wanted = ifm.source_mode.as_deref().unwrap_or(ifm_id);
        if on_port.iter().any(|m| *m == wanted) {
            return InputSource::Connected(OfmRef::new(&source.component, wanted));
        }
        match on_port.as_slice() {
            [only] => InputSource::Connected(OfmRef::new(&source.component, *only)),
            [] => InputSource::Unconnected,
            _ => InputSource::Ambiguous {
                outport: source.clone(),
                candidates: on_port.iter().map(|s| s.to_string()).collect(),
            },
        }
    }

    /// True when `top` names an output failure mode of an existing component.
    pub fn has_ofm(&self, top: &OfmRef) -> bool {
        self.components
            .get(&top.component)
            .is_some_and(|c| c.flm.has_ofm(&top.failure_mode))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputSource {
    Connected(OfmRef),
    Unconnected,
    Ambiguous {
        outport: PortRef,
        candidates: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub id: String,
    pub inports: BTreeSet<String>,
    pub outports: BTreeSet<String>,
    pub flm: FailureLogic,
}

impl Component {
    pub fn new<I, O, S, T>(id: impl Into<String>, inports: I, outports: O, flm: impl Into<FailureLogic>) -> Self
    where
        I: IntoIterator<Item = S>,
        O: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        Component {
            id: id.into(),
            inports: inports.into_iter().map(Into::into).collect(),
            outports: outports.into_iter().map(Into::into).collect(),
            flm: flm.into(),
        }
    }
}

/// The failure logic model attached to a component.
#[derive(Debug, Clone, PartialEq)]
pub enum FailureLogic {
    Cft(CftElement),
    Cmc(CmcElement),
}

impl FailureLogic {
    pub fn has_ofm(&self, id: &str) -> bool {
        match self {
            FailureLogic::Cft(cft) => cft.ofms.contains_key(id),
            FailureLogic::Cmc(cmc) => cmc.ofms.contains_key(id),
        }
    }

    pub fn ifms(&self) -> &BTreeMap<String, InputFailureMode> {
        match self {
            FailureLogic::Cft(cft) => &cft.ifms,
            FailureLogic::Cmc(cmc) => &cmc.ifms,
        }
    }

    /// Output failure modes bound to `port`, in id order.
    pub fn ofms_on_port(&self, port: &str) -> Vec<&str> {
        match self {
            FailureLogic::Cft(cft) => cft
                .ofms
                .iter()
                .filter(|(_, o)| o.port == port)
                .map(|(id, _)| id.as_str())
                .collect(),
            FailureLogic::Cmc(cmc) => cmc
                .ofms
                .iter()
                .filter(|(_, o)| o.port == port)
                .map(|(id, _)| id.as_str())
                .collect(),
        }
    }

    pub fn as_cmc(&self) -> Option<&CmcElement> {
        match self {
            FailureLogic::Cmc(cmc) => Some(cmc),
            FailureLogic::Cft(_) => None,
        }
    }

    pub fn as_cft(&self) -> Option<&CftElement> {
        match self {
            FailureLogic::Cft(cft) => Some(cft),
            FailureLogic::Cmc(_) => None,
        }
    }
}

impl From<CftElement> for FailureLogic {
    fn from(cft: CftElement) -> Self {
        FailureLogic::Cft(cft)
    }
}

impl From<CmcElement> for FailureLogic {
    fn from(cmc: CmcElement) -> Self {
        FailureLogic::Cmc(cmc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    And,
    Or,
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::And => "and",
            GateKind::Or => "or",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub inputs: Vec<String>,
}

/// An input failure mode bound to an inport.
///
/// `source_mode` names the upstream output failure mode this input listens
/// to when the connected outport carries several.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputFailureMode {
    pub port: String,
    pub source_mode: Option<String>,
}

impl InputFailureMode {
    pub fn on(port: impl Into<String>) -> Self {
        InputFailureMode {
            port: port.into(),
            source_mode: None,
        }
    }

    pub fn with_source_mode(mut self, mode: impl Into<String>) -> Self {
        self.source_mode = Some(mode.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CftOutputFailureMode {
    pub port: String,
    /// Local node (basic event, gate, or IFM) that triggers this OFM.
    pub input: String,
}

/// Component fault tree: basic events, AND/OR gates, and failure-mode ports
/// arranged as a DAG. Node ids share one namespace.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CftElement {
    pub basic_events: BTreeMap<String, Rate>,
    pub gates: BTreeMap<String, Gate>,
    pub ifms: BTreeMap<String, InputFailureMode>,
    pub ofms: BTreeMap<String, CftOutputFailureMode>,
}

impl CftElement {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_basic_event(mut self, id: impl Into<String>, rate: Rate) -> Self {
        self.basic_events.insert(id.into(), rate);
        self
    }

    pub fn with_gate<I, S>(mut self, id: impl Into<String>, kind: GateKind, inputs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let inputs = inputs.into_iter().map(Into::into).collect();
        self.gates.insert(id.into(), Gate { kind, inputs });
        self
    }

    pub fn with_ifm(mut self, id: impl Into<String>, ifm: InputFailureMode) -> Self {
        self.ifms.insert(id.into(), ifm);
        self
    }

    pub fn with_ofm(mut self, id: impl Into<String>, port: impl Into<String>, input: impl Into<String>) -> Self {
        self.ofms.insert(
            id.into(),
            CftOutputFailureMode {
                port: port.into(),
                input: input.into(),
            },
        );
        self
    }

    pub fn node_kind(&self, id: &str) -> Option<CftNodeKind> {
        if self.basic_events.contains_key(id) {
            Some(CftNodeKind::BasicEvent)
        } else if self.gates.contains_key(id) {
            Some(CftNodeKind::Gate)
        } else if self.ifms.contains_key(id) {
            Some(CftNodeKind::InputFailureMode)
        } else if self.ofms.contains_key(id) {
            Some(CftNodeKind::OutputFailureMode)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CftNodeKind {
    BasicEvent,
    Gate,
    InputFailureMode,
    OutputFailureMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub from: String,
    pub to: String,
    pub rate: Rate,
}

/// (ifm, transition) pair: the IFM's rate adds onto the transition's rate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InputDependency {
    pub ifm: String,
    pub from: String,
    pub to: String,
}

/// An output failure mode of a CMC, triggered when any of `states` is reached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CmcOutputFailureMode {
    pub port: String,
    pub states: Vec<String>,
}

/// Component Markov chain: a CTMC with an initial state, error states, rated
/// transitions, and the IFM/OFM interface that ties it into a system.
///
/// State and transition order is declaration order; generator indices follow
/// it.
#[derive(Debug, Clone, PartialEq)]
pub struct CmcElement {
    pub states: Vec<String>,
    pub initial: String,
    pub error_states: Vec<String>,
    pub transitions: Vec<Transition>,
    pub ifms: BTreeMap<String, InputFailureMode>,
    pub input_deps: BTreeSet<InputDependency>,
    pub ofms: BTreeMap<String, CmcOutputFailureMode>,
}

impl CmcElement {
    pub fn new<I, S>(states: I, initial: impl Into<String>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        CmcElement {
            states: states.into_iter().map(Into::into).collect(),
            initial: initial.into(),
            error_states: Vec::new(),
            transitions: Vec::new(),
            ifms: BTreeMap::new(),
            input_deps: BTreeSet::new(),
            ofms: BTreeMap::new(),
        }
    }

    pub fn with_error_states<I, S>(mut self, states: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.error_states.extend(states.into_iter().map(Into::into));
        self
    }

    pub fn with_transition(mut self, from: impl Into<String>, to: impl Into<String>, rate: Rate) -> Self {
        self.transitions.push(Transition {
            from: from.into(),
            to: to.into(),
            rate,
        });
        self
    }

    pub fn with_ifm(mut self, id: impl Into<String>, ifm: InputFailureMode) -> Self {
        self.ifms.insert(id.into(), ifm);
        self
    }

    pub fn with_dependency(mut self, ifm: impl Into<String>, from: impl Into<String>, to: impl Into<String>) -> Self {
        self.input_deps.insert(InputDependency {
            ifm: ifm.into(),
            from: from.into(),
            to: to.into(),
        });
        self
    }

    pub fn with_ofm<I, S>(mut self, id: impl Into<String>, port: impl Into<String>, states: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.ofms.insert(
            id.into(),
            CmcOutputFailureMode {
                port: port.into(),
                states: states.into_iter().map(Into::into).collect(),
            },
        );
        self
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.states.iter().position(|s| s == id)
    }

    pub fn transition(&self, from: &str, to: &str) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.from == from && t.to == to)
    }

    /// IFMs that the transition `from -> to` depends on (DI(t)).
    pub fn dependencies_of<'a>(&'a self, from: &'a str, to: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.input_deps
            .iter()
            .filter(move |d| d.from == from && d.to == to)
            .map(|d| d.ifm.as_str())
    }

    /// The DO relation as (error state, ofm) pairs.
    pub fn output_deps(&self) -> impl Iterator<Item = (&str, &str)> {
        self.ofms
            .iter()
            .flat_map(|(id, o)| o.states.iter().map(move |s| (s.as_str(), id.as_str())))
    }
}

/// Base rate of `from -> to` plus the rates of every IFM it depends on.
pub fn effective_rate(
    cmc: &CmcElement,
    from: &str,
    to: &str,
    ifm_rates: &BTreeMap<String, f64>,
) -> Result<f64, ModelError> {
    let t = cmc.transition(from, to).ok_or_else(|| ModelError::UnknownTransition {
        from: from.to_string(),
        to: to.to_string(),
    })?;
    let mut rate = t.rate.value();
    for ifm in cmc.dependencies_of(from, to) {
        let input = ifm_rates
            .get(ifm)
            .ok_or_else(|| ModelError::UnresolvedInput { ifm: ifm.to_string() })?;
        rate += input;
    }
    Ok(rate)
}
