use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{CftElement, CmcElement, Component, FailureLogic, InputSource, SystemModel};
use crate::qualitative;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
    /// Owning component id, or empty for system-level findings.
    pub component: String,
    pub location: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        if self.component.is_empty() {
            write!(f, "{sev}[{}] {}: {}", self.code, self.location, self.message)
        } else {
            write!(f, "{sev}[{}] {}/{}: {}", self.code, self.component, self.location, self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Warning)
    }
}

struct Collector {
    findings: Vec<Finding>,
}

impl Collector {
    fn push(&mut self, severity: Severity, code: &'static str, component: &str, location: impl Into<String>, message: impl Into<String>) {
        self.findings.push(Finding {
            severity,
            code,
            message: message.into(),
            component: component.to_string(),
            location: location.into(),
        });
    }

    fn error(&mut self, code: &'static str, component: &str, location: impl Into<String>, message: impl Into<String>) {
        self.push(Severity::Error, code, component, location, message);
    }

    fn warn(&mut self, code: &'static str, component: &str, location: impl Into<String>, message: impl Into<String>) {
        self.push(Severity::Warning, code, component, location, message);
    }
}

/// Checks every structural invariant of a system model.
///
/// Never fails; each violation becomes a finding. Findings are ordered by
/// component id (system-level first), then code, then location.
pub fn validate_model(model: &SystemModel) -> ValidationReport {
    let mut out = Collector { findings: Vec::new() };

    for (key, component) in &model.components {
        check_component(key, component, &mut out);
    }
    check_connections(model, &mut out);
    if let Err(e) = super::topological_order(model) {
        out.error("E-CYCLE", "", "connections", e.to_string());
    }
    check_input_resolution(model, &mut out);

    out.findings.sort_by(|a, b| {
        (&a.component, a.code, &a.location, &a.message).cmp(&(&b.component, b.code, &b.location, &b.message))
    });
    ValidationReport { findings: out.findings }
}

fn check_component(key: &str, c: &Component, out: &mut Collector) {
    if key != c.id {
        out.error("E-COMPONENT-ID", key, "component", format!("map key `{key}` differs from component id `{}`", c.id));
    }
    if !is_component_id(&c.id) {
        out.error("E-IDENT", key, "component", format!("`{}` is not a valid component id", c.id));
    }
    for p in c.inports.intersection(&c.outports) {
        out.error("E-PORT-DUP", key, format!("port {p}"), format!("`{p}` is both an inport and an outport"));
    }
    match &c.flm {
        FailureLogic::Cft(cft) => check_cft(key, c, cft, out),
        FailureLogic::Cmc(cmc) => check_cmc(key, c, cmc, out),
    }
}

fn check_cft(comp: &str, c: &Component, cft: &CftElement, out: &mut Collector) {
    let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
    let kinds = [
        ("basic event", cft.basic_events.keys().collect::<Vec<_>>()),
        ("gate", cft.gates.keys().collect()),
        ("ifm", cft.ifms.keys().collect()),
        ("ofm", cft.ofms.keys().collect()),
    ];
    for (kind, ids) in &kinds {
        for id in ids {
            if let Some(prev) = seen.insert(id.as_str(), kind) {
                out.error("E-CFT-DUP-ID", comp, format!("node {id}"), format!("`{id}` declared as both {prev} and {kind}"));
            }
        }
    }

    for (id, rate) in &cft.basic_events {
        if !rate.is_valid() {
            out.error("E-RATE", comp, format!("basic event {id}"), format!("rate {} is not a finite nonnegative number", rate.magnitude()));
        }
    }
    for (id, gate) in &cft.gates {
        if gate.inputs.is_empty() {
            out.error("E-CFT-EMPTY-GATE", comp, format!("gate {id}"), "gate has no inputs");
        }
        for input in &gate.inputs {
            match cft.node_kind(input) {
                None => out.error("E-CFT-UNKNOWN-REF", comp, format!("gate {id}"), format!("input `{input}` is not declared")),
                Some(super::CftNodeKind::OutputFailureMode) => {
                    out.error("E-CFT-OFM-INPUT", comp, format!("gate {id}"), format!("output failure mode `{input}` cannot feed a gate"))
                }
                Some(_) => {}
            }
        }
    }
    for (id, ifm) in &cft.ifms {
        if !c.inports.contains(&ifm.port) {
            out.error("E-IFM-PORT", comp, format!("ifm {id}"), format!("`{}` is not an inport of this component", ifm.port));
        }
    }
    for (id, ofm) in &cft.ofms {
        if !c.outports.contains(&ofm.port) {
            out.error("E-OFM-PORT", comp, format!("ofm {id}"), format!("`{}` is not an outport of this component", ofm.port));
        }
        match cft.node_kind(&ofm.input) {
            None => out.error("E-CFT-UNKNOWN-REF", comp, format!("ofm {id}"), format!("feeding node `{}` is not declared", ofm.input)),
            Some(super::CftNodeKind::OutputFailureMode) => {
                out.error("E-CFT-OFM-INPUT", comp, format!("ofm {id}"), format!("output failure mode `{}` cannot feed an ofm", ofm.input))
            }
            Some(_) => {}
        }
    }
    if let Some(cycle) = gate_cycle(cft) {
        out.error("E-CFT-CYCLE", comp, format!("gate {}", cycle[0]), format!("gates form a cycle: {}", cycle.join(" -> ")));
    }
}

// Depth-first search over gate inputs; returns the first cycle found.
fn gate_cycle(cft: &CftElement) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    fn visit<'a>(
        id: &'a str,
        cft: &'a CftElement,
        marks: &mut BTreeMap<&'a str, Mark>,
        stack: &mut Vec<&'a str>,
    ) -> Option<Vec<String>> {
        match marks.get(id) {
            Some(Mark::Done) => return None,
            Some(Mark::Open) => {
                let pos = stack.iter().position(|s| *s == id).unwrap_or(0);
                let mut cycle: Vec<String> = stack[pos..].iter().map(|s| s.to_string()).collect();
                cycle.push(id.to_string());
                return Some(cycle);
            }
            None => {}
        }
        let gate = cft.gates.get(id)?;
        marks.insert(id, Mark::Open);
        stack.push(id);
        for input in &gate.inputs {
            if let Some(c) = visit(input, cft, marks, stack) {
                return Some(c);
            }
        }
        stack.pop();
        marks.insert(id, Mark::Done);
        None
    }
    let mut marks = BTreeMap::new();
    for id in cft.gates.keys() {
        if let Some(c) = visit(id, cft, &mut marks, &mut Vec::new()) {
            return Some(c);
        }
    }
    None
}

fn check_cmc(comp: &str, c: &Component, cmc: &CmcElement, out: &mut Collector) {
    let states: BTreeSet<&str> = cmc.states.iter().map(String::as_str).collect();
    if states.len() != cmc.states.len() {
        out.error("E-CMC-DUP-STATE", comp, "states", "state ids are not unique");
    }
    if !states.contains(cmc.initial.as_str()) {
        out.error("E-CMC-INITIAL", comp, "initial", format!("initial state `{}` is not declared", cmc.initial));
    }
    for s in &cmc.error_states {
        if !states.contains(s.as_str()) {
            out.error("E-CMC-ERROR-STATE", comp, format!("error state {s}"), format!("error state `{s}` is not declared"));
        }
    }

    let mut pairs = BTreeSet::new();
    for t in &cmc.transitions {
        let loc = format!("transition {} -> {}", t.from, t.to);
        for end in [&t.from, &t.to] {
            if !states.contains(end.as_str()) {
                out.error("E-CMC-TRANSITION-ENDPOINT", comp, loc.clone(), format!("state `{end}` is not declared"));
            }
        }
        if t.from == t.to {
            out.error("E-CMC-SELF-LOOP", comp, loc.clone(), "self-loop transitions are not allowed");
        }
        if !pairs.insert((t.from.as_str(), t.to.as_str())) {
            out.error("E-CMC-DUP-TRANSITION", comp, loc.clone(), "more than one transition for this state pair");
        }
        if !t.rate.is_valid() {
            out.error("E-RATE", comp, loc, format!("rate {} is not a finite nonnegative number", t.rate.magnitude()));
        }
    }

    for (id, ifm) in &cmc.ifms {
        if !c.inports.contains(&ifm.port) {
            out.error("E-IFM-PORT", comp, format!("ifm {id}"), format!("`{}` is not an inport of this component", ifm.port));
        }
        if cmc.ofms.contains_key(id) {
            out.error("E-CMC-DUP-ID", comp, format!("ifm {id}"), format!("`{id}` is both an ifm and an ofm"));
        }
    }
    for d in &cmc.input_deps {
        let loc = format!("depends {} {} -> {}", d.ifm, d.from, d.to);
        if !cmc.ifms.contains_key(&d.ifm) {
            out.error("E-CMC-DI-UNKNOWN-IFM", comp, loc.clone(), format!("ifm `{}` is not declared", d.ifm));
        }
        if !pairs.contains(&(d.from.as_str(), d.to.as_str())) {
            out.error("E-CMC-DI-UNKNOWN-TRANSITION", comp, loc, format!("transition {} -> {} is not declared", d.from, d.to));
        }
    }
    let errors: BTreeSet<&str> = cmc.error_states.iter().map(String::as_str).collect();
    for (id, ofm) in &cmc.ofms {
        if !c.outports.contains(&ofm.port) {
            out.error("E-OFM-PORT", comp, format!("ofm {id}"), format!("`{}` is not an outport of this component", ofm.port));
        }
        if ofm.states.is_empty() {
            out.error("E-CMC-OFM-NO-STATE", comp, format!("ofm {id}"), "ofm is not bound to any error state");
        }
        for s in &ofm.states {
            if !errors.contains(s.as_str()) {
                out.error("E-CMC-DO-NOT-ERROR", comp, format!("ofm {id}"), format!("state `{s}` is not an error state"));
            } else if *s == cmc.initial {
                out.error("E-CMC-INITIAL-ERROR", comp, format!("ofm {id}"), format!("ofm is bound to the initial state `{s}`"));
            }
        }
    }

    // Reachability is only meaningful on an otherwise well-formed chain.
    let structurally_sound = states.contains(cmc.initial.as_str())
        && cmc
            .transitions
            .iter()
            .all(|t| states.contains(t.from.as_str()) && states.contains(t.to.as_str()));
    if structurally_sound {
        for (id, ofm) in &cmc.ofms {
            for s in &ofm.states {
                if states.contains(s.as_str())
                    && *s != cmc.initial
                    && qualitative::enumerate_error_paths(cmc, s).paths.is_empty()
                {
                    out.warn("W-CMC-UNREACHABLE", comp, format!("ofm {id}"), format!("error state `{s}` is unreachable from `{}`", cmc.initial));
                }
            }
        }
    }
}

fn check_connections(model: &SystemModel, out: &mut Collector) {
    let mut targets: BTreeMap<&super::PortRef, usize> = BTreeMap::new();
    for con in &model.connections {
        let loc = format!("connection {} -> {}", con.from, con.to);
        match model.components.get(&con.from.component) {
            None => out.error("E-CON-ENDPOINT", "", loc.clone(), format!("unknown component `{}`", con.from.component)),
            Some(c) if !c.outports.contains(&con.from.port) => {
                out.error("E-CON-ENDPOINT", "", loc.clone(), format!("`{}` is not an outport", con.from))
            }
            Some(_) => {}
        }
        match model.components.get(&con.to.component) {
            None => out.error("E-CON-ENDPOINT", "", loc.clone(), format!("unknown component `{}`", con.to.component)),
            Some(c) if !c.inports.contains(&con.to.port) => {
                out.error("E-CON-ENDPOINT", "", loc.clone(), format!("`{}` is not an inport", con.to))
            }
            Some(_) => {}
        }
        if con.from.component == con.to.component {
            out.error("E-CON-SELF", "", loc, "a component cannot feed itself");
        }
        *targets.entry(&con.to).or_default() += 1;
    }
    for (port, n) in targets {
        if n > 1 {
            out.error("E-CON-INPORT-MULTI", "", format!("inport {port}"), format!("inport is the target of {n} connections"));
        }
    }
}

fn check_input_resolution(model: &SystemModel, out: &mut Collector) {
    for (id, c) in &model.components {
        for (ifm_id, ifm) in c.flm.ifms() {
            if !c.inports.contains(&ifm.port) {
                continue;
            }
            match model.resolve_input(id, ifm_id, ifm) {
                InputSource::Connected(_) => {}
                InputSource::Unconnected => {
                    out.warn("W-IFM-UNCONNECTED", id, format!("ifm {ifm_id}"), "no upstream failure mode; treated as never occurring")
                }
                InputSource::Ambiguous { outport, candidates } => out.error(
                    "E-IFM-AMBIGUOUS",
                    id,
                    format!("ifm {ifm_id}"),
                    format!("{outport} carries {} failure modes; name one with `mode`", candidates.join(", ")),
                ),
            }
        }
    }
}

pub(crate) fn is_component_id(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}
