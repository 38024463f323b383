use std::fmt::Write as _;

use super::ModelDocument;
use crate::model::{CftElement, CmcElement, FailureLogic, InputFailureMode, Rate, RateKind, RateUnit};

/// Shortest text that parses back to exactly `v`: plain decimals between
/// 10⁻⁴ and 10¹⁵ (`50000`, `0.03`), scientific notation otherwise
/// (`2e-7`, `1.5e-5`).
pub fn format_number(v: f64) -> String {
    if v == 0.0 || (1e-4..1e15).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// A rate in the unit it was written in: `2e-7 /h`, `50000 FIT`.
pub fn format_rate(rate: &Rate) -> String {
    let unit = match rate.unit() {
        RateUnit::PerHour => "/h",
        RateUnit::Fit => "FIT",
    };
    let kind = match rate.kind() {
        RateKind::Failure => "",
        RateKind::Repair => " repair",
    };
    format!("{} {unit}{kind}", format_number(rate.magnitude()))
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn ifm_line(out: &mut String, id: &str, ifm: &InputFailureMode) {
    let _ = write!(out, "    ifm {id} on {}", ifm.port);
    if let Some(m) = &ifm.source_mode {
        let _ = write!(out, " mode {m}");
    }
    out.push('\n');
}

/// Canonical text of a document: components and ports sorted, fixed
/// statement order, no metadata block when there is no metadata.
pub fn serialize_model(doc: &ModelDocument) -> String {
    let mut out = format!("ghcft {}\n", doc.format_version);
    if !doc.metadata.is_empty() {
        out.push_str("\nmeta {\n");
        for (k, v) in &doc.metadata {
            let _ = writeln!(out, "  {k} {}", quote(v));
        }
        out.push_str("}\n");
    }
    for c in doc.system.components.values() {
        let _ = writeln!(out, "\ncomponent {} {{", c.id);
        if !c.inports.is_empty() {
            let _ = writeln!(out, "  inport {}", c.inports.iter().cloned().collect::<Vec<_>>().join(" "));
        }
        if !c.outports.is_empty() {
            let _ = writeln!(out, "  outport {}", c.outports.iter().cloned().collect::<Vec<_>>().join(" "));
        }
        match &c.flm {
            FailureLogic::Cft(cft) => write_cft(&mut out, cft),
            FailureLogic::Cmc(cmc) => write_cmc(&mut out, cmc),
        }
        out.push_str("}\n");
    }
    if !doc.system.connections.is_empty() {
        out.push_str("\nconnections {\n");
        for c in &doc.system.connections {
            let _ = writeln!(out, "  {} -> {}", c.from, c.to);
        }
        out.push_str("}\n");
    }
    out
}

fn write_cft(out: &mut String, cft: &CftElement) {
    out.push_str("  cft {\n");
    for (id, r) in &cft.basic_events {
        let _ = writeln!(out, "    basic {id} {}", format_rate(r));
    }
    for (id, g) in &cft.gates {
        let _ = write!(out, "    gate {id} {}", g.kind);
        for i in &g.inputs {
            let _ = write!(out, " {i}");
        }
        out.push('\n');
    }
    for (id, ifm) in &cft.ifms {
        ifm_line(out, id, ifm);
    }
    for (id, o) in &cft.ofms {
        let _ = writeln!(out, "    ofm {id} on {} from {}", o.port, o.input);
    }
    out.push_str("  }\n");
}

fn write_cmc(out: &mut String, cmc: &CmcElement) {
    out.push_str("  cmc {\n");
    let _ = writeln!(out, "    states {}", cmc.states.join(" "));
    let _ = writeln!(out, "    initial {}", cmc.initial);
    if !cmc.error_states.is_empty() {
        let _ = writeln!(out, "    error {}", cmc.error_states.join(" "));
    }
    for t in &cmc.transitions {
        let _ = writeln!(out, "    transition {} -> {} {}", t.from, t.to, format_rate(&t.rate));
    }
    for (id, ifm) in &cmc.ifms {
        ifm_line(out, id, ifm);
    }
    for d in &cmc.input_deps {
        let _ = writeln!(out, "    depends {} {} -> {}", d.ifm, d.from, d.to);
    }
    for (id, o) in &cmc.ofms {
        let _ = writeln!(out, "    ofm {id} on {} from {}", o.port, o.states.join(" "));
    }
    out.push_str("  }\n");
}
