use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{FailureLogic, InputSource, OfmRef, SystemModel};
use crate::qualitative;

/// A basic event whose influence on the top event is not captured by a
/// single CMC input, which makes rate composition unsound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SharedEventDiagnostic {
    /// Qualified id, `component.event`.
    pub event: String,
    /// Number of distinct routes from the event to the top event.
    pub routes: u64,
    /// CMC inputs (`component.ifm`) that some of those routes enter through.
    pub cmc_inputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    Cft { component: String, id: String },
    CmcInput { component: String, ifm: String },
    CmcOutput { component: String, ofm: String },
}

/// Finds basic events that reach `top` along several routes where at least
/// one route passes a CMC input and no single CMC input carries them all.
///
/// Repeated events confined to fault-tree logic are not reported. Route
/// counts saturate at `u64::MAX`.
pub fn detect_shared_events(model: &SystemModel, top: &OfmRef) -> Vec<SharedEventDiagnostic> {
    let Some(top_component) = model.components.get(&top.component) else {
        return Vec::new();
    };
    let root = match &top_component.flm {
        FailureLogic::Cft(_) => Node::Cft {
            component: top.component.clone(),
            id: top.failure_mode.clone(),
        },
        FailureLogic::Cmc(_) => Node::CmcOutput {
            component: top.component.clone(),
            ofm: top.failure_mode.clone(),
        },
    };

    let mut graph = Graph::new(model);
    let order = graph.reverse_postorder(&root);

    // Paths from the root down to every node of the cone.
    let mut from_root: BTreeMap<Node, u64> = BTreeMap::new();
    from_root.insert(root.clone(), 1);
    for node in &order {
        let count = from_root.get(node).copied().unwrap_or(0);
        for child in graph.children(node) {
            let e = from_root.entry(child).or_insert(0);
            *e = e.saturating_add(count);
        }
    }

    let cmc_inputs: Vec<&Node> = order.iter().filter(|n| matches!(n, Node::CmcInput { .. })).collect();
    let mut through: BTreeMap<&Node, BTreeMap<Node, u64>> = BTreeMap::new();
    for input in &cmc_inputs {
        through.insert(*input, graph.paths_to_leaves(input));
    }

    let mut out = Vec::new();
    for node in &order {
        let Node::Cft { component, id } = node else { continue };
        let is_basic = model
            .components
            .get(component)
            .and_then(|c| c.flm.as_cft())
            .is_some_and(|cft| cft.basic_events.contains_key(id));
        if !is_basic {
            continue;
        }
        let total = from_root[node];
        if total <= 1 {
            continue;
        }
        let mut entering = Vec::new();
        let mut captured = false;
        for input in &cmc_inputs {
            let below = through[input].get(node).copied().unwrap_or(0);
            if below == 0 {
                continue;
            }
            let via = from_root[*input].saturating_mul(below);
            if via == total {
                captured = true;
            }
            if let Node::CmcInput { component, ifm } = input {
                entering.push(format!("{component}.{ifm}"));
            }
        }
        if !entering.is_empty() && !captured {
            out.push(SharedEventDiagnostic {
                event: format!("{component}.{id}"),
                routes: total,
                cmc_inputs: entering,
            });
        }
    }
    out
}

struct Graph<'m> {
    model: &'m SystemModel,
    // Per CMC output: the inputs that modulate some transition on a path to
    // one of its error states.
    cmc_cache: BTreeMap<(String, String), Vec<String>>,
}

impl<'m> Graph<'m> {
    fn new(model: &'m SystemModel) -> Self {
        Graph {
            model,
            cmc_cache: BTreeMap::new(),
        }
    }

    fn children(&mut self, node: &Node) -> Vec<Node> {
        match node {
            Node::Cft { component, id } => {
                let Some(c) = self.model.components.get(component) else {
                    return Vec::new();
                };
                let Some(cft) = c.flm.as_cft() else { return Vec::new() };
                if let Some(g) = cft.gates.get(id) {
                    let unique: BTreeSet<&String> = g.inputs.iter().collect();
                    return unique
                        .into_iter()
                        .map(|i| Node::Cft {
                            component: component.clone(),
                            id: i.clone(),
                        })
                        .collect();
                }
                if let Some(o) = cft.ofms.get(id) {
                    return vec![Node::Cft {
                        component: component.clone(),
                        id: o.input.clone(),
                    }];
                }
                if let Some(ifm) = cft.ifms.get(id) {
                    return self.upstream(component, id, ifm).into_iter().collect();
                }
                Vec::new()
            }
            Node::CmcInput { component, ifm } => {
                let Some(c) = self.model.components.get(component) else {
                    return Vec::new();
                };
                match c.flm.ifms().get(ifm) {
                    Some(def) => self.upstream(component, ifm, def).into_iter().collect(),
                    None => Vec::new(),
                }
            }
            Node::CmcOutput { component, ofm } => {
                let key = (component.clone(), ofm.clone());
                if !self.cmc_cache.contains_key(&key) {
                    let inputs = self.cmc_inputs_feeding(component, ofm);
                    self.cmc_cache.insert(key.clone(), inputs);
                }
                self.cmc_cache[&key]
                    .iter()
                    .map(|i| Node::CmcInput {
                        component: component.clone(),
                        ifm: i.clone(),
                    })
                    .collect()
            }
        }
    }

    fn upstream(&self, component: &str, ifm_id: &str, ifm: &super::InputFailureMode) -> Option<Node> {
        let InputSource::Connected(src) = self.model.resolve_input(component, ifm_id, ifm) else {
            return None;
        };
        let c = self.model.components.get(&src.component)?;
        Some(match c.flm {
            FailureLogic::Cft(_) => Node::Cft {
                component: src.component,
                id: src.failure_mode,
            },
            FailureLogic::Cmc(_) => Node::CmcOutput {
                component: src.component,
                ofm: src.failure_mode,
            },
        })
    }

    fn cmc_inputs_feeding(&self, component: &str, ofm: &str) -> Vec<String> {
        let Some(cmc) = self.model.components.get(component).and_then(|c| c.flm.as_cmc()) else {
            return Vec::new();
        };
        let Some(out) = cmc.ofms.get(ofm) else { return Vec::new() };
        let mut on_paths = BTreeSet::new();
        for state in &out.states {
            for path in qualitative::enumerate_error_paths(cmc, state).paths {
                on_paths.extend(path);
            }
        }
        let inputs: BTreeSet<String> = on_paths
            .iter()
            .flat_map(|t| cmc.dependencies_of(&t.from, &t.to).map(str::to_string).collect::<Vec<_>>())
            .collect();
        inputs.into_iter().collect()
    }

    // Topological order of the cone below `root`, root first.
    fn reverse_postorder(&mut self, root: &Node) -> Vec<Node> {
        let mut post = Vec::new();
        let mut seen = BTreeSet::new();
        let mut stack = vec![(root.clone(), false)];
        while let Some((node, expanded)) = stack.pop() {
            if expanded {
                post.push(node);
                continue;
            }
            if !seen.insert(node.clone()) {
                continue;
            }
            stack.push((node.clone(), true));
            for child in self.children(&node) {
                if !seen.contains(&child) {
                    stack.push((child, false));
                }
            }
        }
        post.reverse();
        post
    }

    // Number of paths from `start` down to each node below it.
    fn paths_to_leaves(&mut self, start: &Node) -> BTreeMap<Node, u64> {
        let order = self.reverse_postorder(start);
        let mut counts: BTreeMap<Node, u64> = BTreeMap::new();
        counts.insert(start.clone(), 1);
        for node in &order {
            let n = counts.get(node).copied().unwrap_or(0);
            for child in self.children(node) {
                let e = counts.entry(child).or_insert(0);
                *e = e.saturating_add(n);
            }
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CftElement, CmcElement, Component, GateKind, InputFailureMode, Rate};
    use crate::reference;

    fn top(s: &str) -> OfmRef {
        s.parse().unwrap()
    }

    #[test]
    fn pipeline_has_no_shared_events() {
        assert!(detect_shared_events(&reference::hybrid_pipeline(), &top("c3.c")).is_empty());
    }

    // Source feeds two CMCs whose outputs are OR-ed downstream.
    fn two_cmc_model(second_source_port: &str) -> SystemModel {
        let src = CftElement::new()
            .with_basic_event("e", Rate::per_hour(1e-6))
            .with_ofm("f", "o", "e");
        let chain = || {
            CmcElement::new(["ok", "bad"], "ok")
                .with_error_states(["bad"])
                .with_transition("ok", "bad", Rate::per_hour(1e-5))
                .with_ifm("f", InputFailureMode::on("i"))
                .with_dependency("f", "ok", "bad")
                .with_ofm("g", "o", ["bad"])
        };
        let sink = CftElement::new()
            .with_ifm("g1", InputFailureMode::on("i1").with_source_mode("g"))
            .with_ifm("g2", InputFailureMode::on("i2").with_source_mode("g"))
            .with_gate("any", GateKind::Or, ["g1", "g2"])
            .with_ofm("top", "out", "any");
        SystemModel::new()
            .with_component(Component::new("src", Vec::<String>::new(), ["o", "o2"], src))
            .with_component(Component::new("m1", ["i"], ["o"], chain()))
            .with_component(Component::new("m2", ["i"], ["o"], chain()))
            .with_component(Component::new("sink", ["i1", "i2"], ["out"], sink))
            .with_connection("src.o", "m1.i")
            .with_connection(&format!("src.{second_source_port}"), "m2.i")
            .with_connection("m1.o", "sink.i1")
            .with_connection("m2.o", "sink.i2")
    }

    #[test]
    fn event_entering_two_cmcs_is_reported() {
        let model = two_cmc_model("o");
        let diags = detect_shared_events(&model, &top("sink.top"));
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].event, "src.e");
        assert_eq!(diags[0].routes, 2);
        assert_eq!(diags[0].cmc_inputs, ["m1.f", "m2.f"]);
    }

    #[test]
    fn pure_cft_repetition_is_not_reported() {
        let cft = CftElement::new()
            .with_basic_event("e", Rate::per_hour(1e-6))
            .with_basic_event("x", Rate::per_hour(1e-6))
            .with_gate("g1", GateKind::And, ["e", "x"])
            .with_gate("g2", GateKind::Or, ["e", "g1"])
            .with_ofm("top", "o", "g2");
        let model = SystemModel::new().with_component(Component::new("k", Vec::<String>::new(), ["o"], cft));
        assert!(detect_shared_events(&model, &top("k.top")).is_empty());
    }

    #[test]
    fn repetition_captured_upstream_of_one_cmc_is_fine() {
        // e repeats inside the source CFT, but every route enters m1.f.
        let src = CftElement::new()
            .with_basic_event("e", Rate::per_hour(1e-6))
            .with_basic_event("x", Rate::per_hour(1e-6))
            .with_gate("g1", GateKind::And, ["e", "x"])
            .with_gate("g2", GateKind::Or, ["e", "g1"])
            .with_ofm("f", "o", "g2");
        let chain = CmcElement::new(["ok", "bad"], "ok")
            .with_error_states(["bad"])
            .with_transition("ok", "bad", Rate::per_hour(1e-5))
            .with_ifm("f", InputFailureMode::on("i"))
            .with_dependency("f", "ok", "bad")
            .with_ofm("g", "o", ["bad"]);
        let model = SystemModel::new()
            .with_component(Component::new("src", Vec::<String>::new(), ["o"], src))
            .with_component(Component::new("m1", ["i"], ["o"], chain))
            .with_connection("src.o", "m1.i");
        assert!(detect_shared_events(&model, &top("m1.g")).is_empty());
    }

    #[test]
    fn cmc_input_plus_parallel_cft_path_is_reported() {
        let src = CftElement::new()
            .with_basic_event("e", Rate::per_hour(1e-6))
            .with_ofm("f", "o", "e");
        let chain = CmcElement::new(["ok", "bad"], "ok")
            .with_error_states(["bad"])
            .with_transition("ok", "bad", Rate::per_hour(1e-5))
            .with_ifm("f", InputFailureMode::on("i"))
            .with_dependency("f", "ok", "bad")
            .with_ofm("g", "o", ["bad"]);
        let sink = CftElement::new()
            .with_ifm("g", InputFailureMode::on("from_cmc"))
            .with_ifm("f", InputFailureMode::on("direct"))
            .with_gate("any", GateKind::Or, ["g", "f"])
            .with_ofm("top", "out", "any");
        let model = SystemModel::new()
            .with_component(Component::new("src", Vec::<String>::new(), ["o", "o2"], src))
            .with_component(Component::new("m", ["i"], ["o"], chain))
            .with_component(Component::new("sink", ["from_cmc", "direct"], ["out"], sink))
            .with_connection("src.o", "m.i")
            .with_connection("src.o", "sink.direct")
            .with_connection("m.o", "sink.from_cmc");
        let diags = detect_shared_events(&model, &top("sink.top"));
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].cmc_inputs, ["m.f"]);
    }
}
