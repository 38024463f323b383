use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::transform::cmc_to_cft;
use super::{FlatNode, FlattenedTree, QualitativeError};
use crate::model::{CftElement, FailureLogic, GateKind, InputSource, OfmRef, SystemModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlattenOptions {
    /// Fail on input failure modes with no upstream connection instead of
    /// pruning them.
    pub strict: bool,
    /// Treat basic events with rate zero as never occurring and prune them.
    /// Transitions driven only by their inputs carry a zero base rate; with
    /// this on, only the inputs remain as causes.
    pub prune_never_occurring: bool,
}

impl Default for FlattenOptions {
    fn default() -> Self {
        FlattenOptions {
            strict: false,
            prune_never_occurring: true,
        }
    }
}

/// Builds the Boolean DAG of `top` across the whole system.
///
/// Every CMC on the way is replaced by its [`cmc_to_cft`] form; every input
/// failure mode is replaced by the structure feeding the upstream output
/// failure mode it is connected to. Basic events get qualified ids
/// (`component.event`). Only the cone of influence of `top` is kept.
/// Constant-false branches (unconnected inputs, pruned events) are folded
/// away, and single-input gates are elided.
pub fn flatten_ghcft(model: &SystemModel, top: &OfmRef, options: &FlattenOptions) -> Result<FlattenedTree, QualitativeError> {
    if !model.has_ofm(top) {
        return Err(QualitativeError::TopNotFound(top.clone()));
    }
    let mut builder = Builder {
        model,
        options: *options,
        transformed: BTreeMap::new(),
        nodes: Vec::new(),
        memo: HashMap::new(),
        gates: HashMap::new(),
        active: BTreeSet::new(),
    };
    let root = builder.expand_ofm(&top.component, &top.failure_mode)?;
    Ok(FlattenedTree {
        top: top.clone(),
        nodes: builder.nodes,
        root,
    })
}

struct Builder<'m> {
    model: &'m SystemModel,
    options: FlattenOptions,
    transformed: BTreeMap<String, CftElement>,
    nodes: Vec<FlatNode>,
    memo: HashMap<(String, String), Option<usize>>,
    // Structural sharing of identical gates.
    gates: HashMap<(GateKind, Vec<usize>), usize>,
    active: BTreeSet<(String, String)>,
}

impl<'m> Builder<'m> {
    fn element(&mut self, component: &str) -> Result<&CftElement, QualitativeError> {
        let c = self.model.components.get(component).ok_or_else(|| QualitativeError::UnknownNode {
            component: component.to_string(),
            node: String::new(),
        })?;
        match &c.flm {
            FailureLogic::Cft(cft) => Ok(cft),
            FailureLogic::Cmc(cmc) => {
                if !self.transformed.contains_key(component) {
                    let cft = cmc_to_cft(cmc)?.cft;
                    self.transformed.insert(component.to_string(), cft);
                }
                Ok(&self.transformed[component])
            }
        }
    }

    fn expand_ofm(&mut self, component: &str, ofm: &str) -> Result<Option<usize>, QualitativeError> {
        self.expand(component, ofm)
    }

    fn expand(&mut self, component: &str, node: &str) -> Result<Option<usize>, QualitativeError> {
        let key = (component.to_string(), node.to_string());
        if let Some(done) = self.memo.get(&key) {
            return Ok(*done);
        }
        if !self.active.insert(key.clone()) {
            return Err(QualitativeError::Cycle {
                component: key.0,
                node: key.1,
            });
        }
        let result = self.expand_uncached(component, node);
        self.active.remove(&key);
        let result = result?;
        self.memo.insert(key, result);
        Ok(result)
    }

    fn expand_uncached(&mut self, component: &str, node: &str) -> Result<Option<usize>, QualitativeError> {
        enum Kind {
            Basic(f64),
            Gate(GateKind, Vec<String>),
            Input,
            Output(String),
        }
        let element = self.element(component)?;
        let kind = if let Some(rate) = element.basic_events.get(node) {
            Kind::Basic(rate.value())
        } else if let Some(g) = element.gates.get(node) {
            Kind::Gate(g.kind, g.inputs.clone())
        } else if element.ifms.contains_key(node) {
            Kind::Input
        } else if let Some(o) = element.ofms.get(node) {
            Kind::Output(o.input.clone())
        } else {
            return Err(QualitativeError::UnknownNode {
                component: component.to_string(),
                node: node.to_string(),
            });
        };

        match kind {
            Kind::Basic(rate) => {
                if self.options.prune_never_occurring && rate == 0.0 {
                    return Ok(None);
                }
                self.nodes.push(FlatNode::Basic {
                    id: format!("{component}.{node}"),
                    rate,
                });
                Ok(Some(self.nodes.len() - 1))
            }
            Kind::Gate(kind, inputs) => {
                let mut children = Vec::with_capacity(inputs.len());
                for input in &inputs {
                    children.push(self.expand(component, input)?);
                }
                Ok(self.gate(kind, children))
            }
            Kind::Output(input) => self.expand(component, &input),
            Kind::Input => {
                // IFM definitions are identical in a CMC and its transformation.
                let ifm = self.model.components[component].flm.ifms()[node].clone();
                match self.model.resolve_input(component, node, &ifm) {
                    InputSource::Connected(src) => self.expand(&src.component, &src.failure_mode),
                    InputSource::Unconnected if self.options.strict => Err(QualitativeError::DanglingInput {
                        component: component.to_string(),
                        ifm: node.to_string(),
                    }),
                    InputSource::Unconnected => Ok(None),
                    InputSource::Ambiguous { .. } => Err(QualitativeError::AmbiguousInput {
                        component: component.to_string(),
                        ifm: node.to_string(),
                    }),
                }
            }
        }
    }

    // Folds constant-false inputs and elides single-input gates.
    fn gate(&mut self, kind: GateKind, children: Vec<Option<usize>>) -> Option<usize> {
        let mut inputs: Vec<usize> = match kind {
            GateKind::And => {
                if children.iter().any(Option::is_none) {
                    return None;
                }
                children.into_iter().flatten().collect()
            }
            GateKind::Or => children.into_iter().flatten().collect(),
        };
        inputs.sort_unstable();
        inputs.dedup();
        match inputs.as_slice() {
            [] => None,
            [single] => Some(*single),
            _ => {
                let key = (kind, inputs);
                if let Some(&existing) = self.gates.get(&key) {
                    return Some(existing);
                }
                self.nodes.push(FlatNode::Gate {
                    kind,
                    inputs: key.1.clone(),
                });
                let idx = self.nodes.len() - 1;
                self.gates.insert(key, idx);
                Some(idx)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CftElement, Component, Rate};
    use crate::reference;

    fn top(s: &str) -> OfmRef {
        s.parse().unwrap()
    }

    const KEEP_ALL: FlattenOptions = FlattenOptions {
        strict: false,
        prune_never_occurring: false,
    };

    #[test]
    fn pipeline_leaves_without_pruning() {
        let tree = flatten_ghcft(&reference::hybrid_pipeline(), &top("c3.c"), &KEEP_ALL).unwrap();
        assert_eq!(tree.leaf_ids(), ["c1.x", "c1.y", "c2.t_1_2", "c2.t_2_3", "c3.z"]);
        assert_eq!(tree.render(), "OR(AND(OR(OR(c1.x, c1.y), c2.t_2_3), c2.t_1_2), c3.z)");
    }

    #[test]
    fn pipeline_leaves_with_default_pruning() {
        let tree = flatten_ghcft(&reference::hybrid_pipeline(), &top("c3.c"), &FlattenOptions::default()).unwrap();
        assert_eq!(tree.leaf_ids(), ["c1.x", "c1.y", "c2.t_1_2", "c3.z"]);
        assert_eq!(tree.render(), "OR(AND(OR(c1.x, c1.y), c2.t_1_2), c3.z)");
    }

    #[test]
    fn single_cft_component() {
        let cft = CftElement::new()
            .with_basic_event("e1", Rate::per_hour(1e-6))
            .with_basic_event("e2", Rate::per_hour(1e-6))
            .with_gate("g", GateKind::And, ["e1", "e2"])
            .with_ofm("f", "o", "g");
        let model = SystemModel::new().with_component(Component::new("k", Vec::<String>::new(), ["o"], cft));
        let tree = flatten_ghcft(&model, &top("k.f"), &FlattenOptions::default()).unwrap();
        assert_eq!(tree.render(), "AND(k.e1, k.e2)");
    }

    #[test]
    fn braking_leaves() {
        let tree = flatten_ghcft(&reference::emergency_braking(), &top("E.no_emergency_braking"), &FlattenOptions::default()).unwrap();
        assert_eq!(tree.leaf_ids(), ["US1.False-negative", "US2.False-negative"]);
    }

    #[test]
    fn unknown_top() {
        let err = flatten_ghcft(&reference::hybrid_pipeline(), &top("c3.nope"), &FlattenOptions::default()).unwrap_err();
        assert_eq!(err, QualitativeError::TopNotFound(top("c3.nope")));
    }

    #[test]
    fn unconnected_input_is_pruned_or_rejected() {
        let mut model = reference::hybrid_pipeline();
        model.connections.retain(|c| c.to.component != "c3");
        let tree = flatten_ghcft(&model, &top("c3.c"), &FlattenOptions::default()).unwrap();
        assert_eq!(tree.render(), "c3.z");
        let strict = FlattenOptions {
            strict: true,
            ..FlattenOptions::default()
        };
        assert!(matches!(
            flatten_ghcft(&model, &top("c3.c"), &strict),
            Err(QualitativeError::DanglingInput { .. })
        ));
    }

    #[test]
    fn gate_inputs_precede_gates() {
        let tree = flatten_ghcft(&reference::emergency_braking(), &top("E.sporadic_braking"), &KEEP_ALL).unwrap();
        for (i, n) in tree.nodes.iter().enumerate() {
            if let FlatNode::Gate { inputs, .. } = n {
                assert!(inputs.iter().all(|&j| j < i));
            }
        }
    }

    #[test]
    fn leaf_set_ignores_declaration_order() {
        let model = reference::emergency_braking();
        let mut reordered = SystemModel::new();
        for c in model.components.values().rev() {
            reordered = reordered.with_component(c.clone());
        }
        reordered.connections = model.connections.clone();
        let a = flatten_ghcft(&model, &top("E.sporadic_braking"), &KEEP_ALL).unwrap();
        let b = flatten_ghcft(&reordered, &top("E.sporadic_braking"), &KEEP_ALL).unwrap();
        assert_eq!(a.leaf_ids(), b.leaf_ids());
    }
}
