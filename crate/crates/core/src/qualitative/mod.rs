//! Qualitative analysis: Markov chains become fault trees, the system is
//! flattened into one Boolean DAG per top event, and minimal cut sets are
//! extracted from it.

mod flatten;
mod mcs;
mod paths;
mod transform;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::{GateKind, OfmRef};

pub use flatten::{flatten_ghcft, FlattenOptions};
pub use mcs::{minimal_cut_sets, minimal_cut_sets_with_limit, DEFAULT_CUT_SET_LIMIT};
pub use paths::{enumerate_error_paths, ErrorPaths, TransitionKey};
pub use transform::{cmc_to_cft, synthetic_event_id, CmcTransformation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QualitativeError {
    #[error("top event `{0}` is not an output failure mode of any component")]
    TopNotFound(OfmRef),
    #[error("input failure mode `{component}.{ifm}` is not connected (strict mode)")]
    DanglingInput { component: String, ifm: String },
    #[error("input failure mode `{component}.{ifm}` matches several upstream failure modes")]
    AmbiguousInput { component: String, ifm: String },
    #[error("`{component}`: node `{node}` is not declared")]
    UnknownNode { component: String, node: String },
    #[error("failure propagation revisits `{component}.{node}`; the model has a cycle")]
    Cycle { component: String, node: String },
    #[error("output failure mode `{ofm}` is bound to initial state `{state}`")]
    InitialStateIsError { ofm: String, state: String },
    #[error("cut-set limit of {cap} intermediate sets exceeded")]
    CutSetLimit { cap: usize },
}

/// A node of a flattened fault tree. Gate inputs always point to lower
/// indices, so index order is a valid evaluation order.
#[derive(Debug, Clone, PartialEq)]
pub enum FlatNode {
    /// Qualified basic event (`component.event`) and its per-hour rate.
    Basic { id: String, rate: f64 },
    Gate { kind: GateKind, inputs: Vec<usize> },
}

/// The Boolean structure of one top event across the whole system.
///
/// `root` is `None` when the top event can never occur (every route to it
/// was pruned).
#[derive(Debug, Clone, PartialEq)]
pub struct FlattenedTree {
    pub top: OfmRef,
    pub nodes: Vec<FlatNode>,
    pub root: Option<usize>,
}

impl FlattenedTree {
    /// Indices of basic-event nodes, in node order.
    pub fn leaves(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| matches!(n, FlatNode::Basic { .. }))
            .map(|(i, _)| i)
            .collect()
    }

    /// Qualified ids of all basic events, sorted.
    pub fn leaf_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                FlatNode::Basic { id, .. } => Some(id.clone()),
                FlatNode::Gate { .. } => None,
            })
            .collect();
        ids.sort();
        ids
    }

    /// Evaluates the top event given which basic-event nodes have occurred.
    pub fn evaluate(&self, occurred: impl Fn(usize) -> bool) -> bool {
        let Some(root) = self.root else { return false };
        let mut value = vec![false; root + 1];
        for i in 0..=root {
            value[i] = match &self.nodes[i] {
                FlatNode::Basic { .. } => occurred(i),
                FlatNode::Gate { kind: GateKind::And, inputs } => inputs.iter().all(|&j| value[j]),
                FlatNode::Gate { kind: GateKind::Or, inputs } => inputs.iter().any(|&j| value[j]),
            };
        }
        value[root]
    }

    /// Canonical textual form, e.g. `AND(OR(c1.x, c1.y), c2.t_1_2)`, with
    /// gate inputs sorted so that structurally equal trees print the same.
    pub fn render(&self) -> String {
        match self.root {
            None => "FALSE".to_string(),
            Some(r) => self.render_node(r),
        }
    }

    fn render_node(&self, i: usize) -> String {
        match &self.nodes[i] {
            FlatNode::Basic { id, .. } => id.clone(),
            FlatNode::Gate { kind, inputs } => {
                let mut parts: Vec<String> = inputs.iter().map(|&j| self.render_node(j)).collect();
                parts.sort();
                let name = match kind {
                    GateKind::And => "AND",
                    GateKind::Or => "OR",
                };
                format!("{name}({})", parts.join(", "))
            }
        }
    }
}

/// Minimal cut sets of one top event, ordered by size and then
/// lexicographically; each set's members are sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CutSetResult {
    pub top: OfmRef,
    pub cut_sets: Vec<Vec<String>>,
}

impl CutSetResult {
    pub fn new(top: OfmRef, mut cut_sets: Vec<Vec<String>>) -> Self {
        for set in &mut cut_sets {
            set.sort();
            set.dedup();
        }
        cut_sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        cut_sets.dedup();
        CutSetResult { top, cut_sets }
    }
}

impl fmt::Display for CutSetResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, set) in self.cut_sets.iter().enumerate() {
            writeln!(f, "({}) {}", i + 1, set.join(", "))?;
        }
        Ok(())
    }
}
