use std::collections::BTreeSet;
use std::fmt;

use crate::model::CmcElement;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransitionKey {
    pub from: String,
    pub to: String,
}

impl TransitionKey {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        TransitionKey {
            from: from.into(),
            to: to.into(),
        }
    }
}

impl fmt::Display for TransitionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.from, self.to)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ErrorPaths {
    pub paths: Vec<Vec<TransitionKey>>,
    pub warnings: Vec<String>,
}

/// All simple paths (no state visited twice) from the initial state to
/// `error_state`, as transition sequences.
///
/// Paths stop on first arrival at `error_state`. Search follows transitions
/// in declaration order, which fixes the output order. Rates are ignored: a
/// zero-rate transition is still a structural path.
pub fn enumerate_error_paths(cmc: &CmcElement, error_state: &str) -> ErrorPaths {
    let mut out = ErrorPaths::default();
    if cmc.initial == error_state {
        out.paths.push(Vec::new());
        return out;
    }
    let mut visited = BTreeSet::new();
    visited.insert(cmc.initial.as_str());
    let mut current = Vec::new();
    walk(cmc, &cmc.initial, error_state, &mut visited, &mut current, &mut out.paths);
    if out.paths.is_empty() {
        out.warnings.push(format!(
            "error state `{error_state}` is unreachable from initial state `{}`",
            cmc.initial
        ));
    }
    out
}

fn walk<'a>(
    cmc: &'a CmcElement,
    at: &'a str,
    target: &str,
    visited: &mut BTreeSet<&'a str>,
    current: &mut Vec<TransitionKey>,
    paths: &mut Vec<Vec<TransitionKey>>,
) {
    for t in cmc.transitions.iter().filter(|t| t.from == at) {
        if visited.contains(t.to.as_str()) {
            continue;
        }
        current.push(TransitionKey::new(&t.from, &t.to));
        if t.to == target {
            paths.push(current.clone());
        } else {
            visited.insert(t.to.as_str());
            walk(cmc, &t.to, target, visited, current, paths);
            visited.remove(t.to.as_str());
        }
        current.pop();
    }
}
