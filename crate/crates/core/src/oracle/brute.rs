use super::OracleError;
use crate::qualitative::{CutSetResult, FlatNode, FlattenedTree};

pub const BRUTE_FORCE_EVENT_CAP: usize = 20;

/// Minimal cut sets by evaluating the tree on all `2ⁿ` event assignments.
///
/// An assignment is a minimal cut set when it makes the top event true and
/// removing any single event makes it false (the tree is monotone, so that
/// suffices).
pub fn brute_force_cut_sets(tree: &FlattenedTree) -> Result<CutSetResult, OracleError> {
    let leaves = tree.leaves();
    let n = leaves.len();
    if n > BRUTE_FORCE_EVENT_CAP {
        return Err(OracleError::TooManyEvents {
            events: n,
            cap: BRUTE_FORCE_EVENT_CAP,
        });
    }
    let mut slot = vec![usize::MAX; tree.nodes.len()];
    for (k, &node) in leaves.iter().enumerate() {
        slot[node] = k;
    }
    let holds = |mask: u32| tree.evaluate(|node| mask & (1 << slot[node]) != 0);
    let names: Vec<&str> = leaves
        .iter()
        .map(|&i| match &tree.nodes[i] {
            FlatNode::Basic { id, .. } => id.as_str(),
            FlatNode::Gate { .. } => unreachable!(),
        })
        .collect();

    let mut sets = Vec::new();
    for mask in 0..(1u32 << n) {
        if holds(mask) && (0..n).filter(|b| mask & (1 << b) != 0).all(|b| !holds(mask & !(1 << b))) {
            sets.push((0..n).filter(|b| mask & (1 << b) != 0).map(|b| names[b].to_string()).collect());
        }
    }
    Ok(CutSetResult::new(tree.top.clone(), sets))
}
