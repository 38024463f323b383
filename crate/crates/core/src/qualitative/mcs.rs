use super::{CutSetResult, FlatNode, FlattenedTree, QualitativeError};
use crate::model::GateKind;

/// Default cap on the number of intermediate cut sets a single gate
/// expansion may produce.
pub const DEFAULT_CUT_SET_LIMIT: usize = 1_000_000;

/// Minimal cut sets of a flattened tree, with the default expansion cap.
pub fn minimal_cut_sets(tree: &FlattenedTree) -> Result<CutSetResult, QualitativeError> {
    minimal_cut_sets_with_limit(tree, DEFAULT_CUT_SET_LIMIT)
}

/// Gate-by-gate expansion with subsumption (the MOCUS scheme), evaluated
/// over the DAG in node order so shared subtrees are expanded once.
///
/// An OR gate unions its inputs' families; an AND gate takes the pairwise
/// unions. After every gate the family is reduced to its minimal members.
/// Fails once any gate would produce more than `limit` candidate sets.
pub fn minimal_cut_sets_with_limit(tree: &FlattenedTree, limit: usize) -> Result<CutSetResult, QualitativeError> {
    let Some(root) = tree.root else {
        return Ok(CutSetResult::new(tree.top.clone(), Vec::new()));
    };

    let leaves = tree.leaves();
    let mut leaf_slot = vec![usize::MAX; tree.nodes.len()];
    for (slot, &node) in leaves.iter().enumerate() {
        leaf_slot[node] = slot;
    }
    let words = leaves.len().div_ceil(64).max(1);

    let mut families: Vec<Option<Vec<CutSet>>> = vec![None; root + 1];
    for i in 0..=root {
        let family = match &tree.nodes[i] {
            FlatNode::Basic { .. } => vec![CutSet::singleton(words, leaf_slot[i])],
            FlatNode::Gate { kind: GateKind::Or, inputs } => {
                let total: usize = inputs.iter().map(|&j| family_of(&families, j).len()).sum();
                if total > limit {
                    return Err(QualitativeError::CutSetLimit { cap: limit });
                }
                let mut all = Vec::with_capacity(total);
                for &j in inputs {
                    all.extend(family_of(&families, j).iter().cloned());
                }
                minimize(all)
            }
            FlatNode::Gate { kind: GateKind::And, inputs } => {
                let mut acc = vec![CutSet::empty(words)];
                for &j in inputs {
                    let rhs = family_of(&families, j);
                    if acc.len().saturating_mul(rhs.len()) > limit {
                        return Err(QualitativeError::CutSetLimit { cap: limit });
                    }
                    let mut next = Vec::with_capacity(acc.len() * rhs.len());
                    for a in &acc {
                        for b in rhs {
                            next.push(a.union(b));
                        }
                    }
                    acc = minimize(next);
                }
                acc
            }
        };
        families[i] = Some(family);
    }

    let names: Vec<&str> = leaves
        .iter()
        .map(|&n| match &tree.nodes[n] {
            FlatNode::Basic { id, .. } => id.as_str(),
            FlatNode::Gate { .. } => unreachable!("leaves are basic events"),
        })
        .collect();
    let cut_sets = families[root]
        .take()
        .unwrap_or_default()
        .iter()
        .map(|set| set.members().map(|slot| names[slot].to_string()).collect())
        .collect();
    Ok(CutSetResult::new(tree.top.clone(), cut_sets))
}

fn family_of(families: &[Option<Vec<CutSet>>], node: usize) -> &[CutSet] {
    families[node].as_deref().expect("inputs precede their gate")
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct CutSet {
    bits: Vec<u64>,
}

impl CutSet {
    fn empty(words: usize) -> Self {
        CutSet { bits: vec![0; words] }
    }

    fn singleton(words: usize, slot: usize) -> Self {
        let mut s = Self::empty(words);
        s.bits[slot / 64] |= 1 << (slot % 64);
        s
    }

    fn union(&self, other: &CutSet) -> CutSet {
        CutSet {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a | b).collect(),
        }
    }

    fn is_subset_of(&self, other: &CutSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    fn len(&self) -> u32 {
        self.bits.iter().map(|w| w.count_ones()).sum()
    }

    fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            (0..64).filter(move |b| word & (1 << b) != 0).map(move |b| w * 64 + b)
        })
    }
}

// Keeps only sets with no proper (or equal, earlier) subset in the family.
fn minimize(mut sets: Vec<CutSet>) -> Vec<CutSet> {
    sets.sort_by_key(CutSet::len);
    let mut kept: Vec<CutSet> = Vec::with_capacity(sets.len());
    for s in sets {
        if !kept.iter().any(|k| k.is_subset_of(&s)) {
            kept.push(s);
        }
    }
    kept
}
