use std::collections::{BTreeMap, BTreeSet};

use super::{ModelError, SystemModel};

/// Orders components so that every producer precedes the consumers it feeds.
///
/// Kahn's algorithm with a sorted ready set, so ties break by component id.
/// Connections naming unknown components are ignored here; validation
/// reports them.
pub fn topological_order(model: &SystemModel) -> Result<Vec<String>, ModelError> {
    let successors = successors(model);
    let mut indegree: BTreeMap<&str, usize> = model.components.keys().map(|k| (k.as_str(), 0)).collect();
    for targets in successors.values() {
        for t in targets {
            *indegree.get_mut(t).expect("known component") += 1;
        }
    }

    let mut ready: BTreeSet<&str> = indegree.iter().filter(|(_, d)| **d == 0).map(|(k, _)| *k).collect();
    let mut order = Vec::with_capacity(model.components.len());
    while let Some(next) = ready.pop_first() {
        order.push(next.to_string());
        for succ in successors.get(next).into_iter().flatten() {
            let d = indegree.get_mut(succ).expect("known component");
            *d -= 1;
            if *d == 0 {
                ready.insert(succ);
            }
        }
    }

    if order.len() == model.components.len() {
        return Ok(order);
    }
    let done: BTreeSet<&str> = order.iter().map(String::as_str).collect();
    Err(ModelError::CyclicDependency {
        cycle: find_cycle(&successors, &done),
    })
}

fn successors(model: &SystemModel) -> BTreeMap<&str, BTreeSet<&str>> {
    let mut succ: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for c in &model.connections {
        let (Some((from, _)), Some((to, _))) = (
            model.components.get_key_value(&c.from.component),
            model.components.get_key_value(&c.to.component),
        ) else {
            continue;
        };
        succ.entry(from.as_str()).or_default().insert(to.as_str());
    }
    succ
}

// Every unfinished node keeps an unfinished predecessor (otherwise Kahn's
// algorithm would have released it), so walking predecessors must revisit a
// node.
fn find_cycle(successors: &BTreeMap<&str, BTreeSet<&str>>, done: &BTreeSet<&str>) -> Vec<String> {
    let mut predecessors: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (from, targets) in successors {
        for to in targets {
            if !done.contains(from) && !done.contains(to) {
                predecessors.entry(*to).or_default().insert(*from);
            }
        }
    }
    let Some((&start, _)) = predecessors.first_key_value() else {
        return Vec::new();
    };
    let mut path = vec![start];
    let mut current = start;
    loop {
        let prev = *predecessors[current].first().expect("unfinished predecessor");
        if let Some(pos) = path.iter().position(|p| *p == prev) {
            let mut cycle: Vec<String> = path[pos..].iter().rev().map(|s| s.to_string()).collect();
            cycle.push(cycle[0].clone());
            return cycle;
        }
        path.push(prev);
        current = prev;
    }
}
