use std::collections::{BTreeMap, BTreeSet};

use super::paths::{enumerate_error_paths, TransitionKey};
use super::QualitativeError;
use crate::model::{CftElement, CmcElement, GateKind, Rate, RateKind};

/// Result of turning a CMC into an equivalent-structure CFT element.
#[derive(Debug, Clone, PartialEq)]
pub struct CmcTransformation {
    pub cft: CftElement,
    pub warnings: Vec<String>,
}

/// Id of the basic event standing for the transition `from -> to`.
pub fn synthetic_event_id(from: &str, to: &str) -> String {
    format!("t_{from}_{to}")
}

/// Transforms a CMC into a CFT element for qualitative analysis.
///
/// Each transition becomes one basic event carrying the transition's base
/// rate. A transition that input failure modes depend on is represented by an
/// OR gate over those IFMs and its basic event; the node is shared by every
/// path through that transition. For each OFM, every simple path from the
/// initial state to one of its error states becomes an AND over the path's
/// transition nodes; several paths are joined by an OR. Single-input gates
/// are not emitted.
///
/// An OFM whose error states are all unreachable is fed by a dedicated basic
/// event with rate zero, and a warning is returned.
pub fn cmc_to_cft(cmc: &CmcElement) -> Result<CmcTransformation, QualitativeError> {
    let mut taken: BTreeSet<String> = cmc.ifms.keys().chain(cmc.ofms.keys()).cloned().collect();
    let mut fresh = |base: String| -> String {
        let mut id = base;
        while taken.contains(&id) {
            id.push('_');
        }
        taken.insert(id.clone());
        id
    };

    let mut cft = CftElement::new();
    cft.ifms = cmc.ifms.clone();
    let mut warnings = Vec::new();

    // One node per transition: its basic event, or the OR joining it with
    // the IFMs the transition depends on.
    let mut transition_node: BTreeMap<TransitionKey, String> = BTreeMap::new();
    for t in &cmc.transitions {
        let event = fresh(synthetic_event_id(&t.from, &t.to));
        let rate = Rate::new(t.rate.magnitude(), t.rate.unit(), RateKind::Failure);
        cft.basic_events.insert(event.clone(), rate);
        let deps: Vec<String> = cmc.dependencies_of(&t.from, &t.to).map(str::to_string).collect();
        let node = if deps.is_empty() {
            event
        } else {
            let gate = fresh(format!("{event}_or"));
            let mut inputs = deps;
            inputs.push(event);
            cft = cft.with_gate(gate.clone(), GateKind::Or, inputs);
            gate
        };
        transition_node.insert(TransitionKey::new(&t.from, &t.to), node);
    }

    for (ofm_id, ofm) in &cmc.ofms {
        let mut paths = Vec::new();
        for state in &ofm.states {
            if *state == cmc.initial {
                return Err(QualitativeError::InitialStateIsError {
                    ofm: ofm_id.clone(),
                    state: state.clone(),
                });
            }
            let found = enumerate_error_paths(cmc, state);
            warnings.extend(found.warnings.into_iter().map(|w| format!("ofm `{ofm_id}`: {w}")));
            paths.extend(found.paths);
        }

        let mut branches = Vec::new();
        for (k, path) in paths.iter().enumerate() {
            let inputs: Vec<String> = path.iter().map(|t| transition_node[t].clone()).collect();
            if let [single] = inputs.as_slice() {
                branches.push(single.clone());
            } else {
                let gate = fresh(format!("{ofm_id}_path{}", k + 1));
                cft = cft.with_gate(gate.clone(), GateKind::And, inputs);
                branches.push(gate);
            }
        }

        let feed = match branches.as_slice() {
            [] => {
                let never = fresh(format!("never_{ofm_id}"));
                cft.basic_events.insert(never.clone(), Rate::ZERO);
                warnings.push(format!(
                    "ofm `{ofm_id}` has no reachable error state; fed by never-occurring event `{never}`"
                ));
                never
            }
            [single] => single.clone(),
            _ => {
                let gate = fresh(format!("{ofm_id}_paths"));
                cft = cft.with_gate(gate.clone(), GateKind::Or, branches);
                gate
            }
        };
        cft = cft.with_ofm(ofm_id.clone(), ofm.port.clone(), feed);
    }

    Ok(CmcTransformation { cft, warnings })
}
