//! Random model generators shared by the acceptance suite and the property
//! tests. All generators are driven by a seeded xoshiro stream.

#![allow(dead_code)]

use std::collections::BTreeMap;

use ghcft::model::{CftElement, CmcElement, Component, GateKind, InputFailureMode, OfmRef, Rate, SystemModel};
use ghcft::quantitative::{build_generator, GeneratorView};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

pub fn rng(seed: u64) -> Xoshiro256StarStar {
    Xoshiro256StarStar::seed_from_u64(seed)
}

fn log_uniform(rng: &mut impl Rng, lo_exp: f64, hi_exp: f64) -> f64 {
    10f64.powf(rng.random_range(lo_exp..hi_exp))
}

fn random_rate(rng: &mut impl Rng) -> Rate {
    let v = if rng.random_bool(0.1) { 0.0 } else { log_uniform(rng, -9.0, -1.0) };
    if rng.random_bool(0.3) {
        Rate::from_fit(v * 1e9)
    } else {
        Rate::per_hour(v)
    }
}

/// A random component in topological position `index`. `inputs` lists, per
/// inport, the OFM ids available on the upstream output it is connected to.
/// Uses at most `budget` basic events and transitions together.
fn random_component(rng: &mut impl Rng, index: usize, inputs: &[(String, Vec<String>)], budget: usize) -> (Component, usize) {
    let id = format!("c{index}");
    let inports: Vec<String> = inputs.iter().map(|(p, _)| p.clone()).collect();
    let mut ifms: Vec<(String, InputFailureMode)> = Vec::new();
    for (port, modes) in inputs {
        for _ in 0..rng.random_range(1..=2) {
            let mode = modes.choose(rng).unwrap().clone();
            let ifm = InputFailureMode::on(port.clone()).with_source_mode(mode);
            if !ifms.iter().any(|(_, f)| *f == ifm) {
                ifms.push((format!("u{}", ifms.len()), ifm));
            }
        }
    }

    if budget >= 2 && rng.random_bool(0.5) {
        let n = rng.random_range(2..=6usize);
        let states: Vec<String> = (0..n).map(|s| format!("s{s}")).collect();
        let mut cmc = CmcElement::new(states.clone(), "s0");
        let max_t = budget.min(n * (n - 1)).min(6);
        let m = rng.random_range(1..=max_t);
        let mut pairs = vec![(0usize, rng.random_range(1..n))];
        while pairs.len() < m {
            let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
            if a != b && !pairs.contains(&(a, b)) {
                pairs.push((a, b));
            }
        }
        for &(a, b) in &pairs {
            let mut rate = random_rate(rng);
            if b == 0 && rng.random_bool(0.5) {
                rate = rate.repair();
            }
            cmc = cmc.with_transition(&states[a], &states[b], rate);
        }
        let mut errors: Vec<String> = states[1..].to_vec();
        errors.retain(|_| rng.random_bool(0.5));
        if errors.is_empty() {
            errors.push(states[pairs[0].1].clone());
        }
        cmc = cmc.with_error_states(errors.clone());
        for k in 0..rng.random_range(1..=2) {
            let count = rng.random_range(1..=errors.len());
            let bound: Vec<String> = errors.choose_multiple(rng, count).cloned().collect();
            cmc = cmc.with_ofm(format!("f{k}"), "o", bound);
        }
        for (u, ifm) in ifms {
            cmc = cmc.with_ifm(u.clone(), ifm);
            for _ in 0..rng.random_range(1..=2) {
                let (a, b) = pairs[rng.random_range(0..pairs.len())];
                cmc = cmc.with_dependency(u.clone(), &states[a], &states[b]);
            }
        }
        (Component::new(id, inports, ["o"], cmc), pairs.len())
    } else {
        let k = rng.random_range(1..=budget.clamp(1, 4));
        let mut cft = CftElement::new();
        let mut nodes: Vec<String> = Vec::new();
        for e in 0..k {
            let name = if rng.random_bool(0.3) { format!("E-{e}") } else { format!("e{e}") };
            cft = cft.with_basic_event(name.clone(), random_rate(rng));
            nodes.push(name);
        }
        for (u, ifm) in ifms {
            cft = cft.with_ifm(u.clone(), ifm);
            nodes.push(u);
        }
        for g in 0..rng.random_range(0..=4) {
            let width = rng.random_range(2..=4).min(nodes.len());
            let inputs: Vec<String> = nodes.choose_multiple(rng, width).cloned().collect();
            let kind = if rng.random_bool(0.5) { GateKind::And } else { GateKind::Or };
            let gid = format!("g{g}");
            cft = cft.with_gate(gid.clone(), kind, inputs);
            nodes.push(gid);
        }
        let last = nodes.last().unwrap().clone();
        cft = cft.with_ofm("f0", "o", last);
        if rng.random_bool(0.5) {
            let other = nodes.choose(rng).unwrap().clone();
            cft = cft.with_ofm("f1", "o", other);
        }
        (Component::new(id, inports, ["o"], cft), k)
    }
}

/// A random hybrid system with at most `max_events` basic events and CMC
/// transitions in total, and CMCs of at most six states. Components form a
/// DAG; each non-source component reads the outputs of one or two earlier
/// components. Returns the model and an output failure mode of the last
/// component.
pub fn random_system(rng: &mut impl Rng, max_events: usize) -> (SystemModel, OfmRef) {
    let n = rng.random_range(1..=5usize).min(max_events);
    let mut model = SystemModel::new();
    let mut ofms: Vec<Vec<String>> = Vec::new();
    let mut used = 0;
    for i in 0..n {
        let remaining_after = n - i - 1;
        let budget = max_events - used - remaining_after;
        let mut upstream: Vec<usize> = Vec::new();
        if i > 0 {
            let fan_in = rng.random_range(1..=i.min(2));
            upstream = (0..i).collect::<Vec<_>>().choose_multiple(rng, fan_in).copied().collect();
            upstream.sort();
        }
        let inputs: Vec<(String, Vec<String>)> =
            upstream.iter().enumerate().map(|(k, &u)| (format!("i{k}"), ofms[u].clone())).collect();
        let (comp, spent) = random_component(rng, i, &inputs, budget);
        used += spent;
        ofms.push(ofm_ids(&comp));
        model = model.with_component(comp);
        for (k, u) in upstream.iter().enumerate() {
            model = model.with_connection(&format!("c{u}.o"), &format!("c{i}.i{k}"));
        }
    }
    let last = &ofms[n - 1];
    let top = OfmRef::new(format!("c{}", n - 1), last.choose(rng).unwrap().clone());
    (model, top)
}

fn ofm_ids(c: &Component) -> Vec<String> {
    c.flm.ofms_on_port("o").into_iter().map(str::to_string).collect()
}

/// A CMC with states `0..n`, `n ≤ 6`, whose last state is absorbing and
/// reachable from every other state. Rates lie within one decade of a
/// random scale, so first-passage times stay well inside the default
/// simulation horizon.
pub fn random_absorbing_chain(rng: &mut impl Rng) -> (CmcElement, String) {
    let n = rng.random_range(2..=6usize);
    let states: Vec<String> = (0..n).map(|s| s.to_string()).collect();
    let scale = log_uniform(rng, -7.0, 0.0);
    let mut cmc = CmcElement::new(states.clone(), "0").with_error_states([states[n - 1].clone()]);
    let mut pairs: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    for _ in 0..rng.random_range(0..=n) {
        let (a, b) = (rng.random_range(0..n - 1), rng.random_range(0..n));
        if a != b && !pairs.contains(&(a, b)) {
            pairs.push((a, b));
        }
    }
    for (a, b) in pairs {
        cmc = cmc.with_transition(&states[a], &states[b], Rate::per_hour(scale * log_uniform(rng, -1.0, 0.0)));
    }
    (cmc, states[n - 1].clone())
}

/// Generator of a CMC that has no input failure modes.
pub fn closed_generator(cmc: &CmcElement) -> GeneratorView {
    build_generator(cmc, &BTreeMap::new()).expect("no inputs to resolve")
}
