mod common;

use ghcft::format::{parse_model, serialize_model, ModelDocument};
use ghcft::model::{CftElement, Component, FailureLogic, GateKind, OfmRef, Rate, SystemModel};
use ghcft::qualitative::{flatten_ghcft, minimal_cut_sets, FlattenOptions};
use ghcft::quantitative::{evaluate_ghcft, mtbf, mttf_rate, steady_state_frequency, transient_solve, SolverConfig};
use proptest::prelude::*;
use proptest::sample::subsequence;

fn scale_rates(model: &SystemModel, k: f64) -> SystemModel {
    let mut out = model.clone();
    let scale = |r: &mut Rate| *r = Rate::new(r.magnitude() * k, r.unit(), r.kind());
    for c in out.components.values_mut() {
        match &mut c.flm {
            FailureLogic::Cft(cft) => cft.basic_events.values_mut().for_each(scale),
            FailureLogic::Cmc(cmc) => cmc.transitions.iter_mut().for_each(|t| scale(&mut t.rate)),
        }
    }
    out
}

fn or_model(rates: &[f64]) -> SystemModel {
    let mut cft = CftElement::new();
    for (i, r) in rates.iter().enumerate() {
        cft = cft.with_basic_event(format!("e{i}"), Rate::per_hour(*r));
    }
    let inputs: Vec<String> = (0..rates.len()).map(|i| format!("e{i}")).collect();
    let cft = cft.with_gate("g", GateKind::Or, inputs).with_ofm("top", "o", "g");
    SystemModel::new().with_component(Component::new("k", Vec::<String>::new(), ["o"], cft))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scaling_rates_scales_mttf_rate(seed in any::<u64>(), exp in -3.0f64..3.0) {
        let k = 10f64.powf(exp);
        let (cmc, target) = common::random_absorbing_chain(&mut common::rng(seed));
        let gen = common::closed_generator(&cmc);
        let base = mttf_rate(&gen, &target).unwrap().rate;
        let scaled = mttf_rate(&gen.scaled(k), &target).unwrap().rate;
        prop_assert!((scaled - k * base).abs() <= 1e-9 * k * base);
    }

    #[test]
    fn scaling_rates_scales_steady_state(rates in prop::collection::vec(1e-4f64..1.0, 3), exp in -3.0f64..3.0) {
        let k = 10f64.powf(exp);
        let cmc = ghcft::model::CmcElement::new(["1", "2", "3"], "1")
            .with_error_states(["3"])
            .with_transition("1", "2", Rate::per_hour(rates[0]))
            .with_transition("2", "3", Rate::per_hour(rates[1]))
            .with_transition("3", "1", Rate::per_hour(rates[2]).repair());
        let gen = common::closed_generator(&cmc);
        let base = steady_state_frequency(&gen, "3").unwrap().rate;
        let scaled = steady_state_frequency(&gen.scaled(k), "3").unwrap().rate;
        let expected = 1.0 / (1.0 / rates[0] + 1.0 / rates[1] + 1.0 / rates[2]);
        prop_assert!((base - expected).abs() <= 1e-10 * expected);
        prop_assert!((scaled - k * base).abs() <= 1e-9 * k * base);
    }

    #[test]
    fn scaling_rates_keeps_cut_sets(seed in any::<u64>(), exp in -3.0f64..3.0) {
        let (model, top) = common::random_system(&mut common::rng(seed), 12);
        let scaled = scale_rates(&model, 10f64.powf(exp));
        let opts = FlattenOptions::default();
        let a = minimal_cut_sets(&flatten_ghcft(&model, &top, &opts).unwrap()).unwrap();
        let b = minimal_cut_sets(&flatten_ghcft(&scaled, &top, &opts).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn or_gate_adds_rates(rates in prop::collection::vec(1e-9f64..1e-2, 1..8)) {
        let r = evaluate_ghcft(&or_model(&rates), &OfmRef::new("k", "top"), &SolverConfig::default()).unwrap();
        let sum: f64 = rates.iter().sum();
        prop_assert!((r.rate - sum).abs() <= 1e-12 * sum);
        let m = mtbf(r.rate).unwrap();
        prop_assert!((m * r.rate - 1.0).abs() <= f64::EPSILON);
    }

    #[test]
    fn or_gate_ignores_input_order(rates in prop::collection::vec(1e-9f64..1e-2, 2..8), seed in any::<u64>()) {
        let mut shuffled = rates.clone();
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut common::rng(seed));
        let top = OfmRef::new("k", "top");
        let a = evaluate_ghcft(&or_model(&rates), &top, &SolverConfig::default()).unwrap().rate;
        let b = evaluate_ghcft(&or_model(&shuffled), &top, &SolverConfig::default()).unwrap().rate;
        prop_assert!((a - b).abs() <= 1e-14 * a);
    }

    #[test]
    fn transient_conserves_mass(seed in any::<u64>()) {
        let (cmc, _) = common::random_absorbing_chain(&mut common::rng(seed));
        let gen = common::closed_generator(&cmc);
        let horizon = 10.0 / gen.max_exit_rate();
        let times: Vec<f64> = (1..=10).map(|k| horizon * k as f64 / 10.0).collect();
        let cfg = SolverConfig { rtol: 1e-6, ..SolverConfig::default() };
        let traj = transient_solve(&gen, None, &times, &cfg).unwrap();
        for p in &traj.probabilities {
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(p.iter().all(|x| *x >= 0.0));
        }
    }

    #[test]
    fn random_models_round_trip(seed in any::<u64>()) {
        let (model, _) = common::random_system(&mut common::rng(seed), 12);
        let doc = ModelDocument::new(model);
        let text = serialize_model(&doc);
        prop_assert_eq!(parse_model(&text).unwrap(), doc);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn parser_never_panics_on_text(text in "\\PC{0,200}") {
        let _ = parse_model(&text);
    }

    #[test]
    fn parser_never_panics_on_damaged_models(seed in any::<u64>(), cut in subsequence((0..64usize).collect::<Vec<_>>(), 0..8)) {
        let (model, _) = common::random_system(&mut common::rng(seed), 12);
        let text = serialize_model(&ModelDocument::new(model));
        let mut chars: Vec<char> = text.chars().collect();
        for (k, i) in cut.iter().enumerate() {
            let at = (i * 7919 + k) % chars.len().max(1);
            if at < chars.len() {
                chars.remove(at);
            }
        }
        let damaged: String = chars.into_iter().collect();
        if let Ok(doc) = parse_model(&damaged) {
            prop_assert_eq!(parse_model(&serialize_model(&doc)).unwrap(), doc);
        }
    }
}
