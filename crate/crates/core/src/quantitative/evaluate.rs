use std::collections::{BTreeMap, HashMap};

use super::{
    build_generator, closed_classes, mtbf, mttf_rate, steady_state_frequency, transient_rate, GeneratorView, OfmRate,
    QuantError, RateMethod, RateResult, SolverConfig,
};
use crate::model::{
    detect_shared_events, validate_model, CftElement, CmcElement, FailureLogic, GateKind, InputSource, OfmRef,
    SystemModel,
};

/// Failure rate of `top`, evaluated compositionally across the system.
///
/// Output failure modes are rated on demand, upstream first, so the
/// evaluation order is a topological order of the top event's cone.
///
/// - CFT: basic events carry their rates; OR sums its inputs; AND needs a
///   mission time `T` and yields `−ln(1 − Πqᵢ)/T` with `qᵢ = 1 − e^(−rᵢT)`.
/// - CMC: the generator is built from the upstream input rates. An error
///   state in a closed recurrent class is rated by its steady-state
///   entering frequency, any other by the reciprocal of its mean time to
///   first entry. An output over several error states sums their rates.
///
/// Unconnected inputs contribute rate zero. Models with errors, or whose
/// repeated events reach the top event outside a single CMC input, are
/// refused.
pub fn evaluate_ghcft(model: &SystemModel, top: &OfmRef, cfg: &SolverConfig) -> Result<RateResult, QuantError> {
    cfg.validate()?;
    let report = validate_model(model);
    if report.has_errors() {
        return Err(QuantError::InvalidModel(report.errors().cloned().collect()));
    }
    if !model.has_ofm(top) {
        return Err(QuantError::TopNotFound(top.clone()));
    }
    let shared = detect_shared_events(model, top);
    if !shared.is_empty() {
        return Err(QuantError::SharedEvents(shared));
    }
    let mut eval = Evaluator {
        model,
        cfg,
        ofm_rates: BTreeMap::new(),
        node_rates: HashMap::new(),
        generators: BTreeMap::new(),
        order: Vec::new(),
        diagnostics: report.warnings().map(ToString::to_string).collect(),
    };
    let top_rate = eval.ofm(&top.component, &top.failure_mode)?;
    Ok(RateResult {
        top: top.clone(),
        rate: top_rate.rate,
        method: top_rate.method,
        mtbf: mtbf(top_rate.rate),
        per_ofm: eval.order,
        diagnostics: eval.diagnostics,
    })
}

struct Evaluator<'m> {
    model: &'m SystemModel,
    cfg: &'m SolverConfig,
    ofm_rates: BTreeMap<OfmRef, OfmRate>,
    node_rates: HashMap<(String, String), f64>,
    generators: BTreeMap<String, GeneratorView>,
    order: Vec<OfmRate>,
    diagnostics: Vec<String>,
}

impl Evaluator<'_> {
    fn ofm(&mut self, component: &str, ofm: &str) -> Result<OfmRate, QuantError> {
        let key = OfmRef::new(component, ofm);
        if let Some(done) = self.ofm_rates.get(&key) {
            return Ok(done.clone());
        }
        let model = self.model;
        let c = &model.components[component];
        let rated = match &c.flm {
            FailureLogic::Cft(cft) => {
                let input = &cft.ofms[ofm].input;
                let rate = self.cft_node(component, cft, input)?;
                OfmRate::new(key.clone(), rate, RateMethod::FaultTree)
            }
            FailureLogic::Cmc(cmc) => self.cmc_ofm(component, cmc, ofm).map_err(|e| e.in_component(component))?,
        };
        self.ofm_rates.insert(key, rated.clone());
        self.order.push(rated.clone());
        Ok(rated)
    }

    fn input(&mut self, component: &str, ifm: &str) -> Result<f64, QuantError> {
        let model = self.model;
        let def = &model.components[component].flm.ifms()[ifm];
        match model.resolve_input(component, ifm, def) {
            InputSource::Connected(src) => Ok(self.ofm(&src.component, &src.failure_mode)?.rate),
            InputSource::Unconnected => {
                self.diagnostics
                    .push(format!("{component}.{ifm}: input is unconnected; treated as never occurring"));
                Ok(0.0)
            }
            InputSource::Ambiguous { .. } => Err(QuantError::InComponent {
                component: component.to_string(),
                source: Box::new(QuantError::InvalidInput(format!("input `{ifm}` is ambiguous"))),
            }),
        }
    }

    fn cft_node(&mut self, component: &str, cft: &CftElement, node: &str) -> Result<f64, QuantError> {
        let key = (component.to_string(), node.to_string());
        if let Some(&r) = self.node_rates.get(&key) {
            return Ok(r);
        }
        let rate = if let Some(r) = cft.basic_events.get(node) {
            r.value()
        } else if cft.ifms.contains_key(node) {
            self.input(component, node)?
        } else if let Some(o) = cft.ofms.get(node) {
            self.cft_node(component, cft, &o.input)?
        } else {
            let gate = &cft.gates[node];
            let mut inputs = Vec::with_capacity(gate.inputs.len());
            for i in &gate.inputs {
                inputs.push(self.cft_node(component, cft, i)?);
            }
            match gate.kind {
                GateKind::Or => inputs.iter().sum(),
                GateKind::And => {
                    let t = self.cfg.mission_time.ok_or_else(|| QuantError::AndNeedsMissionTime {
                        component: component.to_string(),
                        gate: node.to_string(),
                    })?;
                    and_rate(&inputs, t)
                }
            }
        };
        self.node_rates.insert(key, rate);
        Ok(rate)
    }

    fn cmc_ofm(&mut self, component: &str, cmc: &CmcElement, ofm: &str) -> Result<OfmRate, QuantError> {
        if !self.generators.contains_key(component) {
            let mut inputs = BTreeMap::new();
            for ifm in cmc.ifms.keys() {
                let r = self.input(component, ifm)?;
                inputs.insert(ifm.clone(), r);
            }
            let generator = build_generator(cmc, &inputs)?;
            self.generators.insert(component.to_string(), generator);
        }
        let generator = &self.generators[component];
        let mut total = 0.0;
        let mut methods = Vec::new();
        for state in &cmc.ofms[ofm].states {
            let (estimate, method) = if self.cfg.prefer_transient {
                (transient_rate(generator, state, self.cfg)?, RateMethod::Transient)
            } else if is_recurrent(generator, state) {
                (steady_state_frequency(generator, state)?, RateMethod::SteadyStateFrequency)
            } else {
                (mttf_rate(generator, state)?, RateMethod::MttfReciprocal)
            };
            total += estimate.rate;
            methods.push(method);
            self.diagnostics
                .extend(estimate.warnings.into_iter().map(|w| format!("{component}.{ofm}: {w}")));
        }
        let method = match methods.as_slice() {
            [first, rest @ ..] if rest.iter().all(|m| m == first) => *first,
            _ => RateMethod::Mixed,
        };
        Ok(OfmRate::new(OfmRef::new(component, ofm), total, method))
    }
}

// In a closed class with more than one state: the chain keeps returning.
fn is_recurrent(g: &GeneratorView, state: &str) -> bool {
    let Some(i) = g.index(state) else { return false };
    closed_classes(g).iter().any(|c| c.len() > 1 && c.contains(&i))
}

/// Equivalent constant rate of an AND gate over a mission of `t` hours.
pub(crate) fn and_rate(inputs: &[f64], t: f64) -> f64 {
    let q: f64 = inputs.iter().map(|r| -(-r * t).exp_m1()).product();
    -(-q).ln_1p() / t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CftElement, Component, Rate};
    use crate::reference;

    fn top(s: &str) -> OfmRef {
        s.parse().unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn pipeline() {
        let r = evaluate_ghcft(&reference::hybrid_pipeline(), &top("c3.c"), &SolverConfig::default()).unwrap();
        assert!(rel(r.rate, 6.66e-7) < 5e-3);
        let b = r.per_ofm.iter().find(|o| o.ofm == top("c2.b")).unwrap();
        assert!(rel(b.rate, 5.66e-7) < 5e-3);
        assert_eq!(b.method, RateMethod::MttfReciprocal);
        let order: Vec<String> = r.per_ofm.iter().map(|o| o.ofm.to_string()).collect();
        assert_eq!(order, ["c1.a", "c2.b", "c3.c"]);
        assert!(rel(r.mtbf.unwrap() * r.rate, 1.0) < 1e-15);
    }

    #[test]
    fn single_basic_event() {
        let cft = CftElement::new().with_basic_event("e", Rate::from_fit(42.0)).with_ofm("f", "o", "e");
        let model = SystemModel::new().with_component(Component::new("k", Vec::<String>::new(), ["o"], cft));
        let r = evaluate_ghcft(&model, &top("k.f"), &SolverConfig::default()).unwrap();
        assert_eq!(r.rate, 42e-9);
        assert_eq!(r.method, RateMethod::FaultTree);
    }

    #[test]
    fn and_gate_needs_mission_time() {
        let cft = CftElement::new()
            .with_basic_event("x", Rate::per_hour(1e-4))
            .with_basic_event("y", Rate::per_hour(2e-4))
            .with_gate("g", GateKind::And, ["x", "y"])
            .with_ofm("f", "o", "g");
        let model = SystemModel::new().with_component(Component::new("k", Vec::<String>::new(), ["o"], cft));
        assert!(matches!(
            evaluate_ghcft(&model, &top("k.f"), &SolverConfig::default()),
            Err(QuantError::AndNeedsMissionTime { .. })
        ));
        let cfg = SolverConfig {
            mission_time: Some(1000.0),
            ..SolverConfig::default()
        };
        let r = evaluate_ghcft(&model, &top("k.f"), &cfg).unwrap().rate;
        let q = (1.0 - (-0.1f64).exp()) * (1.0 - (-0.2f64).exp());
        assert!(rel(r, -(1.0 - q).ln() / 1000.0) < 1e-12);
    }

    #[test]
    fn single_input_and_is_identity() {
        assert!(rel(and_rate(&[3e-6], 1e4), 3e-6) < 1e-12);
    }

    #[test]
    fn repairable_error_state_uses_steady_state() {
        let model = SystemModel::new().with_component(Component::new(
            "m",
            Vec::<String>::new(),
            ["o"],
            reference::repairable_chain().with_ofm("down", "o", ["3"]),
        ));
        let r = evaluate_ghcft(&model, &top("m.down"), &SolverConfig::default()).unwrap();
        assert_eq!(r.method, RateMethod::SteadyStateFrequency);
        assert!(rel(r.rate, 0.01171875) < 1e-12);
    }

    #[test]
    fn transient_method_on_request() {
        let cfg = SolverConfig {
            mission_time: Some(1e4),
            prefer_transient: true,
            ..SolverConfig::default()
        };
        let r = evaluate_ghcft(&reference::hybrid_pipeline(), &top("c2.b"), &cfg).unwrap();
        assert_eq!(r.method, RateMethod::Transient);
        assert!(r.rate > 0.0 && r.rate < 6e-7);
    }

    #[test]
    fn shared_events_are_refused() {
        // One sensor output feeding two chains that join in an OR.
        let sensor = CftElement::new().with_basic_event("e", Rate::per_hour(1e-6)).with_ofm("f", "o", "e");
        let chain = |id: &str| {
            Component::new(
                id,
                ["i"],
                ["o"],
                CmcElement::new(["ok", "bad"], "ok")
                    .with_error_states(["bad"])
                    .with_transition("ok", "bad", Rate::ZERO)
                    .with_ifm("f", crate::model::InputFailureMode::on("i"))
                    .with_dependency("f", "ok", "bad")
                    .with_ofm("g", "o", ["bad"]),
            )
        };
        let join = CftElement::new()
            .with_ifm("g1", crate::model::InputFailureMode::on("i1").with_source_mode("g"))
            .with_ifm("g2", crate::model::InputFailureMode::on("i2").with_source_mode("g"))
            .with_gate("any", GateKind::Or, ["g1", "g2"])
            .with_ofm("top", "o", "any");
        let model = SystemModel::new()
            .with_component(Component::new("s", Vec::<String>::new(), ["o"], sensor))
            .with_component(chain("m1"))
            .with_component(chain("m2"))
            .with_component(Component::new("j", ["i1", "i2"], ["o"], join))
            .with_connection("s.o", "m1.i")
            .with_connection("s.o", "m2.i")
            .with_connection("m1.o", "j.i1")
            .with_connection("m2.o", "j.i2");
        assert!(matches!(
            evaluate_ghcft(&model, &top("j.top"), &SolverConfig::default()),
            Err(QuantError::SharedEvents(_))
        ));
    }
}
