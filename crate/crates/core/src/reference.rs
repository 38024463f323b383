//! Small reference models used throughout the docs and tests.
//!
//! The same models ship as `.ghcft` files under `models/` at the repository
//! root; the integration tests check that both forms agree.

use crate::model::{CftElement, CmcElement, Component, GateKind, InputFailureMode, Rate, SystemModel};

/// Three-state repairable chain: 1 → 2 → 3 → 1, error state 3.
pub fn repairable_chain() -> CmcElement {
    CmcElement::new(["1", "2", "3"], "1")
        .with_error_states(["3"])
        .with_transition("1", "2", Rate::per_hour(0.03))
        .with_transition("2", "3", Rate::per_hour(0.02))
        .with_transition("3", "1", Rate::per_hour(0.5).repair())
}

/// The three-state chain extended with inputs `a`, `b` and outputs `c`, `d`.
///
/// `a` adds onto 1 → 2, `b` onto 3 → 4 (whose own rate is zero). Output `c`
/// fires in state 3, `d` in state 4.
pub fn two_input_cmc() -> CmcElement {
    CmcElement::new(["1", "2", "3", "4"], "1")
        .with_error_states(["3", "4"])
        .with_transition("1", "2", Rate::per_hour(0.03))
        .with_transition("2", "3", Rate::per_hour(0.02))
        .with_transition("3", "1", Rate::per_hour(0.5).repair())
        .with_transition("3", "4", Rate::per_hour(0.0))
        .with_ifm("a", InputFailureMode::on("in_a"))
        .with_ifm("b", InputFailureMode::on("in_b"))
        .with_dependency("a", "1", "2")
        .with_dependency("b", "3", "4")
        .with_ofm("c", "out_c", ["3"])
        .with_ofm("d", "out_d", ["4"])
}

pub fn two_input_component() -> Component {
    Component::new("cmc", ["in_a", "in_b"], ["out_c", "out_d"], two_input_cmc())
}

/// Three components in a row: a fault tree `c1`, a Markov chain `c2`, and a
/// fault tree `c3` whose output `c` is the usual top event.
///
/// `c1` raises `a` when either `x` or `y` occurs. In `c2`, 1 → 2 fails at
/// 10⁻⁵/h and `a` drives 2 → 3, which has no rate of its own; reaching state 3
/// raises `b`. State 4 and output `d` are not connected downstream. `c3`
/// raises `c` on `b` or its own event `z`.
pub fn hybrid_pipeline() -> SystemModel {
    let c1 = CftElement::new()
        .with_basic_event("x", Rate::per_hour(2.0e-7))
        .with_basic_event("y", Rate::per_hour(4.0e-7))
        .with_gate("g", GateKind::Or, ["x", "y"])
        .with_ofm("a", "o1", "g");
    let c2 = CmcElement::new(["1", "2", "3", "4"], "1")
        .with_error_states(["3", "4"])
        .with_transition("1", "2", Rate::per_hour(1.0e-5))
        .with_transition("2", "3", Rate::per_hour(0.0))
        .with_transition("3", "4", Rate::per_hour(2.0e-6))
        .with_ifm("a", InputFailureMode::on("i1"))
        .with_dependency("a", "2", "3")
        .with_ofm("b", "o2", ["3"])
        .with_ofm("d", "o2", ["4"]);
    let c3 = CftElement::new()
        .with_basic_event("z", Rate::per_hour(1.0e-7))
        .with_ifm("b", InputFailureMode::on("i2"))
        .with_gate("g", GateKind::Or, ["z", "b"])
        .with_ofm("c", "o3", "g");
    SystemModel::new()
        .with_component(Component::new("c1", Vec::<String>::new(), ["o1"], c1))
        .with_component(Component::new("c2", ["i1"], ["o2"], c2))
        .with_component(Component::new("c3", ["i2"], ["o3"], c3))
        .with_connection("c1.o1", "c2.i1")
        .with_connection("c2.o2", "c3.i2")
}

fn ultrasonic_sensor(id: &str) -> Component {
    let cft = CftElement::new()
        .with_basic_event("False-negative", Rate::from_fit(50000.0))
        .with_basic_event("False-positive", Rate::from_fit(500.0))
        .with_ofm("omission", "distance", "False-negative")
        .with_ofm("commission", "distance", "False-positive");
    Component::new(id, Vec::<String>::new(), ["distance"], cft)
}

/// Emergency braking function of a radio-controlled car, reconstructed.
///
/// Two ultrasonic sensors feed the braking controller `EBC`; `US2` is a cold
/// spare that only matters once `US1` has lost detection. The controller's
/// chain has no failure rates of its own: every transition is driven by
/// sensor failure modes. Top events are `E.no_emergency_braking` and
/// `E.sporadic_braking`.
///
/// The controller chain is a plausible reconstruction. Its cut sets are
/// meaningful; its computed rates only illustrate the method.
pub fn emergency_braking() -> SystemModel {
    let zero = || Rate::from_fit(0.0);
    let ebc = CmcElement::new(["ok", "us1_lost", "no_braking", "sporadic"], "ok")
        .with_error_states(["no_braking", "sporadic"])
        .with_transition("ok", "us1_lost", zero())
        .with_transition("us1_lost", "no_braking", zero())
        .with_transition("ok", "sporadic", zero())
        .with_transition("us1_lost", "sporadic", zero())
        .with_ifm("us1_omission", InputFailureMode::on("us1_in").with_source_mode("omission"))
        .with_ifm("us1_commission", InputFailureMode::on("us1_in").with_source_mode("commission"))
        .with_ifm("us2_omission", InputFailureMode::on("us2_in").with_source_mode("omission"))
        .with_ifm("us2_commission", InputFailureMode::on("us2_in").with_source_mode("commission"))
        .with_dependency("us1_omission", "ok", "us1_lost")
        .with_dependency("us2_omission", "us1_lost", "no_braking")
        .with_dependency("us1_commission", "ok", "sporadic")
        .with_dependency("us2_commission", "ok", "sporadic")
        .with_dependency("us2_commission", "us1_lost", "sporadic")
        .with_ofm("omission", "brake_cmd", ["no_braking"])
        .with_ofm("commission", "brake_cmd", ["sporadic"]);
    let engine = CftElement::new()
        .with_ifm("omission", InputFailureMode::on("brake_cmd"))
        .with_ifm("commission", InputFailureMode::on("brake_cmd"))
        .with_ofm("no_emergency_braking", "actuation", "omission")
        .with_ofm("sporadic_braking", "actuation", "commission");
    SystemModel::new()
        .with_component(ultrasonic_sensor("US1"))
        .with_component(ultrasonic_sensor("US2"))
        .with_component(Component::new("EBC", ["us1_in", "us2_in"], ["brake_cmd"], ebc))
        .with_component(Component::new("E", ["brake_cmd"], ["actuation"], engine))
        .with_connection("US1.distance", "EBC.us1_in")
        .with_connection("US2.distance", "EBC.us2_in")
        .with_connection("EBC.brake_cmd", "E.brake_cmd")
}
