use std::collections::BTreeMap;

use super::QuantError;
use crate::model::{CmcElement, ModelError};

/// An input failure mode's contribution to one transition.
#[derive(Debug, Clone, PartialEq)]
pub struct InputTerm {
    pub from: usize,
    pub to: usize,
    pub ifm: String,
    pub rate: f64,
}

/// Effective-rate view of a CMC: base rates plus IFM contributions, indexed
/// by state declaration order. The diagonal of the generator is implied as
/// the negative row sum.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorView {
    pub states: Vec<String>,
    pub initial: usize,
    base: Vec<f64>,
    inputs: Vec<InputTerm>,
    rates: Vec<f64>,
}

impl GeneratorView {
    /// A generator from explicit off-diagonal rates, with no inputs.
    pub fn from_rates(states: Vec<String>, initial: usize, rates: &[(usize, usize, f64)]) -> Self {
        let n = states.len();
        let mut base = vec![0.0; n * n];
        for &(i, j, r) in rates {
            base[i * n + j] += r;
        }
        GeneratorView {
            states,
            initial,
            rates: base.clone(),
            base,
            inputs: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }

    /// Effective rate from state `i` to state `j` (`i != j`).
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.rates[i * self.len() + j]
    }

    pub fn exit_rate(&self, i: usize) -> f64 {
        let n = self.len();
        (0..n).filter(|&j| j != i).map(|j| self.rates[i * n + j]).sum()
    }

    pub fn max_exit_rate(&self) -> f64 {
        (0..self.len()).map(|i| self.exit_rate(i)).fold(0.0, f64::max)
    }

    pub fn input_terms(&self) -> &[InputTerm] {
        &self.inputs
    }

    /// Nonzero off-diagonal entries keyed by state ids.
    pub fn off_diagonals(&self) -> BTreeMap<(String, String), f64> {
        let n = self.len();
        let mut out = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && (self.rates[i * n + j] != 0.0 || self.has_entry(i, j)) {
                    out.insert((self.states[i].clone(), self.states[j].clone()), self.rates[i * n + j]);
                }
            }
        }
        out
    }

    fn has_entry(&self, i: usize, j: usize) -> bool {
        self.inputs.iter().any(|t| t.from == i && t.to == j) || self.base[i * self.len() + j] != 0.0
    }

    /// Full generator matrix, row-major, with diagonal = −(row sum).
    pub fn matrix(&self) -> Vec<f64> {
        let n = self.len();
        let mut q = self.rates.clone();
        for i in 0..n {
            q[i * n + i] = -self.exit_rate(i);
        }
        q
    }

    /// Off-diagonal rates with input `ifm` contributions replaced by
    /// `override_rate(ifm)` where it returns `Some`.
    pub(crate) fn rates_with(&self, mut override_rate: impl FnMut(&str) -> Option<f64>) -> Vec<f64> {
        let n = self.len();
        let mut r = self.base.clone();
        for t in &self.inputs {
            r[t.from * n + t.to] += override_rate(&t.ifm).unwrap_or(t.rate);
        }
        r
    }

    /// The same chain with every rate multiplied by `k`.
    pub fn scaled(&self, k: f64) -> GeneratorView {
        let mut g = self.clone();
        g.base.iter_mut().for_each(|r| *r *= k);
        g.rates.iter_mut().for_each(|r| *r *= k);
        g.inputs.iter_mut().for_each(|t| t.rate *= k);
        g
    }

    /// The same chain with every transition out of `target` removed.
    pub fn with_absorbing(&self, target: usize) -> GeneratorView {
        let n = self.len();
        let mut g = self.clone();
        for j in 0..n {
            g.base[target * n + j] = 0.0;
            g.rates[target * n + j] = 0.0;
        }
        g.inputs.retain(|t| t.from != target);
        g
    }

    /// States reachable from `start` along positive-rate transitions.
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for j in self.successors(i) {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen
    }

    /// Neighbours reachable along positive-rate transitions.
    pub(crate) fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let n = self.len();
        (0..n).filter(move |&j| j != i && self.rates[i * n + j] > 0.0)
    }
}

/// Builds the effective-rate generator of `cmc` for constant input rates.
///
/// Each transition's rate is its base rate plus the rates of all IFMs it
/// depends on.
pub fn build_generator(cmc: &CmcElement, ifm_rates: &BTreeMap<String, f64>) -> Result<GeneratorView, QuantError> {
    let n = cmc.states.len();
    let index = |s: &str| {
        cmc.state_index(s).ok_or_else(|| QuantError::UnknownState(s.to_string()))
    };
    let initial = index(&cmc.initial)?;
    let mut base = vec![0.0; n * n];
    for t in &cmc.transitions {
        let (i, j) = (index(&t.from)?, index(&t.to)?);
        base[i * n + j] += t.rate.value();
    }
    let mut inputs = Vec::new();
    for d in &cmc.input_deps {
        let rate = *ifm_rates
            .get(&d.ifm)
            .ok_or_else(|| QuantError::Model(ModelError::UnresolvedInput { ifm: d.ifm.clone() }))?;
        if !rate.is_finite() || rate < 0.0 {
            return Err(QuantError::InvalidInput(format!("rate of `{}` is {rate}", d.ifm)));
        }
        inputs.push(InputTerm {
            from: index(&d.from)?,
            to: index(&d.to)?,
            ifm: d.ifm.clone(),
            rate,
        });
    }
    let mut view = GeneratorView {
        states: cmc.states.clone(),
        initial,
        rates: Vec::new(),
        base,
        inputs,
    };
    view.rates = view.rates_with(|_| None);
    Ok(view)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;

    fn key(a: &str, b: &str) -> (String, String) {
        (a.to_string(), b.to_string())
    }

    fn inputs(a: f64, b: f64) -> BTreeMap<String, f64> {
        [("a".to_string(), a), ("b".to_string(), b)].into()
    }

    #[test]
    fn repairable_chain_off_diagonals() {
        let g = build_generator(&reference::repairable_chain(), &BTreeMap::new()).unwrap();
        let expected: BTreeMap<_, _> = [(key("1", "2"), 0.03), (key("2", "3"), 0.02), (key("3", "1"), 0.5)].into();
        assert_eq!(g.off_diagonals(), expected);
    }

    #[test]
    fn zero_inputs_add_a_zero_entry() {
        let g = build_generator(&reference::two_input_cmc(), &inputs(0.0, 0.0)).unwrap();
        let expected: BTreeMap<_, _> = [
            (key("1", "2"), 0.03),
            (key("2", "3"), 0.02),
            (key("3", "1"), 0.5),
            (key("3", "4"), 0.0),
        ]
        .into();
        assert_eq!(g.off_diagonals(), expected);
    }

    #[test]
    fn input_adds_onto_base_rate() {
        let g = build_generator(&reference::two_input_cmc(), &inputs(6.0e-7, 0.0)).unwrap();
        assert_eq!(g.rate(0, 1), 0.03 + 6.0e-7);
    }

    #[test]
    fn missing_input_rate() {
        let err = build_generator(&reference::two_input_cmc(), &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, QuantError::Model(ModelError::UnresolvedInput { .. })));
    }

    #[test]
    fn rows_sum_to_zero() {
        let g = build_generator(&reference::two_input_cmc(), &inputs(1e-6, 1e-3)).unwrap();
        let q = g.matrix();
        let n = g.len();
        for i in 0..n {
            let s: f64 = q[i * n..(i + 1) * n].iter().sum();
            assert!(s.abs() <= 1e-12 * g.max_exit_rate());
        }
    }
}
