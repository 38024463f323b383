use super::linalg::factor_checked;
use super::{GeneratorView, QuantError, RateEstimate};

/// Closed communicating classes reachable from the initial state, each as
/// sorted state indices, ordered by their smallest member.
pub fn closed_classes(gen: &GeneratorView) -> Vec<Vec<usize>> {
    let n = gen.len();
    let reach: Vec<Vec<bool>> = (0..n).map(|i| gen.reachable_from(i)).collect();
    let from_init = &reach[gen.initial];
    let mut assigned = vec![false; n];
    let mut classes = Vec::new();
    for i in 0..n {
        if assigned[i] || !from_init[i] {
            continue;
        }
        let class: Vec<usize> = (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect();
        class.iter().for_each(|&j| assigned[j] = true);
        // Closed: everything reachable from the class stays inside it.
        if (0..n).all(|j| !reach[i][j] || class.contains(&j)) {
            classes.push(class);
        }
    }
    classes
}

/// Long-run probability of every state, for chains with a unique closed
/// class reachable from the initial state. Transient states get zero.
pub fn stationary_distribution(gen: &GeneratorView) -> Result<(Vec<f64>, Vec<String>), QuantError> {
    let classes = closed_classes(gen);
    if classes.len() != 1 {
        return Err(QuantError::NotUnique { classes: classes.len() });
    }
    let class = &classes[0];
    let m = class.len();
    // Balance equations πQ = 0 on the class, the last one replaced by Σπ = 1.
    let mut a = vec![0.0; m * m];
    for (r, &i) in class.iter().enumerate() {
        for (c, &j) in class.iter().enumerate() {
            a[r * m + c] = if r == c { -gen.exit_rate(j) } else { gen.rate(j, i) };
        }
    }
    a[(m - 1) * m..].iter_mut().for_each(|v| *v = 1.0);
    let mut b = vec![0.0; m];
    b[m - 1] = 1.0;
    let mut warnings = Vec::new();
    let pi_class = factor_checked(a, m, &mut warnings)?.solve(&b);
    let mut pi = vec![0.0; gen.len()];
    for (&i, p) in class.iter().zip(pi_class) {
        pi[i] = p.max(0.0);
    }
    Ok((pi, warnings))
}

/// Long-run frequency of entering `target`: `Σ_{u≠target} π(u)·rate(u→target)`.
///
/// Requires `target` to lie in the unique closed class reachable from the
/// initial state.
pub fn steady_state_frequency(gen: &GeneratorView, target: &str) -> Result<RateEstimate, QuantError> {
    let t = gen.index(target).ok_or_else(|| QuantError::UnknownState(target.to_string()))?;
    let classes = closed_classes(gen);
    if !classes.iter().any(|c| c.contains(&t)) {
        return Err(QuantError::TransientTarget {
            target: target.to_string(),
        });
    }
    let (pi, mut warnings) = stationary_distribution(gen)?;
    if pi[t] == 1.0 && gen.exit_rate(t) == 0.0 {
        warnings.push(format!("state `{target}` is absorbing; it is entered at most once"));
    }
    let rate = (0..gen.len()).filter(|&u| u != t).map(|u| pi[u] * gen.rate(u, t)).sum();
    Ok(RateEstimate { rate, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantitative::build_generator;
    use crate::reference;
    use std::collections::BTreeMap;

    fn states(n: usize) -> Vec<String> {
        (1..=n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn repairable_chain() {
        let g = build_generator(&reference::repairable_chain(), &BTreeMap::new()).unwrap();
        // A renewal cycle lasts 1/0.03 + 1/0.02 + 1/0.5 hours.
        let expected = 1.0 / (1.0 / 0.03 + 1.0 / 0.02 + 1.0 / 0.5);
        let r = steady_state_frequency(&g, "3").unwrap().rate;
        assert!((r - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn two_state() {
        let (l, m) = (3e-4, 0.2);
        let g = GeneratorView::from_rates(vec!["up".into(), "down".into()], 0, &[(0, 1, l), (1, 0, m)]);
        let r = steady_state_frequency(&g, "down").unwrap().rate;
        let expected = l * m / (l + m);
        assert!((r - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn unreachable_target_is_an_error() {
        let g = GeneratorView::from_rates(states(3), 0, &[(0, 1, 1.0), (1, 0, 1.0)]);
        assert!(matches!(
            steady_state_frequency(&g, "3"),
            Err(QuantError::TransientTarget { .. })
        ));
    }

    #[test]
    fn transient_target_is_an_error() {
        let g = GeneratorView::from_rates(states(3), 0, &[(0, 1, 1.0), (1, 2, 1.0), (2, 1, 1.0)]);
        assert!(matches!(
            steady_state_frequency(&g, "1"),
            Err(QuantError::TransientTarget { .. })
        ));
    }

    #[test]
    fn several_closed_classes() {
        let g = GeneratorView::from_rates(states(3), 0, &[(0, 1, 1.0), (0, 2, 1.0)]);
        assert_eq!(closed_classes(&g), vec![vec![1], vec![2]]);
        assert!(matches!(
            steady_state_frequency(&g, "2"),
            Err(QuantError::NotUnique { classes: 2 })
        ));
    }
}
