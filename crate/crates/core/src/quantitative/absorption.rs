use super::linalg::factor_checked;
use super::transient::transient_solve;
use super::{GeneratorView, QuantError, RateEstimate, SolverConfig};

/// Reciprocal of the mean time until `target` is first entered from the
/// initial state, with `target` made absorbing.
///
/// If the chain can also get trapped where `target` is no longer reachable,
/// the first passage is defective. The result is then the long-run rate of
/// a process that restarts on every absorption:
/// `P(hit) / E[time until hit or trapped]`, with a warning.
pub fn mttf_rate(gen: &GeneratorView, target: &str) -> Result<RateEstimate, QuantError> {
    let t = gen.index(target).ok_or_else(|| QuantError::UnknownState(target.to_string()))?;
    let init = gen.initial;
    if t == init {
        return Err(QuantError::InvalidInput(format!("target `{target}` is the initial state")));
    }
    let g = gen.with_absorbing(t);
    let n = g.len();
    let reach = g.reachable_from(init);
    if !reach[t] {
        return Ok(RateEstimate {
            rate: 0.0,
            warnings: vec![format!("state `{target}` is unreachable; rate is zero")],
        });
    }
    // States that can still reach the target.
    let live: Vec<usize> = (0..n).filter(|&i| i != t && reach[i] && g.reachable_from(i)[t]).collect();
    let trapped = (0..n).any(|i| i != t && reach[i] && !live.contains(&i));
    let m = live.len();
    let mut a = vec![0.0; m * m];
    for (r, &i) in live.iter().enumerate() {
        a[r * m + r] = g.exit_rate(i);
        for (c, &j) in live.iter().enumerate() {
            if c != r {
                a[r * m + c] = -g.rate(i, j);
            }
        }
    }
    let mut warnings = Vec::new();
    let lu = factor_checked(a, m, &mut warnings)?;
    let row = live.iter().position(|&i| i == init).expect("initial state is live");
    let time = lu.solve(&vec![1.0; m])[row];
    let rate = if trapped {
        let into_target: Vec<f64> = live.iter().map(|&i| g.rate(i, t)).collect();
        let p = lu.solve(&into_target)[row].clamp(0.0, 1.0);
        warnings.push(format!(
            "state `{target}` is reached with probability {p:.6}; rate is P(hit)/E[time until hit or trapped]"
        ));
        p / time
    } else {
        1.0 / time
    };
    Ok(RateEstimate { rate, warnings })
}

/// Rate of a chain of sequential stages: `1 / Σ 1/rᵢ`.
pub fn series_path_rate(rates: &[f64]) -> Result<RateEstimate, QuantError> {
    if rates.is_empty() {
        return Err(QuantError::InvalidInput("empty series path".into()));
    }
    if let Some(r) = rates.iter().find(|r| !r.is_finite() || **r < 0.0) {
        return Err(QuantError::InvalidInput(format!("rate {r} in series path")));
    }
    if rates.contains(&0.0) {
        return Ok(RateEstimate {
            rate: 0.0,
            warnings: vec!["a stage has rate zero (infinite mean duration); rate is zero".into()],
        });
    }
    let total: f64 = rates.iter().map(|r| 1.0 / r).sum();
    Ok(RateEstimate {
        rate: 1.0 / total,
        warnings: Vec::new(),
    })
}

/// Equivalent constant rate of reaching `target` within the mission time:
/// `−ln(1 − P(T)) / T`, with `P(T)` from transient integration.
pub fn transient_rate(gen: &GeneratorView, target: &str, cfg: &SolverConfig) -> Result<RateEstimate, QuantError> {
    let mission = cfg
        .mission_time
        .ok_or_else(|| QuantError::InvalidConfig("the transient method needs a mission time".into()))?;
    let t = gen.index(target).ok_or_else(|| QuantError::UnknownState(target.to_string()))?;
    let traj = transient_solve(&gen.with_absorbing(t), None, &[mission], cfg)?;
    let p = traj.probabilities[0][t];
    if p >= 1.0 {
        return Err(QuantError::InvalidConfig(format!(
            "state `{target}` is certain within the mission time; no finite equivalent rate"
        )));
    }
    Ok(RateEstimate {
        rate: -(-p).ln_1p() / mission,
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn states(n: usize) -> Vec<String> {
        (1..=n).map(|i| i.to_string()).collect()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn single_transition() {
        let g = GeneratorView::from_rates(states(2), 0, &[(0, 1, 1e-3)]);
        assert!(rel(mttf_rate(&g, "2").unwrap().rate, 1e-3) < 1e-14);
    }

    #[test]
    fn two_stage_series() {
        let g = GeneratorView::from_rates(states(3), 0, &[(0, 1, 1e-5), (1, 2, 6e-7)]);
        let r = mttf_rate(&g, "3").unwrap().rate;
        assert!(rel(r, 5.66e-7) < 5e-3);
        assert!(rel(r, series_path_rate(&[1e-5, 6e-7]).unwrap().rate) < 1e-12);
    }

    #[test]
    fn outgoing_transitions_of_target_are_ignored() {
        let g = GeneratorView::from_rates(states(2), 0, &[(0, 1, 0.25), (1, 0, 7.0)]);
        assert!(rel(mttf_rate(&g, "2").unwrap().rate, 0.25) < 1e-14);
    }

    #[test]
    fn unreachable_target_warns() {
        let g = GeneratorView::from_rates(states(3), 0, &[(0, 1, 1.0)]);
        let r = mttf_rate(&g, "3").unwrap();
        assert_eq!(r.rate, 0.0);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn competing_trap() {
        // From 1: to 2 at a, to trap 3 at b. P(hit) = a/(a+b), E = 1/(a+b).
        let (a, b) = (2.0, 3.0);
        let g = GeneratorView::from_rates(states(3), 0, &[(0, 1, a), (0, 2, b)]);
        let r = mttf_rate(&g, "2").unwrap();
        assert!(rel(r.rate, a) < 1e-14);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn series_examples() {
        let l = 4e-6;
        assert_eq!(series_path_rate(&[l]).unwrap().rate, l);
        assert!(rel(series_path_rate(&[l, l]).unwrap().rate, l / 2.0) < 1e-15);
        let zero = series_path_rate(&[l, 0.0]).unwrap();
        assert_eq!(zero.rate, 0.0);
        assert_eq!(zero.warnings.len(), 1);
        assert!(series_path_rate(&[]).is_err());
    }

    #[test]
    fn transient_rate_of_exponential() {
        let g = GeneratorView::from_rates(states(2), 0, &[(0, 1, 1e-3)]);
        let cfg = SolverConfig {
            mission_time: Some(1000.0),
            ..SolverConfig::default()
        };
        assert!(rel(transient_rate(&g, "2", &cfg).unwrap().rate, 1e-3) < 1e-6);
    }
}
