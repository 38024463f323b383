use std::collections::BTreeMap;
use std::fmt;

use super::linalg::Lu;
use super::{GeneratorView, QuantError, SolverConfig};

type Profile = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Time-varying input failure mode rates, keyed by IFM id. Inputs without
/// a profile keep the constant rate the generator was built with.
#[derive(Default)]
pub struct InputProfiles {
    profiles: BTreeMap<String, Profile>,
}

impl InputProfiles {
    pub fn new() -> Self {
        Self::default()
    }

    /// `rate(t)` must be finite and nonnegative for every `t` (hours).
    pub fn with(mut self, ifm: impl Into<String>, rate: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.profiles.insert(ifm.into(), Box::new(rate));
        self
    }

    fn get(&self, ifm: &str) -> Option<&Profile> {
        self.profiles.get(ifm)
    }
}

impl fmt::Debug for InputProfiles {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.profiles.keys()).finish()
    }
}

/// State probabilities at the requested output times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// One vector per output time, indexed like the generator's states.
    pub probabilities: Vec<Vec<f64>>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Largest `|Σp − 1|` seen before renormalizing an accepted step.
    pub max_mass_defect: f64,
}

/// Integrates the forward equations `p' = pQ(t)` from the initial state.
///
/// Backward Euler with Richardson extrapolation: every step is taken once
/// at size `h` and twice at `h/2`; their difference estimates the local
/// error and drives the step size, and `2·half − full` is kept. The scheme
/// is L-stable, so rates many orders of magnitude apart are handled with
/// steps sized by accuracy alone.
///
/// `output_times` must be nondecreasing, nonnegative and end above zero.
pub fn transient_solve(
    gen: &GeneratorView,
    profiles: Option<&InputProfiles>,
    output_times: &[f64],
    cfg: &SolverConfig,
) -> Result<Trajectory, QuantError> {
    cfg.validate()?;
    let t_end = *output_times
        .last()
        .ok_or_else(|| QuantError::InvalidConfig("no output times".into()))?;
    if !(t_end.is_finite() && t_end > 0.0)
        || output_times.iter().any(|t| !t.is_finite() || *t < 0.0)
        || output_times.windows(2).any(|w| w[0] > w[1])
    {
        return Err(QuantError::InvalidConfig(
            "output times must be finite, nonnegative, nondecreasing and end after zero".into(),
        ));
    }
    let n = gen.len();
    let rates_at = |t: f64| -> Result<Vec<f64>, QuantError> {
        let mut bad = None;
        let r = gen.rates_with(|ifm| {
            let f = profiles?.get(ifm)?;
            let v = f(t);
            if !v.is_finite() || v < 0.0 {
                bad = Some(format!("profile of `{ifm}` is {v} at t = {t}"));
            }
            Some(v)
        });
        match bad {
            Some(msg) => Err(QuantError::InvalidInput(msg)),
            None => Ok(r),
        }
    };

    let mut p = vec![0.0; n];
    p[gen.initial] = 1.0;
    let mut t = 0.0;
    let max_exit = {
        let r = rates_at(0.0)?;
        (0..n).map(|i| r[i * n..(i + 1) * n].iter().sum::<f64>()).fold(0.0, f64::max)
    };
    // Start small; the controller grows the step by up to 5x per step.
    let mut h = 1e-3 * t_end;
    if max_exit > 0.0 {
        h = h.min(1e-3 / max_exit);
    }
    let mut out = Trajectory {
        times: Vec::with_capacity(output_times.len()),
        probabilities: Vec::with_capacity(output_times.len()),
        accepted_steps: 0,
        rejected_steps: 0,
        max_mass_defect: 0.0,
    };

    for &t_out in output_times {
        while t < t_out {
            if out.accepted_steps + out.rejected_steps >= cfg.max_steps {
                return Err(QuantError::MaxSteps(cfg.max_steps));
            }
            let last = h >= t_out - t;
            let step = if last { t_out - t } else { h };
            if step <= f64::EPSILON * t.max(1.0) * 4.0 && !last {
                return Err(QuantError::ToleranceUnachievable { t, h: step });
            }
            let r_end = rates_at(t + step)?;
            let full = backward_euler(&p, step, &r_end, n);
            let mid = backward_euler(&p, step / 2.0, &rates_at(t + step / 2.0)?, n);
            let half = backward_euler(&mid, step / 2.0, &r_end, n);

            let mut err: f64 = 0.0;
            let mut y = vec![0.0; n];
            let mut negative = false;
            for i in 0..n {
                y[i] = 2.0 * half[i] - full[i];
                let scale = cfg.atol + cfg.rtol * p[i].abs().max(y[i].abs());
                err = err.max((half[i] - full[i]).abs() / scale);
                negative |= y[i] < -scale;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 / err.sqrt()).clamp(0.2, 5.0) };
            if err > 1.0 || negative || !err.is_finite() {
                out.rejected_steps += 1;
                h = step * factor.min(0.5);
                continue;
            }
            for v in &mut y {
                *v = v.clamp(0.0, 1.0);
            }
            let mass: f64 = y.iter().sum();
            out.max_mass_defect = out.max_mass_defect.max((mass - 1.0).abs());
            y.iter_mut().for_each(|v| *v /= mass);
            p = y;
            t = if last { t_out } else { t + step };
            out.accepted_steps += 1;
            // Keep the controller's proposal even after a shortened final step.
            h = if last { h.max(step * factor) } else { step * factor };
        }
        out.times.push(t_out);
        out.probabilities.push(p.clone());
    }
    Ok(out)
}

// Solves (I − hQᵀ) x = p for the off-diagonal rates `r`.
fn backward_euler(p: &[f64], h: f64, r: &[f64], n: usize) -> Vec<f64> {
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        let exit: f64 = (0..n).filter(|&k| k != i).map(|k| r[i * n + k]).sum();
        a[i * n + i] = 1.0 + h * exit;
        for j in 0..n {
            if j != i {
                a[i * n + j] = -h * r[j * n + i];
            }
        }
    }
    // Diagonally dominant by columns with positive diagonal: never singular.
    Lu::factor(a, n).expect("backward Euler matrix is nonsingular").solve(p)
}
