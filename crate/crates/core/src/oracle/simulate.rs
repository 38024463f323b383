use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use rayon::prelude::*;
use serde::Serialize;

use super::OracleError;
use crate::model::CmcElement;
use crate::quantitative::{build_generator, GeneratorView, QuantError};

/// Runs per independent random substream.
pub const CHUNK_RUNS: u64 = 10_000;

const HORIZON_CAP: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationEstimate {
    pub runs: u64,
    pub hits: u64,
    /// Runs that did not reach the target: cut off at the horizon or stuck
    /// in a state with no way out.
    pub censored: u64,
    /// Hours, over hitting runs.
    pub mean_first_passage: f64,
    /// `1 / mean_first_passage`, per hour.
    pub rate_estimate: f64,
    /// Standard error of `rate_estimate` (delta method).
    pub std_error: f64,
    pub seed: u64,
    pub horizon: f64,
    pub warnings: Vec<String>,
}

/// `100 / (smallest nonzero rate)`, capped at 10¹² hours.
pub fn default_horizon(gen: &GeneratorView) -> f64 {
    let n = gen.len();
    let min = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j)
        .map(|(i, j)| gen.rate(i, j))
        .filter(|&r| r > 0.0)
        .fold(f64::INFINITY, f64::min);
    if min.is_finite() {
        (100.0 / min).min(HORIZON_CAP)
    } else {
        HORIZON_CAP
    }
}

/// Simulates `runs` trajectories of the chain from its initial state until
/// `target` is first entered or `horizon` hours pass (default
/// [`default_horizon`]).
///
/// Runs are split into chunks of [`CHUNK_RUNS`]; chunk `k` draws from a
/// xoshiro256** stream seeded with `seed` and advanced by `k` jumps of 2¹²⁸.
/// Chunks run in parallel and are merged in order, so the estimate depends
/// only on the inputs and the seed.
pub fn simulate_first_passage(
    cmc: &CmcElement,
    ifm_rates: &BTreeMap<String, f64>,
    target: &str,
    runs: u64,
    horizon: Option<f64>,
    seed: u64,
) -> Result<SimulationEstimate, OracleError> {
    let gen = build_generator(cmc, ifm_rates)?;
    simulate_generator(&gen, target, runs, horizon, seed)
}

/// [`simulate_first_passage`] on an already built generator.
pub fn simulate_generator(
    gen: &GeneratorView,
    target: &str,
    runs: u64,
    horizon: Option<f64>,
    seed: u64,
) -> Result<SimulationEstimate, OracleError> {
    let t = gen.index(target).ok_or_else(|| QuantError::UnknownState(target.to_string()))?;
    let horizon = horizon.unwrap_or_else(|| default_horizon(gen));
    if runs == 0 || !(horizon > 0.0) {
        return Err(OracleError::InvalidRequest);
    }
    let n = gen.len();
    let table: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            let mut acc = 0.0;
            gen.successors(i)
                .map(|j| {
                    acc += gen.rate(i, j);
                    (j, acc)
                })
                .collect()
        })
        .collect();

    let chunks = runs.div_ceil(CHUNK_RUNS);
    let mut streams = Vec::with_capacity(chunks as usize);
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    for _ in 0..chunks {
        streams.push(rng.clone());
        rng.jump();
    }
    let partials: Vec<Tally> = streams
        .into_par_iter()
        .enumerate()
        .map(|(k, mut rng)| {
            let count = CHUNK_RUNS.min(runs - k as u64 * CHUNK_RUNS);
            let mut tally = Tally::default();
            for _ in 0..count {
                match run_once(&table, gen.initial, t, horizon, &mut rng) {
                    Some(time) => tally.hit(time),
                    None => tally.censored += 1,
                }
            }
            tally
        })
        .collect();
    let total = partials.into_iter().fold(Tally::default(), Tally::merge);

    let mut warnings = Vec::new();
    if total.hits == 0 {
        warnings.push(format!("no run reached `{target}`; rate estimate is zero"));
        return Ok(SimulationEstimate {
            runs,
            hits: 0,
            censored: total.censored,
            mean_first_passage: f64::INFINITY,
            rate_estimate: 0.0,
            std_error: 0.0,
            seed,
            horizon,
            warnings,
        });
    }
    if total.censored > 0 {
        warnings.push(format!("{} of {runs} runs did not reach `{target}`", total.censored));
    }
    let hits = total.hits as f64;
    let mean = total.mean;
    let var = if total.hits > 1 { total.m2 / (hits - 1.0) } else { 0.0 };
    let se_mean = (var / hits).sqrt();
    Ok(SimulationEstimate {
        runs,
        hits: total.hits,
        censored: total.censored,
        mean_first_passage: mean,
        rate_estimate: 1.0 / mean,
        std_error: se_mean / (mean * mean),
        seed,
        horizon,
        warnings,
    })
}

fn run_once(table: &[Vec<(usize, f64)>], start: usize, target: usize, horizon: f64, rng: &mut impl Rng) -> Option<f64> {
    let mut state = start;
    let mut time = 0.0;
    while state != target {
        let exits = &table[state];
        let total = exits.last()?.1;
        // 1 − u lies in (0, 1], so the logarithm is finite.
        time += -(1.0 - rng.random::<f64>()).ln() / total;
        if time > horizon {
            return None;
        }
        let pick = rng.random::<f64>() * total;
        state = exits.iter().find(|(_, c)| pick < *c).unwrap_or(exits.last()?).0;
    }
    Some(time)
}

// Welford accumulator, merged with Chan's formula.
#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    hits: u64,
    censored: u64,
    mean: f64,
    m2: f64,
}

impl Tally {
    fn hit(&mut self, x: f64) {
        self.hits += 1;
        let d = x - self.mean;
        self.mean += d / self.hits as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Tally) -> Tally {
        let hits = self.hits + o.hits;
        if hits == 0 {
            return Tally {
                censored: self.censored + o.censored,
                ..Tally::default()
            };
        }
        let (na, nb, n) = (self.hits as f64, o.hits as f64, hits as f64);
        let d = o.mean - self.mean;
        Tally {
            hits,
            censored: self.censored + o.censored,
            mean: self.mean + d * nb / n,
            m2: self.m2 + o.m2 + d * d * na * nb / n,
        }
    }
}
