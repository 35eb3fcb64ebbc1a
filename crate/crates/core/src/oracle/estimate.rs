use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::trajectory::{all_hitting_times, draw_finite, finite_samplers, TrajectorySample};
use crate::chain::{AbSets, ChainSpec};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Monte Carlo estimate with its estimated standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `|value - exact| / std_error`; infinite when the error vanishes but the
    /// values differ.
    pub fn z_score(&self, exact: f64) -> f64 {
        let d = (self.value - exact).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }

    fn from_batches(total: f64, len: usize, batch_means: &[f64]) -> Self {
        let value = total / len as f64;
        let b = batch_means.len() as f64;
        let mean = batch_means.iter().sum::<f64>() / b;
        let var = batch_means.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (b - 1.0);
        Self { value, std_error: (var / b).sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicEstimates {
    pub mu: Vec<Estimate>,
    /// Sparse current estimates `(i, j, estimate)` for every observed pair.
    pub current: Vec<(usize, usize, Estimate)>,
    pub rate: Estimate,
    pub batches: usize,
}

impl ErgodicEstimates {
    pub fn current_at(&self, i: usize, j: usize) -> Estimate {
        self.current
            .iter()
            .find(|e| e.0 == i && e.1 == j)
            .map(|e| e.2)
            .unwrap_or(Estimate { value: 0.0, std_error: 0.0 })
    }
}

pub const DEFAULT_BATCHES: usize = 200;

/// Time averages of the reactive indicators along one stationary trajectory.
///
/// Averages run over `n = 0..L-1`, so that every term has a successor state.
/// Standard errors come from non-overlapping batch means, which accounts for
/// the serial correlation of the indicators.
pub fn ergodic_estimates(traj: &TrajectorySample, sets: &AbSets, batches: usize) -> Result<ErgodicEstimates> {
    let states = &traj.states;
    if states.len() < 2 * batches.max(2) {
        return Err(Error::invalid(format!(
            "trajectory of length {} is too short for {batches} batches",
            states.len()
        )));
    }
    let batches = batches.max(2);
    let n_states = sets.n_states();
    let len = states.len() - 1;
    let hits = all_hitting_times(states, sets);
    let bounds: Vec<usize> = (0..=batches).map(|b| b * len / batches).collect();

    let mut mu = vec![vec![0u64; batches]; n_states];
    let mut rate = vec![0u64; batches];
    let mut current: BTreeMap<(usize, usize), Vec<u64>> = BTreeMap::new();
    for b in 0..batches {
        for n in bounds[b]..bounds[b + 1] {
            let (i, j) = (states[n], states[n + 1]);
            let from_a = hits[n].came_from_a();
            if !from_a {
                continue;
            }
            if sets.in_c(i) && hits[n].goes_to_b() {
                mu[i][b] += 1;
            }
            if hits[n + 1].goes_to_b() {
                current.entry((i, j)).or_insert_with(|| vec![0; batches])[b] += 1;
                if sets.in_a(i) {
                    rate[b] += 1;
                }
            }
        }
    }
    let sizes: Vec<f64> = (0..batches).map(|b| (bounds[b + 1] - bounds[b]) as f64).collect();
    let summarize = |counts: &[u64]| {
        let total: u64 = counts.iter().sum();
        let means: Vec<f64> = counts.iter().zip(&sizes).map(|(&c, s)| c as f64 / s).collect();
        Estimate::from_batches(total as f64, len, &means)
    };
    Ok(ErgodicEstimates {
        mu: mu.iter().map(|c| summarize(c)).collect(),
        current: current.iter().map(|(&(i, j), c)| (i, j, summarize(c))).collect(),
        rate: summarize(&rate),
        batches,
    })
}

/// Window-averaged departure rate `k_N` estimated from `k` independent
/// realizations; the standard error is the sample deviation over `sqrt(k)`.
pub fn ensemble_rate_estimate(spec: &ChainSpec, sets: &AbSets, k: usize, seed: u64) -> Result<Estimate> {
    let Some((samplers, initial)) = finite_samplers(spec) else {
        return Err(Error::precondition("ensemble rates need a finite-time chain"));
    };
    if k == 0 {
        return Err(Error::invalid("ensemble size must be at least 1"));
    }
    let horizon = spec.n_slices();
    let values: Vec<f64> = (0..k)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r as u64);
            let path = draw_finite(&samplers, initial, &mut rng);
            let hits = all_hitting_times(&path, sets);
            let departures = (0..horizon - 1)
                .filter(|&n| sets.in_a(path[n]) && hits[n + 1].goes_to_b())
                .count();
            departures as f64 / horizon as f64
        })
        .collect();
    let total = values.iter().fold(0.0, |a, b| a + b);
    let mean = total / k as f64;
    let var = if k > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).fold(0.0, |a, b| a + b) / (k - 1) as f64
    } else {
        0.0
    };
    Ok(Estimate { value: mean, std_error: (var / k as f64).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::TransitionMatrix;
    use crate::oracle::simulate_trajectory;
    use crate::tolerance::Tolerances;

    #[test]
    fn trajectory_avoiding_a_gives_zero() {
        let sets = AbSets::new(3, vec![0], vec![2]).unwrap();
        let traj = TrajectorySample { states: [1, 2].repeat(500), slice_offset: 0, rng_seed: 0 };
        let e = ergodic_estimates(&traj, &sets, 10).unwrap();
        assert_eq!(e.rate.value, 0.0);
        assert!(e.mu.iter().all(|m| m.value == 0.0));
        assert!(e.current.is_empty());
    }

    #[test]
    fn window_of_two_counts_direct_jumps() {
        let p = TransitionMatrix::from_nested(&[vec![0.4, 0.3, 0.3], vec![0.2, 0.5, 0.3], vec![0.1, 0.1, 0.8]]).unwrap();
        let spec = ChainSpec::finite(vec![p], vec![0.5, 0.3, 0.2]);
        let sets = AbSets::new(3, vec![0], vec![2]).unwrap();
        let e = ensemble_rate_estimate(&spec, &sets, 20000, 3).unwrap();
        // k_2 = P(X0 in A, X1 in B) / 2
        let exact = 0.5 * 0.3 / 2.0;
        assert!(e.z_score(exact) < 4.0, "{e:?}");
    }

    #[test]
    fn two_state_rate_is_consistent() {
        let (a, b) = (0.2, 0.1);
        let p = TransitionMatrix::from_nested(&[vec![1.0 - a, a], vec![b, 1.0 - b]]).unwrap();
        let spec = ChainSpec::stationary(p);
        let sets = AbSets::new(2, vec![0], vec![1]).unwrap();
        let traj = simulate_trajectory(&spec, 200_000, 11, &Tolerances::default()).unwrap();
        let e = ergodic_estimates(&traj, &sets, DEFAULT_BATCHES).unwrap();
        assert!(e.rate.z_score(1.0 / 15.0) < 4.0, "{:?}", e.rate);
    }
}
