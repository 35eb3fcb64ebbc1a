use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{density_family, AbSets, ChainSpec};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::stream_rng;
use crate::tolerance::Tolerances;

/// A sampled path. `states[k]` is the state at time `slice_offset + k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrajectorySample {
    pub states: Vec<usize>,
    pub slice_offset: usize,
    pub rng_seed: u64,
}

/// First entrances at or after `n` and last exits at or before `n`, as
/// trajectory indices. `None` stands for `+inf` and `-inf` respectively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct HittingTimes {
    pub first_a: Option<usize>,
    pub first_b: Option<usize>,
    pub last_a: Option<usize>,
    pub last_b: Option<usize>,
}

impl HittingTimes {
    /// The path last came from `A` rather than `B`.
    pub fn came_from_a(&self) -> bool {
        match (self.last_a, self.last_b) {
            (Some(a), Some(b)) => a > b,
            (Some(_), None) => true,
            _ => false,
        }
    }

    /// The path next goes to `B` rather than `A`.
    pub fn goes_to_b(&self) -> bool {
        match (self.first_a, self.first_b) {
            (Some(a), Some(b)) => b < a,
            (None, Some(_)) => true,
            _ => false,
        }
    }
}

pub fn hitting_times(traj: &TrajectorySample, sets: &AbSets, n: usize) -> HittingTimes {
    let s = &traj.states;
    assert!(n < s.len(), "time index outside the trajectory");
    HittingTimes {
        first_a: (n..s.len()).find(|&k| sets.in_a(s[k])),
        first_b: (n..s.len()).find(|&k| sets.in_b(s[k])),
        last_a: (0..=n).rev().find(|&k| sets.in_a(s[k])),
        last_b: (0..=n).rev().find(|&k| sets.in_b(s[k])),
    }
}

/// Hitting times for every index in one pass each way.
pub(crate) fn all_hitting_times(states: &[usize], sets: &AbSets) -> Vec<HittingTimes> {
    let len = states.len();
    let mut out = vec![HittingTimes::default(); len];
    let (mut la, mut lb) = (None, None);
    for k in 0..len {
        if sets.in_a(states[k]) {
            la = Some(k);
        }
        if sets.in_b(states[k]) {
            lb = Some(k);
        }
        out[k].last_a = la;
        out[k].last_b = lb;
    }
    let (mut fa, mut fb) = (None, None);
    for k in (0..len).rev() {
        if sets.in_a(states[k]) {
            fa = Some(k);
        }
        if sets.in_b(states[k]) {
            fb = Some(k);
        }
        out[k].first_a = fa;
        out[k].first_b = fb;
    }
    out
}

/// Inverse-CDF sampler over the rows of one matrix.
pub(crate) struct RowSampler {
    cols: Vec<Vec<usize>>,
    cum: Vec<Vec<f64>>,
}

impl RowSampler {
    pub(crate) fn new(p: &Matrix) -> Self {
        let mut cols = Vec::with_capacity(p.n());
        let mut cum = Vec::with_capacity(p.n());
        for i in 0..p.n() {
            let mut c = Vec::new();
            let mut acc = Vec::new();
            let mut total = 0.0;
            for (j, v) in p.row(i) {
                if v > 0.0 {
                    total += v;
                    c.push(j);
                    acc.push(total);
                }
            }
            cols.push(c);
            cum.push(acc);
        }
        Self { cols, cum }
    }

    pub(crate) fn step<R: Rng>(&self, i: usize, rng: &mut R) -> usize {
        let cum = &self.cum[i];
        let u = rng.random::<f64>() * cum.last().copied().unwrap_or(0.0);
        let k = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
        self.cols[i][k]
    }
}

fn sample_from<R: Rng>(density: &[f64], rng: &mut R) -> usize {
    let total: f64 = density.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &d) in density.iter().enumerate() {
        if d > 0.0 {
            acc += d;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// One trajectory of `length` states started from the invariant law at
/// slice 0 (stationary or periodic regime).
pub fn simulate_trajectory(spec: &ChainSpec, length: usize, seed: u64, tol: &Tolerances) -> Result<TrajectorySample> {
    if matches!(spec, ChainSpec::FiniteTime { .. }) {
        return Err(Error::precondition("use an ensemble for the finite-time regime"));
    }
    let start = density_family(spec, tol)?.densities.swap_remove(0);
    let samplers: Vec<RowSampler> = spec.matrices().iter().map(|p| RowSampler::new(p)).collect();
    let m = samplers.len();
    let mut rng = stream_rng(seed, 0);
    let mut states = Vec::with_capacity(length);
    if length > 0 {
        states.push(sample_from(&start, &mut rng));
    }
    for k in 1..length {
        let prev = states[k - 1];
        states.push(samplers[(k - 1) % m].step(prev, &mut rng));
    }
    Ok(TrajectorySample { states, slice_offset: 0, rng_seed: seed })
}

fn finite_path<R: Rng>(samplers: &[RowSampler], initial: &[f64], rng: &mut R) -> Vec<usize> {
    let mut states = Vec::with_capacity(samplers.len() + 1);
    states.push(sample_from(initial, rng));
    for s in samplers {
        let prev = *states.last().unwrap();
        states.push(s.step(prev, rng));
    }
    states
}

/// `k` independent realizations of a finite-time chain. Realization `r` uses
/// stream `r` of the generator, so the ensemble does not depend on threading.
pub fn simulate_ensemble(spec: &ChainSpec, k: usize, seed: u64) -> Result<Vec<TrajectorySample>> {
    let ChainSpec::FiniteTime { matrices, initial_density, .. } = spec else {
        return Err(Error::precondition("ensembles are drawn from finite-time chains"));
    };
    let samplers: Vec<RowSampler> = matrices.iter().map(|p| RowSampler::new(p)).collect();
    Ok((0..k)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r as u64);
            TrajectorySample { states: finite_path(&samplers, initial_density, &mut rng), slice_offset: 0, rng_seed: seed }
        })
        .collect())
}

/// Stationary and periodic chains give one trajectory of `size` states;
/// finite-time chains give `size` realizations of the window.
pub fn simulate(spec: &ChainSpec, size: usize, seed: u64, tol: &Tolerances) -> Result<Vec<TrajectorySample>> {
    match spec {
        ChainSpec::FiniteTime { .. } => simulate_ensemble(spec, size, seed),
        _ => Ok(vec![simulate_trajectory(spec, size, seed, tol)?]),
    }
}

pub(crate) fn finite_samplers(spec: &ChainSpec) -> Option<(Vec<RowSampler>, &[f64])> {
    match spec {
        ChainSpec::FiniteTime { matrices, initial_density, .. } => {
            Some((matrices.iter().map(|p| RowSampler::new(p)).collect(), initial_density))
        }
        _ => None,
    }
}

pub(crate) fn draw_finite<R: Rng>(samplers: &[RowSampler], initial: &[f64], rng: &mut R) -> Vec<usize> {
    finite_path(samplers, initial, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::TransitionMatrix;

    fn sets3() -> AbSets {
        AbSets::new(3, vec![0], vec![2]).unwrap()
    }

    #[test]
    fn hitting_times_by_definition() {
        let sets = sets3();
        let t = TrajectorySample { states: vec![0, 1, 2], slice_offset: 0, rng_seed: 0 };
        let h = hitting_times(&t, &sets, 1);
        assert_eq!(h, HittingTimes { first_a: None, first_b: Some(2), last_a: Some(0), last_b: None });
        let t = TrajectorySample { states: vec![2, 1, 0], slice_offset: 0, rng_seed: 0 };
        let h = hitting_times(&t, &sets, 1);
        assert_eq!((h.last_b, h.first_a), (Some(0), Some(2)));
        let t = TrajectorySample { states: vec![1, 1, 1], slice_offset: 0, rng_seed: 0 };
        assert_eq!(hitting_times(&t, &sets, 1), HittingTimes::default());
    }

    #[test]
    fn bulk_hitting_times_match_pointwise() {
        let sets = sets3();
        let t = TrajectorySample { states: vec![1, 0, 1, 1, 2, 1, 0, 1], slice_offset: 0, rng_seed: 0 };
        let all = all_hitting_times(&t.states, &sets);
        for n in 0..t.states.len() {
            assert_eq!(all[n], hitting_times(&t, &sets, n));
        }
    }

    #[test]
    fn seeded_runs_repeat() {
        let p = TransitionMatrix::from_nested(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let spec = ChainSpec::stationary(p);
        let tol = Tolerances::default();
        let a = simulate_trajectory(&spec, 1000, 5, &tol).unwrap();
        let b = simulate_trajectory(&spec, 1000, 5, &tol).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, simulate_trajectory(&spec, 1000, 6, &tol).unwrap());
    }

    #[test]
    fn absorbing_row_is_constant() {
        let p = TransitionMatrix::from_nested(&[vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let spec = ChainSpec::finite_homogeneous(&p, 6, vec![1.0, 0.0]);
        let e = simulate_ensemble(&spec, 4, 1).unwrap();
        assert_eq!(e.len(), 4);
        assert!(e.iter().all(|t| t.states == vec![0; 6]));
    }
}
