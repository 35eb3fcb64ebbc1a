//! Forward and backward committors in every regime.

mod finite;
mod periodic;
mod switching;

use crate::chain::{reverse_one, stationary_distribution, AbSets, ChainSpec, Regime, TransitionMatrix};
use crate::error::{Error, Result};
use crate::linalg::{solve_dominant, Matrix, SparseRows};
use crate::tolerance::Tolerances;

pub use finite::solve_finite;
pub(crate) use finite::finite_with;
pub use periodic::{solve_periodic, PeriodicMethod};
pub(crate) use periodic::periodic_with;
pub use switching::{solve_switching, SwitchingSpec};

/// Committor values indexed by `[slice][state]`.
///
/// The periodic regime stores slices `0..M`; slice `M` equals slice 0. The
/// switching solver stores one slice per regime.
#[derive(Debug, Clone, PartialEq)]
pub struct CommittorField {
    pub regime: Regime,
    pub forward: Vec<Vec<f64>>,
    pub backward: Vec<Vec<f64>>,
    /// Max-norm residual of the forward equations on the transition region.
    pub forward_residual: f64,
    pub backward_residual: f64,
}

impl CommittorField {
    pub fn n_slices(&self) -> usize {
        self.forward.len()
    }

    pub fn forward_at(&self, slice: usize) -> &[f64] {
        &self.forward[slice]
    }

    pub fn backward_at(&self, slice: usize) -> &[f64] {
        &self.backward[slice]
    }
}

/// Solves the committor problem for any regime, the periodic one with the
/// default method.
pub fn solve(spec: &ChainSpec, sets: &AbSets, tol: &Tolerances) -> Result<CommittorField> {
    match spec {
        ChainSpec::Stationary { matrix } => solve_stationary(matrix, sets, tol),
        ChainSpec::Periodic { matrices, .. } => solve_periodic(matrices, sets, PeriodicMethod::default(), tol),
        ChainSpec::FiniteTime { .. } => solve_finite(spec, sets, tol),
    }
}

/// Committors of an irreducible stationary chain.
pub fn solve_stationary(p: &TransitionMatrix, sets: &AbSets, tol: &Tolerances) -> Result<CommittorField> {
    check_sets(p.n_states(), sets)?;
    let pi = stationary_distribution(p, tol)?;
    stationary_with(p, &pi, sets, tol)
}

pub(crate) fn stationary_with(p: &Matrix, pi: &[f64], sets: &AbSets, tol: &Tolerances) -> Result<CommittorField> {
    let back = reverse_one(p, pi, pi);
    let (forward, backward) = forward_backward(p, &back, sets, tol)?;
    let forward_residual = cyclic_residual(&[&forward], &[p], 1, sets, true);
    let backward_residual = cyclic_residual(&[&backward], &[&back], -1, sets, false);
    finish(Regime::Stationary, vec![forward], vec![backward], forward_residual, backward_residual, tol)
}

/// Forward and backward committor of a single matrix and its reversal.
fn forward_backward(p: &Matrix, back: &Matrix, sets: &AbSets, tol: &Tolerances) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = p.n();
    let free: Vec<bool> = (0..n).map(|i| sets.in_c(i)).collect();
    let is_b: Vec<bool> = (0..n).map(|i| sets.in_b(i)).collect();
    let is_a: Vec<bool> = (0..n).map(|i| sets.in_a(i)).collect();
    let forward = hitting_probability(p, &free, &is_b, tol)?;
    let backward = hitting_probability(back, &free, &is_a, tol)?;
    Ok((forward, backward))
}

pub(crate) fn check_sets(n_states: usize, sets: &AbSets) -> Result<()> {
    if sets.n_states() != n_states {
        return Err(Error::invalid(format!(
            "sets are defined on {} states, chain has {n_states}",
            sets.n_states()
        )));
    }
    Ok(())
}

/// Probability of entering `target` before leaving the `free` states.
///
/// Solves `q_i = sum_j p_ij q_j` on free states with `q = 1` on the target
/// and `q = 0` elsewhere, by direct sparse elimination.
pub(crate) fn hitting_probability(p: &Matrix, free: &[bool], target: &[bool], tol: &Tolerances) -> Result<Vec<f64>> {
    let n = p.n();
    let free_states: Vec<usize> = (0..n).filter(|&i| free[i]).collect();
    let mut pos = vec![usize::MAX; n];
    for (r, &i) in free_states.iter().enumerate() {
        pos[i] = r;
    }
    let mut system = SparseRows::new(free_states.len());
    let mut rhs = vec![0.0; free_states.len()];
    for (r, &i) in free_states.iter().enumerate() {
        system.add(r, r, 1.0);
        for (j, v) in p.row(i) {
            if free[j] {
                system.add(r, pos[j], -v);
            } else if target[j] {
                rhs[r] += v;
            }
        }
    }
    let x = solve_dominant(system, &rhs, tol.equation_residual)?;
    let mut q: Vec<f64> = target.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect();
    for (r, &i) in free_states.iter().enumerate() {
        q[i] = x[r];
    }
    clip(&mut q, tol.committor_clip)?;
    Ok(q)
}

/// Clamps roundoff excursions outside `[0, 1]`; anything beyond `slack` is an error.
pub(crate) fn clip(q: &mut [f64], slack: f64) -> Result<()> {
    for v in q.iter_mut() {
        if !(*v >= -slack && *v <= 1.0 + slack) {
            let dev = if *v < 0.0 { -*v } else { *v - 1.0 };
            return Err(Error::solver(format!("committor value {v} outside [0, 1]"), dev));
        }
        *v = v.clamp(0.0, 1.0);
    }
    Ok(())
}

/// Residual of `q_m = P_m q_{m+step}` on the transition region, slices mod `M`.
/// Boundary states are checked against their fixed values.
pub(crate) fn cyclic_residual(q: &[&Vec<f64>], mats: &[&Matrix], step: isize, sets: &AbSets, forward: bool) -> f64 {
    let m = q.len() as isize;
    let mut worst = 0.0f64;
    for s in 0..q.len() {
        let next = q[(s as isize + step).rem_euclid(m) as usize];
        worst = worst.max(slice_residual(q[s], mats[s], next, sets, forward));
    }
    worst
}

pub(crate) fn slice_residual(q: &[f64], p: &Matrix, next: &[f64], sets: &AbSets, forward: bool) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..q.len() {
        let expected = if sets.in_c(i) {
            p.row(i).map(|(j, v)| v * next[j]).sum::<f64>()
        } else if sets.in_b(i) == forward {
            1.0
        } else {
            0.0
        };
        worst = worst.max((q[i] - expected).abs());
    }
    worst
}

fn finish(
    regime: Regime,
    forward: Vec<Vec<f64>>,
    backward: Vec<Vec<f64>>,
    forward_residual: f64,
    backward_residual: f64,
    tol: &Tolerances,
) -> Result<CommittorField> {
    let worst = forward_residual.max(backward_residual);
    if !(worst <= tol.equation_residual) {
        return Err(Error::solver("committor equations not satisfied", worst));
    }
    Ok(CommittorField { regime, forward, backward, forward_residual, backward_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tm(rows: &[Vec<f64>]) -> TransitionMatrix {
        TransitionMatrix::from_nested(rows).unwrap()
    }

    /// Path graph on 0..4 with uniform steps to the neighbours.
    pub(crate) fn gambler() -> TransitionMatrix {
        tm(&[
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.5, 0.0, 0.5, 0.0],
            vec![0.0, 0.5, 0.0, 0.5],
            vec![0.0, 0.0, 0.5, 0.5],
        ])
    }

    #[test]
    fn gambler_forward_committor() {
        let sets = AbSets::new(4, vec![0], vec![3]).unwrap();
        let q = solve_stationary(&gambler(), &sets, &Tolerances::default()).unwrap();
        let expect = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        for (a, b) in q.forward[0].iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        // reversible chain
        for (f, b) in q.forward[0].iter().zip(&q.backward[0]) {
            assert!((f + b - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn empty_transition_region() {
        let p = tm(&[vec![0.8, 0.2], vec![0.1, 0.9]]);
        let sets = AbSets::new(2, vec![0], vec![1]).unwrap();
        let q = solve_stationary(&p, &sets, &Tolerances::default()).unwrap();
        assert_eq!(q.forward[0], vec![0.0, 1.0]);
        assert_eq!(q.backward[0], vec![1.0, 0.0]);
    }

    #[test]
    fn reducible_chain_is_a_precondition_error() {
        let p = tm(&[vec![1.0, 0.0, 0.0], vec![0.5, 0.0, 0.5], vec![0.0, 0.0, 1.0]]);
        let sets = AbSets::new(3, vec![0], vec![2]).unwrap();
        let err = solve_stationary(&p, &sets, &Tolerances::default()).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn clip_policy() {
        let mut ok = vec![-1e-12, 1.0 + 1e-12, 0.5];
        clip(&mut ok, 1e-10).unwrap();
        assert_eq!(ok, vec![0.0, 1.0, 0.5]);
        assert!(clip(&mut [1.1], 1e-10).is_err());
    }
}
