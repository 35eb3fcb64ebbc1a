use super::{check_sets, clip, finish, slice_residual, CommittorField};
use crate::chain::{propagate_density, reverse_transitions, AbSets, ChainSpec, DensityFamily, Regime};
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Committors on a finite window by the exact backward and forward sweeps.
pub fn solve_finite(spec: &ChainSpec, sets: &AbSets, tol: &Tolerances) -> Result<CommittorField> {
    let densities = propagate_density(spec)?;
    finite_with(spec, &densities, sets, tol)
}

pub(crate) fn finite_with(
    spec: &ChainSpec,
    densities: &DensityFamily,
    sets: &AbSets,
    tol: &Tolerances,
) -> Result<CommittorField> {
    let ChainSpec::FiniteTime { horizon, matrices, .. } = spec else {
        return Err(Error::precondition("finite-time committors need a finite-time chain"));
    };
    let horizon = *horizon;
    if horizon < 2 || matrices.len() + 1 != horizon {
        return Err(Error::invalid(format!("horizon {horizon} with {} matrices", matrices.len())));
    }
    check_sets(spec.n_states(), sets)?;
    let n = spec.n_states();
    let reversal = reverse_transitions(spec, densities)?;

    let mut forward = vec![sets.indicator_b(); horizon];
    for t in (0..horizon - 1).rev() {
        let (head, tail) = forward.split_at_mut(t + 1);
        let next = &tail[0];
        let cur = &mut head[t];
        for i in 0..n {
            if sets.in_c(i) {
                cur[i] = matrices[t].row(i).map(|(j, v)| v * next[j]).sum();
            }
        }
        clip(cur, tol.committor_clip)?;
    }

    let mut backward = vec![sets.indicator_a(); horizon];
    for t in 1..horizon {
        let back = reversal.at(t).expect("reversal covers slices 1..N");
        let (head, tail) = backward.split_at_mut(t);
        let prev = &head[t - 1];
        let cur = &mut tail[0];
        for i in 0..n {
            if sets.in_c(i) {
                cur[i] = back.row(i).map(|(j, v)| v * prev[j]).sum();
            }
        }
        clip(cur, tol.committor_clip)?;
    }

    let mut forward_residual = 0.0f64;
    for t in 0..horizon - 1 {
        forward_residual = forward_residual.max(slice_residual(&forward[t], &matrices[t], &forward[t + 1], sets, true));
    }
    let mut backward_residual = 0.0f64;
    for t in 1..horizon {
        let back = reversal.at(t).unwrap();
        backward_residual = backward_residual.max(slice_residual(&backward[t], back, &backward[t - 1], sets, false));
    }
    finish(Regime::Finite, forward, backward, forward_residual, backward_residual, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::TransitionMatrix;

    #[test]
    fn two_slice_window() {
        let p = TransitionMatrix::from_nested(&[
            vec![0.2, 0.5, 0.3],
            vec![0.1, 0.3, 0.6],
            vec![0.0, 0.5, 0.5],
        ])
        .unwrap();
        let spec = ChainSpec::finite(vec![p], vec![0.5, 0.25, 0.25]);
        let sets = AbSets::new(3, vec![0], vec![2]).unwrap();
        let q = solve_finite(&spec, &sets, &Tolerances::default()).unwrap();
        assert_eq!(q.forward[0], vec![0.0, 0.6, 1.0]);
        assert_eq!(q.forward[1], vec![0.0, 0.0, 1.0]);
        assert_eq!(q.backward[0], vec![1.0, 0.0, 0.0]);
        // state 1 at time 1: mass 0.5*0.5 from A, 0.25*0.3 from 1, 0.25*0.5 from B
        let expect = 0.25 / (0.25 + 0.075 + 0.125);
        assert!((q.backward[1][1] - expect).abs() < 1e-15);
    }

    #[test]
    fn unreached_state_has_zero_backward_committor() {
        let id = TransitionMatrix::from_nested(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let spec = ChainSpec::finite_homogeneous(&id, 4, vec![0.5, 0.0, 0.5]);
        let sets = AbSets::new(3, vec![0], vec![2]).unwrap();
        let q = solve_finite(&spec, &sets, &Tolerances::default()).unwrap();
        assert!(q.backward.iter().all(|b| b[1] == 0.0));
    }
}
