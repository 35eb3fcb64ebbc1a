use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_sets, clip, cyclic_residual, finish, forward_backward, hitting_probability, CommittorField};
use crate::chain::{periodic_stationary_family, reverse_one, AbSets, DensityFamily, Regime, TransitionMatrix};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodicMethod {
    /// Dense solve of the one-period composed system at slice 0, then
    /// propagation to the other slices.
    Stacked,
    /// Sparse solve on the time-augmented state space of size `|C| M`.
    #[default]
    Augmented,
}

/// Committors of an M-periodic chain with irreducible period product.
pub fn solve_periodic(
    matrices: &[TransitionMatrix],
    sets: &AbSets,
    method: PeriodicMethod,
    tol: &Tolerances,
) -> Result<CommittorField> {
    if matrices.is_empty() {
        return Err(Error::invalid("periodic chain needs at least one matrix"));
    }
    check_sets(matrices[0].n_states(), sets)?;
    let family = periodic_stationary_family(matrices, tol)?;
    periodic_with(matrices, &family, sets, method, tol)
}

pub(crate) fn periodic_with(
    matrices: &[TransitionMatrix],
    family: &DensityFamily,
    sets: &AbSets,
    method: PeriodicMethod,
    tol: &Tolerances,
) -> Result<CommittorField> {
    let m = matrices.len();
    let forward_mats: Vec<&Matrix> = matrices.iter().map(|p| p.matrix()).collect();
    let back: Vec<Matrix> = (0..m)
        .map(|k| {
            let prev = (k + m - 1) % m;
            reverse_one(&matrices[prev], family.at(prev), family.at(k))
        })
        .collect();
    let back_mats: Vec<&Matrix> = back.iter().collect();

    let (forward, backward) = match method {
        PeriodicMethod::Augmented if m == 1 => {
            let (f, b) = forward_backward(forward_mats[0], back_mats[0], sets, tol)?;
            (vec![f], vec![b])
        }
        PeriodicMethod::Augmented => (
            augmented(&forward_mats, 1, sets, true, tol)?,
            augmented(&back_mats, -1, sets, false, tol)?,
        ),
        PeriodicMethod::Stacked => (
            stacked(&forward_mats, 1, sets, true, tol)?,
            stacked(&back_mats, -1, sets, false, tol)?,
        ),
    };
    let fr: Vec<&Vec<f64>> = forward.iter().collect();
    let br: Vec<&Vec<f64>> = backward.iter().collect();
    let forward_residual = cyclic_residual(&fr, &forward_mats, 1, sets, true);
    let backward_residual = cyclic_residual(&br, &back_mats, -1, sets, false);
    finish(Regime::Periodic, forward, backward, forward_residual, backward_residual, tol)
}

fn shift(m: usize, step: isize, period: usize) -> usize {
    (m as isize + step).rem_euclid(period as isize) as usize
}

/// Block-cyclic matrix on `(slice, state)` pairs: slice `m` moves with
/// `mats[m]` into slice `m + step`.
fn augmented(mats: &[&Matrix], step: isize, sets: &AbSets, forward: bool, tol: &Tolerances) -> Result<Vec<Vec<f64>>> {
    let period = mats.len();
    let n = mats[0].n();
    let mut rows = Vec::with_capacity(n * period);
    for (m, p) in mats.iter().enumerate() {
        let offset = shift(m, step, period) * n;
        for i in 0..n {
            rows.push(p.row(i).map(|(j, v)| (offset + j, v)).collect());
        }
    }
    let big = Matrix::from_rows(n * period, rows);
    let free: Vec<bool> = (0..n * period).map(|k| sets.in_c(k % n)).collect();
    let target: Vec<bool> = (0..n * period)
        .map(|k| if forward { sets.in_b(k % n) } else { sets.in_a(k % n) })
        .collect();
    let q = hitting_probability(&big, &free, &target, tol)?;
    Ok(q.chunks(n).map(|c| c.to_vec()).collect())
}

fn stacked(mats: &[&Matrix], step: isize, sets: &AbSets, forward: bool, tol: &Tolerances) -> Result<Vec<Vec<f64>>> {
    let period = mats.len();
    let n = mats[0].n();
    let c_states = sets.c_states();
    let c = c_states.len();
    let mut pos = vec![usize::MAX; n];
    for (r, &i) in c_states.iter().enumerate() {
        pos[i] = r;
    }
    let target = |j: usize| if forward { sets.in_b(j) } else { sets.in_a(j) };
    let restricted = |p: &Matrix| {
        let mut q = DMatrix::<f64>::zeros(c, c);
        let mut b = DVector::<f64>::zeros(c);
        for (r, &i) in c_states.iter().enumerate() {
            for (j, v) in p.row(i) {
                if pos[j] != usize::MAX {
                    q[(r, pos[j])] += v;
                } else if target(j) {
                    b[r] += v;
                }
            }
        }
        (q, b)
    };

    let order: Vec<usize> = (0..period).scan(0usize, |s, _| {
        let cur = *s;
        *s = shift(cur, step, period);
        Some(cur)
    })
    .collect();
    let blocks: Vec<(DMatrix<f64>, DVector<f64>)> = (0..period).map(|m| restricted(mats[m])).collect();

    // q_{s0} = Q_{s0} ... Q_{s_{M-1}} q_{s0} + sum_k Q_{s0} ... Q_{s_{k-1}} b_{s_k}
    let mut transfer = DMatrix::<f64>::identity(c, c);
    let mut rhs = DVector::<f64>::zeros(c);
    for &s in &order {
        rhs += &transfer * &blocks[s].1;
        transfer = &transfer * &blocks[s].0;
    }
    let system = DMatrix::<f64>::identity(c, c) - transfer;
    let x0 = system
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::solver("singular one-period committor system", f64::INFINITY))?;
    let residual = (&system * &x0 - &rhs).amax();
    if !(residual <= tol.equation_residual) {
        return Err(Error::solver("one-period committor system residual above tolerance", residual));
    }

    let mut restricted_q: Vec<Option<DVector<f64>>> = vec![None; period];
    restricted_q[order[0]] = Some(x0);
    for k in (1..period).rev() {
        let s = order[k];
        let succ = order[(k + 1) % period];
        let next = restricted_q[succ].as_ref().unwrap();
        restricted_q[s] = Some(&blocks[s].0 * next + &blocks[s].1);
    }

    let mut out = Vec::with_capacity(period);
    for rq in restricted_q {
        let rq = rq.unwrap();
        let mut q: Vec<f64> = (0..n).map(|j| if target(j) { 1.0 } else { 0.0 }).collect();
        for (r, &i) in c_states.iter().enumerate() {
            q[i] = rq[r];
        }
        clip(&mut q, tol.committor_clip)?;
        out.push(q);
    }
    Ok(out)
}
