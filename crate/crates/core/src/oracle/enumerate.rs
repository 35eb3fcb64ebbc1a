use serde::Serialize;

use crate::chain::{density_family, reverse_transitions, AbSets, ChainSpec};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

/// Mass of the enumerated paths and an upper bound on the mass left out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathBound {
    pub lower: f64,
    pub truncation: f64,
    /// Number of steps actually enumerated.
    pub steps: usize,
}

impl PathBound {
    pub fn contains(&self, value: f64, slack: f64) -> bool {
        value >= self.lower - slack && value <= self.lower + self.truncation + slack
    }
}

/// Sums the probability of all paths from `state` at `slice` that stay in the
/// transition region and then hit `B` (forward) or, in reversed time, `A`
/// (backward), over path lengths up to `max_len`.
///
/// Path mass is propagated one step at a time, so the sum over exponentially
/// many paths costs `O(max_len * nnz)`. The truncation bound is the mass still
/// inside the transition region after the last step. In the finite regime
/// the whole window is covered and the result is exact.
pub fn enumerate_committor(
    spec: &ChainSpec,
    sets: &AbSets,
    state: usize,
    slice: usize,
    max_len: usize,
    direction: Direction,
    tol: &Tolerances,
) -> Result<PathBound> {
    if state >= spec.n_states() || !sets.in_c(state) {
        return Err(Error::precondition(format!("state {state} is not in the transition region")));
    }
    if max_len == 0 {
        return Err(Error::invalid("max_len must be at least 1"));
    }
    let slices = spec.n_slices();
    if slice >= slices {
        return Err(Error::invalid(format!("slice {slice} outside 0..{slices}")));
    }
    let finite = matches!(spec, ChainSpec::FiniteTime { .. });
    let reversal = match direction {
        Direction::Forward => None,
        Direction::Backward => Some(reverse_transitions(spec, &density_family(spec, tol)?)?),
    };
    let step_matrix = |t: usize| -> Option<&Matrix> {
        match direction {
            Direction::Forward => spec.matrix_at(t).map(|p| p.matrix()),
            Direction::Backward => reversal.as_ref().unwrap().at(t),
        }
    };
    let (steps, next_slice): (usize, Box<dyn Fn(usize) -> usize>) = match (direction, finite) {
        (Direction::Forward, true) => (slices - 1 - slice, Box::new(|t| t + 1)),
        (Direction::Backward, true) => (slice, Box::new(|t| t - 1)),
        (Direction::Forward, false) => (max_len, Box::new(move |t| (t + 1) % slices)),
        (Direction::Backward, false) => (max_len, Box::new(move |t| (t + slices - 1) % slices)),
    };
    let hits = |j: usize| match direction {
        Direction::Forward => sets.in_b(j),
        Direction::Backward => sets.in_a(j),
    };

    let n = spec.n_states();
    let mut mass = vec![0.0; n];
    mass[state] = 1.0;
    let mut t = slice;
    let mut lower = 0.0;
    let mut done = 0;
    for _ in 0..steps {
        let p = step_matrix(t).expect("step inside the window");
        let mut next = vec![0.0; n];
        for i in 0..n {
            if mass[i] == 0.0 {
                continue;
            }
            for (j, v) in p.row(i) {
                next[j] += mass[i] * v;
            }
        }
        for j in 0..n {
            if hits(j) {
                lower += next[j];
            }
            if !sets.in_c(j) {
                next[j] = 0.0;
            }
        }
        mass = next;
        t = next_slice(t);
        done += 1;
        if mass.iter().all(|&m| m == 0.0) {
            break;
        }
    }
    // in the finite regime paths still inside C at the window edge never hit
    let truncation = if finite { 0.0 } else { mass.iter().sum() };
    Ok(PathBound { lower, truncation, steps: done })
}
