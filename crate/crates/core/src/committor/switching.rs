use super::{check_sets, finish, forward_backward, slice_residual, CommittorField};
use crate::chain::{reverse_one, stationary_distribution, AbSets, Regime, TransitionMatrix};
use crate::error::{Error, Result};
use crate::linalg::{can_reach, strong_components, Matrix};
use crate::tolerance::Tolerances;

/// Dynamics that switch at random between regimes.
///
/// A state `(i, m)` first moves with `regimes[m]` and then switches to regime
/// `m'` with probability `regime_transition[m][m']`. A deterministic cyclic
/// switch reproduces the periodic chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingSpec {
    pub regimes: Vec<TransitionMatrix>,
    pub regime_transition: TransitionMatrix,
}

impl SwitchingSpec {
    pub fn cyclic(regimes: Vec<TransitionMatrix>) -> Self {
        let m = regimes.len();
        let shift = Matrix::from_rows(m, (0..m).map(|k| vec![((k + 1) % m, 1.0)]).collect());
        Self { regimes, regime_transition: TransitionMatrix::from_raw(shift) }
    }

    /// Transition matrix on `(regime, state)` pairs, indexed `m * n + i`.
    pub fn augmented_matrix(&self) -> Matrix {
        let n = self.regimes[0].n_states();
        let m = self.regimes.len();
        let mut rows = Vec::with_capacity(n * m);
        for (k, p) in self.regimes.iter().enumerate() {
            let switch: Vec<(usize, f64)> = self.regime_transition.row(k).collect();
            for i in 0..n {
                let mut row = Vec::new();
                for (j, v) in p.row(i) {
                    for &(k2, w) in &switch {
                        row.push((k2 * n + j, v * w));
                    }
                }
                rows.push(row);
            }
        }
        Matrix::from_rows(n * m, rows)
    }
}

/// Committors of the regime-switching chain, one slice per regime.
pub fn solve_switching(spec: &SwitchingSpec, sets: &AbSets, tol: &Tolerances) -> Result<CommittorField> {
    let m = spec.regimes.len();
    if m == 0 || spec.regime_transition.n_states() != m {
        return Err(Error::invalid(format!(
            "{m} regimes with a {}x{} switching matrix",
            spec.regime_transition.n_states(),
            spec.regime_transition.n_states()
        )));
    }
    let n = spec.regimes[0].n_states();
    if spec.regimes.iter().any(|p| p.n_states() != n) {
        return Err(Error::invalid("regime matrices differ in size"));
    }
    check_sets(n, sets)?;
    let lift = |s: &[usize]| (0..m).flat_map(|k| s.iter().map(move |&i| k * n + i)).collect::<Vec<_>>();
    let aug_sets = AbSets::new(n * m, lift(sets.a()), lift(sets.b()))?;

    let p = spec.augmented_matrix();
    ensure_contractive(&p, &aug_sets, &vec![true; n * m], "forward")?;
    let pi = invariant_density(&p, tol)?;
    let back = reverse_one(&p, &pi, &pi);
    let positive: Vec<bool> = pi.iter().map(|&v| v > 0.0).collect();
    ensure_contractive(&back, &aug_sets, &positive, "backward")?;

    let (forward, backward) = forward_backward(&p, &back, &aug_sets, tol)?;
    let forward_residual = slice_residual(&forward, &p, &forward, &aug_sets, true);
    let backward_residual = slice_residual(&backward, &back, &backward, &aug_sets, false);
    let split = |q: Vec<f64>| q.chunks(n).map(|c| c.to_vec()).collect::<Vec<_>>();
    finish(Regime::Switching, split(forward), split(backward), forward_residual, backward_residual, tol)
}

/// Every transition-region state with `active` set must reach `A` or `B`;
/// otherwise the restricted system is singular.
fn ensure_contractive(p: &Matrix, sets: &AbSets, active: &[bool], which: &str) -> Result<()> {
    let n = p.n();
    let boundary: Vec<bool> = (0..n).map(|i| !sets.in_c(i)).collect();
    let reach = can_reach(&p.support(), &boundary);
    if (0..n).all(|i| !active[i] || reach[i]) {
        return Ok(());
    }
    let rho = restricted_spectral_radius(p, sets);
    Err(Error::solver(
        format!("{which} switching system is not contractive (spectral radius estimate {rho:.6})"),
        rho,
    ))
}

/// Power estimate of the spectral radius of `P` restricted to the transition region.
fn restricted_spectral_radius(p: &Matrix, sets: &AbSets) -> f64 {
    let n = p.n();
    let mut x: Vec<f64> = (0..n).map(|i| if sets.in_c(i) { 1.0 } else { 0.0 }).collect();
    let mut rho = 0.0;
    for _ in 0..500 {
        let mut y: Vec<f64> = (0..n)
            .map(|i| if sets.in_c(i) { p.row(i).map(|(j, v)| v * x[j]).sum() } else { 0.0 })
            .collect();
        rho = y.iter().fold(0.0f64, |a, b| a.max(*b));
        if rho == 0.0 {
            break;
        }
        y.iter_mut().for_each(|v| *v /= rho);
        x = y;
    }
    rho
}

/// An invariant distribution charging every closed class equally; transient
/// states get zero mass.
fn invariant_density(p: &Matrix, tol: &Tolerances) -> Result<Vec<f64>> {
    let n = p.n();
    let support = p.support();
    let (comp, count) = strong_components(&support);
    let mut closed = vec![true; count];
    for i in 0..n {
        if support[i].iter().any(|&j| comp[j] != comp[i]) {
            closed[comp[i]] = false;
        }
    }
    let n_closed = closed.iter().filter(|&&c| c).count() as f64;
    let mut pi = vec![0.0; n];
    for c in (0..count).filter(|&c| closed[c]) {
        let members: Vec<usize> = (0..n).filter(|&i| comp[i] == c).collect();
        let mut local = vec![usize::MAX; n];
        for (k, &i) in members.iter().enumerate() {
            local[i] = k;
        }
        let rows = members.iter().map(|&i| p.row(i).map(|(j, v)| (local[j], v)).collect()).collect();
        let sub = Matrix::from_rows(members.len(), rows);
        let w = stationary_distribution(&sub, tol)?;
        for (k, &i) in members.iter().enumerate() {
            pi[i] = w[k] / n_closed;
        }
    }
    Ok(pi)
}
