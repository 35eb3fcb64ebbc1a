//! Reactive distributions, currents, rates and mean transition times.

mod conservation;

use serde::Serialize;

use crate::chain::{AbSets, ChainSpec, DensityFamily, Regime};
use crate::committor::CommittorField;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::tolerance::Tolerances;

pub use conservation::{check_conservation, ConservationReport};

/// `mu_i(n) = q-_i(n) d_i(n) q+_i(n)` for every slice.
pub fn reactive_distribution(committors: &CommittorField, densities: &DensityFamily) -> Vec<Vec<f64>> {
    (0..committors.n_slices())
        .map(|s| {
            let (qf, qb, d) = (committors.forward_at(s), committors.backward_at(s), densities.at(s));
            (0..d.len()).map(|i| qb[i] * d[i] * qf[i]).collect()
        })
        .collect()
}

/// Total reactive mass `Z(n)` of each slice, summed left to right.
pub fn reactive_mass(mu: &[Vec<f64>]) -> Vec<f64> {
    mu.iter().map(|m| m.iter().sum()).collect()
}

/// `mu / Z` per slice; `None` where the slice carries no reactive mass.
pub fn normalize_reactive(mu: &[Vec<f64>]) -> Vec<Option<Vec<f64>>> {
    mu.iter()
        .map(|m| {
            let z: f64 = m.iter().sum();
            (z > 0.0).then(|| m.iter().map(|v| v / z).collect())
        })
        .collect()
}

/// `f_ij(n) = q-_i(n) d_i(n) P_ij(n) q+_j(n+1)` on every slice with an
/// outgoing step: all slices in the stationary and periodic regimes,
/// `0..N-1` in the finite regime.
pub fn reactive_current(committors: &CommittorField, densities: &DensityFamily, spec: &ChainSpec) -> Vec<Matrix> {
    let slices = committors.n_slices();
    let steps = match spec {
        ChainSpec::FiniteTime { .. } => slices.saturating_sub(1),
        _ => slices,
    };
    (0..steps)
        .map(|s| {
            let p = spec.matrix_at(s).expect("slice has an outgoing step");
            let next = committors.forward_at((s + 1) % slices);
            let (qb, d) = (committors.backward_at(s), densities.at(s));
            let n = d.len();
            let rows = (0..n)
                .map(|i| {
                    let w = qb[i] * d[i];
                    if w == 0.0 {
                        return Vec::new();
                    }
                    p.row(i).map(|(j, v)| (j, w * v * next[j])).collect()
                })
                .collect();
            Matrix::from_rows(n, rows)
        })
        .collect()
}

/// `f+_ij = max(f_ij - f_ji, 0)`. Current entries below `-clip` are rejected,
/// smaller negative ones are treated as zero.
pub fn effective_current(current: &Matrix, clip: f64) -> Result<Matrix> {
    for (i, j, v) in current.triplets() {
        if v < -clip {
            return Err(Error::solver(format!("negative reactive current {v} at ({i},{j})"), -v));
        }
    }
    let clean = current.map_entries(|_, _, v| v.max(0.0));
    Ok(clean.map_entries(|i, j, v| (v - clean.get(j, i)).max(0.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRecord {
    /// `k^{A->}(n)`, present where slice `n` has an outgoing step.
    pub out_of_a: Vec<Option<f64>>,
    /// `k^{->B}(n)`, present where slice `n` has an incoming step.
    pub into_b: Vec<Option<f64>>,
    /// Stationary rate, period average or window average of the A-outflow.
    pub rate: f64,
    /// The same aggregate computed from the B-inflow.
    pub rate_from_b: f64,
}

/// Per-slice departure and arrival rates with the regime aggregate.
pub fn rates(currents: &[Matrix], sets: &AbSets, regime: Regime, n_slices: usize) -> RateRecord {
    let out: Vec<f64> = currents
        .iter()
        .map(|f| sets.a().iter().map(|&i| f.row(i).map(|(_, v)| v).sum::<f64>()).sum())
        .collect();
    let inflow: Vec<f64> = currents
        .iter()
        .map(|f| (0..f.n()).map(|i| f.row(i).filter(|e| sets.in_b(e.0)).map(|e| e.1).sum::<f64>()).sum())
        .collect();
    let (out_of_a, into_b): (Vec<Option<f64>>, Vec<Option<f64>>) = match regime {
        Regime::Finite => {
            let mut o: Vec<Option<f64>> = out.iter().copied().map(Some).collect();
            o.push(None);
            let mut b: Vec<Option<f64>> = vec![None];
            b.extend(inflow.iter().copied().map(Some));
            (o, b)
        }
        _ => {
            let m = inflow.len();
            let b = (0..m).map(|s| Some(inflow[(s + m - 1) % m])).collect();
            (out.iter().copied().map(Some).collect(), b)
        }
    };
    let denom = n_slices as f64;
    let rate = sum_left(&out) / denom;
    let rate_from_b = sum_left(&inflow) / denom;
    RateRecord { out_of_a, into_b, rate, rate_from_b }
}

fn sum_left(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |a, b| a + b)
}

/// `Z / k`, or `None` when the rate vanishes.
pub fn mean_transition_time(mean_mass: f64, rate: f64) -> Option<f64> {
    (rate > 0.0).then(|| mean_mass / rate)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregates {
    /// `k^AB`, the period-averaged `k_M` or the window-averaged `k_N`.
    pub rate: f64,
    pub rate_from_b: f64,
    /// `Z^AB` or its average over the period or window.
    pub mean_mass: f64,
    /// `t^AB = Z / k`, undefined at zero rate.
    pub mean_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactiveStats {
    pub regime: Regime,
    pub mu: Vec<Vec<f64>>,
    pub mu_hat: Vec<Option<Vec<f64>>>,
    pub mass: Vec<f64>,
    pub current: Vec<Matrix>,
    pub effective_current: Vec<Matrix>,
    pub rates: RateRecord,
    pub aggregates: Aggregates,
}

impl ReactiveStats {
    pub fn n_slices(&self) -> usize {
        self.mu.len()
    }
}

/// Every reactive statistic of a solved chain.
pub fn reactive_stats(
    spec: &ChainSpec,
    densities: &DensityFamily,
    committors: &CommittorField,
    sets: &AbSets,
    tol: &Tolerances,
) -> Result<ReactiveStats> {
    if committors.n_slices() != spec.n_slices() || densities.n_slices() != spec.n_slices() {
        return Err(Error::invalid("committors, densities and chain have different slicing"));
    }
    let mu = reactive_distribution(committors, densities);
    let mu_hat = normalize_reactive(&mu);
    let mass = reactive_mass(&mu);
    let current = reactive_current(committors, densities, spec);
    let effective_current = current
        .iter()
        .map(|f| effective_current(f, tol.current_clip))
        .collect::<Result<Vec<_>>>()?;
    let n_slices = spec.n_slices();
    let rates = rates(&current, sets, spec.regime(), n_slices);
    let mean_mass = sum_left(&mass) / n_slices as f64;
    let aggregates = Aggregates {
        rate: rates.rate,
        rate_from_b: rates.rate_from_b,
        mean_mass,
        mean_time: mean_transition_time(mean_mass, rates.rate),
    };
    Ok(ReactiveStats { regime: spec.regime(), mu, mu_hat, mass, current, effective_current, rates, aggregates })
}
