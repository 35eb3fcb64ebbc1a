//! Ulam discretization of overdamped Langevin dynamics on a 2-D box.

mod potential;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{AbSets, TransitionMatrix};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{derive_seed, stream_rng};

pub use potential::{triple_well_potential, Forcing, Potential};

/// Square cells over `[x_min, x_max] x [y_min, y_max]`, numbered row by
/// row from the bottom-left corner: `index = iy * nx + ix`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridBox", into = "GridBox")]
pub struct UlamGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub cell_size: f64,
    nx: usize,
    ny: usize,
}

/// Serialized form of a grid.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridBox {
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub cell_size: f64,
}

impl TryFrom<GridBox> for UlamGrid {
    type Error = Error;

    fn try_from(b: GridBox) -> Result<Self> {
        UlamGrid::new(b.x_range, b.y_range, b.cell_size)
    }
}

impl From<UlamGrid> for GridBox {
    fn from(g: UlamGrid) -> Self {
        GridBox { x_range: [g.x_min, g.x_max], y_range: [g.y_min, g.y_max], cell_size: g.cell_size }
    }
}

impl UlamGrid {
    pub fn new(x: [f64; 2], y: [f64; 2], cell_size: f64) -> Result<Self> {
        if !(cell_size > 0.0) || !(x[1] > x[0]) || !(y[1] > y[0]) {
            return Err(Error::invalid("grid needs a positive cell size and nonempty ranges"));
        }
        let count = |lo: f64, hi: f64| -> Result<usize> {
            let k = (hi - lo) / cell_size;
            let r = k.round();
            if (k - r).abs() * cell_size > 1e-9 {
                return Err(Error::invalid(format!("range [{lo}, {hi}] is not a multiple of cell size {cell_size}")));
            }
            Ok(r as usize)
        };
        let nx = count(x[0], x[1])?;
        let ny = count(y[0], y[1])?;
        Ok(Self { x_min: x[0], x_max: x[1], y_min: y[0], y_max: y[1], cell_size, nx, ny })
    }

    /// `[-2, 2] x [-1, 2]` with `0.2` cells.
    pub fn triple_well_default() -> Self {
        Self::new([-2.0, 2.0], [-1.0, 2.0], 0.2).expect("valid default grid")
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    /// Lower-left corner of cell `k`.
    pub fn corner(&self, k: usize) -> (f64, f64) {
        let (ix, iy) = (k % self.nx, k / self.nx);
        (self.x_min + ix as f64 * self.cell_size, self.y_min + iy as f64 * self.cell_size)
    }

    pub fn midpoint(&self, k: usize) -> (f64, f64) {
        let (x, y) = self.corner(k);
        (x + 0.5 * self.cell_size, y + 0.5 * self.cell_size)
    }

    /// Cell containing `(x, y)`; points outside the box go to the nearest
    /// boundary cell.
    pub fn locate(&self, x: f64, y: f64) -> usize {
        let clamp = |v: f64, lo: f64, n: usize| -> usize {
            let k = ((v - lo) / self.cell_size).floor();
            if k.is_nan() || k < 0.0 {
                0
            } else {
                (k as usize).min(n - 1)
            }
        };
        self.index(clamp(x, self.x_min, self.nx), clamp(y, self.y_min, self.ny))
    }
}

/// Default radius of the disks around the deep wells. It takes the twelve
/// cells nearest each well centre on the default grid.
pub const DEFAULT_SET_RADIUS: f64 = 0.35;

/// Centres of the two deep wells, used for `A` and `B`.
pub const DEEP_WELLS: [[f64; 2]; 2] = [[-1.0, 0.0], [1.0, 0.0]];

/// `A` and `B` as disks of the given radius around the deep wells.
pub fn triple_well_sets(grid: &UlamGrid, radius: f64) -> Result<AbSets> {
    let a = cells_in_disk(grid, DEEP_WELLS[0], radius)?;
    let b = cells_in_disk(grid, DEEP_WELLS[1], radius)?;
    AbSets::new(grid.n_cells(), a, b)
}

/// Cells whose midpoint lies in the closed disk.
pub fn cells_in_disk(grid: &UlamGrid, center: [f64; 2], radius: f64) -> Result<Vec<usize>> {
    if !(radius > 0.0) {
        return Err(Error::invalid("disk radius must be positive"));
    }
    let cells: Vec<usize> = (0..grid.n_cells())
        .filter(|&k| {
            let (x, y) = grid.midpoint(k);
            (x - center[0]).hypot(y - center[1]) <= radius
        })
        .collect();
    if cells.is_empty() {
        return Err(Error::invalid(format!(
            "disk at ({}, {}) with radius {radius} contains no cell midpoint",
            center[0], center[1]
        )));
    }
    Ok(cells)
}

/// Overdamped Langevin dynamics `dX = (-grad V + F(X, t)) dt + sigma dW`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LangevinSpec {
    pub potential: Potential,
    #[serde(default)]
    pub forcing: Option<Forcing>,
    pub sigma: f64,
    pub tau: f64,
    #[serde(default = "default_euler_dt")]
    pub euler_dt: f64,
    pub samples_per_cell: usize,
}

fn default_euler_dt() -> f64 {
    0.01
}

impl LangevinSpec {
    pub fn triple_well(sigma: f64, tau: f64, samples_per_cell: usize) -> Self {
        Self { potential: Potential::TripleWell, forcing: None, sigma, tau, euler_dt: tau / 30.0, samples_per_cell }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(Error::invalid("sigma must be positive"));
        }
        if !(self.tau > 0.0) || !(self.euler_dt > 0.0) || self.euler_dt > self.tau * (1.0 + 1e-12) {
            return Err(Error::invalid("need 0 < euler_dt <= tau"));
        }
        if self.samples_per_cell == 0 {
            return Err(Error::invalid("samples_per_cell must be at least 1"));
        }
        Ok(())
    }

    /// Number of Euler steps per lag time and the resulting step size.
    pub fn steps(&self) -> (usize, f64) {
        let n = (self.tau / self.euler_dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.tau / n as f64)
    }

    fn drift(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let (_, g) = self.potential.value_and_gradient(x, y);
        let mut d = [-g[0], -g[1]];
        if let Some(f) = &self.forcing {
            let v = f.at(x, y, t);
            d[0] += v[0];
            d[1] += v[1];
        }
        d
    }

    /// Euler-Maruyama endpoint after one lag time starting at time `t0`.
    pub fn evolve<R: Rng>(&self, mut x: f64, mut y: f64, t0: f64, rng: &mut R) -> (f64, f64) {
        let (steps, h) = self.steps();
        let noise = self.sigma * h.sqrt();
        for s in 0..steps {
            let d = self.drift(x, y, t0 + s as f64 * h);
            let (wx, wy): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
            x += d[0] * h + noise * wx;
            y += d[1] * h + noise * wy;
        }
        (x, y)
    }
}

/// Midpoint Boltzmann weights `exp(-2 V / sigma^2)`, normalized.
pub fn boltzmann_density(grid: &UlamGrid, spec: &LangevinSpec) -> Result<Vec<f64>> {
    if spec.forcing.is_some() {
        return Err(Error::precondition("the Boltzmann density describes unforced dynamics only"));
    }
    spec.check()?;
    let v: Vec<f64> = (0..grid.n_cells())
        .map(|k| {
            let (x, y) = grid.midpoint(k);
            spec.potential.value_and_gradient(x, y).0
        })
        .collect();
    let v_min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let beta = 2.0 / (spec.sigma * spec.sigma);
    let w: Vec<f64> = v.iter().map(|vk| (-beta * (vk - v_min)).exp()).collect();
    let z: f64 = w.iter().sum();
    Ok(w.iter().map(|x| x / z).collect())
}

/// Ulam estimate of the transition matrix over one lag time from `start_phase`.
///
/// Cell `i` draws its samples from stream `i` of the generator seeded with
/// `seed`, so the result does not depend on scheduling.
pub fn estimate_transition_matrix(
    grid: &UlamGrid,
    spec: &LangevinSpec,
    start_phase: f64,
    seed: u64,
) -> Result<TransitionMatrix> {
    spec.check()?;
    let n = grid.n_cells();
    let c = spec.samples_per_cell;
    let h = grid.cell_size;
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let (x0, y0) = grid.corner(i);
            let mut hits: Vec<usize> = Vec::with_capacity(c);
            for _ in 0..c {
                let x = x0 + h * rng.random::<f64>();
                let y = y0 + h * rng.random::<f64>();
                let (xe, ye) = spec.evolve(x, y, start_phase, &mut rng);
                hits.push(grid.locate(xe, ye));
            }
            hits.sort_unstable();
            let mut row = Vec::new();
            let mut k = 0;
            while k < hits.len() {
                let j = hits[k];
                let run = hits[k..].iter().take_while(|&&v| v == j).count();
                row.push((j, run as f64 / c as f64));
                k += run;
            }
            row
        })
        .collect();
    Ok(TransitionMatrix::from_raw(Matrix::from_rows(n, rows)))
}

/// `P_m` for `m = 0..M`, each estimated from `start_phase = m tau` with a
/// seed derived from `(seed, m)`.
pub fn build_periodic_family(
    grid: &UlamGrid,
    spec: &LangevinSpec,
    slices: usize,
    seed: u64,
) -> Result<Vec<TransitionMatrix>> {
    let Some(forcing) = &spec.forcing else {
        return Err(Error::precondition("a periodic family needs a forcing term"));
    };
    if slices == 0 {
        return Err(Error::invalid("need at least one slice"));
    }
    let gap = (forcing.period() - slices as f64 * spec.tau).abs();
    if gap >= 1e-9 {
        return Err(Error::precondition(format!(
            "forcing period {} differs from {slices} x tau = {}",
            forcing.period(),
            slices as f64 * spec.tau
        )));
    }
    (0..slices)
        .map(|m| estimate_transition_matrix(grid, spec, m as f64 * spec.tau, derive_seed(seed, m as u64)))
        .collect()
}

/// Per-cell vector `sum_j f+_ij v_ij` with `v_ij` the unit vector between midpoints.
pub fn current_vectors(grid: &UlamGrid, effective: &Matrix) -> Vec<[f64; 2]> {
    (0..grid.n_cells())
        .map(|i| {
            let (xi, yi) = grid.midpoint(i);
            let mut acc = [0.0, 0.0];
            for (j, f) in effective.row(i) {
                if j == i {
                    continue;
                }
                let (xj, yj) = grid.midpoint(j);
                let d = (xj - xi).hypot(yj - yi);
                acc[0] += f * (xj - xi) / d;
                acc[1] += f * (yj - yi) / d;
            }
            acc
        })
        .collect()
}

/// Net left-to-right effective current across the vertical line `x = x_line`,
/// split at height `y_split` by where each jump crosses the line.
/// Returns `(below, above)`.
pub fn crossing_current(grid: &UlamGrid, effective: &Matrix, x_line: f64, y_split: f64) -> (f64, f64) {
    let (mut below, mut above) = (0.0, 0.0);
    for (i, j, f) in effective.triplets() {
        let (xi, yi) = grid.midpoint(i);
        let (xj, yj) = grid.midpoint(j);
        let sign = if xi < x_line && xj > x_line {
            1.0
        } else if xi > x_line && xj < x_line {
            -1.0
        } else {
            continue;
        };
        let y_cross = yi + (yj - yi) * (x_line - xi) / (xj - xi);
        if y_cross < y_split {
            below += sign * f;
        } else {
            above += sign * f;
        }
    }
    (below, above)
}
