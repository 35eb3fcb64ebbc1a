use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::json::{format_f64, write_json};
use crate::committor::CommittorField;
use crate::error::Result;
use crate::linalg::Matrix;
use crate::oracle::TrajectorySample;
use crate::rng::GENERATOR_ID;
use crate::stats::{Aggregates, ReactiveStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

fn opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

/// Writes `slice,state,q_plus,q_minus` rows.
pub fn write_committors_csv<W: Write>(mut w: W, field: &CommittorField) -> Result<()> {
    writeln!(w, "slice,state,q_plus,q_minus")?;
    for s in 0..field.n_slices() {
        for (i, (qp, qm)) in field.forward[s].iter().zip(&field.backward[s]).enumerate() {
            writeln!(w, "{s},{i},{},{}", format_f64(*qp), format_f64(*qm))?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SliceRecord<'a> {
    slice: usize,
    mass: f64,
    out_of_a: Option<f64>,
    into_b: Option<f64>,
    mu: &'a [f64],
    mu_hat: Option<&'a [f64]>,
    /// Present when the slice has an outgoing step.
    #[serde(skip_serializing_if = "Option::is_none")]
    current: Option<Vec<(usize, usize, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    effective_current: Option<Vec<(usize, usize, f64)>>,
}

#[derive(Serialize)]
struct StatsRecord<'a> {
    n_slices: usize,
    slices: Vec<SliceRecord<'a>>,
    aggregates: &'a Aggregates,
}

fn nonzero(m: &Matrix) -> Vec<(usize, usize, f64)> {
    m.triplets().into_iter().filter(|t| t.2 != 0.0).collect()
}

pub fn write_stats_json<W: Write>(w: W, stats: &ReactiveStats) -> Result<()> {
    let slices = (0..stats.mu.len())
        .map(|s| SliceRecord {
            slice: s,
            mass: stats.mass[s],
            out_of_a: stats.rates.out_of_a[s],
            into_b: stats.rates.into_b[s],
            mu: &stats.mu[s],
            mu_hat: stats.mu_hat[s].as_deref(),
            current: stats.current.get(s).map(nonzero),
            effective_current: stats.effective_current.get(s).map(nonzero),
        })
        .collect();
    let record = StatsRecord { n_slices: stats.mu.len(), slices, aggregates: &stats.aggregates };
    write_json(w, &record)
}

/// Writes the statistics as CSV files into `dir`:
/// `distribution.csv`, `current.csv`, `rates.csv` and `aggregates.csv`.
pub fn write_stats_csv(dir: &Path, stats: &ReactiveStats) -> Result<()> {
    let mut w = BufWriter::new(File::create(dir.join("distribution.csv"))?);
    writeln!(w, "slice,state,mu,mu_hat")?;
    for (s, mu) in stats.mu.iter().enumerate() {
        for (i, m) in mu.iter().enumerate() {
            let hat = stats.mu_hat[s].as_ref().map(|h| h[i]);
            writeln!(w, "{s},{i},{},{}", format_f64(*m), opt(hat))?;
        }
    }
    w.flush()?;

    let mut w = BufWriter::new(File::create(dir.join("current.csv"))?);
    writeln!(w, "slice,i,j,f,f_plus")?;
    for (s, (f, fp)) in stats.current.iter().zip(&stats.effective_current).enumerate() {
        for (i, j, v) in f.triplets() {
            if v != 0.0 {
                writeln!(w, "{s},{i},{j},{},{}", format_f64(v), format_f64(fp.get(i, j)))?;
            }
        }
    }
    w.flush()?;

    let mut w = BufWriter::new(File::create(dir.join("rates.csv"))?);
    writeln!(w, "slice,mass,out_of_a,into_b")?;
    for s in 0..stats.mu.len() {
        writeln!(
            w,
            "{s},{},{},{}",
            format_f64(stats.mass[s]),
            opt(stats.rates.out_of_a[s]),
            opt(stats.rates.into_b[s])
        )?;
    }
    w.flush()?;

    let a = &stats.aggregates;
    let mut w = BufWriter::new(File::create(dir.join("aggregates.csv"))?);
    writeln!(w, "rate,rate_from_b,mean_mass,mean_time")?;
    writeln!(w, "{},{},{},{}", format_f64(a.rate), format_f64(a.rate_from_b), format_f64(a.mean_mass), opt(a.mean_time))?;
    w.flush()?;
    Ok(())
}

/// Per-cell effective current vectors: `slice,cell,x,y,u,v`.
pub fn write_vectors_csv<W: Write>(mut w: W, midpoints: &[(f64, f64)], vectors: &[Vec<[f64; 2]>]) -> Result<()> {
    writeln!(w, "slice,cell,x,y,u,v")?;
    for (s, field) in vectors.iter().enumerate() {
        for (k, (&(x, y), v)) in midpoints.iter().zip(field).enumerate() {
            writeln!(w, "{s},{k},{},{},{},{}", format_f64(x), format_f64(y), format_f64(v[0]), format_f64(v[1]))?;
        }
    }
    Ok(())
}

/// Trajectories as `realization,time,state` rows after `#` header lines with
/// the state count, length, seed and generator.
pub fn write_trajectories_csv<W: Write>(mut w: W, n_states: usize, trajectories: &[TrajectorySample]) -> Result<()> {
    let length = trajectories.first().map_or(0, |t| t.states.len());
    let seed = trajectories.first().map_or(0, |t| t.rng_seed);
    writeln!(w, "# n_states={n_states}")?;
    writeln!(w, "# length={length}")?;
    writeln!(w, "# seed={seed}")?;
    writeln!(w, "# generator={GENERATOR_ID}")?;
    writeln!(w, "realization,time,state")?;
    for (r, t) in trajectories.iter().enumerate() {
        for (k, s) in t.states.iter().enumerate() {
            writeln!(w, "{r},{},{s}", t.slice_offset + k)?;
        }
    }
    Ok(())
}
