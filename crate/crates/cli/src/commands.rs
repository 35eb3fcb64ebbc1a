use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::json;
use tpt_core::analysis::{analyze, convergence_study, log_linear_fit, Analysis};
use tpt_core::chain::ChainSpec;
use tpt_core::committor::CommittorField;
use tpt_core::io::{
    format_f64, write_committors_csv, write_json, write_stats_csv, write_stats_json, write_trajectories_csv,
    write_vectors_csv,
};
use tpt_core::oracle::{
    enumerate_committor, ensemble_rate_estimate, ergodic_estimates, simulate, simulate_trajectory, Direction,
    DEFAULT_BATCHES,
};
use tpt_core::ulam::current_vectors;

use crate::config::{ExperimentConfig, OutputFormat};
use crate::fail::{Failure, Outcome};
use crate::meta::{Metadata, Residuals};
use crate::source::{load, Problem};

/// Largest chain `validate` will enumerate.
pub const VALIDATE_MAX_STATES: usize = 12;
pub const VALIDATE_MAX_SLICES: usize = 16;

fn out_dir(cfg: &ExperimentConfig) -> Outcome<std::path::PathBuf> {
    let dir = cfg.out.clone().unwrap_or_else(|| "tpt-out".into());
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn create(dir: &Path, name: &str) -> Outcome<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn run_analysis(cfg: &ExperimentConfig, problem: &Problem) -> Outcome<Analysis> {
    Ok(analyze(&problem.spec, &problem.sets, cfg.method, &cfg.tolerances)?)
}

fn residuals(q: &CommittorField) -> Residuals {
    Residuals { forward: q.forward_residual, backward: q.backward_residual }
}

#[derive(Serialize)]
struct CommittorRecord<'a> {
    forward: &'a [Vec<f64>],
    backward: &'a [Vec<f64>],
}

pub fn committor(cfg: &ExperimentConfig) -> Outcome<()> {
    let problem = load(cfg)?;
    let a = run_analysis(cfg, &problem)?;
    let dir = out_dir(cfg)?;
    match cfg.format {
        OutputFormat::Csv => {
            let mut w = create(&dir, "committors.csv")?;
            write_committors_csv(&mut w, &a.committors)?;
            w.flush()?;
        }
        OutputFormat::Json => {
            let rec = CommittorRecord { forward: &a.committors.forward, backward: &a.committors.backward };
            write_json(create(&dir, "committors.json")?, &rec)?;
        }
    }
    let mut meta = Metadata::new("committor", cfg, &problem);
    meta.residuals = Some(residuals(&a.committors));
    meta.write(&dir, cfg)
}

pub fn stats(cfg: &ExperimentConfig) -> Outcome<()> {
    let problem = load(cfg)?;
    let a = run_analysis(cfg, &problem)?;
    let dir = out_dir(cfg)?;
    match cfg.format {
        OutputFormat::Csv => write_stats_csv(&dir, &a.stats)?,
        OutputFormat::Json => write_stats_json(create(&dir, "stats.json")?, &a.stats)?,
    }
    write_json(create(&dir, "conservation.json")?, &a.conservation)?;
    if let Some(grid) = &problem.grid {
        let midpoints: Vec<(f64, f64)> = (0..grid.n_cells()).map(|k| grid.midpoint(k)).collect();
        let vectors: Vec<_> = a.stats.effective_current.iter().map(|f| current_vectors(grid, f)).collect();
        let mut w = create(&dir, "current_vectors.csv")?;
        write_vectors_csv(&mut w, &midpoints, &vectors)?;
        w.flush()?;
    }
    let mut meta = Metadata::new("stats", cfg, &problem);
    meta.residuals = Some(residuals(&a.committors));
    meta.results = json!({
        "aggregates": a.stats.aggregates,
        "conservation_max_violation": a.conservation.max_violation(),
    });
    meta.write(&dir, cfg)?;
    if !a.conservation.holds(cfg.tolerances.equation_residual) {
        return Err(Failure::invariant(format!(
            "conservation violated by {:e}",
            a.conservation.max_violation()
        )));
    }
    Ok(())
}

pub fn ulam_build(cfg: &ExperimentConfig) -> Outcome<()> {
    if cfg.ulam.is_none() {
        return Err(Failure::input("ulam-build needs an `ulam` descriptor in the config"));
    }
    let problem = load(cfg)?;
    let dir = out_dir(cfg)?;
    problem.chain_file().write(&dir.join("chain.json"))?;
    Metadata::new("ulam-build", cfg, &problem).write(&dir, cfg)
}

pub fn simulate_cmd(cfg: &ExperimentConfig) -> Outcome<()> {
    let problem = load(cfg)?;
    let diags = tpt_core::chain::validate_chain(&problem.spec, &cfg.tolerances);
    if !diags.is_empty() {
        return Err(tpt_core::error::Error::Validation(diags).into());
    }
    let finite = matches!(problem.spec, ChainSpec::FiniteTime { .. });
    let size = cfg.samples.unwrap_or(if finite { 1000 } else { 10_000 });
    let trajectories = simulate(&problem.spec, size, cfg.seed, &cfg.tolerances)?;
    let dir = out_dir(cfg)?;
    let mut w = create(&dir, "trajectories.csv")?;
    write_trajectories_csv(&mut w, problem.spec.n_states(), &trajectories)?;
    w.flush()?;
    let mut meta = Metadata::new("simulate", cfg, &problem);
    meta.results = json!({ "samples": size, "trajectories": trajectories.len() });
    meta.write(&dir, cfg)
}

pub fn converge(cfg: &ExperimentConfig) -> Outcome<()> {
    let problem = load(cfg)?;
    let ChainSpec::Stationary { matrix } = &problem.spec else {
        return Err(Failure::input("converge needs a stationary chain"));
    };
    let diags = tpt_core::chain::validate_chain(&problem.spec, &cfg.tolerances);
    if !diags.is_empty() {
        return Err(tpt_core::error::Error::Validation(diags).into());
    }
    let windows = cfg.windows.clone().unwrap_or_else(|| (0..=100).collect());
    let points = convergence_study(matrix, &problem.sets, &windows, &cfg.tolerances)?;
    let dir = out_dir(cfg)?;
    let mut w = create(&dir, "convergence.csv")?;
    writeln!(w, "n,forward_error,backward_error")?;
    for p in &points {
        writeln!(w, "{},{},{}", p.n, format_f64(p.forward_error), format_f64(p.backward_error))?;
    }
    w.flush()?;
    let xs: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let fit = |errs: Vec<f64>| log_linear_fit(&xs, &errs, 1e-14);
    let forward_fit = fit(points.iter().map(|p| p.forward_error).collect());
    let backward_fit = fit(points.iter().map(|p| p.backward_error).collect());
    let converged_at = points.iter().find(|p| p.forward_error < 1e-12 && p.backward_error < 1e-12).map(|p| p.n);
    let mut meta = Metadata::new("converge", cfg, &problem);
    meta.results = json!({ "forward_fit": forward_fit, "backward_fit": backward_fit, "converged_at": converged_at });
    meta.write(&dir, cfg)?;
    for f in [forward_fit, backward_fit].into_iter().flatten() {
        if f.slope >= 0.0 {
            return Err(Failure::invariant(format!("committor errors do not decay (slope {})", f.slope)));
        }
    }
    Ok(())
}

#[derive(Debug, Default, Serialize)]
struct ValidationReport {
    committor_checks: usize,
    /// Finite regime: largest gap to exact enumeration.
    max_enumeration_deviation: f64,
    /// Other regimes: largest distance outside the enumeration bounds.
    max_bound_violation: f64,
    max_truncation: f64,
    conservation_max_violation: f64,
    estimator: Option<EstimatorCheck>,
    failures: Vec<String>,
}

#[derive(Debug, Serialize)]
struct EstimatorCheck {
    kind: &'static str,
    samples: usize,
    exact_rate: f64,
    estimate: f64,
    std_error: f64,
    z_score: f64,
}

pub fn validate(cfg: &ExperimentConfig) -> Outcome<()> {
    let problem = load(cfg)?;
    let (spec, sets, tol) = (&problem.spec, &problem.sets, &cfg.tolerances);
    if spec.n_states() > VALIDATE_MAX_STATES || spec.n_slices() > VALIDATE_MAX_SLICES {
        return Err(Failure::input(format!(
            "validate enumerates paths and is limited to {VALIDATE_MAX_STATES} states and {VALIDATE_MAX_SLICES} slices"
        )));
    }
    let a = run_analysis(cfg, &problem)?;
    let finite = matches!(spec, ChainSpec::FiniteTime { .. });
    let mut report = ValidationReport::default();
    for s in 0..spec.n_slices() {
        for i in sets.c_states() {
            for dir in [Direction::Forward, Direction::Backward] {
                let b = enumerate_committor(spec, sets, i, s, cfg.max_len, dir, tol)?;
                let q = match dir {
                    Direction::Forward => a.committors.forward[s][i],
                    Direction::Backward => a.committors.backward[s][i],
                };
                if finite {
                    report.max_enumeration_deviation = report.max_enumeration_deviation.max((b.lower - q).abs());
                } else {
                    let outside = (b.lower - q).max(q - b.lower - b.truncation).max(0.0);
                    report.max_bound_violation = report.max_bound_violation.max(outside);
                    report.max_truncation = report.max_truncation.max(b.truncation);
                }
                report.committor_checks += 1;
            }
        }
    }
    if report.max_enumeration_deviation > tol.equation_residual {
        report.failures.push(format!("enumeration deviation {:e}", report.max_enumeration_deviation));
    }
    if report.max_bound_violation > 1e-12 {
        report.failures.push(format!("committor outside enumeration bounds by {:e}", report.max_bound_violation));
    }
    report.conservation_max_violation = a.conservation.max_violation();
    if !a.conservation.holds(tol.equation_residual) {
        report.failures.push(format!("conservation violated by {:e}", report.conservation_max_violation));
    }

    let exact = a.stats.aggregates.rate;
    let (kind, samples, est) = if finite {
        let k = cfg.samples.unwrap_or(100_000);
        ("ensemble", k, ensemble_rate_estimate(spec, sets, k, cfg.seed)?)
    } else {
        let len = cfg.samples.unwrap_or(1_000_000);
        let traj = simulate_trajectory(spec, len, cfg.seed, tol)?;
        ("ergodic", len, ergodic_estimates(&traj, sets, DEFAULT_BATCHES)?.rate)
    };
    let z = est.z_score(exact);
    if z > 3.0 {
        report.failures.push(format!("{kind} rate estimate is {z:.2} standard errors from the exact rate"));
    }
    report.estimator =
        Some(EstimatorCheck { kind, samples, exact_rate: exact, estimate: est.value, std_error: est.std_error, z_score: z });

    let dir = out_dir(cfg)?;
    write_json(create(&dir, "validation.json")?, &report)?;
    let mut meta = Metadata::new("validate", cfg, &problem);
    meta.residuals = Some(residuals(&a.committors));
    meta.results = json!({ "passed": report.failures.is_empty() });
    meta.write(&dir, cfg)?;
    if !report.failures.is_empty() {
        return Err(Failure::invariant(report.failures.join("; ")));
    }
    Ok(())
}
