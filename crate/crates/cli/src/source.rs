use tpt_core::chain::{stationary_distribution, AbSets, ChainSpec, Regime, TransitionMatrix};
use tpt_core::io::{load_chain, ChainFile};
use tpt_core::rng::derive_seed;
use tpt_core::ulam::{
    boltzmann_density, build_periodic_family, cells_in_disk, estimate_transition_matrix, triple_well_sets, UlamGrid,
};

use crate::config::{ExperimentConfig, SetSpec, UlamConfig};
use crate::fail::{Failure, Outcome};

/// The chain a command works on, with the facts worth recording.
pub struct Problem {
    pub spec: ChainSpec,
    pub sets: AbSets,
    pub grid: Option<UlamGrid>,
    pub source: String,
    pub set_radius: Option<f64>,
    pub notes: Vec<String>,
}

impl Problem {
    pub fn chain_file(&self) -> ChainFile {
        let file = ChainFile::from_spec(&self.spec, &self.sets);
        match self.grid {
            Some(g) => file.with_grid(g),
            None => file,
        }
    }
}

fn resolve_set(spec: &SetSpec, grid: Option<&UlamGrid>, name: &str) -> Outcome<Vec<usize>> {
    match spec {
        SetSpec::Indices(v) => Ok(v.clone()),
        SetSpec::Disk { center, radius } => {
            let grid = grid.ok_or_else(|| Failure::input(format!("set {name} is a disk but the chain has no grid")))?;
            Ok(cells_in_disk(grid, *center, *radius)?)
        }
    }
}

fn override_sets(cfg: &ExperimentConfig, sets: AbSets, grid: Option<&UlamGrid>) -> Outcome<AbSets> {
    if cfg.set_a.is_none() && cfg.set_b.is_none() {
        return Ok(sets);
    }
    let a = match &cfg.set_a {
        Some(s) => resolve_set(s, grid, "A")?,
        None => sets.a().to_vec(),
    };
    let b = match &cfg.set_b {
        Some(s) => resolve_set(s, grid, "B")?,
        None => sets.b().to_vec(),
    };
    Ok(AbSets::new(sets.n_states(), a, b)?)
}

const FINITE_NOTE: &str = "finite regime: irreducibility is not required and was not checked";

/// Builds the chain named by the config: a chain file, or an Ulam estimate.
pub fn load(cfg: &ExperimentConfig) -> Outcome<Problem> {
    cfg.check()?;
    let mut problem = match (&cfg.chain, &cfg.ulam) {
        (Some(path), _) => {
            let (file, spec, sets) = load_chain(path)?;
            let sets = override_sets(cfg, sets, file.grid.as_ref())?;
            Problem { spec, sets, grid: file.grid, source: path.display().to_string(), set_radius: None, notes: Vec::new() }
        }
        (None, Some(u)) => from_ulam(cfg, u)?,
        (None, None) => unreachable!("checked above"),
    };
    if let Some(horizon) = cfg.horizon {
        let ChainSpec::Stationary { matrix } = &problem.spec else {
            return Err(Failure::input("`horizon` restricts a stationary chain; this chain is not stationary"));
        };
        if horizon < 2 {
            return Err(Failure::input("horizon must be at least 2"));
        }
        let pi = stationary_distribution(matrix, &cfg.tolerances)?;
        problem.spec = ChainSpec::finite_homogeneous(matrix, horizon, pi);
        problem.notes.push(format!("stationary chain restricted to 0..{horizon}, started in its invariant law"));
    }
    if problem.spec.regime() == Regime::Finite {
        problem.notes.push(FINITE_NOTE.into());
    }
    Ok(problem)
}

fn from_ulam(cfg: &ExperimentConfig, u: &UlamConfig) -> Outcome<Problem> {
    let grid = u.grid;
    let dyn_ = &u.dynamics;
    let seed = cfg.seed;
    let mut notes = Vec::new();
    let spec = match u.regime {
        Regime::Stationary => ChainSpec::stationary(estimate_transition_matrix(&grid, dyn_, 0.0, seed)?),
        Regime::Periodic => {
            let slices = u.slices.ok_or_else(|| Failure::input("periodic ulam runs need `slices`"))?;
            ChainSpec::periodic(build_periodic_family(&grid, dyn_, slices, seed)?)
        }
        Regime::Finite => {
            let horizon = u.horizon.ok_or_else(|| Failure::input("finite ulam runs need `horizon`"))?;
            if horizon < 2 {
                return Err(Failure::input("horizon must be at least 2"));
            }
            let matrices: Vec<TransitionMatrix> = if dyn_.forcing.is_none() {
                vec![estimate_transition_matrix(&grid, dyn_, 0.0, seed)?; horizon - 1]
            } else {
                (0..horizon - 1)
                    .map(|n| estimate_transition_matrix(&grid, dyn_, n as f64 * dyn_.tau, derive_seed(seed, n as u64)))
                    .collect::<Result<_, _>>()?
            };
            let unforced = tpt_core::ulam::LangevinSpec { forcing: None, ..dyn_.clone() };
            let lambda = match stationary_distribution(&matrices[0], &cfg.tolerances) {
                Ok(pi) if dyn_.forcing.is_none() => {
                    notes.push("initial density: invariant law of the estimated chain".into());
                    pi
                }
                _ => {
                    notes.push("initial density: Boltzmann density of the unforced potential at cell midpoints".into());
                    boltzmann_density(&grid, &unforced)?
                }
            };
            ChainSpec::finite(matrices, lambda)
        }
        Regime::Switching => return Err(Failure::input("ulam runs support stationary, periodic and finite regimes")),
    };
    let sets = override_sets(cfg, triple_well_sets(&grid, u.set_radius)?, Some(&grid))?;
    Ok(Problem {
        spec,
        sets,
        grid: Some(grid),
        source: "ulam".into(),
        set_radius: (cfg.set_a.is_none() || cfg.set_b.is_none()).then_some(u.set_radius),
        notes,
    })
}
