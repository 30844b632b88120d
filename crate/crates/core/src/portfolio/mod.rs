//! Trajectory generation: a built-in function suite and a small portfolio of
//! population-based optimizers that share seeded initial populations.
//!
//! Randomness comes from named ChaCha streams. The initial population of a
//! run depends only on (problem, dimension, seed), so every algorithm starts
//! from the same points; each algorithm's own decisions use a separate stream
//! keyed additionally by its id.

mod algorithms;
pub mod problems;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use problems::{Problem, LOWER_BOUND, SUITE, UPPER_BOUND};

use crate::error::{Error, Result};
use crate::trajectory::{Population, Trajectory, TrajectoryStore};

/// Algorithm ids in the portfolio.
pub const ALGORITHMS: [&str; 5] = ["random_search", "de_rand_1_bin", "sade", "ga", "pso"];

pub const DEFAULT_POPULATION: usize = 50;
pub const DEFAULT_BUDGET_FACTOR: usize = 500;
pub const DEFAULT_RUNS: usize = 5;
pub const DEFAULT_DIMENSIONS: [usize; 2] = [2, 5];

const KNOWN_HYPERPARAMETERS: [(&str, &[&str]); 5] = [
    ("random_search", &[]),
    ("de_rand_1_bin", &["f", "cr"]),
    ("sade", &["f_mean", "f_sd", "cr_init", "cr_sd"]),
    ("ga", &["tournament", "crossover_rate", "mutation_sigma", "mutation_rate"]),
    ("pso", &["inertia", "c1", "c2", "max_velocity"]),
];

/// ChaCha stream seeded from the SHA-256 of the `/`-joined labels.
pub(crate) fn keyed_rng(labels: &[&str]) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    for (i, l) in labels.iter().enumerate() {
        if i > 0 {
            hasher.update(b"/");
        }
        hasher.update(l.as_bytes());
    }
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSpec {
    pub algorithm_id: String,
    /// Overrides of the algorithm's defaults.
    pub hyperparameters: BTreeMap<String, f64>,
    pub n_pop: usize,
}

impl AlgorithmSpec {
    /// Spec with default hyperparameters.
    pub fn new(algorithm_id: &str, n_pop: usize) -> Result<Self> {
        Self::with_hyperparameters(algorithm_id, n_pop, BTreeMap::new())
    }

    pub fn with_hyperparameters(
        algorithm_id: &str,
        n_pop: usize,
        hyperparameters: BTreeMap<String, f64>,
    ) -> Result<Self> {
        let Some((_, known)) = KNOWN_HYPERPARAMETERS.iter().find(|(id, _)| *id == algorithm_id) else {
            return Err(Error::UnknownAlgorithm(algorithm_id.to_owned()));
        };
        if n_pop < 4 {
            return Err(Error::Config(format!("population size {n_pop} is below the minimum of 4")));
        }
        for (name, &value) in &hyperparameters {
            if !known.contains(&name.as_str()) {
                return Err(Error::Config(format!("'{algorithm_id}' has no hyperparameter '{name}'")));
            }
            let positive = matches!(name.as_str(), "f_sd" | "cr_sd" | "mutation_sigma" | "max_velocity");
            if !value.is_finite() || value < 0.0 || (positive && value == 0.0) {
                return Err(Error::Config(format!("hyperparameter {name} = {value} is out of range")));
            }
            if name == "tournament" && value < 1.0 {
                return Err(Error::Config("tournament size must be at least 1".into()));
            }
        }
        Ok(Self {
            algorithm_id: algorithm_id.to_owned(),
            hyperparameters,
            n_pop,
        })
    }

    /// The full portfolio with defaults.
    pub fn portfolio(n_pop: usize) -> Result<Vec<Self>> {
        ALGORITHMS.iter().map(|id| Self::new(id, n_pop)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Evaluations per run are `budget_factor * d`.
    pub budget_factor: usize,
    pub runs: usize,
    pub base_seed: u64,
    pub dimensions: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            budget_factor: DEFAULT_BUDGET_FACTOR,
            runs: DEFAULT_RUNS,
            base_seed: 0,
            dimensions: DEFAULT_DIMENSIONS.to_vec(),
        }
    }
}

impl RunConfig {
    pub fn budget(&self, dimension: usize) -> usize {
        self.budget_factor * dimension
    }

    /// Seed of run `run`.
    pub fn seed(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.runs).map(|r| self.seed(r)).collect()
    }

    /// Iterations per run, including the initial population.
    pub fn iterations(&self, dimension: usize, n_pop: usize) -> Result<usize> {
        let budget = self.budget(dimension);
        let iterations = budget / n_pop.max(1);
        if iterations < 2 {
            return Err(Error::BudgetTooSmall { budget, n_pop });
        }
        Ok(iterations)
    }
}

/// Initial population for (problem, seed), identical for every algorithm.
pub fn initial_population(problem: &Problem, seed: u64, n_pop: usize) -> Population {
    let mut rng = keyed_rng(&["init", problem.id(), &problem.dimension().to_string(), &seed.to_string()]);
    let solutions = algorithms::uniform_population(&mut rng, n_pop, problem.dimension());
    let fitness = solutions.iter().map(|x| problem.evaluate(x)).collect();
    Population {
        iteration: 0,
        solutions,
        fitness,
    }
}

/// Bookkeeping of one run, not part of the trajectory itself.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub evaluations: usize,
    pub budget: usize,
    /// Best objective value seen up to and including each iteration.
    pub best_so_far: Vec<f64>,
}

pub fn run_algorithm(spec: &AlgorithmSpec, problem: &Problem, config: &RunConfig, run: usize) -> Result<Trajectory> {
    run_algorithm_with_stats(spec, problem, config, run).map(|(t, _)| t)
}

/// Executes `floor(budget / n_pop)` iterations; iteration 0 is the shared
/// initial population.
pub fn run_algorithm_with_stats(
    spec: &AlgorithmSpec,
    problem: &Problem,
    config: &RunConfig,
    run: usize,
) -> Result<(Trajectory, RunStats)> {
    // Re-validate: the fields are public.
    let spec = AlgorithmSpec::with_hyperparameters(&spec.algorithm_id, spec.n_pop, spec.hyperparameters.clone())?;
    let d = problem.dimension();
    let iterations = config.iterations(d, spec.n_pop)?;
    let seed = config.seed(run);

    let init = initial_population(problem, seed, spec.n_pop);
    let mut eval = algorithms::Evaluator::new(problem);
    eval.count = spec.n_pop;
    let mut rng = keyed_rng(&[&spec.algorithm_id, problem.id(), &d.to_string(), &seed.to_string()]);
    let mut optimizer = algorithms::build(&spec, d);
    let mut swarm = algorithms::Swarm {
        solutions: init.solutions.clone(),
        fitness: init.fitness.clone(),
    };

    let mut best = init.best_fitness();
    let mut best_so_far = vec![best];
    let mut populations = Vec::with_capacity(iterations);
    populations.push(init);
    for iteration in 1..iterations {
        optimizer.step(&mut swarm, &mut rng, &mut eval);
        let p = Population {
            iteration,
            solutions: swarm.solutions.clone(),
            fitness: swarm.fitness.clone(),
        };
        best = best.min(p.best_fitness());
        if let Some(b) = optimizer.best_so_far() {
            best = best.min(b);
        }
        best_so_far.push(best);
        populations.push(p);
    }

    let trajectory = Trajectory {
        algorithm_id: spec.algorithm_id.clone(),
        problem_id: problem.id().to_owned(),
        dimension: d,
        run,
        populations,
    };
    let stats = RunStats {
        evaluations: eval.count,
        budget: config.budget(d),
        best_so_far,
    };
    Ok((trajectory, stats))
}

/// Runs every (spec, problem, dimension, run) combination. Execution is
/// parallel; the resulting store does not depend on scheduling.
pub fn run_suite(specs: &[AlgorithmSpec], problem_ids: &[String], config: &RunConfig) -> Result<TrajectoryStore> {
    if specs.is_empty() {
        return Err(Error::Config("no algorithms to run".into()));
    }
    if problem_ids.is_empty() {
        return Err(Error::Config("no problems to run".into()));
    }
    if config.dimensions.is_empty() || config.runs == 0 {
        return Err(Error::Config("need at least one dimension and one run".into()));
    }
    let mut problems = Vec::new();
    for &d in &config.dimensions {
        for id in problem_ids {
            problems.push(Problem::new(id, d)?);
        }
    }
    let mut tasks = Vec::new();
    for spec in specs {
        for problem in &problems {
            for run in 0..config.runs {
                tasks.push((spec, problem, run));
            }
        }
    }
    let trajectories = tasks
        .into_par_iter()
        .map(|(spec, problem, run)| run_algorithm(spec, problem, config, run))
        .collect::<Result<Vec<_>>>()?;
    TrajectoryStore::from_trajectories(trajectories)
}
