//! The optimizer portfolio. Each optimizer advances a whole population per
//! iteration and every proposal is clamped into the search box.

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::problems::{Problem, LOWER_BOUND, UPPER_BOUND};
use super::AlgorithmSpec;

/// Counts every objective evaluation.
pub(crate) struct Evaluator<'a> {
    problem: &'a Problem,
    pub(crate) count: usize,
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(problem: &'a Problem) -> Self {
        Self { problem, count: 0 }
    }

    pub(crate) fn eval(&mut self, x: &[f64]) -> f64 {
        self.count += 1;
        self.problem.evaluate(x)
    }
}

/// Current population plus whatever memory the optimizer keeps.
pub(crate) struct Swarm {
    pub(crate) solutions: Vec<Vec<f64>>,
    pub(crate) fitness: Vec<f64>,
}

fn clamp(v: f64) -> f64 {
    v.clamp(LOWER_BOUND, UPPER_BOUND)
}

fn uniform_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(LOWER_BOUND..=UPPER_BOUND)).collect()
}

pub(crate) fn uniform_population(rng: &mut ChaCha8Rng, n_pop: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n_pop).map(|_| uniform_point(rng, d)).collect()
}

/// Three distinct indices other than `exclude`.
fn three_others(rng: &mut ChaCha8Rng, n: usize, exclude: usize) -> [usize; 3] {
    let picked = index::sample(rng, n - 1, 3);
    let shift = |k: usize| if k >= exclude { k + 1 } else { k };
    [shift(picked.index(0)), shift(picked.index(1)), shift(picked.index(2))]
}

fn de_trial(
    rng: &mut ChaCha8Rng,
    pop: &[Vec<f64>],
    i: usize,
    f: f64,
    cr: f64,
) -> Vec<f64> {
    let d = pop[i].len();
    let [r1, r2, r3] = three_others(rng, pop.len(), i);
    let jrand = rng.random_range(0..d);
    (0..d)
        .map(|j| {
            if j == jrand || rng.random::<f64>() < cr {
                clamp(pop[r1][j] + f * (pop[r2][j] - pop[r3][j]))
            } else {
                pop[i][j]
            }
        })
        .collect()
}

pub(crate) trait Optimizer {
    /// Replaces the population with the next generation.
    fn step(&mut self, swarm: &mut Swarm, rng: &mut ChaCha8Rng, eval: &mut Evaluator<'_>);

    /// Best objective value seen so far, when the optimizer tracks one apart
    /// from its population.
    fn best_so_far(&self) -> Option<f64> {
        None
    }
}

pub(crate) struct RandomSearch;

impl Optimizer for RandomSearch {
    fn step(&mut self, swarm: &mut Swarm, rng: &mut ChaCha8Rng, eval: &mut Evaluator<'_>) {
        let d = swarm.solutions[0].len();
        for (x, f) in swarm.solutions.iter_mut().zip(&mut swarm.fitness) {
            *x = uniform_point(rng, d);
            *f = eval.eval(x);
        }
    }
}

/// DE/rand/1/bin with greedy one-to-one replacement.
pub(crate) struct DifferentialEvolution {
    pub(crate) f: f64,
    pub(crate) cr: f64,
}

impl Optimizer for DifferentialEvolution {
    fn step(&mut self, swarm: &mut Swarm, rng: &mut ChaCha8Rng, eval: &mut Evaluator<'_>) {
        let n = swarm.solutions.len();
        let trials: Vec<Vec<f64>> = (0..n)
            .map(|i| de_trial(rng, &swarm.solutions, i, self.f, self.cr))
            .collect();
        for (i, trial) in trials.into_iter().enumerate() {
            let ft = eval.eval(&trial);
            if ft <= swarm.fitness[i] {
                swarm.solutions[i] = trial;
                swarm.fitness[i] = ft;
            }
        }
    }
}

/// DE/rand/1/bin with a scale factor redrawn every generation and crossover
/// rates drawn around a mean that tracks successful values.
pub(crate) struct SelfAdaptiveDe {
    pub(crate) f_dist: Normal<f64>,
    pub(crate) cr_mean: f64,
    pub(crate) cr_sd: f64,
}

impl Optimizer for SelfAdaptiveDe {
    fn step(&mut self, swarm: &mut Swarm, rng: &mut ChaCha8Rng, eval: &mut Evaluator<'_>) {
        let n = swarm.solutions.len();
        let f = self.f_dist.sample(rng).clamp(0.1, 1.0);
        let cr_dist = Normal::new(self.cr_mean, self.cr_sd).expect("valid crossover distribution");
        let mut proposals = Vec::with_capacity(n);
        for i in 0..n {
            let cr = cr_dist.sample(rng).clamp(0.0, 1.0);
            proposals.push((de_trial(rng, &swarm.solutions, i, f, cr), cr));
        }
        let mut successful = Vec::new();
        for (i, (trial, cr)) in proposals.into_iter().enumerate() {
            let ft = eval.eval(&trial);
            if ft <= swarm.fitness[i] {
                swarm.solutions[i] = trial;
                swarm.fitness[i] = ft;
                successful.push(cr);
            }
        }
        if !successful.is_empty() {
            self.cr_mean = successful.iter().sum::<f64>() / successful.len() as f64;
        }
    }
}

/// Real-coded GA: binary tournaments, uniform crossover, per-gene Gaussian
/// mutation, and a single elite carried over unevaluated.
pub(crate) struct GeneticAlgorithm {
    pub(crate) tournament: usize,
    pub(crate) crossover_rate: f64,
    pub(crate) mutation_sigma: f64,
    pub(crate) mutation_rate: f64,
}

impl GeneticAlgorithm {
    fn select<'s>(&self, rng: &mut ChaCha8Rng, swarm: &'s Swarm) -> &'s [f64] {
        let n = swarm.solutions.len();
        let mut best = rng.random_range(0..n);
        for _ in 1..self.tournament {
            let c = rng.random_range(0..n);
            if swarm.fitness[c] < swarm.fitness[best] {
                best = c;
            }
        }
        &swarm.solutions[best]
    }
}

impl Optimizer for GeneticAlgorithm {
    fn step(&mut self, swarm: &mut Swarm, rng: &mut ChaCha8Rng, eval: &mut Evaluator<'_>) {
        let n = swarm.solutions.len();
        let d = swarm.solutions[0].len();
        let elite = (0..n)
            .min_by(|&a, &b| swarm.fitness[a].total_cmp(&swarm.fitness[b]))
            .expect("non-empty population");
        let mutation = Normal::new(0.0, self.mutation_sigma).expect("valid mutation distribution");
        let mut solutions = Vec::with_capacity(n);
        let mut fitness = Vec::with_capacity(n);
        solutions.push(swarm.solutions[elite].clone());
        fitness.push(swarm.fitness[elite]);
        while solutions.len() < n {
            let a = self.select(rng, swarm);
            let b = self.select(rng, swarm);
            let cross = rng.random::<f64>() < self.crossover_rate;
            let child: Vec<f64> = (0..d)
                .map(|j| {
                    let gene = if cross && rng.random::<bool>() { b[j] } else { a[j] };
                    if rng.random::<f64>() < self.mutation_rate {
                        clamp(gene + mutation.sample(rng))
                    } else {
                        gene
                    }
                })
                .collect();
            fitness.push(eval.eval(&child));
            solutions.push(child);
        }
        swarm.solutions = solutions;
        swarm.fitness = fitness;
    }
}

/// Global-best PSO with inertia weight. The reported population is the
/// particles' current positions.
pub(crate) struct ParticleSwarm {
    pub(crate) inertia: f64,
    pub(crate) cognitive: f64,
    pub(crate) social: f64,
    pub(crate) max_velocity: f64,
    velocity: Vec<Vec<f64>>,
    personal: Vec<(Vec<f64>, f64)>,
    global: Option<(Vec<f64>, f64)>,
}

impl ParticleSwarm {
    pub(crate) fn new(inertia: f64, cognitive: f64, social: f64, max_velocity: f64) -> Self {
        Self {
            inertia,
            cognitive,
            social,
            max_velocity,
            velocity: Vec::new(),
            personal: Vec::new(),
            global: None,
        }
    }

    fn initialise(&mut self, swarm: &Swarm, rng: &mut ChaCha8Rng) {
        let vmax = self.max_velocity;
        self.velocity = swarm
            .solutions
            .iter()
            .map(|x| x.iter().map(|_| rng.random_range(-vmax..=vmax)).collect())
            .collect();
        self.personal = swarm
            .solutions
            .iter()
            .cloned()
            .zip(swarm.fitness.iter().copied())
            .collect();
        self.update_global();
    }

    fn update_global(&mut self) {
        for (x, f) in &self.personal {
            if self.global.as_ref().is_none_or(|(_, g)| f < g) {
                self.global = Some((x.clone(), *f));
            }
        }
    }
}

impl Optimizer for ParticleSwarm {
    fn step(&mut self, swarm: &mut Swarm, rng: &mut ChaCha8Rng, eval: &mut Evaluator<'_>) {
        if self.personal.is_empty() {
            self.initialise(swarm, rng);
        }
        let gbest = self.global.as_ref().expect("initialised").0.clone();
        let vmax = self.max_velocity;
        for i in 0..swarm.solutions.len() {
            let x = &mut swarm.solutions[i];
            let v = &mut self.velocity[i];
            let pbest = &self.personal[i].0;
            for j in 0..x.len() {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                v[j] = (self.inertia * v[j]
                    + self.cognitive * r1 * (pbest[j] - x[j])
                    + self.social * r2 * (gbest[j] - x[j]))
                    .clamp(-vmax, vmax);
                let moved = x[j] + v[j];
                x[j] = clamp(moved);
                if x[j] != moved {
                    v[j] = 0.0;
                }
            }
            let f = eval.eval(x);
            swarm.fitness[i] = f;
            if f < self.personal[i].1 {
                self.personal[i] = (x.clone(), f);
            }
        }
        self.update_global();
    }

    fn best_so_far(&self) -> Option<f64> {
        self.global.as_ref().map(|(_, f)| *f)
    }
}

pub(crate) fn build(spec: &AlgorithmSpec, dimension: usize) -> Box<dyn Optimizer> {
    let range = UPPER_BOUND - LOWER_BOUND;
    let hp = |name: &str, default: f64| spec.hyperparameters.get(name).copied().unwrap_or(default);
    match spec.algorithm_id.as_str() {
        "random_search" => Box::new(RandomSearch),
        "de_rand_1_bin" => Box::new(DifferentialEvolution {
            f: hp("f", 0.8),
            cr: hp("cr", 0.9),
        }),
        "sade" => Box::new(SelfAdaptiveDe {
            f_dist: Normal::new(hp("f_mean", 0.5), hp("f_sd", 0.3)).expect("f_sd is validated"),
            cr_mean: hp("cr_init", 0.5),
            cr_sd: hp("cr_sd", 0.1),
        }),
        "ga" => Box::new(GeneticAlgorithm {
            tournament: hp("tournament", 2.0) as usize,
            crossover_rate: hp("crossover_rate", 0.9),
            mutation_sigma: hp("mutation_sigma", 0.1) * range,
            mutation_rate: hp("mutation_rate", 1.0 / dimension as f64),
        }),
        "pso" => Box::new(ParticleSwarm::new(
            hp("inertia", 0.729),
            hp("c1", 1.49445),
            hp("c2", 1.49445),
            hp("max_velocity", 0.2) * range,
        )),
        other => unreachable!("algorithm id '{other}' is validated by AlgorithmSpec"),
    }
}
