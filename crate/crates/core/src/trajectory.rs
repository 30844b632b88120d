//! Search trajectories: storage, CSV/JSON ingestion and per-instance min-max
//! scaling.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed leading columns of the trajectory CSV.
pub const CSV_FIXED_COLUMNS: [&str; 7] = [
    "algorithm",
    "problem",
    "dim",
    "run",
    "iteration",
    "member",
    "fitness",
];

/// One iteration's snapshot of an optimizer's population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub iteration: usize,
    /// One row per member, each of length `d`.
    pub solutions: Vec<Vec<f64>>,
    pub fitness: Vec<f64>,
}

impl Population {
    pub fn new(iteration: usize, solutions: Vec<Vec<f64>>, fitness: Vec<f64>) -> Result<Self> {
        let p = Self {
            iteration,
            solutions,
            fitness,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn size(&self) -> usize {
        self.fitness.len()
    }

    pub fn dimension(&self) -> usize {
        self.solutions.first().map_or(0, Vec::len)
    }

    pub fn best_fitness(&self) -> f64 {
        self.fitness.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn validate(&self) -> Result<()> {
        if self.solutions.len() != self.fitness.len() {
            return Err(Error::InvalidTrajectory(format!(
                "iteration {}: {} solutions but {} fitness values",
                self.iteration,
                self.solutions.len(),
                self.fitness.len()
            )));
        }
        if self.fitness.len() < 2 {
            return Err(Error::InvalidTrajectory(format!(
                "iteration {}: population needs at least 2 members",
                self.iteration
            )));
        }
        let d = self.dimension();
        for (k, row) in self.solutions.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidTrajectory(format!(
                    "iteration {}: member {k} has {} coordinates, expected {d}",
                    self.iteration,
                    row.len()
                )));
            }
            if row.iter().chain(std::iter::once(&self.fitness[k])).any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: format!("iteration {}, member {k}", self.iteration),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TrajectoryKey {
    pub algorithm: String,
    pub problem: String,
    pub dimension: usize,
    pub run: usize,
}

/// The populations one algorithm visited on one problem instance in one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub algorithm_id: String,
    pub problem_id: String,
    pub dimension: usize,
    pub run: usize,
    pub populations: Vec<Population>,
}

impl Trajectory {
    pub fn key(&self) -> TrajectoryKey {
        TrajectoryKey {
            algorithm: self.algorithm_id.clone(),
            problem: self.problem_id.clone(),
            dimension: self.dimension,
            run: self.run,
        }
    }

    pub fn iterations(&self) -> usize {
        self.populations.len()
    }

    pub fn population_size(&self) -> usize {
        self.populations.first().map_or(0, Population::size)
    }

    pub fn validate(&self) -> Result<()> {
        let who = || {
            format!(
                "{}/{}/d{}/run{}",
                self.algorithm_id, self.problem_id, self.dimension, self.run
            )
        };
        if self.populations.is_empty() {
            return Err(Error::InvalidTrajectory(format!("{}: no populations", who())));
        }
        let n_pop = self.population_size();
        for (i, p) in self.populations.iter().enumerate() {
            p.validate()?;
            if p.iteration != i {
                return Err(Error::InvalidTrajectory(format!(
                    "{}: iterations must be consecutive from 0, found {} at position {i}",
                    who(),
                    p.iteration
                )));
            }
            if p.size() != n_pop {
                return Err(Error::InvalidTrajectory(format!(
                    "{}: iteration {i} has {} members, expected {n_pop}",
                    who(),
                    p.size()
                )));
            }
            if p.dimension() != self.dimension {
                return Err(Error::InvalidTrajectory(format!(
                    "{}: iteration {i} has dimension {}, expected {}",
                    who(),
                    p.dimension(),
                    self.dimension
                )));
            }
        }
        Ok(())
    }
}

/// Trajectories keyed by (algorithm, problem, dimension, run), in key order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryStore {
    trajectories: BTreeMap<TrajectoryKey, Trajectory>,
}

impl TrajectoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a store and checks every invariant, including cross-trajectory
    /// consistency.
    pub fn from_trajectories(trajectories: impl IntoIterator<Item = Trajectory>) -> Result<Self> {
        let mut store = Self::new();
        for t in trajectories {
            store.insert(t)?;
        }
        if store.is_empty() {
            return Err(Error::EmptyStore);
        }
        store.check_consistency()?;
        Ok(store)
    }

    pub fn insert(&mut self, t: Trajectory) -> Result<()> {
        t.validate()?;
        let key = t.key();
        if self.trajectories.contains_key(&key) {
            return Err(Error::InvalidTrajectory(format!(
                "duplicate trajectory {}/{}/d{}/run{}",
                key.algorithm, key.problem, key.dimension, key.run
            )));
        }
        self.trajectories.insert(key, t);
        Ok(())
    }

    /// All trajectories sharing (problem, dimension, run) must have the same
    /// iteration count and population size.
    pub fn check_consistency(&self) -> Result<()> {
        let mut shape: BTreeMap<(&str, usize, usize), (usize, usize, &str)> = BTreeMap::new();
        for t in self.trajectories.values() {
            let k = (t.problem_id.as_str(), t.dimension, t.run);
            let s = (t.iterations(), t.population_size());
            match shape.get(&k) {
                None => {
                    shape.insert(k, (s.0, s.1, &t.algorithm_id));
                }
                Some(&(iters, n_pop, other)) if (iters, n_pop) != s => {
                    return Err(Error::Incomparable(format!(
                        "{}/d{}/run{}: '{}' has {iters} iterations of {n_pop}, '{}' has {} of {}",
                        t.problem_id, t.dimension, t.run, other, t.algorithm_id, s.0, s.1
                    )));
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn get(&self, key: &TrajectoryKey) -> Option<&Trajectory> {
        self.trajectories.get(key)
    }

    pub fn trajectories(&self) -> impl Iterator<Item = &Trajectory> {
        self.trajectories.values()
    }

    pub fn algorithms(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.trajectories.keys().map(|k| k.algorithm.as_str()).collect();
        set.into_iter().map(str::to_owned).collect()
    }

    pub fn dimensions(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.trajectories.keys().map(|k| k.dimension).collect();
        set.into_iter().collect()
    }

    /// Distinct (problem, dimension) instances.
    pub fn instances(&self) -> Vec<(String, usize)> {
        let set: BTreeSet<(&str, usize)> = self
            .trajectories
            .keys()
            .map(|k| (k.problem.as_str(), k.dimension))
            .collect();
        set.into_iter().map(|(p, d)| (p.to_owned(), d)).collect()
    }

    /// Distinct (problem, dimension, run) triples.
    pub fn run_keys(&self) -> Vec<(String, usize, usize)> {
        let set: BTreeSet<(&str, usize, usize)> = self
            .trajectories
            .keys()
            .map(|k| (k.problem.as_str(), k.dimension, k.run))
            .collect();
        set.into_iter().map(|(p, d, r)| (p.to_owned(), d, r)).collect()
    }

    pub fn find(&self, algorithm: &str, problem: &str, dimension: usize, run: usize) -> Option<&Trajectory> {
        self.get(&TrajectoryKey {
            algorithm: algorithm.to_owned(),
            problem: problem.to_owned(),
            dimension,
            run,
        })
    }

    /// Writes the store as trajectory CSV. The header carries as many
    /// x-columns as the largest dimension; lower-dimensional rows leave the
    /// surplus cells empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let width = self.dimensions().into_iter().max().unwrap_or(0);
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        let mut header: Vec<String> = CSV_FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
        header.extend((0..width).map(|k| format!("x{k}")));
        w.write_record(&header)?;
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        for t in self.trajectories.values() {
            for p in &t.populations {
                for (member, (x, f)) in p.solutions.iter().zip(&p.fitness).enumerate() {
                    row.clear();
                    row.push(t.algorithm_id.clone());
                    row.push(t.problem_id.clone());
                    row.push(t.dimension.to_string());
                    row.push(t.run.to_string());
                    row.push(p.iteration.to_string());
                    row.push(member.to_string());
                    row.push(f.to_string());
                    row.extend(x.iter().map(f64::to_string));
                    row.extend(std::iter::repeat_n(String::new(), width - x.len()));
                    w.write_record(&row)?;
                }
            }
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        match extension(path)?.as_str() {
            "csv" => self.write_csv(&mut out)?,
            _ => {
                let all: Vec<&Trajectory> = self.trajectories.values().collect();
                serde_json::to_writer_pretty(&mut out, &all)?;
            }
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    /// Parses trajectory CSV. `source` names the input in error messages.
    pub fn read_csv<R: Read>(reader: R, source: &str) -> Result<Self> {
        let schema = |row: usize, message: String| Error::Schema {
            path: source.to_owned(),
            row,
            message,
        };
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() < CSV_FIXED_COLUMNS.len()
            || header.iter().zip(CSV_FIXED_COLUMNS).any(|(h, want)| h.trim() != want)
        {
            return Err(schema(1, format!("header must start with {}", CSV_FIXED_COLUMNS.join(","))));
        }
        let width = header.len() - CSV_FIXED_COLUMNS.len();
        for (k, h) in header.iter().skip(CSV_FIXED_COLUMNS.len()).enumerate() {
            if h.trim() != format!("x{k}") {
                return Err(schema(1, format!("expected column x{k}, found '{h}'")));
            }
        }

        type Members = BTreeMap<usize, (f64, Vec<f64>)>;
        let mut grouped: BTreeMap<TrajectoryKey, BTreeMap<usize, Members>> = BTreeMap::new();
        for record in rdr.records() {
            let record = record?;
            let row = record.position().map_or(0, |p| p.line() as usize);
            let field = |i: usize| record.get(i).unwrap_or("").trim();
            let int = |i: usize| -> Result<usize> {
                field(i)
                    .parse()
                    .map_err(|_| schema(row, format!("column '{}' is not a non-negative integer: '{}'", CSV_FIXED_COLUMNS[i], field(i))))
            };
            let float = |i: usize, name: &str| -> Result<f64> {
                let v: f64 = field(i)
                    .parse()
                    .map_err(|_| schema(row, format!("column '{name}' is not a number: '{}'", field(i))))?;
                if !v.is_finite() {
                    return Err(schema(row, format!("column '{name}' is not finite")));
                }
                Ok(v)
            };
            let algorithm = field(0).to_owned();
            let problem = field(1).to_owned();
            if algorithm.is_empty() || problem.is_empty() {
                return Err(schema(row, "algorithm and problem must be non-empty".into()));
            }
            let dim = int(2)?;
            if dim == 0 || dim > width {
                return Err(schema(row, format!("dim {dim} outside 1..={width} (x-columns in header)")));
            }
            let run = int(3)?;
            let iteration = int(4)?;
            let member = int(5)?;
            let fitness = float(6, "fitness")?;
            let base = CSV_FIXED_COLUMNS.len();
            let x = (0..dim)
                .map(|k| float(base + k, &format!("x{k}")))
                .collect::<Result<Vec<_>>>()?;
            if (dim..width).any(|k| !field(base + k).is_empty()) {
                return Err(schema(row, format!("columns beyond x{} must be empty for dim {dim}", dim - 1)));
            }
            let key = TrajectoryKey {
                algorithm,
                problem,
                dimension: dim,
                run,
            };
            let members = grouped.entry(key).or_default().entry(iteration).or_default();
            if members.insert(member, (fitness, x)).is_some() {
                return Err(schema(row, format!("duplicate member {member} at iteration {iteration}")));
            }
        }
        if grouped.is_empty() {
            return Err(Error::EmptyStore);
        }

        let mut trajectories = Vec::with_capacity(grouped.len());
        for (key, iterations) in grouped {
            let mut populations = Vec::with_capacity(iterations.len());
            for (iteration, members) in iterations {
                if let Some((pos, _)) = members.keys().enumerate().find(|(i, m)| i != *m) {
                    return Err(Error::InvalidTrajectory(format!(
                        "{}/{}/d{}/run{} iteration {iteration}: member ids must be 0..n, missing {pos}",
                        key.algorithm, key.problem, key.dimension, key.run
                    )));
                }
                let (fitness, solutions) = members.into_values().unzip();
                populations.push(Population {
                    iteration,
                    solutions,
                    fitness,
                });
            }
            trajectories.push(Trajectory {
                algorithm_id: key.algorithm,
                problem_id: key.problem,
                dimension: key.dimension,
                run: key.run,
                populations,
            });
        }
        Self::from_trajectories(trajectories)
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let trajectories: Vec<Trajectory> = serde_json::from_reader(reader)?;
        Self::from_trajectories(trajectories)
    }
}

fn extension(path: &Path) -> Result<String> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase) {
        Some(e) if e == "csv" || e == "json" => Ok(e),
        _ => Err(Error::UnsupportedExtension(path.to_owned())),
    }
}

/// Loads a `.csv` or `.json` trajectory file.
pub fn load_trajectories(path: &Path) -> Result<TrajectoryStore> {
    let ext = extension(path)?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    match ext.as_str() {
        "csv" => TrajectoryStore::read_csv(reader, &path.display().to_string()),
        _ => TrajectoryStore::read_json(reader),
    }
}

/// Per-coordinate and fitness extrema of one problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub problem_id: String,
    pub dimension: usize,
    /// `(min, max)` per decision variable.
    pub solution_bounds: Vec<(f64, f64)>,
    pub fitness_bounds: (f64, f64),
}

fn unit_scale(v: f64, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        (v - lo) / (hi - lo)
    } else {
        0.0
    }
}

/// Extrema over every trajectory of `(problem_id, dimension)`, pooled across
/// algorithms, runs and iterations.
pub fn compute_scaling(store: &TrajectoryStore, problem_id: &str, dimension: usize) -> Result<ScalingParams> {
    let mut solution_bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); dimension];
    let mut fitness_bounds = (f64::INFINITY, f64::NEG_INFINITY);
    let mut found = false;
    for t in store
        .trajectories()
        .filter(|t| t.problem_id == problem_id && t.dimension == dimension)
    {
        found = true;
        for p in &t.populations {
            for (x, &f) in p.solutions.iter().zip(&p.fitness) {
                for (b, &v) in solution_bounds.iter_mut().zip(x) {
                    b.0 = b.0.min(v);
                    b.1 = b.1.max(v);
                }
                fitness_bounds.0 = fitness_bounds.0.min(f);
                fitness_bounds.1 = fitness_bounds.1.max(f);
            }
        }
    }
    if !found {
        return Err(Error::MissingKey {
            problem: problem_id.to_owned(),
            dimension,
        });
    }
    Ok(ScalingParams {
        problem_id: problem_id.to_owned(),
        dimension,
        solution_bounds,
        fitness_bounds,
    })
}

/// Maps every coordinate and fitness value to `(v - min) / (max - min)`;
/// constant ranges map to 0.
pub fn apply_scaling(t: &Trajectory, params: &ScalingParams) -> Result<Trajectory> {
    if t.problem_id != params.problem_id || t.dimension != params.dimension {
        return Err(Error::Incomparable(format!(
            "scaling for {}/d{} applied to trajectory of {}/d{}",
            params.problem_id, params.dimension, t.problem_id, t.dimension
        )));
    }
    let populations = t
        .populations
        .iter()
        .map(|p| Population {
            iteration: p.iteration,
            solutions: p
                .solutions
                .iter()
                .map(|x| {
                    x.iter()
                        .zip(&params.solution_bounds)
                        .map(|(&v, &b)| unit_scale(v, b))
                        .collect()
                })
                .collect(),
            fitness: p.fitness.iter().map(|&f| unit_scale(f, params.fitness_bounds)).collect(),
        })
        .collect();
    Ok(Trajectory {
        populations,
        ..t.clone()
    })
}

/// Points handed to the crossmatch test: the coordinates of each member,
/// optionally followed by its fitness.
pub fn feature_vectors(p: &Population, include_fitness: bool) -> Vec<Vec<f64>> {
    p.solutions
        .iter()
        .zip(&p.fitness)
        .map(|(x, &f)| {
            let mut v = x.clone();
            if include_fitness {
                v.push(f);
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(algorithm: &str, xs: &[&[f64]], fitness: &[&[f64]]) -> Trajectory {
        let populations = xs
            .iter()
            .zip(fitness)
            .enumerate()
            .map(|(i, (x, f))| Population {
                iteration: i,
                solutions: x.iter().map(|&v| vec![v]).collect(),
                fitness: f.to_vec(),
            })
            .collect();
        Trajectory {
            algorithm_id: algorithm.into(),
            problem_id: "p".into(),
            dimension: 1,
            run: 0,
            populations,
        }
    }

    #[test]
    fn scaling_single_trajectory() {
        let t = traj("a", &[&[2.0, 4.0], &[6.0, 4.0]], &[&[3.0, 3.0], &[3.0, 3.0]]);
        let store = TrajectoryStore::from_trajectories([t.clone()]).unwrap();
        let params = compute_scaling(&store, "p", 1).unwrap();
        assert_eq!(params.solution_bounds, vec![(2.0, 6.0)]);
        assert_eq!(params.fitness_bounds, (3.0, 3.0));
        let scaled = apply_scaling(&t, &params).unwrap();
        assert_eq!(scaled.populations[0].solutions, vec![vec![0.0], vec![0.5]]);
        assert_eq!(scaled.populations[1].solutions, vec![vec![1.0], vec![0.5]]);
        assert!(scaled.populations.iter().all(|p| p.fitness.iter().all(|&f| f == 0.0)));
    }

    #[test]
    fn scaling_unions_algorithms() {
        let a = traj("a", &[&[-1.0, 2.0]], &[&[0.0, 1.0]]);
        let b = traj("b", &[&[0.0, 5.0]], &[&[0.0, 1.0]]);
        let store = TrajectoryStore::from_trajectories([a, b]).unwrap();
        assert_eq!(compute_scaling(&store, "p", 1).unwrap().solution_bounds, vec![(-1.0, 5.0)]);
        assert!(matches!(compute_scaling(&store, "q", 1), Err(Error::MissingKey { .. })));
        assert!(matches!(compute_scaling(&store, "p", 2), Err(Error::MissingKey { .. })));
    }

    #[test]
    fn scaling_key_mismatch() {
        let t = traj("a", &[&[0.0, 1.0]], &[&[0.0, 1.0]]);
        let params = ScalingParams {
            problem_id: "other".into(),
            dimension: 1,
            solution_bounds: vec![(0.0, 1.0)],
            fitness_bounds: (0.0, 1.0),
        };
        assert!(apply_scaling(&t, &params).is_err());
    }

    #[test]
    fn feature_vector_lengths() {
        let p = Population::new(0, vec![vec![0.1, 0.2]; 50], vec![0.5; 50]).unwrap();
        let off = feature_vectors(&p, false);
        assert_eq!(off.len(), 50);
        assert!(off.iter().all(|v| v.len() == 2));
        let on = feature_vectors(&p, true);
        assert!(on.iter().all(|v| v.len() == 3 && v[2] == 0.5));
    }

    #[test]
    fn population_invariants() {
        assert!(Population::new(0, vec![vec![0.0]], vec![0.0]).is_err());
        assert!(Population::new(0, vec![vec![0.0]; 2], vec![0.0]).is_err());
        assert!(Population::new(0, vec![vec![0.0], vec![f64::NAN]], vec![0.0; 2]).is_err());
    }

    #[test]
    fn store_rejects_duplicates_and_inconsistent_shapes() {
        let a = traj("a", &[&[0.0, 1.0]], &[&[0.0, 1.0]]);
        let mut store = TrajectoryStore::new();
        store.insert(a.clone()).unwrap();
        assert!(store.insert(a.clone()).is_err());
        let b = traj("b", &[&[0.0, 1.0], &[0.0, 1.0]], &[&[0.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(
            TrajectoryStore::from_trajectories([a, b]),
            Err(Error::Incomparable(_))
        ));
        assert!(matches!(TrajectoryStore::from_trajectories([]), Err(Error::EmptyStore)));
    }

    const SAMPLE: &str = "\
algorithm,problem,dim,run,iteration,member,fitness,x0,x1
a,p,2,0,0,0,1.5,0.1,0.2
a,p,2,0,0,1,2.5,0.3,0.4
b,p,2,0,0,0,1.5,0.1,0.2
b,p,2,0,0,1,2.5,0.3,0.4
b,q,1,0,0,0,1,0.5,
b,q,1,0,0,1,2,0.75,
";

    #[test]
    fn csv_mixed_dimensions_round_trip() {
        let store = TrajectoryStore::read_csv(SAMPLE.as_bytes(), "sample").unwrap();
        assert_eq!(store.len(), 3);
        assert_eq!(store.algorithms(), vec!["a", "b"]);
        let q = store.find("b", "q", 1, 0).unwrap();
        assert_eq!(q.populations[0].solutions, vec![vec![0.5], vec![0.75]]);
        let text = store.to_csv_string().unwrap();
        let again = TrajectoryStore::read_csv(text.as_bytes(), "again").unwrap();
        assert_eq!(store, again);
    }

    #[test]
    fn csv_accepts_crlf() {
        let crlf = SAMPLE.replace('\n', "\r\n");
        let store = TrajectoryStore::read_csv(crlf.as_bytes(), "crlf").unwrap();
        assert_eq!(store.len(), 3);
    }

    #[test]
    fn csv_errors_name_rows() {
        let bad = SAMPLE.replace("2.5,0.3,0.4\nb", "NaN,0.3,0.4\nb");
        match TrajectoryStore::read_csv(bad.as_bytes(), "bad") {
            Err(Error::Schema { row, .. }) => assert_eq!(row, 3),
            other => panic!("expected schema error, got {other:?}"),
        }
        let dup = format!("{SAMPLE}a,p,2,0,0,1,2.5,0.3,0.4\n");
        assert!(matches!(
            TrajectoryStore::read_csv(dup.as_bytes(), "dup"),
            Err(Error::Schema { row: 8, .. })
        ));
        let empty = "algorithm,problem,dim,run,iteration,member,fitness,x0\n";
        assert!(matches!(
            TrajectoryStore::read_csv(empty.as_bytes(), "empty"),
            Err(Error::EmptyStore)
        ));
        assert!(matches!(
            TrajectoryStore::read_csv("".as_bytes(), "nothing"),
            Err(Error::Schema { .. }) | Err(Error::EmptyStore)
        ));
        let header = "algo,problem,dim,run,iteration,member,fitness,x0\na,p,1,0,0,0,1,1\n";
        assert!(matches!(
            TrajectoryStore::read_csv(header.as_bytes(), "header"),
            Err(Error::Schema { row: 1, .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let store = TrajectoryStore::read_csv(SAMPLE.as_bytes(), "sample").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        store.save(&path).unwrap();
        assert_eq!(load_trajectories(&path).unwrap(), store);
        assert!(matches!(
            load_trajectories(&dir.path().join("t.txt")),
            Err(Error::UnsupportedExtension(_))
        ));
    }
}
