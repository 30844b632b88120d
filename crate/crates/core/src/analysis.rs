//! Iteration-aligned crossmatch testing between algorithm pairs and the
//! aggregation of test outcomes into similarity matrices.
//!
//! A run's similarity is the fraction of its iterations in which the test
//! does not reject equality of the two populations at the Bonferroni level
//! `alpha / I`, where `I` is the number of iterations in the run. Matrix
//! entries average run similarities over problems and runs for each
//! dimension; the overall matrix averages the per-dimension matrices.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crossmatch::{crossmatch_test, LabeledSample, TieMode};
use crate::error::{Error, Result};
use crate::trajectory::{
    apply_scaling, compute_scaling, feature_vectors, ScalingParams, Trajectory, TrajectoryKey,
    TrajectoryStore,
};

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Header of the per-iteration series CSV.
pub const SERIES_COLUMNS: [&str; 9] = [
    "algorithm_a",
    "algorithm_b",
    "problem",
    "dim",
    "run",
    "iteration",
    "a1",
    "p_value",
    "rejected",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub alpha: f64,
    pub tie_mode: TieMode,
    pub include_fitness: bool,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            tie_mode: TieMode::Neutral,
            include_fitness: false,
        }
    }
}

impl CompareConfig {
    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Per-test rejection threshold for a run of `iterations` tests.
pub fn bonferroni_threshold(alpha: f64, iterations: usize) -> f64 {
    alpha / iterations as f64
}

pub fn is_rejected(p_value: f64, alpha: f64, iterations: usize) -> bool {
    p_value < bonferroni_threshold(alpha, iterations)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationOutcome {
    pub iteration: usize,
    pub a1: usize,
    pub p_value: f64,
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunComparison {
    pub algorithm_a: String,
    pub algorithm_b: String,
    pub problem_id: String,
    pub dimension: usize,
    pub run: usize,
    pub per_iteration: Vec<IterationOutcome>,
    pub similarity: f64,
}

impl RunComparison {
    pub fn rejections(&self) -> usize {
        self.per_iteration.iter().filter(|o| o.rejected).count()
    }
}

fn check_comparable(ta: &Trajectory, tb: &Trajectory) -> Result<()> {
    if ta.problem_id != tb.problem_id || ta.dimension != tb.dimension || ta.run != tb.run {
        return Err(Error::Incomparable(format!(
            "{}/d{}/run{} vs {}/d{}/run{}",
            ta.problem_id, ta.dimension, ta.run, tb.problem_id, tb.dimension, tb.run
        )));
    }
    if ta.iterations() != tb.iterations() {
        return Err(Error::Incomparable(format!(
            "'{}' has {} iterations but '{}' has {}",
            ta.algorithm_id,
            ta.iterations(),
            tb.algorithm_id,
            tb.iterations()
        )));
    }
    if ta.population_size() != tb.population_size() {
        return Err(Error::Incomparable(format!(
            "'{}' has population {} but '{}' has {}",
            ta.algorithm_id,
            ta.population_size(),
            tb.algorithm_id,
            tb.population_size()
        )));
    }
    Ok(())
}

/// Orders the pair so that results do not depend on argument order.
fn canonical<'a>(ta: &'a Trajectory, tb: &'a Trajectory) -> (&'a Trajectory, &'a Trajectory) {
    if tb.algorithm_id < ta.algorithm_id {
        (tb, ta)
    } else {
        (ta, tb)
    }
}

/// Tests already-scaled trajectories iteration by iteration.
fn compare_scaled(ta: &Trajectory, tb: &Trajectory, config: &CompareConfig) -> Result<RunComparison> {
    config.validate()?;
    check_comparable(ta, tb)?;
    let (x, y) = canonical(ta, tb);
    let iterations = x.iterations();
    let per_iteration = x
        .populations
        .iter()
        .zip(&y.populations)
        .map(|(px, py)| {
            let sample = LabeledSample::new(
                feature_vectors(px, config.include_fitness),
                feature_vectors(py, config.include_fitness),
            )?;
            let result = crossmatch_test(&sample, config.tie_mode)?;
            Ok(IterationOutcome {
                iteration: px.iteration,
                a1: result.a1,
                p_value: result.p_value,
                rejected: is_rejected(result.p_value, config.alpha, iterations),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let kept = per_iteration.iter().filter(|o| !o.rejected).count();
    Ok(RunComparison {
        algorithm_a: ta.algorithm_id.clone(),
        algorithm_b: tb.algorithm_id.clone(),
        problem_id: ta.problem_id.clone(),
        dimension: ta.dimension,
        run: ta.run,
        similarity: kept as f64 / iterations as f64,
        per_iteration,
    })
}

/// Compares two raw trajectories of the same (problem, dimension, run) after
/// min-max scaling both with `scaling`.
pub fn compare_run(
    ta: &Trajectory,
    tb: &Trajectory,
    scaling: &ScalingParams,
    config: &CompareConfig,
) -> Result<RunComparison> {
    check_comparable(ta, tb)?;
    compare_scaled(&apply_scaling(ta, scaling)?, &apply_scaling(tb, scaling)?, config)
}

/// Crossmatch statistic per iteration, for plotting.
pub fn statistic_series(
    ta: &Trajectory,
    tb: &Trajectory,
    scaling: &ScalingParams,
    tie_mode: TieMode,
    include_fitness: bool,
) -> Result<Vec<(usize, usize)>> {
    let config = CompareConfig {
        tie_mode,
        include_fitness,
        ..CompareConfig::default()
    };
    Ok(compare_run(ta, tb, scaling, &config)?
        .per_iteration
        .into_iter()
        .map(|o| (o.iteration, o.a1))
        .collect())
}

/// Symmetric algorithm-by-algorithm matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    ids: Vec<String>,
    entries: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn new(ids: Vec<String>, entries: Vec<Vec<f64>>) -> Result<Self> {
        let n = ids.len();
        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix(format!("expected a {n}x{n} matrix")));
        }
        let mut seen = std::collections::BTreeSet::new();
        if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(Error::InvalidMatrix(format!("duplicate id '{dup}'")));
        }
        for i in 0..n {
            if entries[i][i] != 1.0 {
                return Err(Error::InvalidMatrix(format!("diagonal entry for '{}' is not 1", ids[i])));
            }
            for j in 0..n {
                let v = entries[i][j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({}, {}) = {v} outside [0, 1]",
                        ids[i], ids[j]
                    )));
                }
                if v != entries[j][i] {
                    return Err(Error::InvalidMatrix(format!(
                        "entries ({0}, {1}) and ({1}, {0}) differ",
                        ids[i], ids[j]
                    )));
                }
            }
        }
        Ok(Self { ids, entries })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.entries[self.index_of(a)?][self.index_of(b)?])
    }

    /// Off-diagonal pairs `(a, b, similarity)` with `a` before `b`, sorted by
    /// descending similarity, then by ids.
    pub fn ranked_pairs(&self) -> Vec<(String, String, f64)> {
        let mut pairs = Vec::new();
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let (a, b) = if self.ids[i] <= self.ids[j] { (i, j) } else { (j, i) };
                pairs.push((self.ids[a].clone(), self.ids[b].clone(), self.entries[i][j]));
            }
        }
        pairs.sort_by(|x, y| y.2.total_cmp(&x.2).then_with(|| (&x.0, &x.1).cmp(&(&y.0, &y.1))));
        pairs
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        let mut header = vec!["algorithm".to_string()];
        header.extend(self.ids.iter().cloned());
        w.write_record(&header)?;
        for (id, row) in self.ids.iter().zip(&self.entries) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<matrix output>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = rdr.headers()?.clone();
        let ids: Vec<String> = header.iter().skip(1).map(|s| s.trim().to_owned()).collect();
        if ids.is_empty() {
            return Err(Error::InvalidMatrix("header lists no algorithms".into()));
        }
        let mut entries = Vec::with_capacity(ids.len());
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let row_id = record.get(0).unwrap_or("").trim();
            if ids.get(i).map(String::as_str) != Some(row_id) {
                return Err(Error::InvalidMatrix(format!(
                    "row {} is labelled '{row_id}', expected the header order",
                    i + 2
                )));
            }
            let row = record
                .iter()
                .skip(1)
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidMatrix(format!("row {}: '{v}' is not a number", i + 2)))
                })
                .collect::<Result<Vec<_>>>()?;
            entries.push(row);
        }
        Self::new(ids, entries)
    }
}

/// Everything produced by [`pairwise_similarity`].
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseAnalysis {
    pub per_dimension: BTreeMap<usize, SimilarityMatrix>,
    pub overall: SimilarityMatrix,
    /// One entry per (pair, problem, dimension, run), in that order.
    pub comparisons: Vec<RunComparison>,
}

/// Tests every algorithm pair on every (problem, dimension, run) of the store.
/// Work is spread over the current rayon pool; results are reduced in a fixed
/// order.
pub fn pairwise_similarity(store: &TrajectoryStore, config: &CompareConfig) -> Result<PairwiseAnalysis> {
    config.validate()?;
    store.check_consistency()?;
    let algorithms = store.algorithms();
    if algorithms.len() < 2 {
        return Err(Error::Config(format!(
            "need at least 2 algorithms, store has {}",
            algorithms.len()
        )));
    }
    let runs = store.run_keys();
    for (problem, dim, run) in &runs {
        if let Some(missing) = algorithms.iter().find(|a| store.find(a, problem, *dim, *run).is_none()) {
            return Err(Error::Incomparable(format!(
                "'{missing}' has no trajectory for {problem}/d{dim}/run{run}"
            )));
        }
    }

    let scaled: BTreeMap<TrajectoryKey, Trajectory> = store
        .instances()
        .into_par_iter()
        .map(|(problem, dim)| {
            let params = compute_scaling(store, &problem, dim)?;
            store
                .trajectories()
                .filter(|t| t.problem_id == problem && t.dimension == dim)
                .map(|t| Ok((t.key(), apply_scaling(t, &params)?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let lookup = |algorithm: &str, problem: &str, dimension: usize, run: usize| {
        &scaled[&TrajectoryKey {
            algorithm: algorithm.to_owned(),
            problem: problem.to_owned(),
            dimension,
            run,
        }]
    };

    let mut tasks = Vec::new();
    for (i, a) in algorithms.iter().enumerate() {
        for b in &algorithms[i + 1..] {
            for (problem, dim, run) in &runs {
                tasks.push((a, b, problem, *dim, *run));
            }
        }
    }
    let comparisons = tasks
        .into_par_iter()
        .map(|(a, b, problem, dim, run)| {
            compare_scaled(lookup(a, problem, dim, run), lookup(b, problem, dim, run), config)
        })
        .collect::<Result<Vec<_>>>()?;

    let n = algorithms.len();
    let index: BTreeMap<&str, usize> = algorithms.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
    let mut per_dimension = BTreeMap::new();
    for dim in store.dimensions() {
        let mut sums = vec![vec![0.0; n]; n];
        let mut counts = vec![vec![0usize; n]; n];
        for c in comparisons.iter().filter(|c| c.dimension == dim) {
            let (i, j) = (index[c.algorithm_a.as_str()], index[c.algorithm_b.as_str()]);
            sums[i][j] += c.similarity;
            counts[i][j] += 1;
        }
        let mut entries = vec![vec![1.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let mean = sums[i][j] / counts[i][j] as f64;
                entries[i][j] = mean;
                entries[j][i] = mean;
            }
        }
        per_dimension.insert(dim, SimilarityMatrix::new(algorithms.clone(), entries)?);
    }

    let dims = per_dimension.len() as f64;
    let mut overall = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let mean = per_dimension.values().map(|m| m.entries[i][j]).sum::<f64>() / dims;
            overall[i][j] = mean;
            overall[j][i] = mean;
        }
    }
    Ok(PairwiseAnalysis {
        per_dimension,
        overall: SimilarityMatrix::new(algorithms, overall)?,
        comparisons,
    })
}

/// Writes the per-iteration outcomes of every comparison.
pub fn write_series_csv<W: Write>(comparisons: &[RunComparison], writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(SERIES_COLUMNS)?;
    for c in comparisons {
        for o in &c.per_iteration {
            w.write_record([
                c.algorithm_a.clone(),
                c.algorithm_b.clone(),
                c.problem_id.clone(),
                c.dimension.to_string(),
                c.run.to_string(),
                o.iteration.to_string(),
                o.a1.to_string(),
                o.p_value.to_string(),
                o.rejected.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<series output>", e))?;
    Ok(())
}

/// One row of the series CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub algorithm_a: String,
    pub algorithm_b: String,
    pub problem: String,
    pub dim: usize,
    pub run: usize,
    pub iteration: usize,
    pub a1: usize,
    pub p_value: f64,
    pub rejected: bool,
}

pub fn read_series_csv<R: Read>(reader: R) -> Result<Vec<SeriesRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().map(str::trim).ne(SERIES_COLUMNS) {
        return Err(Error::Schema {
            path: "<series>".into(),
            row: 1,
            message: format!("header must be {}", SERIES_COLUMNS.join(",")),
        });
    }
    Ok(rdr.deserialize().collect::<std::result::Result<Vec<SeriesRow>, _>>()?)
}
