//! The crossmatch two-sample test.
//!
//! The pooled sample is paired by a minimum-weight perfect matching of the
//! Euclidean distances, and the number of pairs joining one point of each
//! sample is the statistic `a1`. Under the null hypothesis every labeling of
//! the pooled points is equally likely, which gives an exact distribution
//! for `a1` that depends only on the two sample sizes.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::{min_weight_perfect_matching, DistanceMatrix, Matching};

/// How zero-distance ties between identical points are resolved.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieMode {
    /// Whatever optimal matching the solver returns.
    #[default]
    Neutral,
    /// Among optimal matchings, favour pairs that join the two samples.
    PreferCross,
}

impl fmt::Display for TieMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TieMode::Neutral => "neutral",
            TieMode::PreferCross => "prefer-cross",
        })
    }
}

impl FromStr for TieMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "neutral" => Ok(TieMode::Neutral),
            "prefer-cross" | "prefer_cross" => Ok(TieMode::PreferCross),
            other => Err(Error::Config(format!(
                "unknown tie mode '{other}' (expected neutral or prefer-cross)"
            ))),
        }
    }
}

/// Two samples of points in a common space.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    points_x: Vec<Vec<f64>>,
    points_y: Vec<Vec<f64>>,
}

impl LabeledSample {
    pub fn new(points_x: Vec<Vec<f64>>, points_y: Vec<Vec<f64>>) -> Result<Self> {
        let (m, n) = (points_x.len(), points_y.len());
        if m == 0 || n == 0 || !(m + n).is_multiple_of(2) {
            return Err(Error::Parity { m, n });
        }
        let dim = points_x[0].len();
        for (index, p) in points_x.iter().chain(&points_y).enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    index,
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: format!("pooled point {index}"),
                });
            }
        }
        Ok(Self { points_x, points_y })
    }

    pub fn m(&self) -> usize {
        self.points_x.len()
    }

    pub fn n(&self) -> usize {
        self.points_y.len()
    }

    pub fn points_x(&self) -> &[Vec<f64>] {
        &self.points_x
    }

    pub fn points_y(&self) -> &[Vec<f64>] {
        &self.points_y
    }

    /// Returns the sample with the roles of X and Y exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            points_x: self.points_y.clone(),
            points_y: self.points_x.clone(),
        }
    }

    fn pooled(&self) -> Vec<&[f64]> {
        self.points_x
            .iter()
            .chain(&self.points_y)
            .map(Vec::as_slice)
            .collect()
    }
}

/// Pair-type counts of one matching of the pooled sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossmatchStatistic {
    /// X-Y pairs.
    pub a1: usize,
    /// X-X pairs.
    pub a0: usize,
    /// Y-Y pairs.
    pub a2: usize,
    pub matching: Matching,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossmatchResult {
    pub a1: usize,
    pub a0: usize,
    pub a2: usize,
    pub p_value: f64,
    pub expected_a1: f64,
    pub m: usize,
    pub n: usize,
}

/// Smallest positive difference between distinct entries, zero included.
fn smallest_gap(d: &DistanceMatrix) -> Option<f64> {
    let n = d.len();
    let mut values = Vec::with_capacity(n * (n - 1) / 2 + 1);
    values.push(0.0);
    for i in 0..n {
        values.extend_from_slice(&d.row(i)[i + 1..]);
    }
    values.sort_unstable_by(f64::total_cmp);
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|g| *g > 0.0)
        .min_by(f64::total_cmp)
}

fn count_pairs(matching: &Matching, m: usize) -> (usize, usize, usize) {
    let (mut a0, mut a1, mut a2) = (0, 0, 0);
    for &(i, j) in &matching.pairs {
        match (i < m, j < m) {
            (true, true) => a0 += 1,
            (false, false) => a2 += 1,
            _ => a1 += 1,
        }
    }
    (a1, a0, a2)
}

/// Computes the crossmatch count from a minimum-weight matching of the
/// pooled points.
pub fn crossmatch_statistic(s: &LabeledSample, tie_mode: TieMode) -> Result<CrossmatchStatistic> {
    let m = s.m();
    let d = DistanceMatrix::from_points(&s.pooled())?;
    let neutral = min_weight_perfect_matching(&d)?;
    let matching = match tie_mode {
        TieMode::Neutral => neutral,
        TieMode::PreferCross => {
            let eps = smallest_gap(&d).unwrap_or(1.0) * 1e-6;
            let perturbed =
                d.map_off_diagonal(|i, j, v| if (i < m) == (j < m) { v + eps } else { v });
            let candidate = min_weight_perfect_matching(&perturbed)?;
            let candidate_weight = Matching::weight_of(&candidate.pairs, &d);
            // The perturbation must never cost optimality in the original
            // distances; if rounding made it do so, keep the neutral answer.
            let tol = 1e-12 * neutral.total_weight.abs().max(f64::MIN_POSITIVE);
            if candidate_weight <= neutral.total_weight + tol {
                Matching {
                    pairs: candidate.pairs,
                    total_weight: candidate_weight,
                }
            } else {
                neutral
            }
        }
    };
    let (a1, a0, a2) = count_pairs(&matching, m);
    Ok(CrossmatchStatistic {
        a1,
        a0,
        a2,
        matching,
    })
}

/// Exact null distribution of the crossmatch count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDistribution {
    pub m: usize,
    pub n: usize,
    /// `(a1, probability)` in increasing `a1`.
    pub pmf: Vec<(usize, f64)>,
}

impl NullDistribution {
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.pmf.iter().map(|&(a, _)| a)
    }

    pub fn probability(&self, a1: usize) -> f64 {
        self.pmf
            .iter()
            .find(|&&(a, _)| a == a1)
            .map_or(0.0, |&(_, p)| p)
    }

    pub fn total(&self) -> f64 {
        self.pmf.iter().map(|&(_, p)| p).sum()
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().map(|&(a, p)| a as f64 * p).sum()
    }

    /// `P(A1 <= a1)`, clamped to at most one.
    pub fn lower_tail(&self, a1: usize) -> f64 {
        if self.pmf.last().is_some_and(|&(top, _)| a1 >= top) {
            return 1.0;
        }
        self.pmf
            .iter()
            .take_while(|&&(a, _)| a <= a1)
            .map(|&(_, p)| p)
            .sum::<f64>()
            .min(1.0)
    }
}

/// `ln(k!)` for `k` in `0..=n`.
fn log_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// `P(A1 = a1) = 2^a1 * I! / (C(N, n) * a0! * a1! * a2!)` with `N = m + n`,
/// `I = N / 2`, `a0 = (m - a1) / 2`, `a2 = (n - a1) / 2`, evaluated in log space.
pub fn null_pmf(m: usize, n: usize) -> Result<NullDistribution> {
    if m == 0 || n == 0 || !(m + n).is_multiple_of(2) {
        return Err(Error::Parity { m, n });
    }
    let total = m + n;
    let pairs = total / 2;
    let lf = log_factorials(total);
    let log_choose = lf[total] - lf[m.min(n)] - lf[m.max(n)];
    let ln2 = std::f64::consts::LN_2;
    let pmf = (m % 2..=m.min(n))
        .step_by(2)
        .map(|a1| {
            let a0 = (m - a1) / 2;
            let a2 = (n - a1) / 2;
            let (lo, hi) = (a0.min(a2), a0.max(a2));
            let log_p = a1 as f64 * ln2 + lf[pairs] - log_choose - lf[lo] - lf[a1] - lf[hi];
            (a1, log_p.exp())
        })
        .collect();
    Ok(NullDistribution { m, n, pmf })
}

type PmfCache = Mutex<HashMap<(usize, usize), Arc<NullDistribution>>>;

fn pmf_cache() -> &'static PmfCache {
    static CACHE: OnceLock<PmfCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Memoised [`null_pmf`], shared across threads.
pub fn cached_null_pmf(m: usize, n: usize) -> Result<Arc<NullDistribution>> {
    if let Some(hit) = pmf_cache().lock().expect("pmf cache poisoned").get(&(m, n)) {
        return Ok(Arc::clone(hit));
    }
    let dist = Arc::new(null_pmf(m, n)?);
    let mut cache = pmf_cache().lock().expect("pmf cache poisoned");
    Ok(Arc::clone(cache.entry((m, n)).or_insert(dist)))
}

/// Null expectation `m * n / (m + n - 1)`.
pub fn expected_crossmatches(m: usize, n: usize) -> f64 {
    (m * n) as f64 / (m + n - 1) as f64
}

/// Lower-tail p-value of an observed count.
pub fn p_value(a1: usize, m: usize, n: usize) -> Result<f64> {
    Ok(cached_null_pmf(m, n)?.lower_tail(a1))
}

/// Runs the full test. Small p-values mean fewer crossmatches than expected
/// under equal distributions.
pub fn crossmatch_test(s: &LabeledSample, tie_mode: TieMode) -> Result<CrossmatchResult> {
    let stat = crossmatch_statistic(s, tie_mode)?;
    let (m, n) = (s.m(), s.n());
    Ok(CrossmatchResult {
        a1: stat.a1,
        a0: stat.a0,
        a2: stat.a2,
        p_value: p_value(stat.a1, m, n)?,
        expected_a1: expected_crossmatches(m, n),
        m,
        n,
    })
}
