//! Built-in test functions on the box [-5, 5]^d.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use super::keyed_rng;
use crate::error::{Error, Result};

pub const LOWER_BOUND: f64 = -5.0;
pub const UPPER_BOUND: f64 = 5.0;

/// Identifiers of the built-in suite, in canonical order.
pub const SUITE: [&str; 6] = [
    "sphere",
    "ellipsoid",
    "rosenbrock",
    "rastrigin",
    "schwefel12",
    "gallagher",
];

const GALLAGHER_PEAKS: usize = 11;

#[derive(Debug, Clone, PartialEq)]
enum Objective {
    Sphere,
    /// Condition number 1e6 under a fixed rotation.
    RotatedEllipsoid { rotation: Vec<Vec<f64>> },
    Rosenbrock,
    Rastrigin,
    /// Sum of squared prefix sums.
    Schwefel12,
    /// Max of Gaussian peaks; peak 0 is the global optimum.
    Gallagher { peaks: Vec<Peak> },
}

#[derive(Debug, Clone, PartialEq)]
struct Peak {
    centre: Vec<f64>,
    height: f64,
    sharpness: f64,
}

/// A deterministic objective on [-5, 5]^d.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    id: String,
    dimension: usize,
    objective: Objective,
}

impl Problem {
    pub fn new(id: &str, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Config("problem dimension must be at least 1".into()));
        }
        let objective = match id {
            "sphere" => Objective::Sphere,
            "ellipsoid" => Objective::RotatedEllipsoid {
                rotation: random_rotation(dimension),
            },
            "rosenbrock" => Objective::Rosenbrock,
            "rastrigin" => Objective::Rastrigin,
            "schwefel12" => Objective::Schwefel12,
            "gallagher" => Objective::Gallagher {
                peaks: gallagher_peaks(dimension),
            },
            other => return Err(Error::UnknownProblem(other.to_owned())),
        };
        Ok(Self {
            id: id.to_owned(),
            dimension,
            objective,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Location of the global minimum (objective value 0).
    pub fn optimum(&self) -> Vec<f64> {
        match &self.objective {
            Objective::Rosenbrock => vec![1.0; self.dimension],
            Objective::Gallagher { peaks } => peaks[0].centre.clone(),
            _ => vec![0.0; self.dimension],
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dimension);
        match &self.objective {
            Objective::Sphere => x.iter().map(|v| v * v).sum(),
            Objective::RotatedEllipsoid { rotation } => {
                let d = self.dimension;
                rotation
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        let z: f64 = row.iter().zip(x).map(|(r, v)| r * v).sum();
                        let exponent = if d > 1 { 6.0 * i as f64 / (d - 1) as f64 } else { 0.0 };
                        10f64.powf(exponent) * z * z
                    })
                    .sum()
            }
            Objective::Rosenbrock => {
                if x.len() == 1 {
                    return (1.0 - x[0]).powi(2);
                }
                x.windows(2)
                    .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
                    .sum()
            }
            Objective::Rastrigin => {
                10.0 * x.len() as f64
                    + x.iter()
                        .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
                        .sum::<f64>()
            }
            Objective::Schwefel12 => {
                let mut prefix = 0.0;
                x.iter()
                    .map(|v| {
                        prefix += v;
                        prefix * prefix
                    })
                    .sum()
            }
            Objective::Gallagher { peaks } => {
                let d = self.dimension as f64;
                let best = peaks
                    .iter()
                    .map(|p| {
                        let sq: f64 = p.centre.iter().zip(x).map(|(c, v)| (c - v).powi(2)).sum();
                        p.height * (-p.sharpness * sq / (2.0 * d)).exp()
                    })
                    .fold(0.0, f64::max);
                (10.0 - best).powi(2)
            }
        }
    }
}

/// Orthogonal matrix from Gram-Schmidt on a seeded Gaussian matrix.
fn random_rotation(d: usize) -> Vec<Vec<f64>> {
    let mut rng = keyed_rng(&["rotation", &d.to_string()]);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
            v.iter_mut().zip(b).for_each(|(a, c)| *a -= dot * c);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|a| *a /= norm);
            basis.push(v);
        }
    }
    basis
}

fn gallagher_peaks(d: usize) -> Vec<Peak> {
    let mut rng = keyed_rng(&["gallagher", &d.to_string()]);
    (0..GALLAGHER_PEAKS)
        .map(|i| {
            let reach = if i == 0 { 4.0 } else { 4.9 };
            let centre = (0..d).map(|_| rng.random_range(-reach..=reach)).collect();
            let (height, sharpness) = if i == 0 {
                (10.0, 1.0)
            } else {
                let t = (i - 1) as f64 / (GALLAGHER_PEAKS - 2) as f64;
                (1.1 + 8.0 * t, 10f64.powf(2.0 * t))
            };
            Peak {
                centre,
                height,
                sharpness,
            }
        })
        .collect()
}
