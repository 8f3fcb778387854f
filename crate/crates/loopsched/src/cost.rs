//! Per-iteration cost models for the simulator and the synthetic workload.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::workload::mandelbrot::{escape_iterations, MandelbrotParams};

/// How long each loop iteration takes on a speed-1 PE, in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostModel {
    /// Every iteration costs `mean` seconds.
    Constant { mean: f64 },
    /// Independent draws from a normal distribution, resampled until
    /// positive. Deterministic for a given seed.
    SyntheticRandom { mean: f64, stddev: f64 },
    /// Explicit per-iteration costs.
    Trace { costs: Vec<f64> },
    /// Cost proportional to the actual per-pixel escape iteration count of
    /// the Mandelbrot kernel (plus one, so zero-work pixels stay positive),
    /// computed in a cheap pre-pass. `unit` is seconds per escape iteration.
    MandelbrotProfile { params: MandelbrotParams, unit: f64 },
}

impl CostModel {
    pub fn constant(mean: f64) -> Self {
        CostModel::Constant { mean }
    }

    /// Expands the model into one cost per iteration.
    pub fn materialize(&self, n: u64, seed: u64) -> Result<Vec<f64>> {
        match self {
            CostModel::Constant { mean } => {
                require_positive(*mean, "mean cost")?;
                Ok(vec![*mean; n as usize])
            }
            CostModel::SyntheticRandom { mean, stddev } => {
                require_positive(*mean, "mean cost")?;
                if *stddev < 0.0 || !stddev.is_finite() {
                    return Err(Error::InvalidCost("stddev must be non-negative".into()));
                }
                let normal = Normal::new(*mean, *stddev)
                    .map_err(|e| Error::InvalidCost(e.to_string()))?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok((0..n)
                    .map(|_| {
                        for _ in 0..1000 {
                            let draw = normal.sample(&mut rng);
                            if draw > 0.0 {
                                return draw;
                            }
                        }
                        *mean
                    })
                    .collect())
            }
            CostModel::Trace { costs } => {
                if costs.len() as u64 != n {
                    return Err(Error::InvalidCost(format!(
                        "trace has {} costs, loop has {n} iterations",
                        costs.len()
                    )));
                }
                if costs.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
                    return Err(Error::InvalidCost("trace costs must be positive".into()));
                }
                Ok(costs.clone())
            }
            CostModel::MandelbrotProfile { params, unit } => {
                require_positive(*unit, "cost unit")?;
                params.validate()?;
                if params.pixel_count() != n {
                    return Err(Error::InvalidCost(format!(
                        "profile covers {} pixels, loop has {n} iterations",
                        params.pixel_count()
                    )));
                }
                Ok((0..n)
                    .map(|i| (escape_iterations(params, i) as f64 + 1.0) * unit)
                    .collect())
            }
        }
    }
}

fn require_positive(value: f64, what: &str) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::InvalidCost(format!("{what} must be positive, got {value}")));
    }
    Ok(())
}

/// Prefix sums over per-iteration costs so chunk execution times are O(1).
#[derive(Debug, Clone)]
pub struct CostTable {
    prefix: Vec<f64>,
}

impl CostTable {
    pub fn new(costs: &[f64]) -> Self {
        let mut prefix = Vec::with_capacity(costs.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for &c in costs {
            acc += c;
            prefix.push(acc);
        }
        CostTable { prefix }
    }

    pub fn len(&self) -> u64 {
        (self.prefix.len() - 1) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Total cost of iterations `[start, start + size)` on a speed-1 PE.
    pub fn range_cost(&self, start: u64, size: u64) -> f64 {
        self.prefix[(start + size) as usize] - self.prefix[start as usize]
    }

    pub fn total(&self) -> f64 {
        *self.prefix.last().unwrap()
    }
}
