use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// K(τ) = g² e^{−γτ}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialKernel {
    pub g: f64,
    pub gamma: f64,
}

impl ExponentialKernel {
    pub fn new(g: f64, gamma: f64) -> Result<Self> {
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::InvalidKernel(format!("coupling g must be finite and >= 0, got {g}")));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidKernel(format!("decay gamma must be finite and > 0, got {gamma}")));
        }
        Ok(ExponentialKernel { g, gamma })
    }

    /// Kernel in units of γ = 1 with coupling ratio g/γ.
    pub fn from_ratio(ratio: f64) -> Result<Self> {
        Self::new(ratio, 1.0)
    }

    pub fn value(&self, tau: f64) -> f64 {
        self.g * self.g * (-self.gamma * tau.abs()).exp()
    }
}

/// Kernel samples on a strictly increasing grid starting at 0, linearly
/// interpolated in between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedKernel {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedKernel {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.is_empty() {
            return Err(Error::InvalidKernel(format!(
                "need matching nonempty grids, got {} times and {} values",
                times.len(),
                values.len()
            )));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidKernel(format!("grid must start at 0, starts at {}", times[0])));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidKernel("grid must be strictly increasing".into()));
        }
        if values.iter().chain(times.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidKernel("non-finite sample".into()));
        }
        Ok(TabulatedKernel { times, values })
    }

    /// Samples `kernel` at `count` evenly spaced points on [0, t_max].
    pub fn sample(kernel: impl Fn(f64) -> f64, t_max: f64, count: usize) -> Result<Self> {
        let count = count.max(2);
        let times: Vec<f64> =
            (0..count).map(|k| t_max * k as f64 / (count - 1) as f64).collect();
        let values = times.iter().map(|&t| kernel(t)).collect();
        Self::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("nonempty grid")
    }

    pub fn value(&self, tau: f64) -> Result<f64> {
        let horizon = self.horizon();
        if tau < 0.0 || tau > horizon * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::GridCoverage { covered: horizon, needed: tau });
        }
        if self.times.len() == 1 {
            return Ok(self.values[0]);
        }
        let idx = match self.times.binary_search_by(|t| t.total_cmp(&tau)) {
            Ok(i) => return Ok(self.values[i]),
            Err(i) => i.clamp(1, self.times.len() - 1),
        };
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let w = ((tau - t0) / (t1 - t0)).clamp(0.0, 1.0);
        Ok(self.values[idx - 1] * (1.0 - w) + self.values[idx] * w)
    }
}

/// Memory kernel of the generalized master equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MemoryKernel {
    Exponential(ExponentialKernel),
    Tabulated(TabulatedKernel),
    /// Memoryless limit: the convolution collapses to `rate`·Lρ(t).
    MarkovLimit { rate: f64 },
}

impl MemoryKernel {
    pub fn validate(&self) -> Result<()> {
        match self {
            MemoryKernel::Exponential(k) => ExponentialKernel::new(k.g, k.gamma).map(|_| ()),
            MemoryKernel::Tabulated(k) => {
                TabulatedKernel::new(k.times.clone(), k.values.clone()).map(|_| ())
            }
            MemoryKernel::MarkovLimit { rate } => {
                if rate.is_finite() && *rate >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidKernel(format!("Markov rate must be >= 0, got {rate}")))
                }
            }
        }
    }
}
