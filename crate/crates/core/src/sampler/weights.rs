//! Gaussian prior weights on the initial QMC set.

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::matrix::SampleMatrix;
use crate::numerics::RngStream;
use crate::sampler::bounds::Bounds;

/// Axis-aligned Gaussian emphasis, given in the original bounds frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianWeightSpec {
    pub mean: Vec<f64>,
    pub stddev: Vec<f64>,
}

impl GaussianWeightSpec {
    pub fn new(mean: Vec<f64>, stddev: Vec<f64>) -> Result<Self> {
        let spec = Self { mean, stddev };
        spec.validate(None)?;
        Ok(spec)
    }

    pub(crate) fn validate(&self, dims: Option<usize>) -> Result<()> {
        if self.mean.len() != self.stddev.len() {
            return config_err(format!(
                "weight mean has {} entries but stddev has {}",
                self.mean.len(),
                self.stddev.len()
            ));
        }
        if let Some(d) = dims {
            if self.mean.len() != d {
                return config_err(format!(
                    "weight vectors have {} entries, expected {d}",
                    self.mean.len()
                ));
            }
        }
        if self.mean.iter().any(|m| !m.is_finite()) {
            return config_err("weight mean must be finite");
        }
        if self.stddev.iter().any(|s| !(*s > 0.0)) {
            return config_err("weight stddev must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct WeightedSample {
    pub samples: SampleMatrix,
    /// Set when the weights were unusable and the input was passed through.
    pub fell_back: bool,
}

/// Resamples `initial` (unit frame) with probability proportional to
/// `prod_d exp(-(x_d - m_d)^2 / (2 s_d^2))`, where `(m, s)` is `spec` mapped
/// into the unit frame.
///
/// Systematic resampling with replacement keeps the row count. Weights are
/// formed in log space relative to the heaviest sample, so even a very narrow
/// spec concentrates on the nearest samples instead of underflowing.
pub fn apply_gaussian_weights(
    initial: &SampleMatrix,
    spec: &GaussianWeightSpec,
    bounds: &Bounds,
    rng: &mut RngStream,
) -> Result<WeightedSample> {
    spec.validate(Some(bounds.dims()))?;
    if initial.ncols() != bounds.dims() {
        return config_err("weighted sample dimension does not match bounds");
    }
    let n = initial.nrows();
    let range = bounds.range();
    let mean: Vec<f64> = spec
        .mean
        .iter()
        .zip(bounds.lower())
        .zip(&range)
        .map(|((m, lo), r)| (m - lo) / r)
        .collect();
    let inv_two_var: Vec<f64> = spec
        .stddev
        .iter()
        .zip(&range)
        .map(|(s, r)| 1.0 / (2.0 * (s / r).powi(2)))
        .collect();

    let log_w: Vec<f64> = initial
        .rows()
        .map(|x| {
            -x.iter()
                .zip(&mean)
                .zip(&inv_two_var)
                .map(|((x, m), k)| (x - m) * (x - m) * k)
                .sum::<f64>()
        })
        .collect();
    let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_w.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    if n == 0 || !top.is_finite() || !(total > 0.0) || !total.is_finite() {
        return Ok(WeightedSample {
            samples: initial.clone(),
            fell_back: true,
        });
    }

    let step = total / n as f64;
    let mut position = rng.uniform() * step;
    let mut picks = Vec::with_capacity(n);
    let mut cumulative = 0.0;
    let mut i = 0;
    for (j, &w) in weights.iter().enumerate() {
        cumulative += w;
        while i < n && position < cumulative {
            picks.push(j);
            i += 1;
            position += step;
        }
    }
    // rounding can leave the last few positions past the final cumulative sum
    let last = weights.iter().rposition(|&w| w > 0.0).unwrap_or(n - 1);
    picks.resize(n, last);
    Ok(WeightedSample {
        samples: initial.select_rows(&picks),
        fell_back: false,
    })
}
