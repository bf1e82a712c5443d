//! Differential evolution, strategy best/1/bin, with an injectable initial
//! population.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{config_err, HdsError, Result};
use crate::matrix::{Frame, SampleMatrix};
use crate::numerics::{RngStream, SobolEngine};
use crate::sampler::{denormalize, hds_generate, Bounds, HdsConfig};

pub const MIN_POPULATION: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeConfig {
    pub f_low: f64,
    pub f_high: f64,
    pub cr: f64,
    pub max_iter: usize,
    /// Relative spread of population energies at which to stop; 0 disables.
    pub tol: f64,
    pub seed: u64,
    /// Label of the random stream derived from `seed`.
    pub stream: String,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            f_low: 0.5,
            f_high: 1.0,
            cr: 0.7,
            max_iter: 100,
            tol: 0.0,
            seed: 0,
            stream: "de".into(),
        }
    }
}

impl DeConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_low > 0.0 && self.f_low <= self.f_high && self.f_high <= 2.0) {
            return config_err(format!(
                "mutation range must satisfy 0 < low <= high <= 2, got ({}, {})",
                self.f_low, self.f_high
            ));
        }
        if !(0.0..=1.0).contains(&self.cr) {
            return config_err(format!("crossover probability {} outside [0, 1]", self.cr));
        }
        if self.max_iter == 0 {
            return config_err("max_iter must be at least 1");
        }
        if !(self.tol >= 0.0) {
            return config_err("tol must be non-negative");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeOutcome {
    pub best: Vec<f64>,
    pub best_value: f64,
    /// Best value after initialization and after each generation.
    pub history: Vec<f64>,
    pub generations: usize,
    pub evaluations: usize,
    /// Objective calls that returned NaN or an infinity.
    pub non_finite: usize,
}

/// Minimizes `objective` over `bounds` starting from `init_population`.
///
/// Each generation draws one `F ~ U(f_low, f_high)`. Members are updated in
/// place, so later members of a generation already see improvements made by
/// earlier ones, including a new best. Trial vectors replace their target
/// when not worse. Non-finite objective values count as `+inf`.
pub fn differential_evolution<F>(
    mut objective: F,
    bounds: &Bounds,
    init_population: &SampleMatrix,
    config: &DeConfig,
) -> Result<DeOutcome>
where
    F: FnMut(&[f64]) -> f64,
{
    config.validate()?;
    let n = init_population.nrows();
    let d = bounds.dims();
    if n < MIN_POPULATION {
        return config_err(format!(
            "population of {n} is below the minimum of {MIN_POPULATION}"
        ));
    }
    if init_population.ncols() != d {
        return config_err(format!(
            "population has {} columns but bounds have {d} dimensions",
            init_population.ncols()
        ));
    }
    if let Some(i) = (0..n).find(|&i| !bounds.contains(init_population.row(i))) {
        return Err(HdsError::Domain(format!(
            "initial member {i} lies outside the bounds"
        )));
    }

    let mut rng = RngStream::new(config.seed).derive(&config.stream);
    let mut pop = init_population.clone();
    let mut non_finite = 0usize;
    let mut evaluate = |x: &[f64], non_finite: &mut usize| {
        let v = objective(x);
        if v.is_finite() {
            v
        } else {
            *non_finite += 1;
            f64::INFINITY
        }
    };

    let mut energies: Vec<f64> = (0..n)
        .map(|i| evaluate(pop.row(i), &mut non_finite))
        .collect();
    let mut evaluations = n;
    let mut best = argmin(&energies);
    let mut history = Vec::with_capacity(config.max_iter + 1);
    history.push(energies[best]);

    let (lo, hi) = (bounds.lower().to_vec(), bounds.upper().to_vec());
    let mut trial = vec![0.0; d];
    let mut generations = 0;
    for _ in 0..config.max_iter {
        let f = rng.uniform_range(config.f_low, config.f_high);
        for i in 0..n {
            let (r1, r2) = pick_two(n, i, &mut rng);
            let jrand = rng.index(d);
            let (xb, x1, x2, xi) = (pop.row(best), pop.row(r1), pop.row(r2), pop.row(i));
            for j in 0..d {
                trial[j] = if j == jrand || rng.uniform() < config.cr {
                    let v = xb[j] + f * (x1[j] - x2[j]);
                    if v < lo[j] || v > hi[j] {
                        rng.uniform_range(lo[j], hi[j])
                    } else {
                        v
                    }
                } else {
                    xi[j]
                };
            }
            let e = evaluate(&trial, &mut non_finite);
            evaluations += 1;
            if e <= energies[i] {
                pop.row_mut(i).copy_from_slice(&trial);
                energies[i] = e;
                if e < energies[best] {
                    best = i;
                }
            }
        }
        generations += 1;
        history.push(energies[best]);
        if config.tol > 0.0 && converged(&energies, config.tol) {
            break;
        }
    }

    Ok(DeOutcome {
        best: pop.row(best).to_vec(),
        best_value: energies[best],
        history,
        generations,
        evaluations,
        non_finite,
    })
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Two distinct indices in `0..n`, both different from `exclude`.
fn pick_two(n: usize, exclude: usize, rng: &mut RngStream) -> (usize, usize) {
    let mut a = rng.index(n - 1);
    if a >= exclude {
        a += 1;
    }
    let (lo, hi) = if a < exclude {
        (a, exclude)
    } else {
        (exclude, a)
    };
    let mut b = rng.index(n - 2);
    if b >= lo {
        b += 1;
    }
    if b >= hi {
        b += 1;
    }
    (a, b)
}

fn converged(energies: &[f64], tol: f64) -> bool {
    if energies.iter().any(|e| !e.is_finite()) {
        return false;
    }
    let n = energies.len() as f64;
    let mean = energies.iter().sum::<f64>() / n;
    let var = energies.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() <= tol * mean.abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMethod {
    Hds,
    Sobol,
}

impl InitMethod {
    pub const ALL: [InitMethod; 2] = [InitMethod::Hds, InitMethod::Sobol];

    pub fn as_str(self) -> &'static str {
        match self {
            InitMethod::Hds => "hds",
            InitMethod::Sobol => "sobol",
        }
    }
}

impl fmt::Display for InitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InitMethod {
    type Err = HdsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hds" => Ok(InitMethod::Hds),
            "sobol" => Ok(InitMethod::Sobol),
            other => Err(HdsError::Config(format!(
                "unknown method '{other}' (expected hds or sobol)"
            ))),
        }
    }
}

/// Sobol points mapped into `bounds`, skipping the all-zeros first point.
pub fn sobol_population(n: usize, bounds: &Bounds) -> Result<SampleMatrix> {
    let mut engine = SobolEngine::new(bounds.dims())?;
    engine.skip(1)?;
    let unit = engine.points(n)?;
    denormalize(&unit, bounds)
}

/// Initial DE population of `n` points in `bounds`.
///
/// The Sobol sequence is unscrambled, so `seed` only affects HDS.
pub fn make_init_population(
    method: InitMethod,
    n: usize,
    bounds: &Bounds,
    seed: u64,
) -> Result<SampleMatrix> {
    let out = match method {
        InitMethod::Sobol => sobol_population(n, bounds)?,
        InitMethod::Hds => hds_generate(&HdsConfig::new(n, bounds.clone()).with_seed(seed))?,
    };
    debug_assert_eq!(out.frame(), Frame::Bounds);
    Ok(out)
}
