//! Scalable test functions with known minimum 0.
//!
//! The shifted variants draw their shift from `[-80, 80]^D` (and the rotated
//! one its rotation) with a fixed seed, so a given dimension always yields
//! the same instance.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{HdsError, Result};
use crate::numerics::RngStream;
use crate::sampler::Bounds;

pub const DEFAULT_LOWER: f64 = -100.0;
pub const DEFAULT_UPPER: f64 = 100.0;
/// Seed of the shift vectors and rotation matrices.
pub const INSTANCE_SEED: u64 = 2017;
/// Shift coordinates are drawn from `[-SHIFT_RANGE, SHIFT_RANGE]`.
pub const SHIFT_RANGE: f64 = 80.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionId {
    Sphere,
    Rastrigin,
    Rosenbrock,
    Ackley,
    Griewank,
    Zakharov,
    Schwefel221,
    ShiftedSphere,
    ShiftedRastrigin,
    ShiftedRosenbrock,
    ShiftedAckley,
    ShiftedGriewank,
    ShiftedZakharov,
    ShiftedSchwefel221,
    ShiftedRotatedRastrigin,
}

impl FunctionId {
    pub const ALL: [FunctionId; 15] = [
        FunctionId::Sphere,
        FunctionId::Rastrigin,
        FunctionId::Rosenbrock,
        FunctionId::Ackley,
        FunctionId::Griewank,
        FunctionId::Zakharov,
        FunctionId::Schwefel221,
        FunctionId::ShiftedSphere,
        FunctionId::ShiftedRastrigin,
        FunctionId::ShiftedRosenbrock,
        FunctionId::ShiftedAckley,
        FunctionId::ShiftedGriewank,
        FunctionId::ShiftedZakharov,
        FunctionId::ShiftedSchwefel221,
        FunctionId::ShiftedRotatedRastrigin,
    ];

    /// Functions whose minimizer is off the box center.
    ///
    /// The unshifted functions other than Rosenbrock have their minimum at
    /// the origin, which is exactly the second unscrambled Sobol point, so a
    /// Sobol-initialized population starts at the optimum.
    pub const SHIFTED: [FunctionId; 8] = [
        FunctionId::ShiftedSphere,
        FunctionId::ShiftedRastrigin,
        FunctionId::ShiftedRosenbrock,
        FunctionId::ShiftedAckley,
        FunctionId::ShiftedGriewank,
        FunctionId::ShiftedZakharov,
        FunctionId::ShiftedSchwefel221,
        FunctionId::ShiftedRotatedRastrigin,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FunctionId::Sphere => "sphere",
            FunctionId::Rastrigin => "rastrigin",
            FunctionId::Rosenbrock => "rosenbrock",
            FunctionId::Ackley => "ackley",
            FunctionId::Griewank => "griewank",
            FunctionId::Zakharov => "zakharov",
            FunctionId::Schwefel221 => "schwefel221",
            FunctionId::ShiftedSphere => "shifted_sphere",
            FunctionId::ShiftedRastrigin => "shifted_rastrigin",
            FunctionId::ShiftedRosenbrock => "shifted_rosenbrock",
            FunctionId::ShiftedAckley => "shifted_ackley",
            FunctionId::ShiftedGriewank => "shifted_griewank",
            FunctionId::ShiftedZakharov => "shifted_zakharov",
            FunctionId::ShiftedSchwefel221 => "shifted_schwefel221",
            FunctionId::ShiftedRotatedRastrigin => "shifted_rotated_rastrigin",
        }
    }

    /// The unshifted function this one is built on.
    pub fn base(self) -> FunctionId {
        match self {
            FunctionId::ShiftedSphere => FunctionId::Sphere,
            FunctionId::ShiftedRastrigin | FunctionId::ShiftedRotatedRastrigin => {
                FunctionId::Rastrigin
            }
            FunctionId::ShiftedRosenbrock => FunctionId::Rosenbrock,
            FunctionId::ShiftedAckley => FunctionId::Ackley,
            FunctionId::ShiftedGriewank => FunctionId::Griewank,
            FunctionId::ShiftedZakharov => FunctionId::Zakharov,
            FunctionId::ShiftedSchwefel221 => FunctionId::Schwefel221,
            f => f,
        }
    }

    pub fn is_shifted(self) -> bool {
        self.base() != self
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FunctionId {
    type Err = HdsError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        FunctionId::ALL
            .into_iter()
            .find(|f| f.as_str() == key)
            .ok_or_else(|| HdsError::Config(format!("unknown benchmark function '{s}'")))
    }
}

/// A function instance at a fixed dimension.
#[derive(Clone, Debug)]
pub struct BenchmarkFunction {
    id: FunctionId,
    dims: usize,
    shift: Vec<f64>,
    /// Row-major orthogonal matrix, empty when unrotated.
    rotation: Vec<f64>,
}

impl BenchmarkFunction {
    pub fn new(id: FunctionId, dims: usize) -> Result<Self> {
        if dims == 0 {
            return Err(HdsError::Config(
                "benchmark dimension must be at least 1".into(),
            ));
        }
        let root = RngStream::new(INSTANCE_SEED);
        let shift = if id.is_shifted() {
            let mut rng = root.derive(&format!("shift/{id}/{dims}"));
            (0..dims)
                .map(|_| rng.uniform_range(-SHIFT_RANGE, SHIFT_RANGE))
                .collect()
        } else {
            Vec::new()
        };
        let rotation = match id {
            FunctionId::ShiftedRotatedRastrigin => {
                random_rotation(dims, &mut root.derive(&format!("rotation/{dims}")))
            }
            _ => Vec::new(),
        };
        Ok(Self {
            id,
            dims,
            shift,
            rotation,
        })
    }

    pub fn id(&self) -> FunctionId {
        self.id
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn optimum(&self) -> f64 {
        0.0
    }

    pub fn default_bounds(&self) -> Bounds {
        Bounds::uniform(self.dims, DEFAULT_LOWER, DEFAULT_UPPER)
            .expect("non-degenerate default bounds")
    }

    /// A point where the minimum is attained.
    pub fn minimizer(&self) -> Vec<f64> {
        if self.id.is_shifted() {
            self.shift.clone()
        } else if self.id == FunctionId::Rosenbrock {
            vec![1.0; self.dims]
        } else {
            vec![0.0; self.dims]
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dims, "point dimension mismatch");
        if self.id == FunctionId::ShiftedRotatedRastrigin {
            // scale [-100, 100] onto Rastrigin's usual [-5.12, 5.12]
            let y: Vec<f64> = x
                .iter()
                .zip(&self.shift)
                .map(|(a, o)| (a - o) * 5.12 / 100.0)
                .collect();
            let z: Vec<f64> = self
                .rotation
                .chunks_exact(self.dims)
                .map(|row| row.iter().zip(&y).map(|(m, v)| m * v).sum())
                .collect();
            return rastrigin(&z);
        }
        if !self.id.is_shifted() {
            return base_value(self.id, x);
        }
        // Rosenbrock's unshifted minimizer is at 1, the others at 0
        let offset = if self.id.base() == FunctionId::Rosenbrock {
            1.0
        } else {
            0.0
        };
        let z: Vec<f64> = x
            .iter()
            .zip(&self.shift)
            .map(|(a, o)| a - o + offset)
            .collect();
        base_value(self.id.base(), &z)
    }

    /// `f(x) - f*`, or `+inf` when `f(x)` is not finite.
    pub fn error(&self, x: &[f64]) -> f64 {
        let v = self.evaluate(x) - self.optimum();
        if v.is_finite() {
            v.max(0.0)
        } else {
            f64::INFINITY
        }
    }
}

/// Evaluates function `id` at `x`, using the instance for `x.len()` dimensions.
pub fn evaluate_function(id: FunctionId, x: &[f64]) -> Result<f64> {
    Ok(BenchmarkFunction::new(id, x.len())?.evaluate(x))
}

fn base_value(id: FunctionId, x: &[f64]) -> f64 {
    match id {
        FunctionId::Sphere => sphere(x),
        FunctionId::Rastrigin => rastrigin(x),
        FunctionId::Rosenbrock => rosenbrock(x),
        FunctionId::Ackley => ackley(x),
        FunctionId::Griewank => griewank(x),
        FunctionId::Zakharov => zakharov(x),
        FunctionId::Schwefel221 => x.iter().fold(0.0, |m, v| m.max(v.abs())),
        other => unreachable!("{other} is not a base function"),
    }
}

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn rastrigin(x: &[f64]) -> f64 {
    x.iter()
        .map(|v| v * v - 10.0 * (2.0 * PI * v).cos() + 10.0)
        .sum()
}

fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum()
}

fn ackley(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / d;
    let cos = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / d;
    -20.0 * (-0.2 * sq.sqrt()).exp() - cos.exp() + 20.0 + E
}

fn griewank(x: &[f64]) -> f64 {
    let sum = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
    let prod: f64 = x
        .iter()
        .enumerate()
        .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
        .product();
    sum - prod + 1.0
}

fn zakharov(x: &[f64]) -> f64 {
    let s1 = sphere(x);
    let s2: f64 = x
        .iter()
        .enumerate()
        .map(|(i, v)| 0.5 * (i + 1) as f64 * v)
        .sum();
    s1 + s2 * s2 + s2.powi(4)
}

/// Haar-ish random orthogonal matrix by Gram-Schmidt on Gaussian rows.
fn random_rotation(d: usize, rng: &mut RngStream) -> Vec<f64> {
    let mut m: Vec<f64> = Vec::with_capacity(d * d);
    while m.len() < d * d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
        // two passes keep the basis orthogonal to machine precision
        for _ in 0..2 {
            for row in m.chunks_exact(d) {
                let dot: f64 = row.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(row).for_each(|(x, r)| *x -= dot * r);
            }
        }
        let norm = sphere(&v).sqrt();
        if norm > 1e-8 {
            m.extend(v.iter().map(|x| x / norm));
        }
    }
    m
}
