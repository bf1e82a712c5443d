//! End-to-end sequence generation.

use serde::{Deserialize, Serialize};

use crate::clustering::{self, ahc_linkage, kmeans, minibatch_kmeans, select_cluster_count};
use crate::error::{config_err, Result};
use crate::matrix::{Frame, SampleMatrix};
use crate::numerics::{
    initial_sample_count, radial_scale_factor, RngStream, SobolEngine, DEFAULT_EPSILON,
};
use crate::sampler::bounds::{denormalize, Bounds};
use crate::sampler::ellipsoid::{
    allocate_samples, build_ellipsoids, sample_ellipsoid, EllipsoidModel,
};
use crate::sampler::fill::{reject_and_fill, DEFAULT_K_NEIGHBORS};
use crate::sampler::weights::{apply_gaussian_weights, GaussianWeightSpec};

pub const DEFAULT_CAP_EXPONENT: u32 = 15;
pub const DEFAULT_K_INIT: usize = 100;
/// Candidates drawn per batch: `ceil(OVERSAMPLE * missing) + OVERSAMPLE_PAD`.
pub const OVERSAMPLE: f64 = 1.5;
pub const OVERSAMPLE_PAD: usize = 16;
/// Candidate batches per ellipsoid before the remaining deficit is void filled.
pub const MAX_CANDIDATE_ROUNDS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HdsConfig {
    pub n_samples: usize,
    pub dims: usize,
    pub bounds: Bounds,
    pub seed: u64,
    /// Overrides the initial centroid count.
    pub k_init: Option<usize>,
    /// Fixes the ellipsoid count and skips the dendrogram analysis.
    pub n_ellipsoids: Option<usize>,
    pub weights: Option<GaussianWeightSpec>,
    /// Keep the output in the unit cube instead of mapping it to `bounds`.
    pub normalize: bool,
    pub cap_exponent: u32,
    pub epsilon: f64,
}

impl HdsConfig {
    pub fn new(n_samples: usize, bounds: Bounds) -> Self {
        Self {
            n_samples,
            dims: bounds.dims(),
            bounds,
            seed: 0,
            k_init: None,
            n_ellipsoids: None,
            weights: None,
            normalize: false,
            cap_exponent: DEFAULT_CAP_EXPONENT,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_normalize(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn with_weights(mut self, weights: GaussianWeightSpec) -> Self {
        self.weights = Some(weights);
        self
    }

    pub fn with_ellipsoids(mut self, k: usize) -> Self {
        self.n_ellipsoids = Some(k);
        self
    }

    pub fn with_k_init(mut self, k: usize) -> Self {
        self.k_init = Some(k);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return config_err("number of samples must be at least 1");
        }
        if self.dims == 0 {
            return config_err("dimension must be at least 1");
        }
        if self.bounds.dims() != self.dims {
            return config_err(format!(
                "bounds have {} dimensions but dims = {}",
                self.bounds.dims(),
                self.dims
            ));
        }
        if self.k_init == Some(0) || self.n_ellipsoids == Some(0) {
            return config_err("cluster counts must be positive");
        }
        if !(self.epsilon > 0.0) {
            return config_err("epsilon must be positive");
        }
        if self.cap_exponent > 30 {
            return config_err("cap exponent must be at most 30");
        }
        if let Some(w) = &self.weights {
            w.validate(Some(self.dims))?;
        }
        Ok(())
    }
}

/// Generated sequence plus the intermediate geometry, for inspection.
#[derive(Clone, Debug)]
pub struct HdsOutput {
    pub samples: SampleMatrix,
    pub ellipsoids: Vec<EllipsoidModel>,
    pub n_initial: usize,
    pub k_init: usize,
    pub lambda: f64,
    /// Points supplied by void filling rather than ellipsoid sampling.
    pub filled: usize,
    pub weight_fallback: bool,
    pub degenerate: bool,
}

impl HdsOutput {
    pub fn n_ellipsoids(&self) -> usize {
        self.ellipsoids.len()
    }
}

/// Generates `config.n_samples` points of a hyperellipsoid density sequence.
pub fn hds_generate(config: &HdsConfig) -> Result<SampleMatrix> {
    Ok(hds_generate_detailed(config)?.samples)
}

pub fn hds_generate_detailed(config: &HdsConfig) -> Result<HdsOutput> {
    config.validate()?;
    let d = config.dims;
    let root = RngStream::new(config.seed);

    // initial Sobol cover of the unit cube, optionally reweighted
    let n_initial = initial_sample_count(d, config.cap_exponent);
    let mut initial = SobolEngine::new(d)?.points(n_initial)?;
    let mut weight_fallback = false;
    if let Some(spec) = &config.weights {
        let weighted =
            apply_gaussian_weights(&initial, spec, &config.bounds, &mut root.derive("weights"))?;
        weight_fallback = weighted.fell_back;
        initial = weighted.samples;
    }

    // ellipsoid count from the dendrogram of the initial centroids
    let k_init = config
        .k_init
        .unwrap_or_else(|| clustering::initial_cluster_count(d, DEFAULT_K_INIT))
        .min(n_initial);
    let k = match config.n_ellipsoids {
        Some(k) => k.min(n_initial),
        None => {
            let batch = n_initial.min(kmeans::DEFAULT_BATCH_SIZE);
            let coarse = minibatch_kmeans(
                &initial,
                k_init,
                &mut root.derive("kmeans-init"),
                batch,
                kmeans::DEFAULT_MAX_BATCHES,
            )?;
            let merges = ahc_linkage(&coarse.centroids);
            select_cluster_count(&merges, clustering::linkage::DEFAULT_MAX_CLUSTERS)
        }
    };

    let mut ellipsoids = build_ellipsoids(
        &initial,
        k,
        &mut root.derive("kmeans-final"),
        config.epsilon,
    )?;
    let counts: Vec<usize> = ellipsoids.iter().map(|e| e.weight_count).collect();
    let allocation = allocate_samples(&counts, config.n_samples);
    assert_eq!(
        allocation.iter().sum::<usize>(),
        config.n_samples,
        "allocation must conserve N"
    );
    for (e, &a) in ellipsoids.iter_mut().zip(&allocation) {
        e.allocation = a;
    }

    let lambda = radial_scale_factor(d)?;
    let mut radial = SobolEngine::new(1)?;
    let mut directions = root.derive("directions");
    let mut pool = SampleMatrix::with_capacity(d, config.n_samples, Frame::Unit);
    for e in &ellipsoids {
        if e.allocation == 0 {
            continue;
        }
        // top up with further batches sized to the deficit; void filling
        // only covers what is still missing afterwards
        let mut taken = 0;
        for _ in 0..MAX_CANDIDATE_ROUNDS {
            let missing = e.allocation - taken;
            if missing == 0 {
                break;
            }
            let n_candidates = (OVERSAMPLE * missing as f64).ceil() as usize + OVERSAMPLE_PAD;
            let candidates =
                sample_ellipsoid(e, n_candidates, lambda, &mut radial, &mut directions)?;
            for row in candidates.rows() {
                if taken == e.allocation {
                    break;
                }
                if row.iter().all(|v| (0.0..=1.0).contains(v)) {
                    pool.push_row(row);
                    taken += 1;
                }
            }
        }
    }

    let mut centers = SampleMatrix::with_capacity(d, ellipsoids.len(), Frame::Unit);
    for e in &ellipsoids {
        centers.push_row(&e.center);
    }
    let fill = reject_and_fill(
        &pool,
        config.n_samples,
        &mut root.derive("fill"),
        DEFAULT_K_NEIGHBORS,
        &centers,
    )?;

    let samples = if config.normalize {
        fill.samples
    } else {
        denormalize(&fill.samples, &config.bounds)?
    };
    Ok(HdsOutput {
        samples,
        ellipsoids,
        n_initial,
        k_init,
        lambda,
        filled: fill.filled,
        weight_fallback,
        degenerate: fill.degenerate,
    })
}
