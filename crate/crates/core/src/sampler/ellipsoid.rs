//! Per-cluster hyperellipsoid geometry, sample allocation and sampling.

use crate::clustering::kmeans::{self, minibatch_kmeans};
use crate::error::Result;
use crate::matrix::{Frame, SampleMatrix};
use crate::numerics::{marsaglia_unit_directions, pca_fit, sobol_points, RngStream, SobolEngine};

#[derive(Clone, Debug, PartialEq)]
pub struct EllipsoidModel {
    /// Cluster centroid in the unit frame.
    pub center: Vec<f64>,
    /// `D x D` row-major; row `i` is the direction of semi-axis `i`.
    pub rotation: Vec<f64>,
    pub semi_axes: Vec<f64>,
    /// Initial samples that fell in this cluster.
    pub weight_count: usize,
    /// Output samples assigned to this ellipsoid.
    pub allocation: usize,
}

impl EllipsoidModel {
    pub fn dims(&self) -> usize {
        self.center.len()
    }

    pub fn axis(&self, i: usize) -> &[f64] {
        let d = self.dims();
        &self.rotation[i * d..(i + 1) * d]
    }

    /// Axis-aligned ellipsoid with the given semi-axes.
    pub fn axis_aligned(center: Vec<f64>, semi_axes: Vec<f64>) -> Self {
        let d = center.len();
        let mut rotation = vec![0.0; d * d];
        for i in 0..d {
            rotation[i * d + i] = 1.0;
        }
        Self {
            center,
            rotation,
            semi_axes,
            weight_count: 0,
            allocation: 0,
        }
    }
}

/// Final k-means fit with `k` clusters followed by PCA of each cluster.
///
/// Clusters with fewer than two members keep an identity rotation and
/// `sqrt(epsilon)` semi-axes.
pub fn build_ellipsoids(
    initial: &SampleMatrix,
    k: usize,
    rng: &mut RngStream,
    epsilon: f64,
) -> Result<Vec<EllipsoidModel>> {
    let batch = initial.nrows().min(kmeans::DEFAULT_BATCH_SIZE);
    let model = minibatch_kmeans(initial, k, rng, batch, kmeans::DEFAULT_MAX_BATCHES)?;
    let d = initial.ncols();
    let mut out = Vec::with_capacity(k);
    for (j, members) in model.members().into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let center = model.centroids.row(j).to_vec();
        let mut ellipsoid = if members.len() < 2 {
            EllipsoidModel::axis_aligned(center, vec![epsilon.sqrt(); d])
        } else {
            let pca = pca_fit(&initial.select_rows(&members), epsilon)?;
            EllipsoidModel {
                center,
                rotation: pca.components,
                semi_axes: pca.semi_axes,
                weight_count: 0,
                allocation: 0,
            }
        };
        ellipsoid.weight_count = members.len();
        out.push(ellipsoid);
    }
    Ok(out)
}

/// Splits `total` samples proportionally to `counts`.
///
/// Each share is `round(total * n_k / sum n)`; the rounded sum is then moved
/// to exactly `total` one sample at a time through the cluster with the
/// largest count (lowest index on ties).
pub fn allocate_samples(counts: &[usize], total: usize) -> Vec<usize> {
    let sum: usize = counts.iter().sum();
    if sum == 0 {
        return vec![0; counts.len()];
    }
    let mut alloc: Vec<usize> = counts
        .iter()
        .map(|&c| (total as f64 * c as f64 / sum as f64).round() as usize)
        .collect();
    let largest = |alloc: &[usize], need_positive: bool| {
        let mut best: Option<usize> = None;
        for (i, &c) in counts.iter().enumerate() {
            if need_positive && alloc[i] == 0 {
                continue;
            }
            if best.is_none_or(|b| c > counts[b]) {
                best = Some(i);
            }
        }
        best
    };
    let mut assigned: usize = alloc.iter().sum();
    while assigned < total {
        let i = largest(&alloc, false).expect("non-empty counts");
        alloc[i] += 1;
        assigned += 1;
    }
    while assigned > total {
        let i = largest(&alloc, true).expect("positive allocation while over budget");
        alloc[i] -= 1;
        assigned -= 1;
    }
    alloc
}

/// Draws `count` points inside `model`, in the unit frame, unclipped.
///
/// Directions are uniform on the sphere; radii are `q^(1/D) * lambda` with
/// `q` taken from the shared one-dimensional Sobol stream `radial`, which
/// makes the radii uniform in volume. The scaled sphere points are stretched
/// by the semi-axes, rotated onto the principal axes and shifted to the
/// center.
pub fn sample_ellipsoid(
    model: &EllipsoidModel,
    count: usize,
    lambda: f64,
    radial: &mut SobolEngine,
    rng: &mut RngStream,
) -> Result<SampleMatrix> {
    let d = model.dims();
    if count == 0 {
        return Ok(SampleMatrix::zeros(0, d, Frame::Unit));
    }
    let directions = marsaglia_unit_directions(count, d, rng);
    let q = sobol_points(radial, count)?;
    let inv_d = 1.0 / d as f64;
    let mut out = SampleMatrix::zeros(count, d, Frame::Unit);
    let mut scaled = vec![0.0; d];
    for i in 0..count {
        let radius = q.get(i, 0).powf(inv_d) * lambda;
        for ((s, &u), &sigma) in scaled
            .iter_mut()
            .zip(directions.row(i))
            .zip(&model.semi_axes)
        {
            *s = u * radius * sigma;
        }
        let row = out.row_mut(i);
        row.copy_from_slice(&model.center);
        for (j, &s) in scaled.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            for (x, &a) in row.iter_mut().zip(model.axis(j)) {
                *x += s * a;
            }
        }
    }
    Ok(out)
}
