//! Mini-batch k-means with k-means++ seeding.

use crate::error::{config_err, Result};
use crate::matrix::{Frame, SampleMatrix};
use crate::numerics::RngStream;

/// Size of the seeded subsample that k-means++ initialization runs on.
pub const SEEDING_SUBSAMPLE: usize = 2048;
pub const DEFAULT_BATCH_SIZE: usize = 1024;
pub const DEFAULT_MAX_BATCHES: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansModel {
    /// `k x D` cluster centers.
    pub centroids: SampleMatrix,
    /// Cluster index of every input point.
    pub labels: Vec<usize>,
    /// Members per cluster; all positive.
    pub counts: Vec<usize>,
}

impl KMeansModel {
    pub fn k(&self) -> usize {
        self.counts.len()
    }

    /// Sum of squared distances from each point to its assigned centroid.
    pub fn inertia(&self, points: &SampleMatrix) -> f64 {
        points
            .rows()
            .zip(&self.labels)
            .map(|(x, &l)| squared_distance(x, self.centroids.row(l)))
            .sum()
    }

    /// Row indices assigned to each cluster, in input order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k()];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid (lowest index on ties) and its squared distance.
#[inline]
fn nearest(x: &[f64], centroids: &SampleMatrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.rows().enumerate() {
        let d = squared_distance(x, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn assign(points: &SampleMatrix, centroids: &SampleMatrix) -> (Vec<usize>, Vec<f64>) {
    points.rows().map(|x| nearest(x, centroids)).unzip()
}

fn count_labels(labels: &[usize], k: usize) -> Vec<usize> {
    let mut counts = vec![0; k];
    for &l in labels {
        counts[l] += 1;
    }
    counts
}

/// k-means++ seeding over the rows listed in `pool`.
fn kmeans_plus_plus(
    points: &SampleMatrix,
    pool: &[usize],
    k: usize,
    rng: &mut RngStream,
) -> SampleMatrix {
    let mut centroids = SampleMatrix::with_capacity(points.ncols(), k, Frame::Unit);
    let mut chosen = vec![false; pool.len()];
    let first = rng.index(pool.len());
    chosen[first] = true;
    centroids.push_row(points.row(pool[first]));
    let mut min_d2: Vec<f64> = pool
        .iter()
        .map(|&i| squared_distance(points.row(i), centroids.row(0)))
        .collect();
    while centroids.nrows() < k {
        let total: f64 = min_d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.uniform() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in min_d2.iter().enumerate() {
                acc += d;
                if acc > target && d > 0.0 {
                    pick = Some(i);
                    break;
                }
            }
            pick.unwrap_or_else(|| min_d2.iter().rposition(|&d| d > 0.0).unwrap())
        } else {
            // every remaining point duplicates a chosen center
            let free: Vec<usize> = (0..pool.len()).filter(|&i| !chosen[i]).collect();
            free[rng.index(free.len())]
        };
        chosen[pick] = true;
        centroids.push_row(points.row(pool[pick]));
        let c = centroids.row(centroids.nrows() - 1).to_vec();
        for (d, &i) in min_d2.iter_mut().zip(pool) {
            *d = d.min(squared_distance(points.row(i), &c));
        }
    }
    centroids
}

/// Clusters `points` into `k` groups.
///
/// Seeds with k-means++ on a subsample, refines with `max_batches` mini-batch
/// updates of `batch_size` points drawn with replacement, moves each centroid
/// to the mean of its members, then assigns every point to its nearest final
/// centroid. Empty clusters are re-seeded at the point farthest from its own
/// centroid. Deterministic given `points`, `k` and the stream.
pub fn minibatch_kmeans(
    points: &SampleMatrix,
    k: usize,
    rng: &mut RngStream,
    batch_size: usize,
    max_batches: usize,
) -> Result<KMeansModel> {
    let n = points.nrows();
    if k == 0 {
        return config_err("k-means needs k >= 1");
    }
    if k > n {
        return config_err(format!(
            "k-means with k = {k} exceeds the {n} available points"
        ));
    }
    if batch_size == 0 || max_batches == 0 {
        return config_err("k-means batch size and batch count must be positive");
    }
    let d = points.ncols();

    let mut pool: Vec<usize> = (0..n).collect();
    let pool_size = n.min(SEEDING_SUBSAMPLE.max(k));
    if pool_size < n {
        rng.shuffle(&mut pool);
        pool.truncate(pool_size);
        pool.sort_unstable();
    }
    let mut centroids = kmeans_plus_plus(points, &pool, k, rng);

    let mut seen = vec![0usize; k];
    let mut batch_sums = vec![0.0; k * d];
    let mut batch_counts = vec![0usize; k];
    for _ in 0..max_batches {
        batch_sums.iter_mut().for_each(|s| *s = 0.0);
        batch_counts.iter_mut().for_each(|c| *c = 0);
        for _ in 0..batch_size {
            let x = points.row(rng.index(n));
            let (j, _) = nearest(x, &centroids);
            batch_counts[j] += 1;
            for (s, &v) in batch_sums[j * d..(j + 1) * d].iter_mut().zip(x) {
                *s += v;
            }
        }
        for j in 0..k {
            let nb = batch_counts[j];
            if nb == 0 {
                continue;
            }
            seen[j] += nb;
            let total = seen[j] as f64;
            let sums = &batch_sums[j * d..(j + 1) * d];
            for (c, &s) in centroids.row_mut(j).iter_mut().zip(sums) {
                *c += (s - nb as f64 * *c) / total;
            }
        }
    }

    // one mean update over the full data, then the final assignment
    let (labels, _) = assign(points, &centroids);
    let mut sums = vec![0.0; k * d];
    let counts = count_labels(&labels, k);
    for (x, &l) in points.rows().zip(&labels) {
        for (s, &v) in sums[l * d..(l + 1) * d].iter_mut().zip(x) {
            *s += v;
        }
    }
    for j in 0..k {
        if counts[j] > 0 {
            let inv = 1.0 / counts[j] as f64;
            for (c, &s) in centroids
                .row_mut(j)
                .iter_mut()
                .zip(&sums[j * d..(j + 1) * d])
            {
                *c = s * inv;
            }
        }
    }
    let (mut labels, mut dist) = assign(points, &centroids);
    let mut counts = count_labels(&labels, k);
    repair_empty_clusters(points, &mut centroids, &mut labels, &mut dist, &mut counts);
    Ok(KMeansModel {
        centroids,
        labels,
        counts,
    })
}

fn repair_empty_clusters(
    points: &SampleMatrix,
    centroids: &mut SampleMatrix,
    labels: &mut [usize],
    dist: &mut [f64],
    counts: &mut [usize],
) {
    let k = counts.len();
    for _ in 0..4 * k + 16 {
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut far: Option<(usize, f64)> = None;
        for (i, (&l, &dd)) in labels.iter().zip(dist.iter()).enumerate() {
            if counts[l] >= 2 && far.is_none_or(|(_, best)| dd > best) {
                far = Some((i, dd));
            }
        }
        let Some((p, _)) = far else {
            return;
        };
        centroids.row_mut(empty).copy_from_slice(points.row(p));
        counts[labels[p]] -= 1;
        labels[p] = empty;
        dist[p] = 0.0;
        counts[empty] += 1;
        let c = centroids.row(empty).to_vec();
        for i in 0..labels.len() {
            if i == p {
                continue;
            }
            let dn = squared_distance(points.row(i), &c);
            if dn < dist[i] && counts[labels[i]] >= 2 {
                counts[labels[i]] -= 1;
                labels[i] = empty;
                dist[i] = dn;
                counts[empty] += 1;
            }
        }
    }
}
