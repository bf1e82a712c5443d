//! Ward-linkage agglomerative clustering and the largest-gap dendrogram cut.

use crate::matrix::SampleMatrix;

pub const DEFAULT_MAX_CLUSTERS: usize = 10;

/// One step of the dendrogram. Leaves are numbered `0..n`; the cluster
/// created by merge `i` gets id `n + i`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkageMerge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    /// Number of leaves in the merged cluster.
    pub size: usize,
}

/// Ward merge sequence over the rows of `centroids`.
///
/// Starts from Euclidean distances and updates with the Lance-Williams Ward
/// recurrence, so the distance between clusters `A` and `B` is
/// `sqrt(2 |A| |B| / (|A| + |B|)) * ||mean(A) - mean(B)||`. Fewer than two
/// rows yield no merges.
pub fn ahc_linkage(centroids: &SampleMatrix) -> Vec<LinkageMerge> {
    let n = centroids.nrows();
    if n < 2 {
        return Vec::new();
    }
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = centroids
                .row(i)
                .iter()
                .zip(centroids.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    // slot -> (node id, size); slots die when merged into a lower slot
    let mut slots: Vec<Option<(usize, usize)>> = (0..n).map(|i| Some((i, 1))).collect();
    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut best = (usize::MAX, usize::MAX, f64::INFINITY);
        for i in 0..n {
            if slots[i].is_none() {
                continue;
            }
            for j in (i + 1)..n {
                if slots[j].is_some() && dist[i * n + j] < best.2 {
                    best = (i, j, dist[i * n + j]);
                }
            }
        }
        let (a, b, d) = best;
        let (id_a, size_a) = slots[a].unwrap();
        let (id_b, size_b) = slots[b].unwrap();
        let merged = size_a + size_b;
        for k in 0..n {
            if k == a || k == b {
                continue;
            }
            let Some((_, size_k)) = slots[k] else {
                continue;
            };
            let (na, nb, nk) = (size_a as f64, size_b as f64, size_k as f64);
            let dak = dist[a * n + k];
            let dbk = dist[b * n + k];
            let updated = (((na + nk) * dak * dak + (nb + nk) * dbk * dbk - nk * d * d)
                / (na + nb + nk))
                .max(0.0)
                .sqrt();
            dist[a * n + k] = updated;
            dist[k * n + a] = updated;
        }
        slots[a] = Some((n + step, merged));
        slots[b] = None;
        merges.push(LinkageMerge {
            left: id_a.min(id_b),
            right: id_a.max(id_b),
            distance: d,
            size: merged,
        });
    }
    merges
}

/// Number of clusters left by cutting the dendrogram at its largest jump.
///
/// Only the last `max_clusters` merges are examined. Merge `i` jumps by
/// `d_i - d_{i-1}` and cutting just below it leaves `n - i` clusters, which
/// must not exceed `max_clusters`. The largest jump wins, with ties going to
/// the smaller cluster count. When no merge jumps at all, the answer is 1.
pub fn select_cluster_count(merges: &[LinkageMerge], max_clusters: usize) -> usize {
    let n = merges.len() + 1;
    let max_clusters = max_clusters.max(1);
    let scale = merges.iter().map(|m| m.distance.abs()).fold(0.0, f64::max);
    let mut best: Option<(usize, f64)> = None;
    // walk from the final merge backwards so ties keep the smaller count
    for i in (1..merges.len()).rev() {
        let clusters = n - i;
        if clusters > max_clusters {
            break;
        }
        let gap = merges[i].distance - merges[i - 1].distance;
        if best.is_none_or(|(_, g)| gap > g) {
            best = Some((clusters, gap));
        }
    }
    match best {
        Some((clusters, gap)) if gap > 1e-12 * scale => clusters,
        _ => 1,
    }
}
