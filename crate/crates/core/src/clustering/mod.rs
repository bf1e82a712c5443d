//! Centroid estimation and cluster-count selection.

pub mod kmeans;
pub mod linkage;

pub use kmeans::{minibatch_kmeans, KMeansModel};
pub use linkage::{ahc_linkage, select_cluster_count, LinkageMerge};

/// Initial centroid count: 100, scaled down as `100 * 100 / D` (floor 10)
/// above 100 dimensions.
pub fn initial_cluster_count(dims: usize, default_k: usize) -> usize {
    if dims <= 100 {
        default_k
    } else {
        ((default_k as f64 * 100.0 / dims as f64).round() as usize).max(10)
    }
}
