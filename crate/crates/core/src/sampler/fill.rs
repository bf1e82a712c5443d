//! Boundary rejection and adaptive void filling.

use crate::error::Result;
use crate::matrix::{Frame, SampleMatrix};
use crate::numerics::{truncated_normal_draw, RngStream, SobolEngine};
use crate::sampler::neighbors::mean_knn_distances;

pub const DEFAULT_K_NEIGHBORS: usize = 8;
/// Fraction of kept samples, by kNN sparsity, that seed fill points.
pub const SPARSE_FRACTION: f64 = 0.10;
pub const MIN_FILL_STD: f64 = 0.01;
pub const MAX_FILL_STD: f64 = 0.3;

#[derive(Clone, Debug)]
pub struct FillOutcome {
    pub samples: SampleMatrix,
    /// In-bounds candidates that were kept.
    pub kept: usize,
    /// Points added by void filling.
    pub filled: usize,
    /// No candidate and no center was usable; Sobol points were substituted.
    pub degenerate: bool,
}

fn inside_unit_cube(x: &[f64]) -> bool {
    x.iter().all(|v| (0.0..=1.0).contains(v))
}

/// Keeps in-bounds candidates (in order, at most `target`) and tops the set up
/// to exactly `target` rows.
///
/// Each fill round ranks the kept samples by their mean distance to the
/// `k_neighbors` nearest kept samples, takes the sparsest 10% as centers and
/// draws truncated-normal points around them in round-robin order, with a
/// per-dimension spread equal to the center's mean kNN distance clamped to
/// `[0.01, 0.3]`. A round adds at most as many points as are already kept,
/// so sparsity is re-measured as the set grows.
///
/// With no valid candidate at all the set is seeded around `centers`; with no
/// centers either, fresh Sobol points are used and the outcome is flagged.
pub fn reject_and_fill(
    candidates: &SampleMatrix,
    target: usize,
    rng: &mut RngStream,
    k_neighbors: usize,
    centers: &SampleMatrix,
) -> Result<FillOutcome> {
    let d = candidates.ncols();
    let mut samples = SampleMatrix::with_capacity(d, target, Frame::Unit);
    for row in candidates.rows() {
        if samples.nrows() == target {
            break;
        }
        if inside_unit_cube(row) {
            samples.push_row(row);
        }
    }
    let kept = samples.nrows();
    if kept == target {
        return Ok(FillOutcome {
            samples,
            kept,
            filled: 0,
            degenerate: false,
        });
    }

    if kept == 0 {
        if centers.nrows() == 0 {
            let mut engine = SobolEngine::new(d)?;
            let samples = engine.points(target)?;
            return Ok(FillOutcome {
                samples,
                kept: 0,
                filled: target,
                degenerate: true,
            });
        }
        let spread = vec![MAX_FILL_STD; d];
        let mut i = 0;
        while samples.nrows() < target {
            let c: Vec<f64> = centers
                .row(i % centers.nrows())
                .iter()
                .map(|v| v.clamp(0.0, 1.0))
                .collect();
            samples.push_row(&truncated_normal_draw(&c, &spread, rng));
            i += 1;
        }
        return Ok(FillOutcome {
            samples,
            kept: 0,
            filled: target,
            degenerate: false,
        });
    }

    while samples.nrows() < target {
        let m = samples.nrows();
        let sparsity = if m > 1 {
            mean_knn_distances(&samples, k_neighbors)
        } else {
            vec![MAX_FILL_STD]
        };
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| sparsity[b].total_cmp(&sparsity[a]).then(a.cmp(&b)));
        let n_centers = ((SPARSE_FRACTION * m as f64).ceil() as usize).clamp(1, m);
        let sparse = &order[..n_centers];
        let batch = (target - m).min(m);
        for t in 0..batch {
            let c = sparse[t % n_centers];
            let spread = vec![sparsity[c].clamp(MIN_FILL_STD, MAX_FILL_STD); d];
            let center = samples.row(c).to_vec();
            samples.push_row(&truncated_normal_draw(&center, &spread, rng));
        }
    }
    Ok(FillOutcome {
        samples,
        kept,
        filled: target - kept,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_centers(d: usize) -> SampleMatrix {
        SampleMatrix::zeros(0, d, Frame::Unit)
    }

    #[test]
    fn valid_full_set_is_untouched() {
        let c = SobolEngine::new(3).unwrap().points(50).unwrap();
        let out = reject_and_fill(&c, 50, &mut RngStream::new(1), 8, &no_centers(3)).unwrap();
        assert_eq!(out.samples, c);
        assert_eq!(out.filled, 0);
    }

    #[test]
    fn out_of_bounds_rows_dropped_and_replaced() {
        let c = SampleMatrix::from_rows(
            &[
                vec![0.5, 0.5],
                vec![1.5, 0.5],
                vec![0.2, -0.1],
                vec![0.3, 0.3],
            ],
            Frame::Unit,
        )
        .unwrap();
        let out = reject_and_fill(&c, 4, &mut RngStream::new(2), 8, &no_centers(2)).unwrap();
        assert_eq!(out.kept, 2);
        assert_eq!(out.filled, 2);
        assert_eq!(out.samples.row(0), &[0.5, 0.5]);
        assert_eq!(out.samples.row(1), &[0.3, 0.3]);
        assert!(out.samples.in_unit_cube());
    }

    #[test]
    fn single_location_fill_hugs_it() {
        let c = SampleMatrix::from_rows(&vec![vec![0.4, 0.6]; 20], Frame::Unit).unwrap();
        let out = reject_and_fill(&c, 25, &mut RngStream::new(3), 8, &no_centers(2)).unwrap();
        assert_eq!(out.samples.nrows(), 25);
        for row in out.samples.rows().skip(20) {
            // spread clamps at 0.01 for zero kNN distance
            assert!(
                (row[0] - 0.4).abs() < 0.06 && (row[1] - 0.6).abs() < 0.06,
                "{row:?}"
            );
        }
    }

    #[test]
    fn fill_targets_sparse_points() {
        // dense clump plus one isolated point; fill should cluster near the loner
        let mut rows: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![0.1 + 0.001 * f64::from(i), 0.1])
            .collect();
        rows.push(vec![0.9, 0.9]);
        let c = SampleMatrix::from_rows(&rows, Frame::Unit).unwrap();
        let out = reject_and_fill(&c, 34, &mut RngStream::new(4), 8, &no_centers(2)).unwrap();
        let near_loner = out
            .samples
            .rows()
            .skip(31)
            .filter(|r| r[0] > 0.4 && r[1] > 0.4)
            .count();
        assert!(near_loner >= 1);
    }

    #[test]
    fn no_valid_candidates_uses_centers() {
        let c = SampleMatrix::from_rows(&[vec![2.0, 2.0]], Frame::Unit).unwrap();
        let centers = SampleMatrix::from_rows(&[vec![0.25, 0.75]], Frame::Unit).unwrap();
        let out = reject_and_fill(&c, 10, &mut RngStream::new(5), 8, &centers).unwrap();
        assert_eq!(out.samples.nrows(), 10);
        assert!(out.samples.in_unit_cube());
        assert!(!out.degenerate);
        let fallback = reject_and_fill(&c, 10, &mut RngStream::new(5), 8, &no_centers(2)).unwrap();
        assert!(fallback.degenerate);
        assert_eq!(fallback.samples.nrows(), 10);
    }
}
