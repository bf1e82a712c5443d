//! Principal component analysis by cyclic Jacobi eigendecomposition of the
//! sample covariance.

use crate::error::{config_err, Result};
use crate::matrix::SampleMatrix;

pub const DEFAULT_EPSILON: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct PcaResult {
    /// `D x D` row-major; row `i` is the `i`-th principal axis.
    pub components: Vec<f64>,
    /// Variance along each axis, non-increasing.
    pub variances: Vec<f64>,
    pub mean: Vec<f64>,
    /// `sqrt(variance + epsilon)` per axis.
    pub semi_axes: Vec<f64>,
}

impl PcaResult {
    pub fn dims(&self) -> usize {
        self.mean.len()
    }

    pub fn axis(&self, i: usize) -> &[f64] {
        let d = self.dims();
        &self.components[i * d..(i + 1) * d]
    }
}

/// Unbiased sample covariance (`n - 1` denominator; zero for one row).
pub fn covariance(points: &SampleMatrix) -> (Vec<f64>, Vec<f64>) {
    let (n, d) = (points.nrows(), points.ncols());
    let mean = points.mean();
    let mut cov = vec![0.0; d * d];
    let mut centered = vec![0.0; d];
    for row in points.rows() {
        for ((c, &x), &m) in centered.iter_mut().zip(row).zip(&mean) {
            *c = x - m;
        }
        for i in 0..d {
            let ci = centered[i];
            if ci == 0.0 {
                continue;
            }
            let out = &mut cov[i * d..i * d + i + 1];
            for (o, &cj) in out.iter_mut().zip(&centered[..=i]) {
                *o += ci * cj;
            }
        }
    }
    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    for i in 0..d {
        for j in 0..=i {
            let v = cov[i * d + j] / denom;
            cov[i * d + j] = v;
            cov[j * d + i] = v;
        }
    }
    (mean, cov)
}

/// Eigen-decomposition of a symmetric `n x n` row-major matrix.
///
/// Returns eigenvalues in descending order and the matching eigenvectors as
/// rows of a row-major matrix.
pub fn symmetric_eigen(matrix: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum::<f64>()
            .sqrt();
        if off <= OFF_DIAGONAL_TOL * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (row, &col) in order.iter().enumerate() {
        for k in 0..n {
            vectors[row * n + k] = v[k * n + col];
        }
    }
    (values, vectors)
}

/// Fits principal axes to `points` and derives semi-axes `sqrt(Var_i + eps)`.
///
/// Rank-deficient input is fine: zero-variance axes sit at the `sqrt(eps)` floor.
pub fn pca_fit(points: &SampleMatrix, epsilon: f64) -> Result<PcaResult> {
    if points.nrows() == 0 {
        return config_err("PCA needs at least one point");
    }
    if !(epsilon > 0.0) {
        return config_err(format!("PCA epsilon must be positive, got {epsilon}"));
    }
    let d = points.ncols();
    let (mean, cov) = covariance(points);
    let (values, components) = symmetric_eigen(&cov, d);
    let variances: Vec<f64> = values.into_iter().map(|v| v.max(0.0)).collect();
    let semi_axes = variances.iter().map(|v| (v + epsilon).sqrt()).collect();
    Ok(PcaResult {
        components,
        variances,
        mean,
        semi_axes,
    })
}
