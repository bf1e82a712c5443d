use statrs::function::erf::{erfc, erfc_inv};

use crate::numerics::rng::RngStream;

const MIN_ACCEPTANCE: f64 = 0.01;
const MAX_REJECTIONS: usize = 1000;

/// Standard normal CDF for `x <= 0`, accurate deep into the lower tail.
fn lower_tail_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn lower_tail_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

fn standard_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        lower_tail_cdf(x)
    } else {
        1.0 - lower_tail_cdf(-x)
    }
}

/// Standard normal restricted to `[a, b]`, sampled by inverting the CDF.
///
/// Intervals above the mean are mirrored into the lower tail, where the CDF
/// keeps full relative precision.
fn inverse_cdf_draw(a: f64, b: f64, rng: &mut RngStream) -> f64 {
    if a > 0.0 {
        return -inverse_cdf_draw(-b, -a, rng);
    }
    let lo = lower_tail_cdf(a);
    let hi = standard_cdf(b);
    if !(hi > lo) {
        // no representable mass: the bound nearest the mean
        return if b <= 0.0 { b } else { a };
    }
    let p = lo + rng.uniform_open() * (hi - lo);
    let z = if p <= 0.5 {
        lower_tail_quantile(p)
    } else {
        -lower_tail_quantile(1.0 - p)
    };
    z.clamp(a, b)
}

/// One coordinate: `N(center, stddev^2)` conditioned to `[0, 1]`.
pub fn truncated_normal_scalar(center: f64, stddev: f64, rng: &mut RngStream) -> f64 {
    let a = (0.0 - center) / stddev;
    let b = (1.0 - center) / stddev;
    let acceptance = standard_cdf(b) - standard_cdf(a);
    let x = if acceptance >= MIN_ACCEPTANCE {
        let mut accepted = None;
        for _ in 0..MAX_REJECTIONS {
            let x = center + stddev * rng.standard_normal();
            if x > 0.0 && x < 1.0 {
                accepted = Some(x);
                break;
            }
        }
        accepted.unwrap_or_else(|| center + stddev * inverse_cdf_draw(a, b, rng))
    } else {
        center + stddev * inverse_cdf_draw(a, b, rng)
    };
    x.clamp(0.0, 1.0)
}

/// A point whose coordinates are independent normals truncated to `[0, 1]`.
pub fn truncated_normal_draw(center: &[f64], stddev: &[f64], rng: &mut RngStream) -> Vec<f64> {
    center
        .iter()
        .zip(stddev)
        .map(|(&c, &s)| truncated_normal_scalar(c, s, rng))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_spread_returns_center() {
        let mut rng = RngStream::new(1);
        let x = truncated_normal_draw(&[0.5, 0.25], &[1e-12, 1e-12], &mut rng);
        assert!((x[0] - 0.5).abs() < 1e-9 && (x[1] - 0.25).abs() < 1e-9);
    }

    #[test]
    fn boundary_center_stays_inside_and_near_zero() {
        let mut rng = RngStream::new(2);
        let xs: Vec<f64> = (0..10_000)
            .map(|_| truncated_normal_scalar(0.0, 0.1, &mut rng))
            .collect();
        assert!(xs.iter().all(|x| (0.0..=1.0).contains(x)));
        let near = xs.iter().filter(|&&x| x < 0.2).count();
        assert!(near as f64 / xs.len() as f64 > 0.9);
    }

    #[test]
    fn symmetric_truncation_keeps_mean() {
        let mut rng = RngStream::new(3);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| truncated_normal_scalar(0.5, 0.1, &mut rng))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.002, "{mean}");
    }

    #[test]
    fn far_tail_uses_inverse_cdf() {
        let mut rng = RngStream::new(4);
        for &(c, s) in &[(-3.0, 0.1), (4.0, 0.2), (-50.0, 0.01), (1.5, 0.05)] {
            for _ in 0..200 {
                let x = truncated_normal_scalar(c, s, &mut rng);
                assert!((0.0..=1.0).contains(&x), "{c} {s} -> {x}");
            }
        }
        // mass piles up against the nearer bound
        let x = truncated_normal_scalar(-3.0, 0.1, &mut rng);
        assert!(x < 0.01);
    }
}
