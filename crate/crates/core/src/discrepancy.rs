//! L2-star and centered L2 discrepancy of point sets in the unit cube.
//!
//! Both use the closed-form O(N^2 D) expressions and return the discrepancy
//! itself (the square root of the squared value). Sums are Neumaier
//! compensated.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{config_err, HdsError, Result};
use crate::matrix::SampleMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    L2Star,
    CenteredL2,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::L2Star => "l2_star",
            Metric::CenteredL2 => "centered_l2",
        }
    }

    pub fn evaluate(self, points: &SampleMatrix) -> Result<f64> {
        match self {
            Metric::L2Star => l2_star(points),
            Metric::CenteredL2 => centered_l2(points),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Metric {
    type Err = HdsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "l2_star" | "l2star" | "warnock" => Ok(Metric::L2Star),
            "centered_l2" | "cl2" | "centered" => Ok(Metric::CenteredL2),
            other => Err(HdsError::Config(format!(
                "unknown discrepancy metric '{other}'"
            ))),
        }
    }
}

/// One line of discrepancy output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub metric: Metric,
    pub value: f64,
    pub n: usize,
    pub dims: usize,
}

impl DiscrepancyReport {
    pub fn compute(metric: Metric, points: &SampleMatrix) -> Result<Self> {
        Ok(Self {
            metric,
            value: metric.evaluate(points)?,
            n: points.nrows(),
            dims: points.ncols(),
        })
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[derive(Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

fn check(points: &SampleMatrix) -> Result<()> {
    if points.nrows() == 0 || points.ncols() == 0 {
        return config_err("discrepancy needs a non-empty point set");
    }
    if points
        .as_slice()
        .iter()
        .any(|v| !v.is_finite() || *v < 0.0 || *v > 1.0)
    {
        return Err(HdsError::Domain(
            "discrepancy points must lie in [0, 1]^D".into(),
        ));
    }
    Ok(())
}

/// Warnock's formula:
/// `3^-D - 2^(1-D)/N sum_i prod_k (1 - x_ik^2)
///  + 1/N^2 sum_i sum_j prod_k (1 - max(x_ik, x_jk))`.
pub fn l2_star(points: &SampleMatrix) -> Result<f64> {
    check(points)?;
    let n = points.nrows();
    let d = points.ncols() as f64;
    let mut single = Neumaier::default();
    let mut pairs = Neumaier::default();
    for i in 0..n {
        let xi = points.row(i);
        single.add(xi.iter().map(|&x| 1.0 - x * x).product());
        pairs.add(xi.iter().map(|&x| 1.0 - x).product());
        for j in (i + 1)..n {
            let p: f64 = xi
                .iter()
                .zip(points.row(j))
                .map(|(&a, &b)| 1.0 - a.max(b))
                .product();
            pairs.add(2.0 * p);
        }
    }
    let nf = n as f64;
    let sq = 3f64.powf(-d) - 2f64.powf(1.0 - d) / nf * single.value() + pairs.value() / (nf * nf);
    Ok(sq.max(0.0).sqrt())
}

/// Hickernell's centered L2 discrepancy:
/// `(13/12)^D - 2/N sum_i prod_k (1 + |z|/2 - z^2/2)
///  + 1/N^2 sum_i sum_j prod_k (1 + |z_i|/2 + |z_j|/2 - |x_i - x_j|/2)`
/// with `z = x - 1/2`.
pub fn centered_l2(points: &SampleMatrix) -> Result<f64> {
    check(points)?;
    let n = points.nrows();
    let d = points.ncols() as f64;
    let mut single = Neumaier::default();
    let mut pairs = Neumaier::default();
    for i in 0..n {
        let xi = points.row(i);
        single.add(
            xi.iter()
                .map(|&x| {
                    let z = (x - 0.5).abs();
                    1.0 + 0.5 * z - 0.5 * z * z
                })
                .product(),
        );
        pairs.add(xi.iter().map(|&x| 1.0 + (x - 0.5).abs()).product());
        for j in (i + 1)..n {
            let p: f64 = xi
                .iter()
                .zip(points.row(j))
                .map(|(&a, &b)| {
                    1.0 + 0.5 * (a - 0.5).abs() + 0.5 * (b - 0.5).abs() - 0.5 * (a - b).abs()
                })
                .product();
            pairs.add(2.0 * p);
        }
    }
    let nf = n as f64;
    let sq = (13.0f64 / 12.0).powf(d) - 2.0 / nf * single.value() + pairs.value() / (nf * nf);
    Ok(sq.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Frame;
    use crate::numerics::SobolEngine;

    fn m(rows: &[Vec<f64>]) -> SampleMatrix {
        SampleMatrix::from_rows(rows, Frame::Unit).unwrap()
    }

    // Squared discrepancy as the integral of the squared local error, by
    // midpoint quadrature on a grid.
    fn quadrature_l2_star_sq(pts: &[Vec<f64>], grid: usize) -> f64 {
        let n = pts.len() as f64;
        let h = 1.0 / grid as f64;
        let mut total = 0.0;
        for a in 0..grid {
            for b in 0..grid {
                let y = [(a as f64 + 0.5) * h, (b as f64 + 0.5) * h];
                let count = pts.iter().filter(|p| p[0] < y[0] && p[1] < y[1]).count() as f64;
                let e = count / n - y[0] * y[1];
                total += e * e * h * h;
            }
        }
        total
    }

    #[test]
    fn single_center_point() {
        let p = m(&[vec![0.5]]);
        assert!((l2_star(&p).unwrap() - (1.0f64 / 12.0).sqrt()).abs() < 1e-15);
        // centered: (13/12) - 2*(1) + 1 = 1/12 as well
        assert!((centered_l2(&p).unwrap() - (1.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_closed_form() {
        // D = 1: integral over y of (#{x_i < y}/N - y)^2, done piecewise exactly.
        let xs = [0.1, 0.35, 0.8, 0.95];
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let mut knots = vec![0.0];
        knots.extend(&sorted);
        knots.push(1.0);
        let mut exact = 0.0;
        for (c, w) in knots.windows(2).enumerate() {
            let f = c as f64 / n;
            let cube = |y: f64| (y - f).powi(3) / 3.0;
            exact += cube(w[1]) - cube(w[0]);
        }
        let p = m(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>());
        assert!((l2_star(&p).unwrap().powi(2) - exact).abs() < 1e-14);
    }

    #[test]
    fn two_dimensional_quadrature() {
        let pts = vec![vec![0.2, 0.7], vec![0.6, 0.1], vec![0.9, 0.45]];
        let q = quadrature_l2_star_sq(&pts, 800);
        let v = l2_star(&m(&pts)).unwrap().powi(2);
        assert!((q - v).abs() < 2e-4, "{q} vs {v}");
    }

    #[test]
    fn centered_is_reflection_invariant() {
        let pts = vec![
            vec![0.2, 0.7, 0.05],
            vec![0.6, 0.1, 0.5],
            vec![0.9, 0.45, 0.33],
        ];
        let refl: Vec<Vec<f64>> = pts
            .iter()
            .map(|r| vec![1.0 - r[0], r[1], 1.0 - r[2]])
            .collect();
        let a = centered_l2(&m(&pts)).unwrap();
        let b = centered_l2(&m(&refl)).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn sobol_beats_clumped_points() {
        let sobol = SobolEngine::new(4).unwrap().points(256).unwrap();
        let clump = SampleMatrix::from_vec(256, 4, vec![0.5; 1024], Frame::Unit).unwrap();
        assert!(l2_star(&sobol).unwrap() < l2_star(&clump).unwrap());
        assert!(centered_l2(&sobol).unwrap() < centered_l2(&clump).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(l2_star(&SampleMatrix::zeros(0, 2, Frame::Unit)).is_err());
        assert!(centered_l2(&m(&[vec![1.5]])).is_err());
        assert_eq!("cl2".parse::<Metric>().unwrap(), Metric::CenteredL2);
        assert!("linf".parse::<Metric>().is_err());
    }

    #[test]
    fn report_json_line() {
        let r = DiscrepancyReport::compute(Metric::L2Star, &m(&[vec![0.5]])).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json_line()).unwrap();
        assert_eq!(v["metric"], "l2_star");
        assert_eq!(v["n"], 1);
    }
}
