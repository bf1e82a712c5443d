use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::matrix::{Frame, SampleMatrix};

/// Axis-aligned search box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return config_err("bounds need at least one dimension");
        }
        if lower.len() != upper.len() {
            return config_err(format!(
                "lower bounds have {} entries but upper bounds have {}",
                lower.len(),
                upper.len()
            ));
        }
        for (d, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return config_err(format!(
                    "dimension {d}: need finite lower < upper, got [{lo}, {hi}]"
                ));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The same `[lo, hi]` interval in every dimension.
    pub fn uniform(dims: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dims], vec![hi; dims])
    }

    pub fn unit(dims: usize) -> Self {
        Self {
            lower: vec![0.0; dims.max(1)],
            upper: vec![1.0; dims.max(1)],
        }
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn range(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dims()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| v >= lo && v <= hi)
    }

    fn check_cols(&self, points: &SampleMatrix) -> Result<()> {
        if points.ncols() != self.dims() {
            return config_err(format!(
                "points have {} columns but bounds have {} dimensions",
                points.ncols(),
                self.dims()
            ));
        }
        Ok(())
    }
}

/// Maps points from the original box into the unit cube: `(x - lower) / range`.
pub fn normalize(points: &SampleMatrix, bounds: &Bounds) -> Result<SampleMatrix> {
    bounds.check_cols(points)?;
    let range = bounds.range();
    let mut out = points.clone();
    for i in 0..out.nrows() {
        for ((x, lo), r) in out.row_mut(i).iter_mut().zip(bounds.lower()).zip(&range) {
            *x = (*x - lo) / r;
        }
    }
    out.set_frame(Frame::Unit);
    Ok(out)
}

/// Maps unit-cube points back into the box: `h * range + lower`.
pub fn denormalize(points: &SampleMatrix, bounds: &Bounds) -> Result<SampleMatrix> {
    bounds.check_cols(points)?;
    let range = bounds.range();
    let mut out = points.clone();
    for i in 0..out.nrows() {
        for ((x, lo), r) in out.row_mut(i).iter_mut().zip(bounds.lower()).zip(&range) {
            *x = *x * r + lo;
        }
    }
    out.set_frame(Frame::Bounds);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(row: Vec<f64>) -> SampleMatrix {
        SampleMatrix::from_rows(&[row], Frame::Bounds).unwrap()
    }

    #[test]
    fn corners_and_midpoint() {
        let b = Bounds::new(vec![-1.0, 2.0], vec![1.0, 6.0]).unwrap();
        assert_eq!(
            normalize(&one(vec![-1.0, 2.0]), &b).unwrap().row(0),
            &[0.0, 0.0]
        );
        assert_eq!(
            normalize(&one(vec![1.0, 6.0]), &b).unwrap().row(0),
            &[1.0, 1.0]
        );
        let cec = Bounds::uniform(1, -100.0, 100.0).unwrap();
        assert_eq!(normalize(&one(vec![0.0]), &cec).unwrap().row(0), &[0.5]);
    }

    #[test]
    fn affine_back_map() {
        let cec = Bounds::uniform(1, -100.0, 100.0).unwrap();
        assert_eq!(denormalize(&one(vec![0.5]), &cec).unwrap().row(0), &[0.0]);
        assert_eq!(
            denormalize(&one(vec![0.0]), &cec).unwrap().row(0),
            &[-100.0]
        );
        let b = Bounds::uniform(1, 0.0, 8.0).unwrap();
        let out = denormalize(&one(vec![0.25]), &b).unwrap();
        assert_eq!(out.row(0), &[2.0]);
        assert_eq!(out.frame(), Frame::Bounds);
    }

    #[test]
    fn invalid_bounds_rejected() {
        assert!(Bounds::new(vec![0.0], vec![0.0]).is_err());
        assert!(Bounds::new(vec![1.0], vec![0.0]).is_err());
        assert!(Bounds::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(Bounds::new(vec![], vec![]).is_err());
        assert!(Bounds::new(vec![f64::NEG_INFINITY], vec![0.0]).is_err());
        let b = Bounds::unit(2);
        assert!(normalize(&one(vec![0.5]), &b).is_err());
    }
}
