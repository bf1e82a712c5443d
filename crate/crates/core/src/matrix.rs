use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};

/// Coordinate frame a [`SampleMatrix`] is expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// The normalized unit hypercube `[0, 1]^D`.
    Unit,
    /// The caller's original search bounds.
    Bounds,
}

impl Frame {
    pub fn as_str(self) -> &'static str {
        match self {
            Frame::Unit => "unit",
            Frame::Bounds => "bounds",
        }
    }
}

/// Dense row-major `rows x cols` matrix of sample points.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    frame: Frame,
}

impl SampleMatrix {
    pub fn zeros(rows: usize, cols: usize, frame: Frame) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
            frame,
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>, frame: Frame) -> Result<Self> {
        if data.len() != rows * cols {
            return config_err(format!(
                "matrix data has {} entries, expected {rows}x{cols}",
                data.len()
            ));
        }
        Ok(Self {
            rows,
            cols,
            data,
            frame,
        })
    }

    /// Builds a matrix from row vectors; all rows must share one length.
    pub fn from_rows(rows: &[Vec<f64>], frame: Frame) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return config_err(format!(
                    "row {i} has {} columns, expected {cols}",
                    row.len()
                ));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
            frame,
        })
    }

    /// An empty matrix with a fixed column count, for building row by row.
    pub fn with_capacity(cols: usize, capacity: usize, frame: Frame) -> Self {
        Self {
            rows: 0,
            cols,
            data: Vec::with_capacity(cols * capacity),
            frame,
        }
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.cols, "row length mismatch");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn append(&mut self, other: &SampleMatrix) {
        assert_eq!(other.cols, self.cols, "column count mismatch");
        self.data.extend_from_slice(&other.data);
        self.rows += other.rows;
    }

    pub fn truncate(&mut self, rows: usize) {
        if rows < self.rows {
            self.rows = rows;
            self.data.truncate(rows * self.cols);
        }
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub(crate) fn set_frame(&mut self, frame: Frame) {
        self.frame = frame;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        // chunks_exact panics on a zero chunk size
        let cols = self.cols.max(1);
        self.data.chunks_exact(cols).take(self.rows)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Copies the selected rows, in the given order, into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> SampleMatrix {
        let mut out = SampleMatrix::with_capacity(self.cols, indices.len(), self.frame);
        for &i in indices {
            out.push_row(self.row(i));
        }
        out
    }

    /// Column means.
    pub fn mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.cols];
        for row in self.rows() {
            for (m, &x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        let n = self.rows.max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }

    /// True when every entry lies in the closed unit interval.
    pub fn in_unit_cube(&self) -> bool {
        self.data.iter().all(|x| (0.0..=1.0).contains(x))
    }
}
