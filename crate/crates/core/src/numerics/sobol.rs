//! Unscrambled Sobol sequence in Gray-code order.
//!
//! Direction numbers come from the Joe-Kuo `new-joe-kuo-6` table embedded at
//! build time. Dimension 0 is the van der Corput sequence; dimension `j >= 1`
//! uses row `j + 1` of the table.

use std::sync::OnceLock;

use crate::error::{config_err, Result};
use crate::matrix::{Frame, SampleMatrix};

const BITS: usize = 32;
const TABLE: &str = include_str!("../../data/new-joe-kuo-6.1111.txt");
/// Points per engine are limited to indices below `2^31`.
pub const MAX_INDEX: u64 = 1 << 31;
const SCALE: f64 = 1.0 / 4_294_967_296.0;

type Directions = [u32; BITS];

fn direction_table() -> &'static [Directions] {
    static CELL: OnceLock<Vec<Directions>> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut dims = vec![van_der_corput()];
        for line in TABLE.lines().skip(1) {
            let fields: Vec<u32> = line
                .split_whitespace()
                .map(|t| t.parse().expect("malformed direction-number table"))
                .collect();
            if fields.is_empty() {
                continue;
            }
            let (s, a) = (fields[1] as usize, fields[2]);
            dims.push(joe_kuo(s, a, &fields[3..3 + s]));
        }
        dims
    })
}

fn van_der_corput() -> Directions {
    let mut v = [0; BITS];
    for (i, v) in v.iter_mut().enumerate() {
        *v = 1 << (31 - i);
    }
    v
}

fn joe_kuo(s: usize, a: u32, m: &[u32]) -> Directions {
    let mut v = [0u32; BITS];
    for i in 0..s.min(BITS) {
        v[i] = m[i] << (31 - i);
    }
    for i in s..BITS {
        let mut val = v[i - s] ^ (v[i - s] >> s);
        for k in 1..s {
            if (a >> (s - 1 - k)) & 1 == 1 {
                val ^= v[i - k];
            }
        }
        v[i] = val;
    }
    v
}

/// Number of dimensions the embedded table supports.
pub fn max_dims() -> usize {
    direction_table().len()
}

/// Stateful generator for the first `dims` Sobol coordinates.
#[derive(Clone, Debug)]
pub struct SobolEngine {
    dims: usize,
    index: u64,
    state: Vec<u32>,
    directions: &'static [Directions],
}

impl SobolEngine {
    pub fn new(dims: usize) -> Result<Self> {
        if dims == 0 {
            return config_err("Sobol engine needs at least one dimension");
        }
        let table = direction_table();
        if dims > table.len() {
            return config_err(format!(
                "Sobol engine supports at most {} dimensions, got {dims}",
                table.len()
            ));
        }
        Ok(Self {
            dims,
            index: 0,
            state: vec![0; dims],
            directions: &table[..dims],
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Index of the next point to be drawn.
    pub fn index(&self) -> u64 {
        self.index
    }

    /// Jumps to absolute sequence position `index`.
    pub fn seek(&mut self, index: u64) -> Result<()> {
        if index >= MAX_INDEX {
            return config_err(format!("Sobol index {index} exceeds 2^31"));
        }
        let gray = index ^ (index >> 1);
        for (d, s) in self.state.iter_mut().enumerate() {
            let v = &self.directions[d];
            *s = (0..BITS)
                .filter(|b| (gray >> b) & 1 == 1)
                .fold(0, |acc, b| acc ^ v[b]);
        }
        self.index = index;
        Ok(())
    }

    /// Discards the next `count` points.
    pub fn skip(&mut self, count: u64) -> Result<()> {
        self.seek(self.index + count)
    }

    #[inline]
    fn advance(&mut self) {
        let c = (self.index as u32).trailing_ones() as usize;
        for (s, v) in self.state.iter_mut().zip(self.directions) {
            *s ^= v[c];
        }
        self.index += 1;
    }

    /// Writes the next point into `out` (length `dims`).
    pub fn next_into(&mut self, out: &mut [f64]) -> Result<()> {
        if self.index + 1 >= MAX_INDEX {
            return config_err("Sobol sequence exhausted");
        }
        for (o, &s) in out.iter_mut().zip(&self.state) {
            *o = f64::from(s) * SCALE;
        }
        self.advance();
        Ok(())
    }

    /// Next `count` points as a unit-frame matrix.
    pub fn points(&mut self, count: usize) -> Result<SampleMatrix> {
        sobol_points(self, count)
    }
}

/// Draws the next `count` points of `engine`'s sequence.
///
/// Consecutive calls return consecutive, disjoint blocks of one global
/// sequence. Every entry lies in `[0, 1)`.
pub fn sobol_points(engine: &mut SobolEngine, count: usize) -> Result<SampleMatrix> {
    if count == 0 {
        return config_err("Sobol draw count must be positive");
    }
    if engine.index + count as u64 >= MAX_INDEX {
        return config_err(format!(
            "drawing {count} points from index {} overflows the 2^31 sequence limit",
            engine.index
        ));
    }
    let mut out = SampleMatrix::zeros(count, engine.dims, Frame::Unit);
    for i in 0..count {
        engine.next_into(out.row_mut(i))?;
    }
    Ok(out)
}

/// `min(2^ceil(log2(200 D)), 2^cap_exponent)`.
pub fn initial_sample_count(dims: usize, cap_exponent: u32) -> usize {
    let target = (200 * dims.max(1)).next_power_of_two();
    target.min(1usize << cap_exponent)
}
