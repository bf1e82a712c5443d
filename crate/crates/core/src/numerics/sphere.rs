use crate::matrix::{Frame, SampleMatrix};
use crate::numerics::rng::RngStream;

/// `count` independent directions uniform on the unit sphere in `dims`
/// dimensions: `dims` polar-method normals scaled to unit length.
///
/// A zero-norm draw is redrawn.
pub fn marsaglia_unit_directions(count: usize, dims: usize, rng: &mut RngStream) -> SampleMatrix {
    let mut out = SampleMatrix::zeros(count, dims, Frame::Unit);
    for i in 0..count {
        let row = out.row_mut(i);
        loop {
            for x in row.iter_mut() {
                *x = rng.standard_normal();
            }
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 && norm.is_finite() {
                row.iter_mut().for_each(|x| *x /= norm);
                break;
            }
        }
    }
    out
}
