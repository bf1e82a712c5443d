//! Random streams, Sobol points, unit directions, chi-squared quantiles, PCA
//! and truncated normals.

pub mod pca;
pub mod rng;
pub mod sobol;
pub mod special;
pub mod sphere;
pub mod truncnorm;

pub use pca::{pca_fit, PcaResult, DEFAULT_EPSILON};
pub use rng::RngStream;
pub use sobol::{initial_sample_count, sobol_points, SobolEngine};
pub use special::{chi2_cdf, chi2_quantile, radial_scale_factor};
pub use sphere::marsaglia_unit_directions;
pub use truncnorm::truncated_normal_draw;
