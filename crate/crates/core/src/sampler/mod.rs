//! The hyperellipsoid density sampling pipeline.
//!
//! A Sobol cover of the unit cube is clustered, the cluster count is read off
//! a Ward dendrogram, each cluster becomes a PCA-oriented ellipsoid, and the
//! requested number of points is drawn inside the ellipsoids in proportion to
//! cluster size. Points falling outside the cube are replaced by void filling.

pub mod bounds;
pub mod ellipsoid;
pub mod fill;
pub mod generate;
pub mod neighbors;
pub mod weights;

pub use bounds::{denormalize, normalize, Bounds};
pub use ellipsoid::{allocate_samples, build_ellipsoids, sample_ellipsoid, EllipsoidModel};
pub use fill::{reject_and_fill, FillOutcome};
pub use generate::{hds_generate, hds_generate_detailed, HdsConfig, HdsOutput};
pub use weights::{apply_gaussian_weights, GaussianWeightSpec, WeightedSample};
