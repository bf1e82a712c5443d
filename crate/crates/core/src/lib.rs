//! Hyperellipsoid density sampling (HDS).
//!
//! HDS turns a uniform Sobol cover of a search box into a non-uniform
//! sequence concentrated inside PCA-fitted hyperellipsoids around k-means
//! clusters. The crate also carries the pieces needed to compare it against
//! plain Sobol initialization: discrepancy metrics, a best/1/bin differential
//! evolution optimizer and a paired benchmark harness with summary statistics.
//!
//! ```no_run
//! use hds::{hds_generate, Bounds, HdsConfig};
//!
//! let bounds = Bounds::uniform(10, -100.0, 100.0).unwrap();
//! let samples = hds_generate(&HdsConfig::new(1000, bounds).with_seed(1)).unwrap();
//! assert_eq!(samples.nrows(), 1000);
//! ```

// NaN must fail validation, hence `!(x > 0.0)` style checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod clustering;
pub mod de;
pub mod discrepancy;
pub mod error;
pub mod io;
pub mod matrix;
pub mod numerics;
pub mod sampler;

pub use bench::{summarize, ComparisonSummary, ExperimentConfig, FunctionId, TrialRecord};
pub use de::{differential_evolution, make_init_population, DeConfig, DeOutcome, InitMethod};
pub use discrepancy::{centered_l2, l2_star, DiscrepancyReport, Metric};
pub use error::{HdsError, Result};
pub use matrix::{Frame, SampleMatrix};
pub use sampler::{hds_generate, Bounds, GaussianWeightSpec, HdsConfig};
