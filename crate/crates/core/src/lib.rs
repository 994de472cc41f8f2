//! # circwass
//!
//! Exact Wasserstein losses between discrete distributions on a circle of
//! `N` bins (class indices of a periodic label such as a pose angle) or on
//! a line (ordinal labels).
//!
//! - [`histogram`]: validated histograms, cumulative distributions, rotation.
//! - [`metric`]: arc length and the cost family `f(d)`.
//! - [`smoothing`]: one-hot and unimodal-uniform conservative targets.
//! - [`exact`]: closed-form and near-linear exact solvers with subgradients.
//! - [`oracle`]: min-cost flow reference solver and Sinkhorn baseline.
//! - [`adaptive`]: feature-centroid ground matrices blended with arc length.
//!
//! ```
//! use circwass::{circular_linear, CircularHistogram};
//!
//! let s = CircularHistogram::new(vec![0.5, 0.5, 0.0]).unwrap();
//! let t = CircularHistogram::new(vec![0.0, 0.5, 0.5]).unwrap();
//! assert_eq!(circular_linear(&s, &t).unwrap().value, 0.5);
//! ```

// `!(x >= 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptive;
pub mod bench;
pub mod error;
pub mod exact;
pub mod histogram;
pub mod io;
pub mod metric;
pub mod oracle;
pub mod smoothing;
pub mod verify;

pub use adaptive::{alpha_at, blend_ground_matrix, centroid_l1_distances, class_centroids, BlendSchedule, ClassFeatureSet};
pub use error::{Error, Result};
pub use exact::{
    circular_convex, circular_linear, circular_linear_subgrad, fast_loss, l1_step, line_ot, onehot_grad,
    onehot_loss, Geometry, LossResult, DEFAULT_RESOLUTION,
};
pub use histogram::{CircularHistogram, CumulativeDistribution, DEFAULT_SUM_TOLERANCE};
pub use metric::{arc_length, build_ground_matrix, build_line_matrix, eval_cost, GroundMatrix, GroundMetricSpec};
pub use oracle::{compare, mincost_exact, sinkhorn, ComparisonReport, SinkhornOptions, SinkhornResult, TransportPlan};
pub use smoothing::{
    binomial_pmf, conservative_target, gaussian_pmf, one_hot, poisson_pmf, wrap_to_circle, GaussianNormalization,
    SmoothingSpec, UnimodalFamily, UnimodalPmf,
};
