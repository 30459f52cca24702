//! k-nearest-neighbor estimation of normalized mutual information (NMI).
//!
//! The pipeline is:
//!
//! 1. [`knn::compute_knn_radii`]: per-point distance to the k-th joint
//!    neighbor under the max-norm, plus the marginal neighbor counts.
//! 2. [`scaling`]: the power-mean normalization factor `V` of those radii,
//!    computed either literally in the linear domain ([`Backend::Baseline`]),
//!    in the log domain with the largest radius factored out
//!    ([`Backend::Proposed`]), or by its high-dimensional limit
//!    `V -> max radius` ([`Backend::DominantTerm`]).
//! 3. [`estimators`]: KSG mutual information, relative marginal and joint
//!    entropies, and their NMI.
//!
//! The linear-domain factor overflows once the joint dimensionality reaches
//! a few hundred; the log-domain factor stays finite for any positive radii.
//!
//! [`synthetic`] and [`truth`] provide the correlated Gaussian and Student-t
//! benchmark families with closed-form ground truths, and [`harness`] runs
//! seeded sweeps over them.

#![forbid(unsafe_code)]

pub mod error;
pub mod estimators;
pub mod harness;
pub mod io;
pub mod knn;
pub mod scaling;
pub mod special;
pub mod synthetic;
pub mod truth;

pub use error::{Error, Result};
pub use estimators::{estimate, estimate_from_radii, EstimateReport, Marginal, NmiValue};
pub use knn::{compute_knn_radii, Dataset, RadiusSet};
pub use scaling::{normalize, scale_radii, Backend, NormalizationResult, ScaledRadii};
pub use synthetic::{generate_gaussian, generate_student_t, GaussianSpec, StudentTSpec};
pub use truth::{gaussian_truth, student_t_truth, TruthRecord};
