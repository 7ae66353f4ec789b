//! masslab: a numerical laboratory for reproducing kernels of section spaces
//! on the projective line and the statistics of Gaussian random sections.
//!
//! The crate is organized along the pipeline:
//!
//! * [`geometry`] — the unit-volume round surface, distances, normal charts,
//!   exact product quadrature, test functions;
//! * [`bundles`] — the metric sequence, curvature-rate checks, weight
//!   derivative estimates and normal-chart Taylor data;
//! * [`bergman`] — orthonormal bases, the reproducing kernel, its diagonal,
//!   near-diagonal and off-diagonal behavior;
//! * [`sampling`] — Gaussian random sections, mass linear statistics and
//!   their exact trace moments;
//! * [`stats`] — distributional tests: normality, variance laws, covariance
//!   integral conditions, almost-sure equidistribution;
//! * [`runner`] — experiment configs, deterministic execution, CSV/JSON/SVG
//!   reports and the basis cache.

pub mod bergman;
pub mod bundles;
pub mod geometry;
pub mod linalg;
pub mod runner;
pub mod sampling;
pub mod stats;

#[cfg(test)]
pub(crate) mod testutil;

pub use bergman::{build_evaluator, build_onb, KernelEvaluator, OrthonormalBasis};
pub use bundles::{DegreeLaw, MetricSequenceSpec, PerturbationProfile, WeightField};
pub use geometry::{
    build_quadrature, builtin_test_functions, geodesic_distance, normal_chart_at,
    ProjectivePoint, QuadratureRule, TestFunction,
};
pub use runner::{parse_config, run, ExperimentReport, RunConfig};
pub use sampling::{sample_section, RandomSection, StatisticMatrix};
