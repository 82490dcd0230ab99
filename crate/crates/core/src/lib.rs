//! Toolkit for stability-constrained clustering.
//!
//! The crate is organised around a finite metric space ([`MetricInstance`])
//! and a k-partition of its points ([`Clustering`]). On top of those it
//! provides:
//!
//! * exact brute-force oracles for k-median, min-sum, dominating set and
//!   triangle partition ([`oracle`]),
//! * measurement of multiplicative and additive center / min-sum stability,
//!   structural checks (strict separation, center margins, subset linkage)
//!   and perturbation falsifiers ([`stability`]),
//! * the one-pass argmin-pair streaming algorithm for center-stable
//!   k-median instances ([`stream`]),
//! * average-linkage trees with optimal k-pruning ([`linkage`]),
//! * generators for hardness-reduction and planted stable instances
//!   ([`reductions`]).
//!
//! Enumeration-heavy loops run in parallel through [`par`] when the
//! `parallel` feature is enabled (the default); results never depend on the
//! thread count.

pub mod error;
pub mod graph;
pub mod linkage;
pub mod metric;
pub mod oracle;
pub mod par;
pub mod reductions;
pub mod stability;
pub mod stream;

pub use error::{Error, Result};
pub use graph::Graph;
pub use metric::{Clustering, Cost, MetricInstance, Objective, ValidationOptions, ValidationVerdict};
pub use oracle::{Budget, OptimumResult};
pub use stability::StabilityReport;

/// Absolute tolerance used for comparing costs of general (non-reduction) instances.
pub const COST_TOLERANCE: f64 = 1e-12;
