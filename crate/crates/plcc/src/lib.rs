//! Pair Lévy copula constructions over stable subordinator margins.
//!
//! The crate builds d-dimensional Lévy copulas from bivariate pieces arranged
//! on a D-vine or C-vine: Clayton Lévy copulas on the first tree, Gaussian or
//! independence distributional copulas above. On top of the construction it
//! provides
//!
//! * series-representation simulation of the induced multivariate pure-jump
//!   process with explicit truncation control ([`simulate`]),
//! * sequential (tree-by-tree) maximum likelihood estimation from jumps
//!   observed above a threshold ([`estimate`]),
//! * a replication study harness with deterministic per-replicate random
//!   substreams ([`study`]), and
//! * stable file formats for jump series, estimation reports and study
//!   configurations ([`io`]).
//!
//! The numeric core is generic over the scalar type through [`real::Real`];
//! `f64` aliases for the main types are exported at the crate root.

// Negated comparisons (`!(x > 0)`) route NaN into the domain-error paths;
// index loops mirror the positional recursions they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod dist_copulas;
pub mod error;
pub mod estimate;
pub mod io;
pub mod levy_copulas;
pub mod marginals;
pub mod optim;
pub mod real;
pub mod simulate;
pub mod study;
pub mod vine;

pub use error::{Error, Result};
pub use real::Real;

/// `f64` stable subordinator margin parameters.
pub type StableParams64 = marginals::StableParams<f64>;
/// `f64` vine skeleton.
pub type VineSpec64 = vine::VineSpec<f64>;
/// `f64` validated construction.
pub type Plcc64 = vine::Plcc<f64>;
/// `f64` simulated jump series.
pub type JumpSeries64 = simulate::JumpSeries<f64>;
/// `f64` estimation report.
pub type EstimationReport64 = estimate::EstimationReport<f64>;
