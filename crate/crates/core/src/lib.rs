//! Walker frame design from simulated data: parametric frames, beam-element
//! analysis, stability indices, surrogate ensembles and constrained
//! counterfactual search.

// Negated float comparisons are deliberate: NaN must fail every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod dataset;
pub mod error;
pub mod fea;
pub mod model;
pub mod optimizer;
pub mod performance;
pub mod pipeline;
pub mod sampling;
pub mod stability;
pub mod stats;
pub mod surrogate;
pub mod units;

pub use error::{Error, Result};
pub use performance::{PerformanceRecord, Target, TipAngle};
