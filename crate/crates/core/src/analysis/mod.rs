//! Dimension estimates and run audits.

mod audit;
mod dimension;

pub use audit::{clean_run_audit, CleanAudit, PhaseAudit, PULL_CONSTANT};
pub use dimension::{
    covering_dimension_fit, default_scales, log_covering_dimension_fit, zooming_dimension_estimate, DimensionReport, ZoomingReport, COUNT_CAP,
};
