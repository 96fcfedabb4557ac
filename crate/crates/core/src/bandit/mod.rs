//! Bandit-feedback algorithms.

mod radius;
mod ucb;
mod zooming;

pub use radius::{chernoff_radius, confidence_radius, sharp_radius, ArmStats, Estimator, RadiusPolicy};
pub use ucb::{boundary_schedule, boundary_target, naive_alg_phase_setup, naive_delta, BoundaryAlg, NaiveAlg, Ucb1};
pub use zooming::{pmo_epsilon, pmo_net, pmo_target, quota_filter, QuotaConfig, Variant, Zooming, ZoomingConfig};
