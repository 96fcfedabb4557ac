//! Lipschitz bandits and experts: metric spaces, payoff instances,
//! algorithms, a simulator and analysis helpers.

pub mod algorithm;
pub mod analysis;
pub mod bandit;
pub mod experts;
pub mod instances;
pub mod metric;
pub mod rng;
pub mod simulator;
