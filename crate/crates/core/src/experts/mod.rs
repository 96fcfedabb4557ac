//! Full-feedback and double-feedback algorithms.

mod expl;
mod naive;
mod wrappers;

pub use expl::{expl, expl_cover, expl_prime, rank_cover, run_exploration, ExplOutcome, Exploration, Selection};
pub use naive::{empirical_best, naive_exp_delta, naive_exp_hitting_set, NaiveExp, NaiveExpMode, DEFAULT_HITTING_CAP};
pub use wrappers::{
    bandit_schedule, exploration_budget, Explorer, FreePeekExperts, PeekRadius, WellOrderedBandit, MAX_DOUBLY_EXPONENTIAL_PHASE,
};
