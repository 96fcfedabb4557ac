//! The interface between algorithms and the simulator.

use serde::{Deserialize, Serialize};

use crate::instances::FeedbackMode;
use crate::metric::{Ball, Point};

/// What an algorithm does in one round: the arm it plays and the points
/// it observes for free.
#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub play: Point,
    pub peeks: Vec<Point>,
}

impl Action {
    pub fn play(p: Point) -> Self {
        Action { play: p, peeks: vec![] }
    }
}

/// Realized payoffs for an [`Action`], peeks in request order.
#[derive(Debug, Clone, PartialEq)]
pub struct Feedback {
    pub reward: f64,
    pub peeks: Vec<f64>,
}

/// Structured audit log entries. Rounds are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    PhaseStart { round: u64, phase: u32, length: u64 },
    Activate { round: u64, phase: u32, arm: usize, point: Point, radius: f64 },
    /// State of the played arm after its update; `pre_radius` is its
    /// radius when it was selected.
    Update { round: u64, arm: usize, n: u64, estimate: f64, radius: f64, pre_radius: f64 },
    /// Count of quota-bound active arms in a layer after an activation.
    Quota { round: u64, layer: usize, count: usize, limit: usize },
    /// Target layer chosen at the end of a phase.
    Target { round: u64, epsilon: f64, epsilon0: f64, layer: usize, empty: bool },
    /// A uniform mesh chosen for a phase.
    Mesh { round: u64, delta: f64, size: usize },
    /// One exploration subroutine call.
    Explore { round: u64, chosen: Point, points: usize, pulls: u64, losers: usize },
    Note { round: u64, message: String },
}

impl Event {
    pub fn round(&self) -> u64 {
        match self {
            Event::PhaseStart { round, .. }
            | Event::Activate { round, .. }
            | Event::Update { round, .. }
            | Event::Quota { round, .. }
            | Event::Target { round, .. }
            | Event::Mesh { round, .. }
            | Event::Explore { round, .. }
            | Event::Note { round, .. } => *round,
        }
    }
}

/// An online algorithm as a state machine. The simulator calls `act` then
/// `observe` once per round.
pub trait Algorithm: Send {
    fn name(&self) -> String;

    fn feedback(&self) -> FeedbackMode {
        FeedbackMode::Bandit
    }

    fn act(&mut self, round: u64) -> Action;

    fn observe(&mut self, round: u64, feedback: &Feedback);

    /// Drains events logged since the last call.
    fn take_events(&mut self) -> Vec<Event> {
        vec![]
    }

    /// Current confidence balls of active arms, for coverage audits.
    fn confidence_balls(&self) -> Vec<Ball> {
        vec![]
    }
}
