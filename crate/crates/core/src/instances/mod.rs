//! Payoff environments over metric spaces.
//!
//! An environment knows its expected payoff `mu` exactly and realizes
//! payoffs as a pure function of (run seed, round, point), so repeated
//! queries of one point in one round agree and runs replay bit for bit.

mod audit;
mod ensemble;
mod logt;
mod needle;
mod noise;
mod payoff;
mod spec;

pub use audit::{lipschitz_audit, realized_lipschitz_audit, LipschitzReport};
pub use ensemble::{
    bandit_ensemble, experts_ensemble, BanditEnsemble, EnsembleCheck, ExpertsEnsemble,
};
pub use logt::{BumpCenter, LogTFamily};
pub use needle::{bump, BanditNeedle, BiasSchedule, ExpertsNeedle, DEFAULT_TRUNCATION};
pub use noise::{Noise, PointMassProfile};
pub use payoff::{LipschitzEnv, Payoff};
pub use spec::{InstanceKind, InstanceSpec, TreeSpec};

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{Ball, MetricError, Point, SpaceRef};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("tree node {0} has no children")]
    Unexpanded(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackMode {
    /// Only the played arm's payoff is revealed.
    Bandit,
    /// Any finite set of points may be queried each round.
    Full,
    /// The played arm plus one free peek per round.
    Double,
}

pub type EnvRef = Arc<dyn Environment>;

pub trait Environment: Send + Sync + fmt::Debug {
    fn space(&self) -> &SpaceRef;
    fn name(&self) -> String;

    /// Expected payoff.
    fn mu(&self, x: &Point) -> f64;

    /// sup µ over the space.
    fn mu_star(&self) -> f64;

    /// False when `mu_star` is a grid estimate rather than exact.
    fn mu_star_exact(&self) -> bool {
        true
    }

    /// A point attaining `mu_star`, when known.
    fn optimum(&self) -> Option<Point> {
        None
    }

    /// Realized payoff at `x` in the given round of run `seed`.
    fn sample(&self, seed: u64, round: u64, x: &Point) -> f64;

    fn supports(&self, _mode: FeedbackMode) -> bool {
        true
    }

    /// Relaxed instances need not be Lipschitz; only Δ(x) ≤ D(x, x*) + ε.
    fn relaxed(&self) -> bool {
        false
    }

    /// Declared Lipschitz constant of µ (and of every realized function
    /// for instances with correlated payoffs).
    fn lipschitz(&self) -> f64 {
        1.0
    }

    /// Upper bound on |µ − µ_untruncated|.
    fn truncation_error(&self) -> f64 {
        0.0
    }

    fn noise(&self) -> Option<&Noise> {
        None
    }

    /// Whether realized payoffs of one round form one Lipschitz function
    /// (as for sign-pattern constructions) rather than independent draws.
    fn correlated(&self) -> bool {
        false
    }

    /// Balls where µ has fine structure; audits concentrate probes there.
    fn focus(&self) -> Vec<Ball> {
        vec![]
    }
}

/// Hides some feedback modes of an inner environment.
#[derive(Debug)]
pub struct Restricted {
    pub inner: EnvRef,
    pub modes: Vec<FeedbackMode>,
}

impl Environment for Restricted {
    fn space(&self) -> &SpaceRef {
        self.inner.space()
    }
    fn name(&self) -> String {
        self.inner.name()
    }
    fn mu(&self, x: &Point) -> f64 {
        self.inner.mu(x)
    }
    fn mu_star(&self) -> f64 {
        self.inner.mu_star()
    }
    fn mu_star_exact(&self) -> bool {
        self.inner.mu_star_exact()
    }
    fn optimum(&self) -> Option<Point> {
        self.inner.optimum()
    }
    fn sample(&self, seed: u64, round: u64, x: &Point) -> f64 {
        self.inner.sample(seed, round, x)
    }
    fn supports(&self, mode: FeedbackMode) -> bool {
        self.modes.contains(&mode) && self.inner.supports(mode)
    }
    fn relaxed(&self) -> bool {
        self.inner.relaxed()
    }
    fn lipschitz(&self) -> f64 {
        self.inner.lipschitz()
    }
    fn truncation_error(&self) -> f64 {
        self.inner.truncation_error()
    }
    fn noise(&self) -> Option<&Noise> {
        self.inner.noise()
    }
    fn correlated(&self) -> bool {
        self.inner.correlated()
    }
    fn focus(&self) -> Vec<Ball> {
        self.inner.focus()
    }
}

/// Summary used by `describe` dumps and trace sidecars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Description {
    pub name: String,
    pub space: String,
    pub mu_star: f64,
    pub mu_star_exact: bool,
    pub lipschitz: f64,
    pub relaxed: bool,
    pub truncation_error: f64,
    pub eta: f64,
    pub optimum: Option<Point>,
}

pub fn describe(env: &dyn Environment) -> Description {
    Description {
        name: env.name(),
        space: env.space().name(),
        mu_star: env.mu_star(),
        mu_star_exact: env.mu_star_exact(),
        lipschitz: env.lipschitz(),
        relaxed: env.relaxed(),
        truncation_error: env.truncation_error(),
        eta: env.space().eta(),
        optimum: env.optimum(),
    }
}
