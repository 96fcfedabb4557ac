//! The interaction loop, regret accounting, replication and exponent fits.

mod config;
mod fit;

pub use config::{AlgorithmSpec, RunConfig};
pub use fit::{slope_fit, FitError, SlopeFit};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algorithm::{Action, Algorithm, Event, Feedback};
use crate::instances::{EnvRef, Environment, FeedbackMode, InstanceError};
use crate::metric::Point;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("{algorithm} needs {mode:?} feedback, which the environment does not offer")]
    ModeMismatch { algorithm: String, mode: FeedbackMode },
    #[error("round {round}: {peeks} peeks requested under {mode:?} feedback")]
    TooManyPeeks { round: u64, peeks: usize, mode: FeedbackMode },
    #[error("round {round}: point {point} has the wrong kind for the space")]
    BadPoint { round: u64, point: Point },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("replication needs at least {0} seeds")]
    TooFewSeeds(usize),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub horizon: u64,
    pub seed: u64,
    /// Keep algorithm events in the trace.
    #[serde(default)]
    pub keep_events: bool,
    /// Keep the played point of every round.
    #[serde(default)]
    pub keep_actions: bool,
}

impl RunOptions {
    pub fn new(horizon: u64, seed: u64) -> Self {
        RunOptions { horizon, seed, keep_events: false, keep_actions: false }
    }

    pub fn with_events(mut self) -> Self {
        self.keep_events = true;
        self
    }

    pub fn with_actions(mut self) -> Self {
        self.keep_actions = true;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: u64,
    /// t·µ* − Σ µ(x_s).
    pub regret: f64,
    /// Σ of realized rewards of played arms.
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub algorithm: String,
    pub environment: String,
    pub seed: u64,
    pub horizon: u64,
    pub mu_star: f64,
    pub checkpoints: Vec<Checkpoint>,
    #[serde(default)]
    pub events: Vec<Event>,
    #[serde(default)]
    pub actions: Vec<Point>,
}

impl RegretTrace {
    pub fn final_regret(&self) -> f64 {
        self.checkpoints.last().map_or(0.0, |c| c.regret)
    }

    /// Regret at checkpoint `t`, if recorded.
    pub fn regret_at(&self, t: u64) -> Option<f64> {
        self.checkpoints.iter().find(|c| c.t == t).map(|c| c.regret)
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.checkpoints.iter().map(|c| (c.t as f64, c.regret)).collect()
    }
}

/// Checks per-round peek counts against the feedback mode.
pub fn peeks_allowed(mode: FeedbackMode, peeks: usize) -> bool {
    match mode {
        FeedbackMode::Bandit => peeks == 0,
        FeedbackMode::Double => peeks <= 1,
        FeedbackMode::Full => true,
    }
}

pub fn run(alg: &mut dyn Algorithm, env: &dyn Environment, opts: &RunOptions) -> Result<RegretTrace, SimError> {
    run_with_hook(alg, env, opts, |_, _, _| {})
}

/// Runs the loop; `hook` sees each round's action and the algorithm
/// state right after `act`, before any feedback.
pub fn run_with_hook<H>(alg: &mut dyn Algorithm, env: &dyn Environment, opts: &RunOptions, mut hook: H) -> Result<RegretTrace, SimError>
where
    H: FnMut(u64, &Action, &dyn Algorithm),
{
    let mode = alg.feedback();
    if !env.supports(mode) {
        return Err(SimError::ModeMismatch { algorithm: alg.name(), mode });
    }
    let kind = env.space().kind();
    let mu_star = env.mu_star();
    let mut trace = RegretTrace {
        algorithm: alg.name(),
        environment: env.name(),
        seed: opts.seed,
        horizon: opts.horizon,
        mu_star,
        checkpoints: vec![],
        events: vec![],
        actions: vec![],
    };
    let (mut regret, mut reward) = (0.0f64, 0.0f64);
    let mut next_power = 1u64;
    for round in 1..=opts.horizon {
        let action = alg.act(round);
        if action.play.kind() != kind {
            return Err(SimError::BadPoint { round, point: action.play });
        }
        if !peeks_allowed(mode, action.peeks.len()) {
            return Err(SimError::TooManyPeeks { round, peeks: action.peeks.len(), mode });
        }
        hook(round, &action, &*alg);
        drain(alg, &mut trace, opts.keep_events, regret, reward);
        let y = env.sample(opts.seed, round, &action.play);
        let peeks = action.peeks.iter().map(|p| env.sample(opts.seed, round, p)).collect();
        regret += mu_star - env.mu(&action.play);
        reward += y;
        alg.observe(round, &Feedback { reward: y, peeks });
        drain(alg, &mut trace, opts.keep_events, regret, reward);
        if opts.keep_actions {
            trace.actions.push(action.play);
        }
        if round == next_power || round == opts.horizon {
            trace.checkpoints.push(Checkpoint { t: round, regret, reward });
        }
        if round == next_power {
            next_power = next_power.saturating_mul(2);
        }
    }
    Ok(trace)
}

/// Collects events; a phase starting at round r closes a checkpoint at
/// r − 1 (phases only start inside `act`, before the round is scored).
fn drain(alg: &mut dyn Algorithm, trace: &mut RegretTrace, keep: bool, regret: f64, reward: f64) {
    for e in alg.take_events() {
        if let Event::PhaseStart { round: r, .. } = e {
            if r > 1 && trace.checkpoints.last().is_none_or(|c| c.t < r - 1) {
                trace.checkpoints.push(Checkpoint { t: r - 1, regret, reward });
            }
        }
        if keep {
            trace.events.push(e);
        }
    }
}

/// Regret recomputed from a recorded action log at the same checkpoints.
pub fn recompute_regret(env: &dyn Environment, actions: &[Point], checkpoints: &[u64]) -> Vec<f64> {
    let mu_star = env.mu_star();
    let mut out = vec![];
    let mut acc = 0.0f64;
    let mut it = checkpoints.iter().peekable();
    for (i, x) in actions.iter().enumerate() {
        acc += mu_star - env.mu(x);
        while it.peek().is_some_and(|&&t| t == i as u64 + 1) {
            out.push(acc);
            it.next();
        }
    }
    out
}

/// Mean and standard error of several traces at their shared checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub runs: usize,
    pub t: Vec<u64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub reward: Vec<f64>,
}

impl Aggregate {
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.t.iter().zip(&self.mean).map(|(&t, &m)| (t as f64, m)).collect()
    }

    pub fn at(&self, t: u64) -> Option<f64> {
        self.t.iter().position(|&s| s == t).map(|i| self.mean[i])
    }
}

pub fn aggregate(traces: &[RegretTrace]) -> Aggregate {
    let Some(first) = traces.first() else {
        return Aggregate { runs: 0, t: vec![], mean: vec![], stderr: vec![], reward: vec![] };
    };
    let t: Vec<u64> = first
        .checkpoints
        .iter()
        .map(|c| c.t)
        .filter(|&t| traces.iter().all(|tr| tr.checkpoints.iter().any(|c| c.t == t)))
        .collect();
    let m = traces.len() as f64;
    let (mut mean, mut stderr, mut reward) = (vec![], vec![], vec![]);
    for &s in &t {
        let vals: Vec<f64> = traces.iter().map(|tr| tr.regret_at(s).unwrap()).collect();
        let rw: f64 = traces.iter().map(|tr| tr.checkpoints.iter().find(|c| c.t == s).unwrap().reward).sum::<f64>() / m;
        let mu = vals.iter().sum::<f64>() / m;
        let var = if traces.len() > 1 && vals.iter().any(|&v| v != vals[0]) { vals.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (m - 1.0) } else { 0.0 };
        mean.push(mu);
        stderr.push((var / m).sqrt());
        reward.push(rw);
    }
    Aggregate { runs: traces.len(), t, mean, stderr, reward }
}

/// Runs one fresh algorithm per seed in parallel.
pub fn replicate<F>(env: &dyn Environment, seeds: &[u64], opts: &RunOptions, make: F) -> Result<(Aggregate, Vec<RegretTrace>), SimError>
where
    F: Fn(u64) -> Result<Box<dyn Algorithm>, SimError> + Sync,
{
    if seeds.len() < 2 {
        return Err(SimError::TooFewSeeds(2));
    }
    let traces = seeds
        .par_iter()
        .map(|&seed| {
            let mut alg = make(seed)?;
            run(alg.as_mut(), env, &RunOptions { seed, ..opts.clone() })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((aggregate(&traces), traces))
}

/// Like [`replicate`], but each seed also draws its own instance.
pub fn replicate_instances<F>(seeds: &[u64], opts: &RunOptions, make: F) -> Result<(Aggregate, Vec<RegretTrace>), SimError>
where
    F: Fn(u64) -> Result<(EnvRef, Box<dyn Algorithm>), SimError> + Sync,
{
    if seeds.len() < 2 {
        return Err(SimError::TooFewSeeds(2));
    }
    let traces = seeds
        .par_iter()
        .map(|&seed| {
            let (env, mut alg) = make(seed)?;
            run(alg.as_mut(), env.as_ref(), &RunOptions { seed, ..opts.clone() })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((aggregate(&traces), traces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::{Zooming, ZoomingConfig};
    use crate::instances::{LipschitzEnv, Noise, Payoff};
    use crate::metric::{Interval, SpaceRef};
    use std::sync::Arc;

    #[derive(Debug)]
    struct Fixed(Point, FeedbackMode, usize);

    impl Algorithm for Fixed {
        fn name(&self) -> String {
            "fixed".into()
        }
        fn feedback(&self) -> FeedbackMode {
            self.1
        }
        fn act(&mut self, _round: u64) -> Action {
            Action { play: self.0.clone(), peeks: vec![self.0.clone(); self.2] }
        }
        fn observe(&mut self, _round: u64, _fb: &Feedback) {}
    }

    fn line() -> SpaceRef {
        Arc::new(Interval::new(1.0).unwrap())
    }

    fn cone() -> LipschitzEnv {
        let p = Payoff::Cones { cones: vec![(Point::Real1D(0.3), 0.9)], floor: 0.0 };
        LipschitzEnv::new(line(), p, Noise::Bernoulli, false).unwrap()
    }

    #[test]
    fn constant_payoff_has_zero_regret() {
        let env = LipschitzEnv::new(line(), Payoff::Constant { value: 0.4 }, Noise::Bernoulli, false).unwrap();
        let mut z = Zooming::plain(line(), &ZoomingConfig::default()).unwrap();
        let tr = run(&mut z, &env, &RunOptions::new(300, 1)).unwrap();
        assert!(tr.checkpoints.iter().all(|c| c.regret == 0.0));
    }

    #[test]
    fn fixed_arm_regret_is_linear() {
        let env = cone();
        let mut a = Fixed(Point::Real1D(0.5), FeedbackMode::Bandit, 0);
        let tr = run(&mut a, &env, &RunOptions::new(100, 3)).unwrap();
        for c in &tr.checkpoints {
            assert!((c.regret - c.t as f64 * 0.2).abs() < 1e-9);
        }
        assert_eq!(tr.checkpoints.last().unwrap().t, 100);
    }

    #[test]
    fn identical_seeds_identical_traces() {
        let env = cone();
        let go = || {
            let mut z = Zooming::plain(line(), &ZoomingConfig::default()).unwrap();
            run(&mut z, &env, &RunOptions::new(2000, 9).with_events()).unwrap()
        };
        assert_eq!(go(), go());
    }

    #[test]
    fn phase_boundaries_are_checkpoints() {
        let env = cone();
        let mut z = Zooming::plain(line(), &ZoomingConfig::default()).unwrap();
        let tr = run(&mut z, &env, &RunOptions::new(100, 2)).unwrap();
        let ts: Vec<u64> = tr.checkpoints.iter().map(|c| c.t).collect();
        for t in [2, 6, 14, 30, 62] {
            assert!(ts.contains(&t), "{ts:?}");
        }
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
        assert!(tr.checkpoints.windows(2).all(|w| w[0].regret <= w[1].regret));
    }

    #[test]
    fn action_log_recomputes_exactly() {
        let env = cone();
        let mut z = Zooming::plain(line(), &ZoomingConfig::default()).unwrap();
        let tr = run(&mut z, &env, &RunOptions::new(1000, 4).with_actions()).unwrap();
        let ts: Vec<u64> = tr.checkpoints.iter().map(|c| c.t).collect();
        let again = recompute_regret(&env, &tr.actions, &ts);
        let orig: Vec<f64> = tr.checkpoints.iter().map(|c| c.regret).collect();
        assert_eq!(again, orig);
    }

    #[test]
    fn feedback_modes_are_enforced() {
        let env = cone();
        let mut a = Fixed(Point::Real1D(0.5), FeedbackMode::Bandit, 1);
        assert!(matches!(run(&mut a, &env, &RunOptions::new(5, 1)), Err(SimError::TooManyPeeks { .. })));
        let mut a = Fixed(Point::Real1D(0.5), FeedbackMode::Double, 2);
        assert!(run(&mut a, &env, &RunOptions::new(5, 1)).is_err());
        let mut a = Fixed(Point::Real1D(0.5), FeedbackMode::Full, 5);
        assert!(run(&mut a, &env, &RunOptions::new(5, 1)).is_ok());
        let mut a = Fixed(Point::Index(1), FeedbackMode::Bandit, 0);
        assert!(matches!(run(&mut a, &env, &RunOptions::new(5, 1)), Err(SimError::BadPoint { .. })));
    }

    #[test]
    fn replicate_identical_seeds_have_zero_stderr() {
        let env = cone();
        let make = |_| -> Result<Box<dyn Algorithm>, SimError> { Ok(Box::new(Zooming::plain(line(), &ZoomingConfig::default())?)) };
        let (agg, traces) = replicate(&env, &[5, 5, 5], &RunOptions::new(500, 0), make).unwrap();
        assert_eq!(traces.len(), 3);
        assert!(agg.stderr.iter().all(|&s| s == 0.0));
        assert!(agg.mean.windows(2).all(|w| w[0] <= w[1]));
        assert!(replicate(&env, &[1], &RunOptions::new(5, 0), make).is_err());
    }
}
