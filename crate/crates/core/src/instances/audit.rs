//! Randomized Lipschitz audits of expected and realized payoffs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Environment;
use crate::metric::{MetricSpace, Point};
use crate::rng::{self, purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub pairs: usize,
    pub constant: f64,
    /// Largest observed |f(x) − f(y)| / D(x, y).
    pub max_ratio: f64,
    /// Pairs with |f(x) − f(y)| > constant·D(x, y) + tol.
    pub violations: usize,
}

impl LipschitzReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Draws a probe pair: uniform grid pairs, near pairs at log-uniform
/// scales, and pairs around the environment's focus balls.
fn probe_pair(space: &dyn MetricSpace, focus: &[(Point, f64)], r: &mut impl Rng) -> Option<(Point, Point)> {
    let x = match r.random_range(0..3) {
        1 if !focus.is_empty() => {
            let (c, rad) = &focus[r.random_range(0..focus.len())];
            space.sample_near(c, rad * r.random::<f64>()).unwrap_or_else(|| c.clone())
        }
        _ => space.grid_point(r),
    };
    let y = if r.random::<bool>() {
        let rho = 10f64.powf(-r.random_range(1.0..12.0));
        space.sample_near(&x, rho)?
    } else {
        space.grid_point(r)
    };
    Some((x, y))
}

fn audit_with(space: &dyn MetricSpace, focus: &[(Point, f64)], f: &dyn Fn(&Point) -> f64, constant: f64, pairs: usize, seed: u64, tol: f64) -> LipschitzReport {
    let mut r = rng::stream(&[seed, purpose::PROBE]);
    let mut rep = LipschitzReport { pairs: 0, constant, max_ratio: 0.0, violations: 0 };
    let mut attempts = 0;
    while rep.pairs < pairs && attempts < 4 * pairs {
        attempts += 1;
        let Some((x, y)) = probe_pair(space, focus, &mut r) else { continue };
        let d = space.dist(&x, &y);
        if d == 0.0 {
            continue;
        }
        let diff = (f(&x) - f(&y)).abs();
        rep.pairs += 1;
        rep.max_ratio = rep.max_ratio.max(diff / d);
        if diff > constant * d + tol {
            rep.violations += 1;
        }
    }
    rep
}

fn focus_of(env: &dyn Environment) -> Vec<(Point, f64)> {
    env.focus().into_iter().map(|b| (b.center, b.radius)).collect()
}

/// Checks |µ(x) − µ(y)| ≤ L·D(x, y) + tol on `pairs` probe pairs, with L
/// the environment's declared constant.
pub fn lipschitz_audit(env: &dyn Environment, pairs: usize, seed: u64, tol: f64) -> LipschitzReport {
    let focus = focus_of(env);
    audit_with(env.space().as_ref(), &focus, &|x| env.mu(x), env.lipschitz(), pairs, seed, tol)
}

/// The same check on the realized payoff functions of `rounds` rounds.
/// Only meaningful for environments with correlated payoffs.
pub fn realized_lipschitz_audit(env: &dyn Environment, rounds: u64, pairs: usize, seed: u64, tol: f64) -> LipschitzReport {
    let focus = focus_of(env);
    let mut total = LipschitzReport { pairs: 0, constant: env.lipschitz(), max_ratio: 0.0, violations: 0 };
    for t in 0..rounds {
        let f = |x: &Point| env.sample(seed, t, x);
        let rep = audit_with(env.space().as_ref(), &focus, &f, env.lipschitz(), pairs, rng::mix(&[seed, t]), tol);
        total.pairs += rep.pairs;
        total.violations += rep.violations;
        total.max_ratio = total.max_ratio.max(rep.max_ratio);
    }
    total
}
