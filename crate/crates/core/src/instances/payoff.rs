//! Closed-form payoff functions and the generic environment around them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Environment, InstanceError, Noise};
use crate::metric::{Point, Shape, SpaceRef};
use crate::rng::{self, purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payoff {
    Constant { value: f64 },
    /// f(D(x, S)) for a finite target set S.
    Target { targets: Vec<Point>, shape: Shape },
    /// max(floor, max_j (height_j − D(x, center_j))).
    Cones {
        cones: Vec<(Point, f64)>,
        #[serde(default)]
        floor: f64,
    },
    /// Explicit values on a finite space, indexed by point id.
    Values { values: Vec<f64> },
}

impl Payoff {
    pub fn eval(&self, space: &SpaceRef, x: &Point) -> f64 {
        match self {
            Payoff::Constant { value } => *value,
            Payoff::Target { targets, shape } => {
                let d = targets.iter().map(|t| space.dist(x, t)).fold(f64::INFINITY, f64::min);
                shape.eval(d.min(1.0))
            }
            Payoff::Cones { cones, floor } => cones.iter().map(|(c, h)| h - space.dist(x, c)).fold(*floor, f64::max),
            Payoff::Values { values } => match x {
                Point::Index(i) => values.get(*i).copied().unwrap_or(f64::NAN),
                _ => f64::NAN,
            },
        }
    }

    pub fn mu_star(&self) -> f64 {
        match self {
            Payoff::Constant { value } => *value,
            Payoff::Target { shape, .. } => shape.top(),
            Payoff::Cones { cones, floor } => cones.iter().map(|c| c.1).fold(*floor, f64::max),
            Payoff::Values { values } => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn optimum(&self) -> Option<Point> {
        match self {
            Payoff::Constant { .. } => None,
            Payoff::Target { targets, .. } => targets.first().cloned(),
            Payoff::Cones { cones, .. } => {
                cones.iter().fold(None::<&(Point, f64)>, |b, c| if b.is_none_or(|b| c.1 > b.1) { Some(c) } else { b }).map(|c| c.0.clone())
            }
            Payoff::Values { values } => {
                let best = self.mu_star();
                values.iter().position(|&v| v == best).map(Point::Index)
            }
        }
    }

    /// A Lipschitz constant valid for this payoff on `space`.
    pub fn lipschitz(&self, space: &SpaceRef) -> f64 {
        match self {
            Payoff::Constant { .. } => 0.0,
            Payoff::Target { shape, .. } => shape.lipschitz(),
            Payoff::Cones { .. } => 1.0,
            Payoff::Values { values } => {
                let mut l: f64 = 0.0;
                for i in 0..values.len() {
                    for j in 0..i {
                        let d = space.dist(&Point::Index(i), &Point::Index(j));
                        l = l.max((values[i] - values[j]).abs() / d);
                    }
                }
                l
            }
        }
    }

    /// `count` cones with centers on the η-grid and heights in
    /// [lo, hi], drawn from `seed`.
    pub fn random_cones(space: &SpaceRef, count: usize, lo: f64, hi: f64, seed: u64) -> Payoff {
        let mut r = rng::stream(&[seed, purpose::INSTANCE]);
        let cones = (0..count).map(|_| (space.grid_point(&mut r), r.random_range(lo..=hi))).collect();
        Payoff::Cones { cones, floor: 0.0 }
    }

    fn validate(&self, space: &SpaceRef) -> Result<(), InstanceError> {
        let bad = |m: String| Err(InstanceError::Invalid(m));
        match self {
            Payoff::Constant { value } if !(0.0..=1.0).contains(value) => bad(format!("constant payoff {value} outside [0,1]")),
            Payoff::Target { targets, shape } => {
                shape.validate()?;
                if targets.is_empty() {
                    return bad("target set is empty".into());
                }
                for t in targets {
                    space.validate_point(t)?;
                }
                Ok(())
            }
            Payoff::Cones { cones, floor } => {
                if cones.iter().any(|c| !(0.0..=1.0).contains(&c.1)) || !(0.0..=1.0).contains(floor) {
                    return bad("cone heights must lie in [0,1]".into());
                }
                for c in cones {
                    space.validate_point(&c.0)?;
                }
                Ok(())
            }
            Payoff::Values { values } => {
                let n = space.finite_points().map(|p| p.len());
                if n != Some(values.len()) {
                    return bad(format!("{} values for a space of {n:?} points", values.len()));
                }
                if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return bad("payoff values must lie in [0,1]".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LipschitzEnv {
    space: SpaceRef,
    payoff: Payoff,
    noise: Noise,
    relaxed: bool,
    lipschitz: f64,
}

impl LipschitzEnv {
    /// Rejects payoffs that are not 1-Lipschitz unless `relaxed`.
    pub fn new(space: SpaceRef, payoff: Payoff, noise: Noise, relaxed: bool) -> Result<Self, InstanceError> {
        payoff.validate(&space)?;
        noise.validate()?;
        let lipschitz = payoff.lipschitz(&space);
        if !relaxed && lipschitz > 1.0 + 1e-12 {
            return Err(InstanceError::Invalid(format!("payoff has Lipschitz constant {lipschitz} > 1; mark it relaxed")));
        }
        Ok(LipschitzEnv { space, payoff, noise, relaxed, lipschitz })
    }

    /// Bernoulli target-set instance µ(x) = f(D(x, S)). Shapes steeper
    /// than slope 1 are flagged relaxed.
    pub fn target(space: SpaceRef, targets: Vec<Point>, shape: Shape) -> Result<Self, InstanceError> {
        let relaxed = shape.lipschitz() > 1.0;
        Self::new(space, Payoff::Target { targets, shape }, Noise::Bernoulli, relaxed)
    }

    pub fn payoff(&self) -> &Payoff {
        &self.payoff
    }
}

impl Environment for LipschitzEnv {
    fn space(&self) -> &SpaceRef {
        &self.space
    }

    fn name(&self) -> String {
        let kind = match &self.payoff {
            Payoff::Constant { .. } => "constant",
            Payoff::Target { .. } => "target",
            Payoff::Cones { .. } => "cones",
            Payoff::Values { .. } => "values",
        };
        format!("{kind} on {}", self.space.name())
    }

    fn mu(&self, x: &Point) -> f64 {
        self.payoff.eval(&self.space, x)
    }

    fn mu_star(&self) -> f64 {
        self.payoff.mu_star()
    }

    fn optimum(&self) -> Option<Point> {
        self.payoff.optimum()
    }

    fn sample(&self, seed: u64, round: u64, x: &Point) -> f64 {
        self.noise.draw(self.mu(x), &[seed, round, purpose::REWARD, x.key()])
    }

    fn relaxed(&self) -> bool {
        self.relaxed
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn noise(&self) -> Option<&Noise> {
        Some(&self.noise)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Interval;
    use std::sync::Arc;

    fn line() -> SpaceRef {
        Arc::new(Interval::new(1.0).unwrap())
    }

    #[test]
    fn target_values() {
        let env = LipschitzEnv::target(line(), vec![Point::Real1D(0.5)], Shape::Linear { top: 0.9, floor: 0.0, slope: 1.0 }).unwrap();
        assert!((env.mu(&Point::Real1D(0.7)) - 0.7).abs() < 1e-15);
        assert_eq!(env.mu(&Point::Real1D(0.5)), 0.9);
        assert_eq!(env.mu_star(), 0.9);
        let two = Payoff::Target { targets: vec![Point::Real1D(0.2), Point::Real1D(0.8)], shape: Shape::Linear { top: 0.9, floor: 0.0, slope: 1.0 } };
        assert!((two.eval(&line(), &Point::Real1D(0.5)) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn bernoulli_mean_matches_mu() {
        let env = LipschitzEnv::new(line(), Payoff::random_cones(&line(), 3, 0.6, 0.9, 5), Noise::Bernoulli, false).unwrap();
        let x = Point::Real1D(0.37);
        let n = 100_000;
        let m = (0..n).map(|t| env.sample(1, t, &x)).sum::<f64>() / n as f64;
        assert!((m - env.mu(&x)).abs() < 4.0 * 0.5 / (n as f64).sqrt());
    }

    #[test]
    fn steep_payoff_needs_relaxed_flag() {
        let p = Payoff::Target { targets: vec![Point::Real1D(0.5)], shape: Shape::Linear { top: 1.0, floor: 0.0, slope: 2.0 } };
        assert!(LipschitzEnv::new(line(), p.clone(), Noise::Bernoulli, false).is_err());
        assert!(LipschitzEnv::new(line(), p, Noise::Bernoulli, true).unwrap().relaxed());
    }
}
