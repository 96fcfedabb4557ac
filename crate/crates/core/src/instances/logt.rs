//! A family of instances indexed by a sequence converging to a point x*,
//! each adding a small bump near one sequence element.

use serde::{Deserialize, Serialize};

use super::{Environment, InstanceError, Noise};
use crate::metric::{Ball, Point, SpaceRef};
use crate::rng::purpose;

/// Where member i centers its bump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpCenter {
    /// At the sequence element x_i.
    #[default]
    Approach,
    /// At the limit x*.
    Limit,
}

/// µ_0(x) = 1/2 − D(x, x*)/8 and, for i ≥ 1,
/// µ_i = µ_0 + (3/4)·max(0, r_i/3 − D(x, c)) with r_i = D(x_i, x*).
#[derive(Debug, Clone)]
pub struct LogTFamily {
    space: SpaceRef,
    x_star: Point,
    seq: Vec<Point>,
    radii: Vec<f64>,
    index: usize,
    center: BumpCenter,
}

impl LogTFamily {
    /// `seq[0]` is x_1. Index 0 selects the base instance. Requires
    /// r_{i+1} < r_i / 2.
    pub fn new(space: SpaceRef, x_star: Point, seq: Vec<Point>, index: usize, center: BumpCenter) -> Result<Self, InstanceError> {
        space.validate_point(&x_star)?;
        let mut radii = Vec::with_capacity(seq.len());
        for p in &seq {
            space.validate_point(p)?;
            radii.push(space.dist(p, &x_star));
        }
        if radii.iter().any(|&r| !(r > 0.0)) {
            return Err(InstanceError::Invalid("sequence elements must differ from the limit".into()));
        }
        if let Some(w) = radii.windows(2).find(|w| !(w[1] < w[0] / 2.0)) {
            return Err(InstanceError::Invalid(format!("distances must more than halve: {} then {}", w[0], w[1])));
        }
        if index > seq.len() {
            return Err(InstanceError::Invalid(format!("index {index} beyond sequence of length {}", seq.len())));
        }
        Ok(LogTFamily { space, x_star, seq, radii, index, center })
    }

    /// Sequence x_i = x* + 3^{-i} on the unit interval with x* = 0.
    pub fn geometric(space: SpaceRef, len: usize, index: usize, center: BumpCenter) -> Result<Self, InstanceError> {
        let seq = (1..=len).map(|i| Point::Real1D(3f64.powi(-(i as i32)))).collect();
        Self::new(space, Point::Real1D(0.0), seq, index, center)
    }

    pub fn with_index(&self, index: usize) -> Result<Self, InstanceError> {
        Self::new(self.space.clone(), self.x_star.clone(), self.seq.clone(), index, self.center)
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.radii[i - 1]
    }

    fn bump_ball(&self) -> Option<Ball> {
        if self.index == 0 {
            return None;
        }
        let r = self.radii[self.index - 1];
        let c = match self.center {
            BumpCenter::Approach => self.seq[self.index - 1].clone(),
            BumpCenter::Limit => self.x_star.clone(),
        };
        Some(Ball::open(c, r / 3.0))
    }
}

impl Environment for LogTFamily {
    fn space(&self) -> &SpaceRef {
        &self.space
    }

    fn name(&self) -> String {
        format!("log-t family member {} of {} on {}", self.index, self.seq.len(), self.space.name())
    }

    fn mu(&self, x: &Point) -> f64 {
        let base = 0.5 - self.space.dist(x, &self.x_star) / 8.0;
        match self.bump_ball() {
            None => base,
            Some(b) => base + 0.75 * (b.radius - self.space.dist(x, &b.center)).max(0.0),
        }
    }

    fn mu_star(&self) -> f64 {
        if self.index == 0 {
            return 0.5;
        }
        let r = self.radii[self.index - 1];
        match self.center {
            BumpCenter::Approach => 0.5 + r / 8.0,
            BumpCenter::Limit => 0.5 + r / 4.0,
        }
    }

    fn optimum(&self) -> Option<Point> {
        Some(self.bump_ball().map_or(self.x_star.clone(), |b| b.center))
    }

    fn sample(&self, seed: u64, round: u64, x: &Point) -> f64 {
        Noise::Bernoulli.draw(self.mu(x), &[seed, round, purpose::REWARD, x.key()])
    }

    fn lipschitz(&self) -> f64 {
        7.0 / 8.0
    }

    fn noise(&self) -> Option<&Noise> {
        Some(&Noise::Bernoulli)
    }

    fn focus(&self) -> Vec<Ball> {
        self.bump_ball().into_iter().collect()
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
    fn peaks_match_closed_forms() {
        for center in [BumpCenter::Approach, BumpCenter::Limit] {
            let fam = LogTFamily::geometric(line(), 6, 0, center).unwrap();
            assert_eq!(fam.mu_star(), 0.5);
            for i in 1..=6 {
                let m = fam.with_index(i).unwrap();
                let at = m.optimum().unwrap();
                assert!((m.mu(&at) - m.mu_star()).abs() < 1e-15);
                for k in 0..=2000 {
                    let x = Point::Real1D(k as f64 / 2000.0);
                    assert!(m.mu(&x) <= m.mu_star() + 1e-15);
                }
            }
        }
    }

    #[test]
    fn members_differ_only_near_their_element() {
        let fam = LogTFamily::geometric(line(), 5, 3, BumpCenter::Approach).unwrap();
        let base = fam.with_index(0).unwrap();
        let far = Point::Real1D(0.5);
        assert_eq!(fam.mu(&far), base.mu(&far));
        assert!(fam.mu(&Point::Real1D(1.0 / 27.0)) > base.mu(&Point::Real1D(1.0 / 27.0)));
    }

    #[test]
    fn slow_sequences_are_rejected() {
        let seq = vec![Point::Real1D(0.5), Point::Real1D(0.3)];
        assert!(LogTFamily::new(line(), Point::Real1D(0.0), seq, 1, BumpCenter::Approach).is_err());
    }
}
