//! The exploration subroutines: sample a small cover n times per point,
//! discard points that are clearly worse, then pick among the survivors
//! by the well-order (EXPL) or by Cantor-Bendixson rank (EXPL′).

use serde::Serialize;

use crate::instances::Environment;
use crate::metric::{dyadic_cover, ordering_oracle, Ball, MetricError, MetricSpace, Point};

/// How survivors are turned into a single point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Selection {
    /// Ordering oracle over closed δ-balls around non-losers.
    Ordering { delta: f64 },
    /// Largest-rank undominated point; `ranks[j]` belongs to point j.
    Rank { ranks: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplOutcome {
    pub chosen: Point,
    pub points: Vec<Point>,
    pub means: Vec<f64>,
    /// Losers (EXPL) or dominated points (EXPL′).
    pub rejected: Vec<bool>,
    pub selection: Selection,
    pub pulls: u64,
}

impl ExplOutcome {
    pub fn rejected_count(&self) -> usize {
        self.rejected.iter().filter(|&&b| b).count()
    }
}

/// Cover for EXPL: the smallest dyadic δ whose greedy net has ≤ k points.
pub fn expl_cover(space: &dyn MetricSpace, k: usize) -> (f64, Vec<Point>) {
    dyadic_cover(space, k, None)
}

/// Union over ranks of per-rank covers with ≤ k points each, paired with
/// each point's rank. Needs a finite space with declared ranks.
pub fn rank_cover(space: &dyn MetricSpace, k: usize) -> Result<Vec<(Point, usize)>, MetricError> {
    let pts = space.finite_points().ok_or(MetricError::Unsupported("rank cover"))?;
    let mut by_rank: Vec<Vec<Point>> = vec![];
    for p in pts {
        let r = space.rank(&p).ok_or(MetricError::Unsupported("rank cover"))?;
        if by_rank.len() <= r {
            by_rank.resize(r + 1, vec![]);
        }
        by_rank[r].push(p);
    }
    let mut out = vec![];
    for (r, layer) in by_rank.iter().enumerate() {
        if layer.is_empty() {
            continue;
        }
        let mut delta = 1.0f64;
        let mut best = greedy_within(space, layer, 2.0);
        loop {
            let net = greedy_within(space, layer, delta);
            if net.len() > k {
                break;
            }
            let exact = net.len() == layer.len();
            best = net;
            if exact {
                break;
            }
            delta /= 2.0;
        }
        out.extend(best.into_iter().map(|p| (p, r)));
    }
    Ok(out)
}

fn greedy_within(space: &dyn MetricSpace, pts: &[Point], delta: f64) -> Vec<Point> {
    let mut net: Vec<Point> = vec![];
    for p in pts {
        if net.iter().all(|q| space.dist(p, q) >= delta) {
            net.push(p.clone());
        }
    }
    net
}

/// Sample collection: each point `n` times in a row.
#[derive(Debug, Clone)]
pub struct Exploration {
    points: Vec<Point>,
    n: u64,
    taken: u64,
    sums: Vec<f64>,
    selection: Selection,
}

impl Exploration {
    pub fn ordering(space: &dyn MetricSpace, k: usize, n: u64) -> Self {
        let (delta, points) = expl_cover(space, k.max(1));
        Self::with_points(points, n, Selection::Ordering { delta })
    }

    pub fn rank(space: &dyn MetricSpace, k: usize, n: u64) -> Result<Self, MetricError> {
        let (points, ranks) = rank_cover(space, k.max(1))?.into_iter().unzip();
        Ok(Self::with_points(points, n, Selection::Rank { ranks }))
    }

    pub fn with_points(points: Vec<Point>, n: u64, selection: Selection) -> Self {
        let sums = vec![0.0; points.len()];
        Exploration { points, n: n.max(1), taken: 0, sums, selection }
    }

    /// Total number of samples, |S|·n.
    pub fn budget(&self) -> u64 {
        self.points.len() as u64 * self.n
    }

    pub fn done(&self) -> bool {
        self.taken >= self.budget()
    }

    pub fn next_point(&self) -> Option<&Point> {
        if self.done() {
            return None;
        }
        self.points.get((self.taken / self.n) as usize)
    }

    pub fn record(&mut self, reward: f64) {
        let j = (self.taken / self.n) as usize;
        self.sums[j] += reward;
        self.taken += 1;
    }

    pub fn means(&self) -> Vec<f64> {
        self.sums.iter().map(|s| s / self.n as f64).collect()
    }

    /// Applies the rejection rule at slack `r` and picks a point.
    pub fn finish(&self, space: &dyn MetricSpace, r: f64) -> Result<ExplOutcome, MetricError> {
        if self.points.is_empty() {
            return Err(MetricError::NoCoveredPoint);
        }
        let means = self.means();
        let top = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (rejected, chosen) = match &self.selection {
            Selection::Ordering { delta } => {
                let rejected: Vec<bool> = means.iter().map(|&m| top - m > 2.0 * r + delta).collect();
                let balls: Vec<Ball> = self
                    .points
                    .iter()
                    .zip(&rejected)
                    .filter(|(_, &l)| !l)
                    .map(|(p, _)| Ball::closed(p.clone(), *delta))
                    .collect();
                (rejected, ordering_oracle(space, &balls)?)
            }
            Selection::Rank { ranks } => {
                let rejected: Vec<bool> = means.iter().map(|&m| top - m > 2.0 * r).collect();
                let mut best: Option<usize> = None;
                for j in 0..self.points.len() {
                    if !rejected[j] && best.is_none_or(|b| ranks[j] > ranks[b]) {
                        best = Some(j);
                    }
                }
                (rejected, self.points[best.unwrap_or(0)].clone())
            }
        };
        Ok(ExplOutcome { chosen, points: self.points.clone(), means, rejected, selection: self.selection.clone(), pulls: self.taken })
    }
}

/// Runs an exploration directly against an environment, one sample per
/// round starting at `start_round`.
pub fn run_exploration(
    mut e: Exploration,
    env: &dyn Environment,
    r: f64,
    seed: u64,
    start_round: u64,
) -> Result<ExplOutcome, MetricError> {
    let mut round = start_round;
    while let Some(x) = e.next_point() {
        let y = env.sample(seed, round, x);
        e.record(y);
        round += 1;
    }
    e.finish(env.space().as_ref(), r)
}

/// EXPL(k, n, r) on an environment.
pub fn expl(env: &dyn Environment, k: usize, n: u64, r: f64, seed: u64) -> Result<ExplOutcome, MetricError> {
    let e = Exploration::ordering(env.space().as_ref(), k, n);
    run_exploration(e, env, r, seed, 1)
}

/// EXPL′(k, n, r) on an environment.
pub fn expl_prime(env: &dyn Environment, k: usize, n: u64, r: f64, seed: u64) -> Result<ExplOutcome, MetricError> {
    let e = Exploration::rank(env.space().as_ref(), k, n)?;
    run_exploration(e, env, r, seed, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{FiniteSpace, Harmonic, SpaceRef};
    use std::sync::Arc;

    fn harmonic(n: usize) -> SpaceRef {
        Arc::new(Harmonic::new(n).unwrap())
    }

    fn filled(space: &dyn MetricSpace, e: &mut Exploration, mu: impl Fn(&Point) -> f64) {
        let _ = space;
        while let Some(x) = e.next_point().cloned() {
            e.record(mu(&x));
        }
    }

    #[test]
    fn budget_is_points_times_n() {
        let s = harmonic(50);
        let mut e = Exploration::ordering(s.as_ref(), 10, 7);
        assert!(e.budget() <= 70);
        assert_eq!(e.budget() % 7, 0);
        filled(s.as_ref(), &mut e, |_| 0.5);
        assert!(e.done());
        let out = e.finish(s.as_ref(), 0.1).unwrap();
        assert_eq!(out.pulls, e.budget());
        // Equal means: nobody loses.
        assert_eq!(out.rejected_count(), 0);
    }

    #[test]
    fn lower_point_beyond_slack_loses() {
        let s: SpaceRef = Arc::new(FiniteSpace::uniform(3, 1.0).unwrap().with_order(vec![2, 1, 0]).unwrap());
        let mut e = Exploration::ordering(s.as_ref(), 3, 1);
        let vals = [0.9, 0.1, 0.88];
        filled(s.as_ref(), &mut e, |p| vals[p.as_index().unwrap()]);
        let out = e.finish(s.as_ref(), 0.05).unwrap();
        let Selection::Ordering { delta } = out.selection else { panic!() };
        assert!(delta <= 1.0);
        assert_eq!(out.rejected, vec![false, true, false]);
        // Point 0 has the largest order key among survivors.
        assert_eq!(out.chosen, Point::Index(0));
    }

    #[test]
    fn chosen_lies_in_a_surviving_ball() {
        let s = harmonic(40);
        let mut e = Exploration::ordering(s.as_ref(), 8, 3);
        filled(s.as_ref(), &mut e, |p| 1.0 - s.dist(p, &Point::Index(3)));
        let out = e.finish(s.as_ref(), 0.01).unwrap();
        let Selection::Ordering { delta } = out.selection else { panic!() };
        let empirical_max = out.means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(out.points.iter().zip(&out.rejected).any(|(p, &l)| !l && s.dist(p, &out.chosen) <= delta));
        for (m, l) in out.means.iter().zip(&out.rejected) {
            if *m == empirical_max {
                assert!(!l);
            }
        }
    }

    #[test]
    fn rank_cover_includes_every_rank() {
        let s = harmonic(30);
        let c = rank_cover(s.as_ref(), 5).unwrap();
        assert!(c.iter().any(|(p, r)| *p == Point::Index(0) && *r == 1));
        assert!(c.iter().filter(|(_, r)| *r == 0).count() <= 5);
    }

    #[test]
    fn rank_selection_prefers_limit_point() {
        let s = harmonic(30);
        let mut e = Exploration::rank(s.as_ref(), 5, 2).unwrap();
        filled(s.as_ref(), &mut e, |_| 0.5);
        assert_eq!(e.finish(s.as_ref(), 0.1).unwrap().chosen, Point::Index(0));
        // Strictly separated means: only the best survives.
        let mut e = Exploration::rank(s.as_ref(), 5, 2).unwrap();
        filled(s.as_ref(), &mut e, |p| if *p == Point::Index(1) { 0.9 } else { 0.1 });
        assert_eq!(e.finish(s.as_ref(), 0.1).unwrap().chosen, Point::Index(1));
    }
}
