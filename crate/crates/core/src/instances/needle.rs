//! Needle instances induced by ends of a ball-tree.
//!
//! The bandit needle has µ = 1/3 + (1/3) Σ F_w over the nodes w of one
//! lineage (root excluded). The experts needle draws a sign σ(w) for
//! every tree node each round, biased toward +1 on the lineage, and
//! realizes π = 1/2 + (1/3) Σ σ(w) F_w over all nodes.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Environment, InstanceError, Noise};
use crate::metric::{Ball, BallTree, MetricSpace, Point, SpaceRef};
use crate::rng::{self, purpose};

pub const DEFAULT_TRUNCATION: usize = 12;

/// min(r0 − D(x, x0), r0/2) inside the open ball B(x0, r0), else 0.
pub fn bump(space: &dyn MetricSpace, center: &Point, radius: f64, x: &Point) -> f64 {
    let d = space.dist(center, x);
    if d < radius {
        (radius - d).min(radius / 2.0)
    } else {
        0.0
    }
}

/// Walks down from the root picking a seeded child per node. Stops early
/// where the tree cannot be extended.
fn sample_lineage(tree: &BallTree, depth: usize, seed: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(depth);
    let mut node = tree.root();
    for _ in 0..depth {
        let kids = match tree.children(node) {
            Ok(k) if !k.is_empty() => k,
            _ => break,
        };
        let u = rng::uniform(&[seed, purpose::LINEAGE, rng::path_key(&tree.node(node).path)]);
        node = kids[((u * kids.len() as f64) as usize).min(kids.len() - 1)];
        out.push(node);
    }
    out
}

fn check_lineage(tree: &BallTree, lineage: &[usize]) -> Result<(), InstanceError> {
    let mut parent = tree.root();
    for &id in lineage {
        if !tree.children(parent)?.contains(&id) {
            return Err(InstanceError::Invalid(format!("node {id} is not a child of {parent}")));
        }
        parent = id;
    }
    Ok(())
}

fn ball_sum(space: &dyn MetricSpace, nodes: &[(Point, f64)], weights: impl Fn(usize) -> f64, x: &Point) -> f64 {
    let mut s = 0.0;
    for (i, (c, r)) in nodes.iter().enumerate() {
        let f = bump(space, c, *r, x);
        if f == 0.0 {
            // Balls along a lineage are nested.
            break;
        }
        s += weights(i) * f;
    }
    s
}

#[derive(Debug)]
pub struct BanditNeedle {
    tree: Arc<BallTree>,
    lineage: Vec<usize>,
    nodes: Vec<(Point, f64)>,
    noise: Noise,
}

impl BanditNeedle {
    /// Lineage sampled from `seed`, truncated at `depth` levels.
    pub fn sampled(tree: Arc<BallTree>, depth: usize, seed: u64) -> Self {
        let lineage = sample_lineage(&tree, depth, seed);
        Self::build(tree, lineage)
    }

    pub fn with_lineage(tree: Arc<BallTree>, lineage: Vec<usize>) -> Result<Self, InstanceError> {
        check_lineage(&tree, &lineage)?;
        Ok(Self::build(tree, lineage))
    }

    fn build(tree: Arc<BallTree>, lineage: Vec<usize>) -> Self {
        let nodes = lineage.iter().map(|&id| {
            let n = tree.node(id);
            (n.center, n.radius)
        }).collect();
        BanditNeedle { tree, lineage, nodes, noise: Noise::Bernoulli }
    }

    pub fn tree(&self) -> &Arc<BallTree> {
        &self.tree
    }

    pub fn lineage(&self) -> &[usize] {
        &self.lineage
    }
}

impl Environment for BanditNeedle {
    fn space(&self) -> &SpaceRef {
        self.tree.space()
    }

    fn name(&self) -> String {
        format!("bandit needle (depth {}) on {}", self.lineage.len(), self.space().name())
    }

    fn mu(&self, x: &Point) -> f64 {
        1.0 / 3.0 + ball_sum(self.space().as_ref(), &self.nodes, |_| 1.0, x) / 3.0
    }

    fn mu_star(&self) -> f64 {
        1.0 / 3.0 + self.nodes.iter().map(|n| n.1).sum::<f64>() / 6.0
    }

    fn optimum(&self) -> Option<Point> {
        Some(self.nodes.last().map_or_else(|| self.tree.node(self.tree.root()).center, |n| n.0.clone()))
    }

    fn sample(&self, seed: u64, round: u64, x: &Point) -> f64 {
        self.noise.draw(self.mu(x), &[seed, round, purpose::REWARD, x.key()])
    }

    /// Deeper terms sum to at most (1/3)(r_L/2)(1/4 + 1/16 + ...).
    fn truncation_error(&self) -> f64 {
        let r = self.nodes.last().map_or(self.tree.node(self.tree.root()).radius, |n| n.1);
        r / 18.0
    }

    fn noise(&self) -> Option<&Noise> {
        Some(&self.noise)
    }

    fn focus(&self) -> Vec<Ball> {
        self.nodes.iter().map(|(c, r)| Ball::open(c.clone(), *r)).collect()
    }
}

/// Bias δ_i of the lineage sign at depth i ≥ 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BiasSchedule {
    Constant { value: f64 },
    /// δ_i = 2^{−i/2}.
    HalfPowers,
    /// Per-depth values; the last repeats.
    Explicit { values: Vec<f64> },
    /// δ_i = n_i^{−1/2} with n_i the least integer such that
    /// n^gamma < r_i √n / (24 i) for all n > n_i, for growth g(n) = n^gamma.
    /// r_i is the lineage radius at depth i.
    Growth { gamma: f64 },
}

impl BiasSchedule {
    pub fn delta(&self, depth: usize, radius: f64) -> f64 {
        match self {
            BiasSchedule::Constant { value } => *value,
            BiasSchedule::HalfPowers => 2f64.powf(-(depth as f64) / 2.0),
            BiasSchedule::Explicit { values } => values[(depth - 1).min(values.len() - 1)],
            BiasSchedule::Growth { gamma } => {
                // n^{γ−1/2} < r/(24 i) ⇔ n > (24 i / r)^{1/(1/2−γ)}.
                let n = (24.0 * depth as f64 / radius).powf(1.0 / (0.5 - gamma)).ceil();
                n.powf(-0.5)
            }
        }
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        let ok = match self {
            BiasSchedule::Constant { value } => (0.0..=1.0).contains(value),
            BiasSchedule::HalfPowers => true,
            BiasSchedule::Explicit { values } => !values.is_empty() && values.iter().all(|v| (0.0..=1.0).contains(v)),
            BiasSchedule::Growth { gamma } => (0.0..0.5).contains(gamma),
        };
        if ok {
            Ok(())
        } else {
            Err(InstanceError::Invalid(format!("bad bias schedule {self:?}")))
        }
    }
}

#[derive(Debug)]
pub struct ExpertsNeedle {
    tree: Arc<BallTree>,
    lineage: Vec<usize>,
    nodes: Vec<(Point, f64)>,
    deltas: Vec<f64>,
    depth: usize,
}

impl ExpertsNeedle {
    pub fn sampled(tree: Arc<BallTree>, schedule: &BiasSchedule, depth: usize, seed: u64) -> Result<Self, InstanceError> {
        let lineage = sample_lineage(&tree, depth, seed);
        Self::build(tree, lineage, schedule, depth)
    }

    pub fn with_lineage(tree: Arc<BallTree>, lineage: Vec<usize>, schedule: &BiasSchedule, depth: usize) -> Result<Self, InstanceError> {
        check_lineage(&tree, &lineage)?;
        Self::build(tree, lineage, schedule, depth)
    }

    fn build(tree: Arc<BallTree>, lineage: Vec<usize>, schedule: &BiasSchedule, depth: usize) -> Result<Self, InstanceError> {
        schedule.validate()?;
        let nodes: Vec<(Point, f64)> = lineage.iter().map(|&id| {
            let n = tree.node(id);
            (n.center, n.radius)
        }).collect();
        let deltas = nodes.iter().enumerate().map(|(i, n)| schedule.delta(i + 1, n.1)).collect();
        let depth = depth.max(lineage.len());
        Ok(ExpertsNeedle { tree, lineage, nodes, deltas, depth })
    }

    pub fn tree(&self) -> &Arc<BallTree> {
        &self.tree
    }

    pub fn lineage(&self) -> &[usize] {
        &self.lineage
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    /// The realized payoff function of one round, as a closure over the
    /// round's sign pattern.
    pub fn realized(&self, seed: u64, round: u64) -> impl Fn(&Point) -> f64 + '_ {
        move |x| self.sample(seed, round, x)
    }
}

impl Environment for ExpertsNeedle {
    fn space(&self) -> &SpaceRef {
        self.tree.space()
    }

    fn name(&self) -> String {
        format!("experts needle (depth {}) on {}", self.lineage.len(), self.space().name())
    }

    fn mu(&self, x: &Point) -> f64 {
        0.5 + ball_sum(self.space().as_ref(), &self.nodes, |i| self.deltas[i], x) / 3.0
    }

    fn mu_star(&self) -> f64 {
        0.5 + self.nodes.iter().zip(&self.deltas).map(|(n, d)| n.1 * d).sum::<f64>() / 6.0
    }

    fn optimum(&self) -> Option<Point> {
        Some(self.nodes.last().map_or_else(|| self.tree.node(self.tree.root()).center, |n| n.0.clone()))
    }

    /// Signs are keyed by (run seed, round, node path), so every query of
    /// one round sees the same sign pattern.
    fn sample(&self, seed: u64, round: u64, x: &Point) -> f64 {
        let space = self.space().as_ref();
        let mut node = self.tree.root();
        let mut sum = 0.0;
        for depth in 1..=self.depth {
            let kids = match self.tree.children(node) {
                Ok(k) => k,
                Err(_) => break,
            };
            let hit = kids.iter().map(|&k| (k, self.tree.node(k))).find(|(_, n)| space.dist(&n.center, x) < n.radius);
            let Some((id, n)) = hit else { break };
            let on_lineage = self.lineage.get(depth - 1) == Some(&id);
            let p_plus = if on_lineage { (1.0 + self.deltas[depth - 1]) / 2.0 } else { 0.5 };
            let u = rng::uniform(&[seed, round, purpose::SIGN, rng::path_key(&n.path)]);
            let sign = if u < p_plus { 1.0 } else { -1.0 };
            sum += sign * bump(space, &n.center, n.radius, x);
            node = id;
        }
        0.5 + sum / 3.0
    }

    fn truncation_error(&self) -> f64 {
        let r = self.nodes.last().map_or(self.tree.node(self.tree.root()).radius, |n| n.1);
        r / 18.0
    }

    fn correlated(&self) -> bool {
        true
    }

    fn focus(&self) -> Vec<Ball> {
        self.nodes.iter().map(|(c, r)| Ball::open(c.clone(), *r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{build_ball_tree_binary, Interval};

    fn line() -> SpaceRef {
        Arc::new(Interval::new(1.0).unwrap())
    }

    fn chain(levels: usize) -> Arc<BallTree> {
        let nodes = (1..=levels).map(|i| (i - 1, Point::Real1D(0.5), 4f64.powi(-(i as i32)))).collect();
        Arc::new(BallTree::from_explicit(line(), (Point::Real1D(0.5), 1.0), nodes).unwrap())
    }

    #[test]
    fn bump_values() {
        let s = Interval::new(1.0).unwrap();
        let c = Point::Real1D(0.5);
        assert!((bump(&s, &c, 0.4, &Point::Real1D(0.6)) - 0.2).abs() < 1e-15);
        assert_eq!(bump(&s, &c, 0.4, &Point::Real1D(0.95)), 0.0);
        assert_eq!(bump(&s, &c, 0.4, &c), 0.2);
    }

    #[test]
    fn chain_needle_peak_is_seven_eighteenths() {
        let tree = chain(10);
        let env = BanditNeedle::with_lineage(tree.clone(), (1..=10).collect()).unwrap();
        let v = env.mu(&Point::Real1D(0.5));
        assert!((v - 7.0 / 18.0).abs() <= env.truncation_error() + 1e-15);
        assert!((v - 7.0 / 18.0).abs() < 4f64.powi(-10) / 9.0);
        assert_eq!(env.mu_star(), v);
    }

    #[test]
    fn root_only_needle_is_one_third() {
        let env = BanditNeedle::with_lineage(chain(3), vec![]).unwrap();
        assert_eq!(env.mu(&Point::Real1D(0.5)), 1.0 / 3.0);
    }

    #[test]
    fn lineage_must_follow_tree() {
        assert!(BanditNeedle::with_lineage(chain(3), vec![2]).is_err());
    }

    #[test]
    fn experts_needle_unbiased_mean_is_half() {
        let tree = Arc::new(build_ball_tree_binary(line(), 4).unwrap());
        let env = ExpertsNeedle::sampled(tree, &BiasSchedule::Constant { value: 0.0 }, 4, 3).unwrap();
        let x = env.optimum().unwrap();
        let n = 20_000;
        let vals: Vec<f64> = (0..n).map(|t| env.sample(1, t, &x)).collect();
        let m = vals.iter().sum::<f64>() / n as f64;
        let sd = (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt();
        assert!((m - 0.5).abs() <= 3.0 * sd / (n as f64).sqrt() + 1e-12);
    }

    #[test]
    fn experts_needle_full_bias_one_level() {
        let tree = Arc::new(build_ball_tree_binary(line(), 1).unwrap());
        let env = ExpertsNeedle::sampled(tree, &BiasSchedule::Constant { value: 1.0 }, 1, 7).unwrap();
        let x = env.optimum().unwrap();
        let r1 = env.tree().node(env.lineage()[0]).radius;
        assert!((env.mu(&x) - (0.5 + r1 / 6.0)).abs() < 1e-15);
        // With δ = 1 the lineage sign is always +1.
        for t in 0..100 {
            assert!((env.sample(2, t, &x) - env.mu(&x)).abs() < 1e-15);
        }
    }
}
