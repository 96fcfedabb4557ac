//! The zooming algorithm and its activation-restricted variants.
//!
//! Each phase i lasts 2^i rounds and starts with no active arms. Every
//! round at most one uncovered eligible arm is activated (the covering
//! oracle's witness), then the active arm of largest index
//! estimate + m·radius is played, ties to the earliest activation.
//!
//! Coverage can only break inside the old confidence ball of the arm just
//! played, so each candidate set keeps a list of windows that may hold
//! uncovered points and searches only those.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::radius::{ArmStats, Estimator, RadiusPolicy};
use crate::algorithm::{Action, Algorithm, Event, Feedback};
use crate::instances::InstanceError;
use crate::metric::{Ball, Decomposition, MetricSpace, Point, Region, SpaceRef};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoomingConfig {
    #[serde(default = "standard")]
    pub policy: RadiusPolicy,
    /// Index multiplier m in estimate + m·radius.
    #[serde(default)]
    pub multiplier: Option<f64>,
    /// Log every arm update (needed by the clean-run audits).
    #[serde(default)]
    pub audit: bool,
}

fn standard() -> RadiusPolicy {
    RadiusPolicy::Standard
}

impl Default for ZoomingConfig {
    fn default() -> Self {
        ZoomingConfig { policy: RadiusPolicy::Standard, multiplier: None, audit: false }
    }
}

/// Quotas over a finite decomposition: per layer, at most ⌊ρ^{−d}⌋
/// quota-bound active arms with radius ≥ ρ = T^{−1/(d+2)}.
#[derive(Debug, Clone)]
pub struct QuotaConfig {
    pub decomposition: Arc<Decomposition>,
    pub d: f64,
}

impl QuotaConfig {
    pub fn rho(&self, length: u64) -> f64 {
        (length as f64).powf(-1.0 / (self.d + 2.0))
    }

    pub fn limit(&self, length: u64) -> usize {
        (length as f64).powf(self.d / (self.d + 2.0)).floor() as usize
    }
}

#[derive(Debug, Clone)]
pub enum Variant {
    Plain,
    /// Zooming with quotas on every stratum S_i ∖ S_{i+1}.
    Quota(QuotaConfig),
    /// Per-metric optimal: eligible arms are a net N plus the target
    /// layer S_λ while its quota allows.
    PerMetric(QuotaConfig),
}

/// Whether an activation keeps every layer count within its quota.
pub fn quota_filter(counts: &[usize], layer: usize, limit: usize) -> bool {
    counts.get(layer).is_none_or(|&c| c < limit)
}

/// ε* = 6·max(ε0, 4·T^{−1/(d+2)}·sqrt(ln T)).
pub fn pmo_epsilon(eps0: f64, length: u64, d: f64) -> f64 {
    let t = length as f64;
    6.0 * eps0.max(4.0 * t.powf(-1.0 / (d + 2.0)) * t.ln().sqrt())
}

/// Largest layer meeting the closed ε-neighborhood of `anchors`; `None`
/// when there are no anchors.
pub fn pmo_target(decomposition: &Decomposition, anchors: &[Point], epsilon: f64) -> Option<usize> {
    if anchors.is_empty() {
        return None;
    }
    let space = decomposition.space();
    let hit = (0..decomposition.len()).rev().find(|&l| {
        anchors.iter().any(|a| space.region_meets_ball(decomposition.layer(l), &Ball::closed(a.clone(), epsilon)))
    });
    Some(hit.unwrap_or(0))
}

/// Greedy ε0-net with fewer than `bound` points for the smallest dyadic ε0
/// at or above the grid resolution. Empty with ε0 = 1 when even ε = 1/2
/// needs too many points.
pub fn pmo_net(space: &dyn MetricSpace, bound: f64) -> (f64, Vec<Point>) {
    let max_points = (bound.ceil() as usize).saturating_sub(1);
    let mut best = (1.0, vec![]);
    if max_points == 0 {
        return best;
    }
    let mut eps = 0.5;
    while eps >= space.eta() {
        let (pts, done) = space.net_points(eps, max_points, None);
        if !done || pts.len() > max_points {
            break;
        }
        best = (eps, pts);
        eps /= 2.0;
    }
    best
}

#[derive(Debug, Clone)]
struct Arm {
    point: Point,
    stats: ArmStats,
    estimate: f64,
    radius: f64,
    index: f64,
    layer: usize,
    /// Counted against a quota while its radius is at least ρ.
    bound: bool,
}

#[derive(Debug, Clone)]
enum Source {
    Region { region: Region, layer: usize },
    Net,
}

#[derive(Debug, Clone)]
struct Candidates {
    source: Source,
    /// Balls that may contain uncovered points; `None` is the whole space.
    windows: Vec<Option<Ball>>,
    stale: bool,
}

#[derive(Debug)]
pub struct Zooming {
    space: SpaceRef,
    estimator: Estimator,
    multiplier: f64,
    audit: bool,
    variant: Variant,
    metric: bool,
    phase: u32,
    length: u64,
    ends_at: u64,
    arms: Vec<Arm>,
    sources: Vec<Candidates>,
    counts: Vec<usize>,
    limit: usize,
    rho: f64,
    net: Vec<Point>,
    eps0: f64,
    target: usize,
    pending: usize,
    events: Vec<Event>,
}

impl Zooming {
    pub fn new(space: SpaceRef, config: &ZoomingConfig, variant: Variant) -> Result<Self, InstanceError> {
        let estimator = config.policy.estimator()?;
        let default_m = if matches!(variant, Variant::PerMetric(_)) { 3.0 } else { 2.0 };
        let multiplier = config.multiplier.unwrap_or(default_m);
        if !(multiplier > 0.0) {
            return Err(InstanceError::Invalid(format!("index multiplier must be positive, got {multiplier}")));
        }
        if let Variant::Quota(q) | Variant::PerMetric(q) = &variant {
            if !(q.d > 0.0) {
                return Err(InstanceError::Invalid(format!("quota exponent must be positive, got {}", q.d)));
            }
        }
        let metric = !space.is_quasimetric();
        Ok(Zooming {
            space,
            estimator,
            multiplier,
            audit: config.audit,
            variant,
            metric,
            phase: 0,
            length: 0,
            ends_at: 0,
            arms: vec![],
            sources: vec![],
            counts: vec![],
            limit: usize::MAX,
            rho: 0.0,
            net: vec![],
            eps0: 1.0,
            target: 0,
            pending: 0,
            events: vec![],
        })
    }

    pub fn plain(space: SpaceRef, config: &ZoomingConfig) -> Result<Self, InstanceError> {
        Self::new(space, config, Variant::Plain)
    }

    pub fn phase(&self) -> u32 {
        self.phase
    }

    pub fn target(&self) -> usize {
        self.target
    }

    fn end_phase(&mut self, round: u64) {
        let Variant::PerMetric(q) = &self.variant else { return };
        let eps = pmo_epsilon(self.eps0, self.length, q.d);
        let anchors: Vec<Point> = self.arms.iter().filter(|a| a.radius < eps).map(|a| a.point.clone()).collect();
        let target = pmo_target(&q.decomposition, &anchors, eps);
        self.target = target.unwrap_or(0);
        self.events.push(Event::Target { round, epsilon: eps, epsilon0: self.eps0, layer: self.target, empty: target.is_none() });
    }

    fn start_phase(&mut self, round: u64) {
        if self.phase > 0 {
            self.end_phase(round);
        }
        self.phase += 1;
        self.length = 1u64 << self.phase.min(62);
        self.ends_at = round + self.length - 1;
        self.arms.clear();
        self.events.push(Event::PhaseStart { round, phase: self.phase, length: self.length });
        let fresh = |source| Candidates { source, windows: vec![None], stale: false };
        match &self.variant {
            Variant::Plain => {
                self.sources = vec![fresh(Source::Region { region: Region::All, layer: 0 })];
                self.counts = vec![];
            }
            Variant::Quota(q) => {
                let dec = &q.decomposition;
                self.sources = (0..dec.len())
                    .map(|i| fresh(Source::Region { region: dec.stratum(i).expect("decomposition strata"), layer: i }))
                    .collect();
                self.counts = vec![0; dec.len()];
                self.rho = q.rho(self.length);
                self.limit = q.limit(self.length);
            }
            Variant::PerMetric(q) => {
                let bound = (self.length as f64).powf(q.d / (q.d + 2.0));
                let (eps0, net) = pmo_net(self.space.as_ref(), bound);
                self.events.push(Event::Mesh { round, delta: eps0, size: net.len() });
                self.eps0 = eps0;
                self.net = net;
                let layer = q.decomposition.layer(self.target).clone();
                self.sources = vec![fresh(Source::Net), fresh(Source::Region { region: layer, layer: self.target })];
                self.counts = vec![0];
                self.rho = q.rho(self.length);
                self.limit = q.limit(self.length);
            }
        }
    }

    fn eligible(&self, s: &Source) -> bool {
        match (&self.variant, s) {
            (Variant::Plain, _) | (_, Source::Net) => true,
            (Variant::Quota(_), Source::Region { layer, .. }) => quota_filter(&self.counts, *layer, self.limit),
            (Variant::PerMetric(_), Source::Region { .. }) => quota_filter(&self.counts, 0, self.limit),
        }
    }

    fn ball(a: &Arm) -> Ball {
        Ball::open(a.point.clone(), a.radius)
    }

    fn balls_near(&self, window: Option<&Ball>) -> Vec<Ball> {
        match window {
            Some(w) if self.metric && w.radius.is_finite() => self
                .arms
                .iter()
                .filter(|a| self.space.dist(&a.point, &w.center) < a.radius + w.radius)
                .map(Self::ball)
                .collect(),
            _ => self.arms.iter().map(Self::ball).collect(),
        }
    }

    fn search(&self, s: &Source, window: Option<&Ball>) -> Option<Point> {
        let balls = self.balls_near(window);
        match s {
            Source::Region { region, .. } => self.space.find_uncovered(&balls, region, window),
            Source::Net => self
                .net
                .iter()
                .filter(|p| window.is_none_or(|w| w.contains(self.space.as_ref(), p)))
                .find(|p| !balls.iter().any(|b| b.contains(self.space.as_ref(), p)))
                .cloned(),
        }
    }

    fn activation_step(&mut self, round: u64) {
        for k in 0..self.sources.len() {
            if !self.eligible(&self.sources[k].source) {
                let c = &mut self.sources[k];
                c.windows.clear();
                c.stale = true;
                continue;
            }
            if self.sources[k].stale {
                self.sources[k].windows = vec![None];
                self.sources[k].stale = false;
            }
            while let Some(w) = self.sources[k].windows.last().cloned() {
                let source = self.sources[k].source.clone();
                if let Some(x) = self.search(&source, w.as_ref()) {
                    self.activate(round, x, &source);
                    return;
                }
                self.sources[k].windows.pop();
            }
        }
    }

    fn activate(&mut self, round: u64, point: Point, source: &Source) {
        let stats = self.estimator.policy().new_stats();
        let (estimate, radius) = self.estimator.estimate(&stats, self.phase, self.length);
        let (layer, bound) = match (&self.variant, source) {
            (Variant::Plain, _) => (0, false),
            (Variant::Quota(q), _) => (q.decomposition.depth(&point), true),
            (Variant::PerMetric(q), Source::Region { .. }) => (q.decomposition.depth(&point), !self.net.contains(&point)),
            (Variant::PerMetric(q), Source::Net) => {
                // Net points inside the target layer are exempt from its quota.
                (q.decomposition.depth(&point), false)
            }
        };
        let bound = bound && radius >= self.rho;
        let arm = self.arms.len();
        self.events.push(Event::Activate { round, phase: self.phase, arm, point: point.clone(), radius });
        if bound {
            let slot = if matches!(self.variant, Variant::PerMetric(_)) { 0 } else { layer };
            self.counts[slot] += 1;
            self.events.push(Event::Quota { round, layer: slot, count: self.counts[slot], limit: self.limit });
        }
        let index = estimate + self.multiplier * radius;
        self.arms.push(Arm { point, stats, estimate, radius, index, layer, bound });
    }

    fn select(&self) -> usize {
        let mut best = 0;
        for (i, a) in self.arms.iter().enumerate().skip(1) {
            if a.index > self.arms[best].index {
                best = i;
            }
        }
        best
    }
}

impl Algorithm for Zooming {
    fn name(&self) -> String {
        let v = match self.variant {
            Variant::Plain => "zooming",
            Variant::Quota(_) => "zooming-quota",
            Variant::PerMetric(_) => "per-metric",
        };
        format!("{v}({})", self.estimator.policy().name())
    }

    fn act(&mut self, round: u64) -> Action {
        if round > self.ends_at {
            self.start_phase(round);
        }
        self.activation_step(round);
        assert!(!self.arms.is_empty(), "no eligible arm to activate");
        self.pending = self.select();
        Action::play(self.arms[self.pending].point.clone())
    }

    fn observe(&mut self, round: u64, fb: &Feedback) {
        let (phase, length, m, rho) = (self.phase, self.length, self.multiplier, self.rho);
        let a = &mut self.arms[self.pending];
        let pre = a.radius;
        a.stats.push(fb.reward);
        let (estimate, radius) = self.estimator.estimate(&a.stats, phase, length);
        a.estimate = estimate;
        a.radius = radius;
        a.index = estimate + m * radius;
        if a.bound && radius < rho {
            a.bound = false;
            let slot = if matches!(self.variant, Variant::PerMetric(_)) { 0 } else { a.layer };
            self.counts[slot] -= 1;
        }
        if self.audit {
            self.events.push(Event::Update { round, arm: self.pending, n: a.stats.n, estimate, radius, pre_radius: pre });
        }
        if radius < pre {
            let w = Ball::open(a.point.clone(), pre);
            for c in self.sources.iter_mut().filter(|c| !c.stale) {
                c.windows.push(Some(w.clone()));
            }
        }
    }

    fn take_events(&mut self) -> Vec<Event> {
        std::mem::take(&mut self.events)
    }

    fn confidence_balls(&self) -> Vec<Ball> {
        self.arms.iter().map(Self::ball).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{Interval, Segment, TreeSpace};

    fn line() -> SpaceRef {
        Arc::new(Interval::new(1.0).unwrap())
    }

    fn feed(z: &mut Zooming, rounds: u64, mu: impl Fn(f64) -> f64) -> Vec<Point> {
        let mut played = vec![];
        for t in 1..=rounds {
            let a = z.act(t);
            let r = mu(a.play.as_real().unwrap());
            z.observe(t, &Feedback { reward: r, peeks: vec![] });
            played.push(a.play);
        }
        played
    }

    #[test]
    fn first_round_activates_and_plays() {
        let mut z = Zooming::plain(line(), &ZoomingConfig::default()).unwrap();
        let a = z.act(1);
        let ev = z.take_events();
        assert!(matches!(ev[0], Event::PhaseStart { phase: 1, length: 2, .. }));
        assert!(matches!(&ev[1], Event::Activate { arm: 0, point, .. } if *point == a.play));
    }

    #[test]
    fn coverage_holds_after_every_activation_step() {
        let mut z = Zooming::plain(line(), &ZoomingConfig::default()).unwrap();
        let s = line();
        for t in 1..=600u64 {
            let a = z.act(t);
            let balls = z.confidence_balls();
            assert_eq!(s.find_uncovered(&balls, &Region::All, None), None, "round {t}");
            let x = a.play.as_real().unwrap();
            z.observe(t, &Feedback { reward: if (t * 7919) % 3 == 0 { 1.0 } else { (1.0 - x).max(0.0) }, peeks: vec![] });
        }
    }

    #[test]
    fn ties_go_to_earliest_activation() {
        let mut z = Zooming::plain(line(), &ZoomingConfig::default()).unwrap();
        z.start_phase(1);
        let src = Source::Region { region: Region::All, layer: 0 };
        z.activate(1, Point::Real1D(0.2), &src);
        z.activate(1, Point::Real1D(0.8), &src);
        assert_eq!(z.select(), 0);
        z.arms[1].index = 2.5;
        z.arms[0].index = 2.4;
        assert_eq!(z.select(), 1);
    }

    #[test]
    fn phases_reset_and_double() {
        let mut z = Zooming::plain(line(), &ZoomingConfig::default()).unwrap();
        feed(&mut z, 14, |x| 1.0 - x);
        let starts: Vec<(u64, u64)> = z
            .take_events()
            .into_iter()
            .filter_map(|e| match e {
                Event::PhaseStart { round, length, .. } => Some((round, length)),
                _ => None,
            })
            .collect();
        assert_eq!(starts, vec![(1, 2), (3, 4), (7, 8)]);
    }

    #[test]
    fn concentrates_near_the_peak_with_exact_rewards() {
        let mut z = Zooming::plain(line(), &ZoomingConfig::default()).unwrap();
        let played = feed(&mut z, 4000, |x| 0.9 - (x - 0.3).abs());
        let late = &played[3000..];
        // Uniform play would lose 0.29 per round on average.
        let gap = late.iter().map(|p| (p.as_real().unwrap() - 0.3).abs()).sum::<f64>() / late.len() as f64;
        assert!(gap < 0.12, "{gap}");
    }

    #[test]
    fn quota_filter_cases() {
        assert!(quota_filter(&[0, 0], 0, 3));
        assert!(!quota_filter(&[3, 0], 0, 3));
        assert!(quota_filter(&[3, 0], 1, 3));
    }

    #[test]
    fn quota_counts_never_exceed_limit() {
        let space: SpaceRef = Arc::new(TreeSpace::fat_subtree(0.5));
        let dec = Arc::new(Decomposition::new(space.clone(), vec![Region::All, Region::FatSubtree], 1.0).unwrap());
        let q = QuotaConfig { decomposition: dec, d: 1.25 };
        let mut z = Zooming::new(space, &ZoomingConfig::default(), Variant::Quota(q)).unwrap();
        for t in 1..=2000u64 {
            z.act(t);
            z.observe(t, &Feedback { reward: ((t * 31) % 7) as f64 / 7.0, peeks: vec![] });
            for e in z.take_events() {
                if let Event::Quota { count, limit, .. } = e {
                    assert!(count <= limit);
                }
            }
        }
    }

    #[test]
    fn pmo_target_cases() {
        let s = line();
        let single = Decomposition::trivial(s.clone(), 1.0);
        assert_eq!(pmo_target(&single, &[Point::Real1D(0.5)], 0.1), Some(0));
        let dec = Decomposition::new(s, vec![Region::All, Region::Segments(vec![Segment::closed(0.6, 0.8)])], 1.0).unwrap();
        assert_eq!(pmo_target(&dec, &[Point::Real1D(0.7)], 0.01), Some(1));
        assert_eq!(pmo_target(&dec, &[Point::Real1D(0.2)], 0.01), Some(0));
        assert_eq!(pmo_target(&dec, &[], 0.01), None);
    }

    #[test]
    fn pmo_net_shrinks_with_horizon() {
        let s = line();
        let mut last = f64::INFINITY;
        for t in [16u64, 256, 4096, 65536] {
            let (eps, net) = pmo_net(s.as_ref(), (t as f64).powf(0.5));
            assert!((net.len() as f64) < (t as f64).powf(0.5));
            assert!(eps <= last);
            last = eps;
        }
    }

    #[test]
    fn per_metric_runs_and_logs_targets() {
        let s = line();
        let dec = Arc::new(Decomposition::new(s.clone(), vec![Region::All, Region::Segments(vec![Segment::closed(0.6, 0.8)])], 1.0).unwrap());
        let q = QuotaConfig { decomposition: dec, d: 1.0 };
        let mut z = Zooming::new(s, &ZoomingConfig::default(), Variant::PerMetric(q)).unwrap();
        feed(&mut z, 500, |x| 0.9 - (x - 0.7).abs());
        let targets = z.take_events().into_iter().filter(|e| matches!(e, Event::Target { .. })).count();
        assert_eq!(targets, 7);
    }
}
