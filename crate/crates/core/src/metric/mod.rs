//! Metric spaces, balls, nets and the oracles the algorithms consume.
//!
//! A space is any type implementing [`MetricSpace`]. Built-ins cover the
//! unit interval with a power metric, the unit cube under a powered
//! sup-norm, rooted trees with geometric widths, finite spaces, the
//! harmonic sequence {1, 1/2, ...} ∪ {0}, and quasi-distance transforms.
//!
//! Continuous spaces work on floats exactly: a returned uncovered witness
//! is re-checked with the distance function, and "covered" means no
//! representable point is uncovered. Reports still carry a grid
//! resolution `eta` used for probes and meshes.

mod balltree;
mod covering;
mod cube;
mod decomposition;
mod finite;
mod interval;
mod quasi;
mod shape;
mod spec;
mod tree;

pub use balltree::{build_ball_tree_binary, build_ball_tree_strength, build_ball_tree_strength_at, BallTree, TreeNode};
pub use covering::{covering_number, packing_number, CountMode};
pub use cube::Cube;
pub use decomposition::Decomposition;
pub use finite::{FiniteSpace, Harmonic};
pub use interval::Interval;
pub use quasi::QuasiSpace;
pub use shape::Shape;
pub use spec::SpaceSpec;
pub use tree::{Branching, TreeSpace};

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Shared handle to a space.
pub type SpaceRef = Arc<dyn MetricSpace>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("point kind mismatch: space holds {expected:?}, got {got:?}")]
    KindMismatch { expected: PointKind, got: PointKind },
    #[error("point outside the space: {0}")]
    OutOfSpace(String),
    #[error("greedy net exceeded cap {0}")]
    CapExceeded(usize),
    #[error("exact mode supports at most {max} points, got {got}")]
    TooLarge { max: usize, got: usize },
    #[error("space has no perfect subset near {0}")]
    PerfectnessViolated(String),
    #[error("strength unreachable at level {0}")]
    StrengthUnreachable(usize),
    #[error("ball-tree invalid: {0}")]
    InvalidTree(String),
    #[error("no covered point")]
    NoCoveredPoint,
    #[error("space has no {0} oracle")]
    Unsupported(&'static str),
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointKind {
    Real1D,
    RealVec,
    TreePath,
    Index,
}

/// A point of some space. Tree paths are end prefixes, read with an
/// implicit tail of zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Point {
    Real1D(f64),
    RealVec(Vec<f64>),
    TreePath(Vec<u32>),
    Index(usize),
}

impl Point {
    pub fn kind(&self) -> PointKind {
        match self {
            Point::Real1D(_) => PointKind::Real1D,
            Point::RealVec(_) => PointKind::RealVec,
            Point::TreePath(_) => PointKind::TreePath,
            Point::Index(_) => PointKind::Index,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Point::Real1D(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_index(&self) -> Option<usize> {
        match self {
            Point::Index(i) => Some(*i),
            _ => None,
        }
    }

    /// Stable 64-bit key used to key random streams.
    pub fn key(&self) -> u64 {
        match self {
            Point::Real1D(x) => crate::rng::mix(&[1, x.to_bits()]),
            Point::RealVec(v) => {
                let mut keys = vec![2];
                keys.extend(v.iter().map(|c| c.to_bits()));
                crate::rng::mix(&keys)
            }
            Point::TreePath(p) => {
                let trimmed = trim_zeros(p);
                crate::rng::mix(&[3, crate::rng::path_key(trimmed)])
            }
            Point::Index(i) => crate::rng::mix(&[4, *i as u64]),
        }
    }

    /// Lexicographic order used for tie-breaking.
    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        match (self, other) {
            (Point::Real1D(a), Point::Real1D(b)) => a.total_cmp(b),
            (Point::RealVec(a), Point::RealVec(b)) => {
                for (x, y) in a.iter().zip(b) {
                    match x.total_cmp(y) {
                        Ordering::Equal => continue,
                        o => return o,
                    }
                }
                a.len().cmp(&b.len())
            }
            (Point::TreePath(a), Point::TreePath(b)) => {
                let n = a.len().max(b.len());
                for i in 0..n {
                    let x = a.get(i).copied().unwrap_or(0);
                    let y = b.get(i).copied().unwrap_or(0);
                    match x.cmp(&y) {
                        Ordering::Equal => continue,
                        o => return o,
                    }
                }
                Ordering::Equal
            }
            (Point::Index(a), Point::Index(b)) => a.cmp(b),
            (a, b) => (a.kind() as u8).cmp(&(b.kind() as u8)),
        }
    }
}

pub(crate) fn trim_zeros(p: &[u32]) -> &[u32] {
    let end = p.iter().rposition(|&c| c != 0).map_or(0, |i| i + 1);
    &p[..end]
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Real1D(x) => write!(f, "{x}"),
            Point::RealVec(v) => write!(f, "{v:?}"),
            Point::TreePath(p) => write!(f, "path{:?}", trim_zeros(p)),
            Point::Index(i) => write!(f, "#{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
    pub closed: bool,
}

impl Ball {
    pub fn open(center: Point, radius: f64) -> Self {
        Ball { center, radius, closed: false }
    }

    pub fn closed(center: Point, radius: f64) -> Self {
        Ball { center, radius, closed: true }
    }

    pub fn contains(&self, space: &dyn MetricSpace, p: &Point) -> bool {
        let d = space.dist(&self.center, p);
        if self.closed {
            d <= self.radius
        } else {
            d < self.radius
        }
    }
}

/// A sub-interval of [0,1] with open/closed ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub lo_open: bool,
    #[serde(default)]
    pub hi_open: bool,
}

impl Segment {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Segment { lo, hi, lo_open: false, hi_open: false }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && (self.lo_open || self.hi_open))
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_open { x > self.lo } else { x >= self.lo };
        let below = if self.hi_open { x < self.hi } else { x <= self.hi };
        above && below
    }

    /// Smallest and largest floats inside, if any.
    pub fn float_bounds(&self) -> Option<(f64, f64)> {
        let lo = if self.lo_open { self.lo.next_up() } else { self.lo };
        let hi = if self.hi_open { self.hi.next_down() } else { self.hi };
        (lo <= hi).then_some((lo, hi))
    }

    fn minus(&self, b: &Segment) -> Vec<Segment> {
        let disjoint = b.is_empty()
            || b.hi < self.lo
            || b.lo > self.hi
            || (b.hi == self.lo && (b.hi_open || self.lo_open))
            || (b.lo == self.hi && (b.lo_open || self.hi_open));
        if disjoint {
            return vec![*self];
        }
        let mut out = Vec::new();
        let left = Segment { lo: self.lo, lo_open: self.lo_open, hi: b.lo, hi_open: !b.lo_open };
        if !left.is_empty() {
            out.push(left);
        }
        let right = Segment { lo: b.hi, lo_open: !b.hi_open, hi: self.hi, hi_open: self.hi_open };
        if !right.is_empty() {
            out.push(right);
        }
        out
    }
}

/// Region descriptors for decompositions. Each space supports the
/// variants that make sense for its point kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Region {
    All,
    Empty,
    /// Finite union of sub-intervals of [0,1].
    Segments(Vec<Segment>),
    /// Subset of a finite space.
    Indices(Vec<usize>),
    /// Ends that stay inside the fat subtree forever.
    FatSubtree,
    /// Ends that leave the fat subtree.
    ThinPart,
}

impl Region {
    /// Set difference `self ∖ other`, for the pairs the built-ins support.
    pub fn minus(&self, other: &Region, space: &dyn MetricSpace) -> Result<Region, MetricError> {
        use Region::*;
        Ok(match (self, other) {
            (_, Empty) => self.clone(),
            (Empty, _) | (_, All) => Empty,
            (All, b) => space.complement(b)?,
            (Segments(a), Segments(b)) => {
                let mut cur = a.clone();
                for s in b {
                    cur = cur.iter().flat_map(|x| x.minus(s)).collect();
                }
                if cur.is_empty() {
                    Empty
                } else {
                    Segments(cur)
                }
            }
            (Indices(a), Indices(b)) => {
                let rest: Vec<usize> = a.iter().copied().filter(|i| !b.contains(i)).collect();
                if rest.is_empty() {
                    Empty
                } else {
                    Indices(rest)
                }
            }
            (FatSubtree, ThinPart) => FatSubtree,
            (ThinPart, FatSubtree) => ThinPart,
            (FatSubtree, FatSubtree) | (ThinPart, ThinPart) => Empty,
            _ => return Err(MetricError::Unsupported("region difference")),
        })
    }
}

/// Outcome of the covering oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum Coverage {
    Covered,
    Uncovered(Point),
}

/// Analytic dimension metadata for built-in families.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalyticDims {
    pub covering: Option<f64>,
    pub max_min_covering: Option<f64>,
    pub log_covering: Option<f64>,
}

pub trait MetricSpace: Send + Sync + fmt::Debug {
    fn kind(&self) -> PointKind;
    fn name(&self) -> String;
    /// Distance without kind checks; see [`distance`] for the checked form.
    fn dist(&self, x: &Point, y: &Point) -> f64;
    fn diameter(&self) -> f64 {
        1.0
    }
    /// Grid resolution used by probes, meshes and "sup over X" claims.
    fn eta(&self) -> f64;
    fn is_quasimetric(&self) -> bool {
        false
    }
    fn validate_point(&self, p: &Point) -> Result<(), MetricError>;

    /// Region-restricted covering oracle. When `within` is given, only
    /// points of that ball are searched.
    fn find_uncovered(&self, balls: &[Ball], region: &Region, within: Option<&Ball>)
        -> Option<Point>;

    /// Greedy net at resolution `delta`, lowest point first, restricted to
    /// `within` when given. Returns at most `limit` points and whether the
    /// greedy process finished.
    fn net_points(&self, delta: f64, limit: usize, within: Option<&Ball>) -> (Vec<Point>, bool);

    /// Some point `y'` with `0 < D(y, y') < rho`, if one exists.
    fn sample_near(&self, y: &Point, rho: f64) -> Option<Point>;

    /// A uniformly random point of the η-grid.
    fn grid_point(&self, rng: &mut dyn rand::RngCore) -> Point;

    /// Evenly spread test points, roughly `size` of them.
    fn mesh(&self, size: usize) -> Vec<Point>;

    fn region_contains(&self, region: &Region, _p: &Point) -> bool {
        matches!(region, Region::All)
    }

    /// Whether the region meets the given (usually closed) ball.
    fn region_meets_ball(&self, region: &Region, ball: &Ball) -> bool {
        match region {
            Region::Empty => false,
            Region::All => true,
            _ => self.region_contains(region, &ball.center),
        }
    }

    fn complement(&self, region: &Region) -> Result<Region, MetricError> {
        match region {
            Region::All => Ok(Region::Empty),
            Region::Empty => Ok(Region::All),
            _ => Err(MetricError::Unsupported("region complement")),
        }
    }

    fn finite_points(&self) -> Option<Vec<Point>> {
        None
    }

    /// Position in the well-order (larger is ≻-greater), if declared.
    fn order_key(&self, _p: &Point) -> Option<u64> {
        None
    }

    /// Cantor-Bendixson rank, if declared.
    fn rank(&self, _p: &Point) -> Option<usize> {
        None
    }

    fn analytic_dims(&self) -> AnalyticDims {
        AnalyticDims::default()
    }
}

/// Checked distance.
pub fn distance(space: &dyn MetricSpace, x: &Point, y: &Point) -> Result<f64, MetricError> {
    for p in [x, y] {
        if p.kind() != space.kind() {
            return Err(MetricError::KindMismatch { expected: space.kind(), got: p.kind() });
        }
    }
    Ok(space.dist(x, y))
}

pub fn covering_oracle(space: &dyn MetricSpace, balls: &[Ball]) -> Coverage {
    match space.find_uncovered(balls, &Region::All, None) {
        Some(p) => Coverage::Uncovered(p),
        None => Coverage::Covered,
    }
}

pub fn greedy_net(space: &dyn MetricSpace, delta: f64, cap: usize) -> Result<Vec<Point>, MetricError> {
    if !(delta > 0.0) || cap == 0 {
        return Err(MetricError::Invalid(format!("greedy_net needs delta > 0 and cap ≥ 1 (delta={delta}, cap={cap})")));
    }
    let (pts, complete) = space.net_points(delta, cap + 1, None);
    if !complete || pts.len() > cap {
        return Err(MetricError::CapExceeded(cap));
    }
    Ok(pts)
}

/// Returns the ≺-maximal point covered by the union of the closed balls.
pub fn ordering_oracle(space: &dyn MetricSpace, balls: &[Ball]) -> Result<Point, MetricError> {
    let pts = space.finite_points().ok_or(MetricError::Unsupported("ordering"))?;
    let mut best: Option<(u64, Point)> = None;
    for p in pts {
        let covered = balls.iter().any(|b| space.dist(&b.center, &p) <= b.radius);
        if !covered {
            continue;
        }
        let key = space.order_key(&p).ok_or(MetricError::Unsupported("ordering"))?;
        if best.as_ref().is_none_or(|(k, _)| key > *k) {
            best = Some((key, p));
        }
    }
    best.map(|(_, p)| p).ok_or(MetricError::NoCoveredPoint)
}

/// Smallest dyadic δ whose greedy net has at most `k` points, with that net.
pub fn dyadic_cover(space: &dyn MetricSpace, k: usize, within: Option<&Ball>) -> (f64, Vec<Point>) {
    let mut delta = 1.0f64;
    let (mut best, _) = space.net_points(2.0, 2, within);
    let mut best_delta = 2.0;
    let all = if within.is_none() { space.finite_points().map(|p| p.len()) } else { None };
    while delta >= space.eta() {
        let (pts, complete) = space.net_points(delta, k + 1, within);
        if !complete || pts.len() > k {
            break;
        }
        let full = all.is_some_and(|n| pts.len() == n);
        best = pts;
        best_delta = delta;
        delta /= 2.0;
        if full {
            // Every point is a center; halve once more so the closed
            // balls are singletons.
            best_delta = delta;
            break;
        }
    }
    (best_delta, best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_difference() {
        let a = Segment::closed(0.0, 1.0);
        let b = Segment::closed(0.25, 0.5);
        let parts = a.minus(&b);
        assert_eq!(parts.len(), 2);
        assert!(parts[0].contains(0.2) && !parts[0].contains(0.25));
        assert!(parts[1].contains(0.6) && !parts[1].contains(0.5));
    }

    #[test]
    fn point_difference_leaves_punctured_interval() {
        let a = Segment::closed(0.0, 1.0);
        let parts = a.minus(&Segment::closed(0.5, 0.5));
        assert_eq!(parts.len(), 2);
        assert!(!parts.iter().any(|s| s.contains(0.5)));
        assert!(parts.iter().any(|s| s.contains(0.5f64.next_up())));
    }

    #[test]
    fn tree_path_key_ignores_trailing_zeros() {
        assert_eq!(Point::TreePath(vec![1, 0, 0]).key(), Point::TreePath(vec![1]).key());
    }

    #[test]
    fn kind_mismatch_is_typed() {
        let s = Interval::new(1.0).unwrap();
        let e = distance(&s, &Point::Real1D(0.1), &Point::Index(0)).unwrap_err();
        assert!(matches!(e, MetricError::KindMismatch { .. }));
    }
}
