//! The unit interval with metric |x − y|^p, 0 < p ≤ 1.

use super::*;

/// Default grid resolution for the interval.
pub const INTERVAL_ETA: f64 = 1.0 / (1u64 << 20) as f64;

#[derive(Debug, Clone)]
pub struct Interval {
    exponent: f64,
    eta: f64,
}

/// Float range [a, b] of a ball on the line, both ends included.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FloatRange {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(exponent: f64) -> Result<Self, MetricError> {
        if !(exponent > 0.0 && exponent <= 1.0) {
            return Err(MetricError::Invalid(format!("interval exponent must lie in (0,1], got {exponent}")));
        }
        Ok(Interval { exponent, eta: INTERVAL_ETA })
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    #[inline]
    pub fn d(&self, x: f64, y: f64) -> f64 {
        let g = (x - y).abs();
        if self.exponent == 1.0 {
            g
        } else {
            g.powf(self.exponent)
        }
    }

    /// The float set of a ball, clipped to [0,1]. `None` when empty.
    pub(crate) fn ball_range(&self, c: f64, r: f64, closed: bool) -> Option<FloatRange> {
        let inside = |y: f64| {
            let d = self.d(c, y);
            if closed {
                d <= r
            } else {
                d < r
            }
        };
        if !inside(c) {
            return None;
        }
        let b = if inside(1.0) { 1.0 } else { first_true(c, 1.0, |y| !inside(y)).next_down() };
        let a = if inside(0.0) { 0.0 } else { first_true(0.0, c, inside) };
        Some(FloatRange { a, b })
    }

    /// Smallest float y > x with d(x, y) ≥ delta, or `None` past 1.
    fn next_net_point(&self, x: f64, delta: f64) -> Option<f64> {
        if self.d(x, 1.0) < delta {
            return None;
        }
        Some(first_true(x, 1.0, |y| self.d(x, y) >= delta))
    }

    /// Greedy net of the float range [lo, hi], lowest point first.
    pub(crate) fn net_range(&self, lo: f64, hi: f64, delta: f64, limit: usize) -> (Vec<f64>, bool) {
        let mut pts = vec![lo];
        let mut x = lo;
        while let Some(y) = self.next_net_point(x, delta) {
            if y > hi {
                break;
            }
            if pts.len() >= limit {
                return (pts, false);
            }
            pts.push(y);
            x = y;
        }
        (pts, true)
    }

    fn segments_of(&self, region: &Region) -> Vec<(f64, f64)> {
        match region {
            Region::All => vec![(0.0, 1.0)],
            Region::Segments(s) => s.iter().filter_map(|s| s.float_bounds()).collect(),
            _ => vec![],
        }
    }
}

/// Smallest float of [lo, hi] (both ≥ 0) where a monotone predicate turns
/// true; `pred(hi)` must hold. Non-negative floats order like their bits.
fn first_true(lo: f64, hi: f64, pred: impl Fn(f64) -> bool) -> f64 {
    let (mut a, mut b) = (lo.to_bits(), hi.to_bits());
    if pred(lo) {
        return lo;
    }
    while b - a > 1 {
        let m = a + (b - a) / 2;
        if pred(f64::from_bits(m)) {
            b = m;
        } else {
            a = m;
        }
    }
    f64::from_bits(b)
}

/// Lowest float of [lo, hi] outside every range, if any.
pub(crate) fn sweep(lo: f64, hi: f64, ranges: &mut [FloatRange]) -> Option<f64> {
    ranges.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut cur = lo;
    for r in ranges.iter() {
        if r.b < cur {
            continue;
        }
        if r.a > cur {
            break;
        }
        if r.b >= hi {
            return None;
        }
        cur = r.b.next_up();
    }
    (cur <= hi).then_some(cur)
}

impl MetricSpace for Interval {
    fn kind(&self) -> PointKind {
        PointKind::Real1D
    }

    fn name(&self) -> String {
        if self.exponent == 1.0 {
            "interval".into()
        } else {
            format!("interval^{}", self.exponent)
        }
    }

    fn dist(&self, x: &Point, y: &Point) -> f64 {
        match (x, y) {
            (Point::Real1D(a), Point::Real1D(b)) => self.d(*a, *b),
            _ => f64::NAN,
        }
    }

    fn eta(&self) -> f64 {
        self.eta
    }

    fn validate_point(&self, p: &Point) -> Result<(), MetricError> {
        match p {
            Point::Real1D(x) if (0.0..=1.0).contains(x) => Ok(()),
            Point::Real1D(x) => Err(MetricError::OutOfSpace(format!("{x} not in [0,1]"))),
            _ => Err(MetricError::KindMismatch { expected: PointKind::Real1D, got: p.kind() }),
        }
    }

    fn find_uncovered(&self, balls: &[Ball], region: &Region, within: Option<&Ball>) -> Option<Point> {
        let window = match within {
            Some(w) => Some(self.ball_range(w.center.as_real()?, w.radius, w.closed)?),
            None => None,
        };
        for (mut lo, mut hi) in self.segments_of(region) {
            if let Some(w) = window {
                lo = lo.max(w.a);
                hi = hi.min(w.b);
            }
            if lo > hi {
                continue;
            }
            let mut ranges: Vec<FloatRange> = balls
                .iter()
                .filter_map(|b| self.ball_range(b.center.as_real()?, b.radius, b.closed))
                .filter(|r| r.b >= lo && r.a <= hi)
                .collect();
            if let Some(x) = sweep(lo, hi, &mut ranges) {
                return Some(Point::Real1D(x));
            }
        }
        None
    }

    fn net_points(&self, delta: f64, limit: usize, within: Option<&Ball>) -> (Vec<Point>, bool) {
        let (lo, hi) = match within {
            Some(w) => match w.center.as_real().and_then(|c| self.ball_range(c, w.radius, w.closed)) {
                Some(r) => (r.a, r.b),
                None => return (vec![], true),
            },
            None => (0.0, 1.0),
        };
        let (xs, done) = self.net_range(lo, hi, delta, limit);
        (xs.into_iter().map(Point::Real1D).collect(), done)
    }

    fn sample_near(&self, y: &Point, rho: f64) -> Option<Point> {
        let c = y.as_real()?;
        let w = 0.9 * rho.min(1.0).powf(1.0 / self.exponent);
        let z = if c + w <= 1.0 { c + w } else { c - w };
        (z != c && (0.0..=1.0).contains(&z) && self.d(c, z) < rho).then_some(Point::Real1D(z))
    }

    fn grid_point(&self, rng: &mut dyn rand::RngCore) -> Point {
        let cells = (1.0 / self.eta).round() as u64;
        let k = rng.next_u64() % (cells + 1);
        Point::Real1D(k as f64 * self.eta)
    }

    fn mesh(&self, size: usize) -> Vec<Point> {
        let n = size.max(2) - 1;
        (0..=n).map(|i| Point::Real1D(i as f64 / n as f64)).collect()
    }

    fn region_contains(&self, region: &Region, p: &Point) -> bool {
        let Some(x) = p.as_real() else { return false };
        match region {
            Region::All => true,
            Region::Segments(s) => s.iter().any(|s| s.contains(x)),
            _ => false,
        }
    }

    fn region_meets_ball(&self, region: &Region, ball: &Ball) -> bool {
        let Some(r) = ball.center.as_real().and_then(|c| self.ball_range(c, ball.radius, ball.closed)) else {
            return false;
        };
        self.segments_of(region).iter().any(|&(lo, hi)| lo <= r.b && hi >= r.a)
    }

    fn complement(&self, region: &Region) -> Result<Region, MetricError> {
        match region {
            Region::Segments(_) => Region::Segments(vec![Segment::closed(0.0, 1.0)]).minus(region, self),
            Region::All => Ok(Region::Empty),
            Region::Empty => Ok(Region::All),
            _ => Err(MetricError::Unsupported("region complement")),
        }
    }

    fn analytic_dims(&self) -> AnalyticDims {
        let d = 1.0 / self.exponent;
        AnalyticDims { covering: Some(d), max_min_covering: Some(d), log_covering: Some(0.0) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l1() -> Interval {
        Interval::new(1.0).unwrap()
    }

    #[test]
    fn sqrt_metric_distance() {
        let s = Interval::new(0.5).unwrap();
        assert_eq!(s.dist(&Point::Real1D(0.25), &Point::Real1D(0.0)), 0.5);
    }

    #[test]
    fn single_big_ball_covers() {
        let s = l1();
        assert_eq!(covering_oracle(&s, &[Ball::open(Point::Real1D(0.5), 0.6)]), Coverage::Covered);
    }

    #[test]
    fn gap_is_found() {
        let s = l1();
        let balls = [Ball::open(Point::Real1D(0.1), 0.2), Ball::open(Point::Real1D(0.9), 0.2)];
        match covering_oracle(&s, &balls) {
            Coverage::Uncovered(Point::Real1D(x)) => {
                assert!((0.3..=0.7).contains(&x));
                assert!(balls.iter().all(|b| !b.contains(&s, &Point::Real1D(x))));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn touching_open_balls_leave_the_seam() {
        let s = l1();
        let balls = [Ball::open(Point::Real1D(0.25), 0.25), Ball::open(Point::Real1D(0.75), 0.25)];
        let p = s.find_uncovered(&balls, &Region::All, None).unwrap();
        assert!(balls.iter().all(|b| !b.contains(&s, &p)));
        assert_eq!(p, Point::Real1D(0.0));
    }

    #[test]
    fn empty_ball_set_returns_lowest_point() {
        assert_eq!(l1().find_uncovered(&[], &Region::All, None), Some(Point::Real1D(0.0)));
    }

    #[test]
    fn greedy_net_half() {
        let net = greedy_net(&l1(), 0.5, 10).unwrap();
        assert!(net.len() <= 3);
        let balls: Vec<Ball> = net.iter().map(|p| Ball::open(p.clone(), 0.5)).collect();
        assert_eq!(covering_oracle(&l1(), &balls), Coverage::Covered);
    }

    #[test]
    fn net_above_diameter_is_single_point() {
        assert_eq!(greedy_net(&l1(), 1.5, 10).unwrap().len(), 1);
    }

    #[test]
    fn net_cap_is_reported() {
        assert_eq!(greedy_net(&l1(), 0.01, 10), Err(MetricError::CapExceeded(10)));
    }

    #[test]
    fn region_restricted_search() {
        let s = l1();
        let region = Region::Segments(vec![Segment::closed(0.6, 0.8)]);
        let balls = [Ball::open(Point::Real1D(0.65), 0.1)];
        let p = s.find_uncovered(&balls, &region, None).unwrap().as_real().unwrap();
        assert!(p >= 0.75 && p <= 0.8);
    }

    #[test]
    fn within_window_limits_search() {
        let s = l1();
        let balls = [Ball::open(Point::Real1D(0.5), 0.1)];
        let w = Ball::open(Point::Real1D(0.5), 0.05);
        assert_eq!(s.find_uncovered(&balls, &Region::All, Some(&w)), None);
        assert!(s.find_uncovered(&balls, &Region::All, None).is_some());
    }
}
