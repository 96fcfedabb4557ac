//! The unit cube [0,1]^m under the powered sup-norm max_i |x_i − y_i|^p.
//!
//! Balls are axis-aligned boxes, so covering is decided exactly by
//! recursive splitting at box faces.

use super::interval::FloatRange;
use super::*;

#[derive(Debug, Clone)]
pub struct Cube {
    dim: usize,
    line: Interval,
    eta: f64,
}

type FBox = Vec<(f64, f64)>;

impl Cube {
    pub fn new(dim: usize, exponent: f64) -> Result<Self, MetricError> {
        if dim == 0 {
            return Err(MetricError::Invalid("cube dimension must be ≥ 1".into()));
        }
        Ok(Cube { dim, line: Interval::new(exponent)?, eta: 1.0 / (1u64 << 10) as f64 })
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn coords<'a>(&self, p: &'a Point) -> Option<&'a [f64]> {
        match p {
            Point::RealVec(v) if v.len() == self.dim => Some(v),
            _ => None,
        }
    }

    fn ball_box(&self, b: &Ball) -> Option<FBox> {
        let c = self.coords(&b.center)?;
        c.iter()
            .map(|&x| self.line.ball_range(x, b.radius, b.closed).map(|FloatRange { a, b }| (a, b)))
            .collect()
    }

    fn search(region: &FBox, balls: &[FBox]) -> Option<Vec<f64>> {
        let hits: Vec<&FBox> = balls
            .iter()
            .filter(|b| b.iter().zip(region).all(|(&(a, bb), &(lo, hi))| a <= hi && bb >= lo))
            .collect();
        let Some(first) = hits.first() else {
            return Some(region.iter().map(|&(lo, _)| lo).collect());
        };
        if hits.iter().any(|b| b.iter().zip(region).all(|(&(a, bb), &(lo, hi))| a <= lo && bb >= hi)) {
            return None;
        }
        for (axis, (&(a, b), &(lo, hi))) in first.iter().zip(region).enumerate() {
            let cut = if a > lo {
                Some((a.next_down(), a))
            } else if b < hi {
                Some((b, b.next_up()))
            } else {
                None
            };
            if let Some((left_hi, right_lo)) = cut {
                let owned: Vec<FBox> = hits.iter().map(|b| (*b).clone()).collect();
                let mut left = region.clone();
                left[axis].1 = left_hi;
                let mut right = region.clone();
                right[axis].0 = right_lo;
                return Self::search(&left, &owned).or_else(|| Self::search(&right, &owned));
            }
        }
        None
    }

    fn axis_net(&self, lo: f64, hi: f64, delta: f64, limit: usize) -> (Vec<f64>, bool) {
        self.line.net_range(lo, hi, delta, limit)
    }
}

impl MetricSpace for Cube {
    fn kind(&self) -> PointKind {
        PointKind::RealVec
    }

    fn name(&self) -> String {
        format!("cube{}^{}", self.dim, self.line.exponent())
    }

    fn dist(&self, x: &Point, y: &Point) -> f64 {
        match (self.coords(x), self.coords(y)) {
            (Some(a), Some(b)) => a.iter().zip(b).map(|(u, v)| self.line.d(*u, *v)).fold(0.0, f64::max),
            _ => f64::NAN,
        }
    }

    fn eta(&self) -> f64 {
        self.eta
    }

    fn validate_point(&self, p: &Point) -> Result<(), MetricError> {
        match p {
            Point::RealVec(v) if v.len() == self.dim && v.iter().all(|c| (0.0..=1.0).contains(c)) => Ok(()),
            Point::RealVec(v) => Err(MetricError::OutOfSpace(format!("{v:?}"))),
            _ => Err(MetricError::KindMismatch { expected: PointKind::RealVec, got: p.kind() }),
        }
    }

    fn find_uncovered(&self, balls: &[Ball], region: &Region, within: Option<&Ball>) -> Option<Point> {
        if !matches!(region, Region::All) {
            return None;
        }
        let root: FBox = match within {
            Some(w) => self.ball_box(w)?,
            None => vec![(0.0, 1.0); self.dim],
        };
        let boxes: Vec<FBox> = balls.iter().filter_map(|b| self.ball_box(b)).collect();
        Self::search(&root, &boxes).map(Point::RealVec)
    }

    fn net_points(&self, delta: f64, limit: usize, within: Option<&Ball>) -> (Vec<Point>, bool) {
        let root: FBox = match within {
            Some(w) => match self.ball_box(w) {
                Some(b) => b,
                None => return (vec![], true),
            },
            None => vec![(0.0, 1.0); self.dim],
        };
        let mut axes = Vec::with_capacity(self.dim);
        for &(lo, hi) in &root {
            let (xs, done) = self.axis_net(lo, hi, delta, limit);
            if !done {
                return (vec![], false);
            }
            axes.push(xs);
        }
        let total: f64 = axes.iter().map(|a| a.len() as f64).product();
        if total > limit as f64 {
            return (vec![], false);
        }
        let mut out = vec![vec![]];
        for xs in &axes {
            out = out
                .into_iter()
                .flat_map(|pre: Vec<f64>| {
                    xs.iter().map(move |&x| {
                        let mut v = pre.clone();
                        v.push(x);
                        v
                    })
                })
                .collect();
        }
        (out.into_iter().map(Point::RealVec).collect(), true)
    }

    fn sample_near(&self, y: &Point, rho: f64) -> Option<Point> {
        let c = self.coords(y)?;
        let moved = self.line.sample_near(&Point::Real1D(c[0]), rho)?.as_real()?;
        let mut v = c.to_vec();
        v[0] = moved;
        Some(Point::RealVec(v))
    }

    fn grid_point(&self, rng: &mut dyn rand::RngCore) -> Point {
        let cells = (1.0 / self.eta).round() as u64;
        Point::RealVec((0..self.dim).map(|_| (rng.next_u64() % (cells + 1)) as f64 * self.eta).collect())
    }

    fn mesh(&self, size: usize) -> Vec<Point> {
        let per = ((size as f64).powf(1.0 / self.dim as f64).ceil() as usize).max(2);
        let line: Vec<f64> = (0..per).map(|i| i as f64 / (per - 1) as f64).collect();
        let mut out = vec![vec![]];
        for _ in 0..self.dim {
            out = out
                .into_iter()
                .flat_map(|pre: Vec<f64>| {
                    line.iter().map(move |&x| {
                        let mut v = pre.clone();
                        v.push(x);
                        v
                    })
                })
                .collect();
        }
        out.into_iter().map(Point::RealVec).collect()
    }

    fn analytic_dims(&self) -> AnalyticDims {
        let d = self.dim as f64 / self.line.exponent();
        AnalyticDims { covering: Some(d), max_min_covering: Some(d), log_covering: Some(0.0) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_quadrant_balls_leave_seams() {
        let s = Cube::new(2, 1.0).unwrap();
        let balls: Vec<Ball> = [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)]
            .iter()
            .map(|&(x, y)| Ball::open(Point::RealVec(vec![x, y]), 0.25))
            .collect();
        let p = s.find_uncovered(&balls, &Region::All, None).unwrap();
        assert!(balls.iter().all(|b| !b.contains(&s, &p)));
        let fat: Vec<Ball> = balls.iter().map(|b| Ball::open(b.center.clone(), 0.26)).collect();
        assert_eq!(s.find_uncovered(&fat, &Region::All, None), None);
    }

    #[test]
    fn net_is_packing_and_covers() {
        let s = Cube::new(2, 1.0).unwrap();
        let net = greedy_net(&s, 0.3, 100).unwrap();
        assert_eq!(net.len(), 16);
        for (i, a) in net.iter().enumerate() {
            for b in &net[i + 1..] {
                assert!(s.dist(a, b) >= 0.3);
            }
        }
        let balls: Vec<Ball> = net.iter().map(|p| Ball::open(p.clone(), 0.3)).collect();
        assert_eq!(covering_oracle(&s, &balls), Coverage::Covered);
    }
}
