//! Finite spaces given by a distance matrix, and the truncated harmonic
//! sequence {1, 1/2, ..., 1/n} ∪ {0}.

use super::*;

#[derive(Debug, Clone)]
pub struct FiniteSpace {
    dist: Vec<Vec<f64>>,
    order: Option<Vec<u64>>,
    ranks: Option<Vec<usize>>,
}

impl FiniteSpace {
    /// Validates symmetry, zero diagonal, diameter ≤ 1 and, unless
    /// `quasimetric`, the triangle inequality.
    pub fn new(dist: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        let n = dist.len();
        if n == 0 || dist.iter().any(|row| row.len() != n) {
            return Err(MetricError::Invalid("distance matrix must be square and non-empty".into()));
        }
        for i in 0..n {
            if dist[i][i] != 0.0 {
                return Err(MetricError::Invalid(format!("D({i},{i}) ≠ 0")));
            }
            for j in 0..n {
                let d = dist[i][j];
                if !(0.0..=1.0).contains(&d) || d != dist[j][i] || (i != j && d == 0.0) {
                    return Err(MetricError::Invalid(format!("bad entry D({i},{j}) = {d}")));
                }
                for k in 0..n {
                    if dist[i][k] > d + dist[j][k] + 1e-12 {
                        return Err(MetricError::Invalid(format!("triangle inequality fails at ({i},{j},{k})")));
                    }
                }
            }
        }
        Ok(FiniteSpace { dist, order: None, ranks: None })
    }

    /// `n` points at mutual distance `d`.
    pub fn uniform(n: usize, d: f64) -> Result<Self, MetricError> {
        Self::new((0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { d }).collect()).collect())
    }

    /// Points of [0,1]^m under the sup-norm, as a finite space.
    pub fn from_coords(coords: &[Vec<f64>]) -> Result<Self, MetricError> {
        let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        Self::new(coords.iter().map(|a| coords.iter().map(|b| d(a, b)).collect()).collect())
    }

    /// Declares a well-order: `order[i]` is the position of point i.
    pub fn with_order(mut self, order: Vec<u64>) -> Result<Self, MetricError> {
        if order.len() != self.len() {
            return Err(MetricError::Invalid("order length mismatch".into()));
        }
        self.order = Some(order);
        Ok(self)
    }

    pub fn with_ranks(mut self, ranks: Vec<usize>) -> Result<Self, MetricError> {
        if ranks.len() != self.len() {
            return Err(MetricError::Invalid("rank length mismatch".into()));
        }
        self.ranks = Some(ranks);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    fn idx(p: &Point) -> Option<usize> {
        match p {
            Point::Index(i) => Some(*i),
            _ => None,
        }
    }
}

/// Shared covering/net logic for spaces with finitely many indexed points.
fn finite_uncovered(space: &dyn MetricSpace, n: usize, balls: &[Ball], region: &Region, within: Option<&Ball>) -> Option<Point> {
    let candidates: Box<dyn Iterator<Item = usize>> = match region {
        Region::All => Box::new(0..n),
        Region::Indices(v) => {
            let mut v = v.clone();
            v.sort_unstable();
            Box::new(v.into_iter().filter(move |&i| i < n))
        }
        _ => return None,
    };
    candidates
        .map(Point::Index)
        .filter(|p| within.is_none_or(|w| w.contains(space, p)))
        .find(|p| !balls.iter().any(|b| b.contains(space, p)))
}

fn finite_net(space: &dyn MetricSpace, n: usize, delta: f64, limit: usize, within: Option<&Ball>) -> (Vec<Point>, bool) {
    let mut net: Vec<Point> = Vec::new();
    for i in 0..n {
        let p = Point::Index(i);
        if within.is_some_and(|w| !w.contains(space, &p)) {
            continue;
        }
        if net.iter().all(|q| space.dist(q, &p) >= delta) {
            if net.len() >= limit {
                return (net, false);
            }
            net.push(p);
        }
    }
    (net, true)
}

impl MetricSpace for FiniteSpace {
    fn kind(&self) -> PointKind {
        PointKind::Index
    }

    fn name(&self) -> String {
        format!("finite({})", self.len())
    }

    fn dist(&self, x: &Point, y: &Point) -> f64 {
        match (Self::idx(x), Self::idx(y)) {
            (Some(i), Some(j)) if i < self.len() && j < self.len() => self.dist[i][j],
            _ => f64::NAN,
        }
    }

    fn diameter(&self) -> f64 {
        self.dist.iter().flatten().copied().fold(0.0, f64::max)
    }

    fn eta(&self) -> f64 {
        0.0
    }

    fn validate_point(&self, p: &Point) -> Result<(), MetricError> {
        match p {
            Point::Index(i) if *i < self.len() => Ok(()),
            Point::Index(i) => Err(MetricError::OutOfSpace(format!("index {i} ≥ {}", self.len()))),
            _ => Err(MetricError::KindMismatch { expected: PointKind::Index, got: p.kind() }),
        }
    }

    fn find_uncovered(&self, balls: &[Ball], region: &Region, within: Option<&Ball>) -> Option<Point> {
        finite_uncovered(self, self.len(), balls, region, within)
    }

    fn net_points(&self, delta: f64, limit: usize, within: Option<&Ball>) -> (Vec<Point>, bool) {
        finite_net(self, self.len(), delta, limit, within)
    }

    fn sample_near(&self, y: &Point, rho: f64) -> Option<Point> {
        (0..self.len()).map(Point::Index).find(|q| q != y && self.dist(y, q) < rho)
    }

    fn grid_point(&self, rng: &mut dyn rand::RngCore) -> Point {
        Point::Index((rng.next_u64() % self.len() as u64) as usize)
    }

    fn mesh(&self, _size: usize) -> Vec<Point> {
        (0..self.len()).map(Point::Index).collect()
    }

    fn region_contains(&self, region: &Region, p: &Point) -> bool {
        match (region, Self::idx(p)) {
            (Region::All, Some(i)) => i < self.len(),
            (Region::Indices(v), Some(i)) => v.contains(&i),
            _ => false,
        }
    }

    fn region_meets_ball(&self, region: &Region, ball: &Ball) -> bool {
        (0..self.len()).map(Point::Index).any(|p| ball.contains(self, &p) && self.region_contains(region, &p))
    }

    fn complement(&self, region: &Region) -> Result<Region, MetricError> {
        Region::Indices((0..self.len()).collect()).minus(region, self)
    }

    fn finite_points(&self) -> Option<Vec<Point>> {
        Some(self.mesh(0))
    }

    fn order_key(&self, p: &Point) -> Option<u64> {
        let o = self.order.as_ref()?;
        o.get(Self::idx(p)?).copied()
    }

    fn rank(&self, p: &Point) -> Option<usize> {
        self.ranks.as_ref()?.get(Self::idx(p)?).copied()
    }

    fn analytic_dims(&self) -> AnalyticDims {
        AnalyticDims { covering: Some(0.0), max_min_covering: Some(0.0), log_covering: Some(0.0) }
    }
}

/// {1, 1/2, ..., 1/n} ∪ {0}. `Index(0)` is the limit point 0 and
/// `Index(m)` is 1/m. The well-order is 1 ≺ 1/2 ≺ ... ≺ 1/n ≺ 0; the limit
/// point has rank 1 and every other point rank 0.
#[derive(Debug, Clone)]
pub struct Harmonic {
    n: usize,
}

impl Harmonic {
    pub fn new(n: usize) -> Result<Self, MetricError> {
        if n == 0 {
            return Err(MetricError::Invalid("harmonic space needs n ≥ 1".into()));
        }
        Ok(Harmonic { n })
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, p: &Point) -> Option<f64> {
        match p {
            Point::Index(0) => Some(0.0),
            Point::Index(m) if *m <= self.n => Some(1.0 / *m as f64),
            _ => None,
        }
    }

    /// The point with value 1/m (m = 0 for the limit point).
    pub fn point(m: usize) -> Point {
        Point::Index(m)
    }
}

impl MetricSpace for Harmonic {
    fn kind(&self) -> PointKind {
        PointKind::Index
    }

    fn name(&self) -> String {
        format!("harmonic({})", self.n)
    }

    fn dist(&self, x: &Point, y: &Point) -> f64 {
        match (self.value(x), self.value(y)) {
            (Some(a), Some(b)) => (a - b).abs(),
            _ => f64::NAN,
        }
    }

    fn eta(&self) -> f64 {
        0.0
    }

    fn validate_point(&self, p: &Point) -> Result<(), MetricError> {
        match p {
            Point::Index(m) if *m <= self.n => Ok(()),
            Point::Index(m) => Err(MetricError::OutOfSpace(format!("index {m} > {}", self.n))),
            _ => Err(MetricError::KindMismatch { expected: PointKind::Index, got: p.kind() }),
        }
    }

    fn find_uncovered(&self, balls: &[Ball], region: &Region, within: Option<&Ball>) -> Option<Point> {
        finite_uncovered(self, self.len(), balls, region, within)
    }

    fn net_points(&self, delta: f64, limit: usize, within: Option<&Ball>) -> (Vec<Point>, bool) {
        finite_net(self, self.len(), delta, limit, within)
    }

    fn sample_near(&self, y: &Point, rho: f64) -> Option<Point> {
        (0..self.len()).map(Point::Index).find(|q| q != y && self.dist(y, q) < rho)
    }

    fn grid_point(&self, rng: &mut dyn rand::RngCore) -> Point {
        Point::Index((rng.next_u64() % self.len() as u64) as usize)
    }

    fn mesh(&self, _size: usize) -> Vec<Point> {
        (0..self.len()).map(Point::Index).collect()
    }

    fn region_contains(&self, region: &Region, p: &Point) -> bool {
        match (region, p) {
            (Region::All, Point::Index(m)) => *m <= self.n,
            (Region::Indices(v), Point::Index(m)) => v.contains(m),
            _ => false,
        }
    }

    fn complement(&self, region: &Region) -> Result<Region, MetricError> {
        Region::Indices((0..self.len()).collect()).minus(region, self)
    }

    fn finite_points(&self) -> Option<Vec<Point>> {
        Some(self.mesh(0))
    }

    fn order_key(&self, p: &Point) -> Option<u64> {
        match p {
            Point::Index(0) => Some(self.n as u64 + 1),
            Point::Index(m) if *m <= self.n => Some(*m as u64),
            _ => None,
        }
    }

    fn rank(&self, p: &Point) -> Option<usize> {
        match p {
            Point::Index(0) => Some(1),
            Point::Index(m) if *m <= self.n => Some(0),
            _ => None,
        }
    }

    fn analytic_dims(&self) -> AnalyticDims {
        AnalyticDims { covering: Some(0.5), max_min_covering: Some(0.0), log_covering: Some(0.0) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_uniform_space_is_not_covered_by_one_ball() {
        let s = FiniteSpace::uniform(3, 1.0).unwrap();
        match covering_oracle(&s, &[Ball::open(Point::Index(0), 0.5)]) {
            Coverage::Uncovered(p) => assert!(p == Point::Index(1) || p == Point::Index(2)),
            c => panic!("{c:?}"),
        }
    }

    #[test]
    fn fine_net_takes_every_point() {
        let s = FiniteSpace::uniform(5, 0.8).unwrap();
        assert_eq!(greedy_net(&s, 0.5, 10).unwrap().len(), 5);
    }

    #[test]
    fn triangle_violation_is_rejected() {
        let m = vec![vec![0.0, 0.1, 0.9], vec![0.1, 0.0, 0.1], vec![0.9, 0.1, 0.0]];
        assert!(FiniteSpace::new(m).is_err());
    }

    #[test]
    fn ordering_oracle_on_harmonic() {
        let s = Harmonic::new(200).unwrap();
        assert_eq!(ordering_oracle(&s, &[Ball::closed(Point::Index(0), 0.05)]).unwrap(), Point::Index(0));
        assert_eq!(ordering_oracle(&s, &[Ball::closed(Point::Index(1), 0.1)]).unwrap(), Point::Index(1));
        assert_eq!(ordering_oracle(&s, &[Ball::closed(Point::Index(2), 0.01)]).unwrap(), Point::Index(2));
        assert_eq!(ordering_oracle(&s, &[]), Err(MetricError::NoCoveredPoint));
    }

    #[test]
    fn harmonic_ranks() {
        let s = Harmonic::new(10).unwrap();
        assert_eq!(s.rank(&Point::Index(0)), Some(1));
        assert_eq!(s.rank(&Point::Index(3)), Some(0));
        assert_eq!(s.dist(&Point::Index(2), &Point::Index(0)), 0.5);
    }
}
