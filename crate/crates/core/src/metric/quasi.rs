//! Quasi-distance D_f(x, y) = f(0) − f(D(x, y)) over a base space.
//!
//! Balls of D_f are balls of the base space with a transformed radius,
//! so the base oracles are reused.

use super::*;

#[derive(Debug, Clone)]
pub struct QuasiSpace {
    base: SpaceRef,
    shape: Shape,
}

impl QuasiSpace {
    pub fn new(base: SpaceRef, shape: Shape) -> Result<Self, MetricError> {
        shape.validate()?;
        Ok(QuasiSpace { base, shape })
    }

    pub fn base(&self) -> &SpaceRef {
        &self.base
    }

    fn g(&self, z: f64) -> f64 {
        self.shape.top() - self.shape.eval(z)
    }

    /// Base radius ρ with {z : g(z) < r} = [0, ρ) up to float resolution.
    fn base_radius(&self, r: f64, closed: bool) -> f64 {
        let hit = |z: f64| if closed { self.g(z) > r } else { self.g(z) >= r };
        let diam = self.base.diameter();
        if !hit(diam) {
            return 2.0 * diam + 1.0;
        }
        let (mut lo, mut hi) = (0.0, diam);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hit(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    fn to_base(&self, b: &Ball) -> Ball {
        Ball::open(b.center.clone(), self.base_radius(b.radius, b.closed))
    }
}

impl MetricSpace for QuasiSpace {
    fn kind(&self) -> PointKind {
        self.base.kind()
    }

    fn name(&self) -> String {
        format!("quasi({})", self.base.name())
    }

    fn dist(&self, x: &Point, y: &Point) -> f64 {
        self.g(self.base.dist(x, y))
    }

    fn diameter(&self) -> f64 {
        self.g(self.base.diameter())
    }

    fn eta(&self) -> f64 {
        self.base.eta()
    }

    fn is_quasimetric(&self) -> bool {
        true
    }

    fn validate_point(&self, p: &Point) -> Result<(), MetricError> {
        self.base.validate_point(p)
    }

    fn find_uncovered(&self, balls: &[Ball], region: &Region, within: Option<&Ball>) -> Option<Point> {
        let mapped: Vec<Ball> = balls.iter().map(|b| self.to_base(b)).collect();
        let w = within.map(|b| self.to_base(b));
        let mut p = self.base.find_uncovered(&mapped, region, w.as_ref())?;
        // The bisection is float-exact only up to one step; nudge the
        // witness through the transformed distance.
        for _ in 0..64 {
            if !balls.iter().any(|b| b.contains(self, &p)) {
                return Some(p);
            }
            let probe: Vec<Ball> = balls
                .iter()
                .filter(|b| b.contains(self, &p))
                .map(|b| Ball::closed(b.center.clone(), self.base.dist(&b.center, &p)))
                .chain(mapped.iter().cloned())
                .collect();
            p = self.base.find_uncovered(&probe, region, w.as_ref())?;
        }
        None
    }

    fn net_points(&self, delta: f64, limit: usize, within: Option<&Ball>) -> (Vec<Point>, bool) {
        let rho = self.base_radius(delta, false);
        let w = within.map(|b| self.to_base(b));
        self.base.net_points(rho, limit, w.as_ref())
    }

    fn sample_near(&self, y: &Point, rho: f64) -> Option<Point> {
        self.base.sample_near(y, self.base_radius(rho, false))
    }

    fn grid_point(&self, rng: &mut dyn rand::RngCore) -> Point {
        self.base.grid_point(rng)
    }

    fn mesh(&self, size: usize) -> Vec<Point> {
        self.base.mesh(size)
    }

    fn region_contains(&self, region: &Region, p: &Point) -> bool {
        self.base.region_contains(region, p)
    }

    fn complement(&self, region: &Region) -> Result<Region, MetricError> {
        self.base.complement(region)
    }

    fn finite_points(&self) -> Option<Vec<Point>> {
        self.base.finite_points()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn power_shape_quasi_distance() {
        let base: SpaceRef = Arc::new(Interval::new(1.0).unwrap());
        let q = QuasiSpace::new(base, Shape::Power { top: 1.0, floor: 0.0, alpha: 2.0 }).unwrap();
        let d = q.dist(&Point::Real1D(0.25), &Point::Real1D(0.0));
        assert!((d - 0.5).abs() < 1e-15);
        assert_eq!(q.dist(&Point::Real1D(0.3), &Point::Real1D(0.3)), 0.0);
        assert!(q.is_quasimetric());
    }

    #[test]
    fn linear_shape_matches_clipped_distance() {
        let base: SpaceRef = Arc::new(Interval::new(1.0).unwrap());
        let q = QuasiSpace::new(base, Shape::Linear { top: 0.9, floor: 0.3, slope: 1.0 }).unwrap();
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let d = q.dist(&Point::Real1D(x), &Point::Real1D(0.0));
            assert!((d - x.min(0.6)).abs() < 1e-12);
        }
    }

    #[test]
    fn non_monotone_shape_is_rejected() {
        let base: SpaceRef = Arc::new(Interval::new(1.0).unwrap());
        assert!(QuasiSpace::new(base, Shape::Table(vec![(0.0, 0.2), (1.0, 0.8)])).is_err());
    }

    #[test]
    fn quasi_covering_witness_is_exact() {
        let base: SpaceRef = Arc::new(Interval::new(1.0).unwrap());
        let q = QuasiSpace::new(base, Shape::Power { top: 1.0, floor: 0.0, alpha: 2.0 }).unwrap();
        let balls = [Ball::open(Point::Real1D(0.0), 0.5)];
        let p = q.find_uncovered(&balls, &Region::All, None).unwrap();
        assert!(!balls[0].contains(&q, &p));
        assert!(p.as_real().unwrap() < 0.2501);
    }
}
