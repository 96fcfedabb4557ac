//! Finite nested decompositions X = S_0 ⊃ S_1 ⊃ ... ⊃ S_{k+1} = ∅.

use super::*;

#[derive(Debug, Clone)]
pub struct Decomposition {
    space: SpaceRef,
    layers: Vec<Region>,
    /// Dimension parameter of the decomposition.
    pub d: f64,
}

impl Decomposition {
    /// `layers` lists S_0, ..., S_k; the trailing empty set is implicit.
    /// Nesting is checked on a mesh, and strictness with the covering
    /// oracle on each layer difference.
    pub fn new(space: SpaceRef, mut layers: Vec<Region>, d: f64) -> Result<Self, MetricError> {
        if layers.first() != Some(&Region::All) {
            return Err(MetricError::Invalid("decomposition must start with the whole space".into()));
        }
        if layers.last() != Some(&Region::Empty) {
            layers.push(Region::Empty);
        }
        let mesh = space.mesh(2048);
        for (i, w) in layers.windows(2).enumerate() {
            if let Some(p) = mesh.iter().find(|p| space.region_contains(&w[1], p) && !space.region_contains(&w[0], p)) {
                return Err(MetricError::Invalid(format!("layer {} not inside layer {i} at {p}", i + 1)));
            }
            let diff = w[0].minus(&w[1], space.as_ref())?;
            if diff == Region::Empty || space.find_uncovered(&[], &diff, None).is_none() {
                return Err(MetricError::Invalid(format!("layers {i} and {} coincide", i + 1)));
            }
        }
        Ok(Decomposition { space, layers, d })
    }

    /// The one-layer decomposition {X, ∅}.
    pub fn trivial(space: SpaceRef, d: f64) -> Self {
        Decomposition { space, layers: vec![Region::All, Region::Empty], d }
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    /// Number of non-empty layers (k + 1).
    pub fn len(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn layer(&self, i: usize) -> &Region {
        &self.layers[i.min(self.layers.len() - 1)]
    }

    pub fn contains(&self, i: usize, p: &Point) -> bool {
        self.space.region_contains(self.layer(i), p)
    }

    /// Depth oracle: the largest i with p ∈ S_i.
    pub fn depth(&self, p: &Point) -> usize {
        (0..self.len()).rev().find(|&i| self.contains(i, p)).unwrap_or(0)
    }

    /// S_i ∖ S_{i+1}.
    pub fn stratum(&self, i: usize) -> Result<Region, MetricError> {
        self.layer(i).minus(self.layer(i + 1), self.space.as_ref())
    }

    /// Covering oracle restricted to S_i.
    pub fn find_uncovered(&self, i: usize, balls: &[Ball]) -> Option<Point> {
        self.space.find_uncovered(balls, self.layer(i), None)
    }

    /// Whether S_i meets the given ball.
    pub fn meets(&self, i: usize, ball: &Ball) -> bool {
        self.space.region_meets_ball(self.layer(i), ball)
    }
}
