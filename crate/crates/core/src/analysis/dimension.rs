//! Covering-type dimension estimates from counts at dyadic scales.

use serde::{Deserialize, Serialize};

use crate::instances::Environment;
use crate::metric::{covering_number, CountMode, MetricError, MetricSpace, Point, PointKind};

/// r = 2^{-3}, ..., 2^{-10}.
pub fn default_scales() -> Vec<f64> {
    (3..=10).map(|k| 0.5f64.powi(k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub scales: Vec<f64>,
    pub counts: Vec<usize>,
    pub dimension: f64,
    /// c at each scale: N_r·r^d, or log2(N_r)·r^b for the log form.
    pub multipliers: Vec<f64>,
    pub residual: f64,
    /// Counts come from a greedy cover rather than an optimal one.
    pub approximate: bool,
    pub eta: f64,
}

fn least_squares(xy: &[(f64, f64)]) -> (f64, f64) {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let b = my - slope * mx;
    let res = (xy.iter().map(|p| (p.1 - b - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    (slope, res)
}

fn check_scales(space: &dyn MetricSpace, scales: &[f64]) -> Result<Vec<f64>, MetricError> {
    let mut s: Vec<f64> = scales.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    if s.len() < 3 || s.iter().any(|&r| !(r > space.eta() && r <= 1.0)) {
        return Err(MetricError::Invalid(format!("need at least 3 scales in (η, 1], η = {}", space.eta())));
    }
    Ok(s)
}

/// Greedy r-net sizes, which sandwich N_r between N_{2r} and N_r.
fn net_counts(space: &dyn MetricSpace, scales: &[f64], cap: usize) -> Result<Vec<usize>, MetricError> {
    scales
        .iter()
        .map(|&r| {
            let (pts, done) = space.net_points(r, cap, None);
            if done {
                Ok(pts.len())
            } else {
                Err(MetricError::CapExceeded(cap))
            }
        })
        .collect()
}

pub const COUNT_CAP: usize = 1 << 22;

/// Slope of ln N_r against ln(1/r).
pub fn covering_dimension_fit(space: &dyn MetricSpace, scales: &[f64]) -> Result<DimensionReport, MetricError> {
    let scales = check_scales(space, scales)?;
    let counts = net_counts(space, &scales, COUNT_CAP)?;
    let xy: Vec<(f64, f64)> = scales.iter().zip(&counts).map(|(&r, &n)| ((1.0 / r).ln(), (n as f64).ln())).collect();
    let (slope, residual) = least_squares(&xy);
    let dimension = slope.max(0.0);
    let multipliers = scales.iter().zip(&counts).map(|(&r, &n)| n as f64 * r.powf(dimension)).collect();
    Ok(DimensionReport { scales, counts, dimension, multipliers, residual, approximate: true, eta: space.eta() })
}

/// Slope of ln ln N_r against ln(1/r); scales with N_r ≤ 2 are skipped.
pub fn log_covering_dimension_fit(space: &dyn MetricSpace, scales: &[f64]) -> Result<DimensionReport, MetricError> {
    let scales = check_scales(space, scales)?;
    let counts = net_counts(space, &scales, COUNT_CAP)?;
    let xy: Vec<(f64, f64)> =
        scales.iter().zip(&counts).filter(|(_, &n)| n > 2).map(|(&r, &n)| ((1.0 / r).ln(), (n as f64).ln().ln())).collect();
    let (slope, residual) = if xy.len() >= 2 { least_squares(&xy) } else { (0.0, 0.0) };
    let dimension = slope.max(0.0);
    let multipliers = scales.iter().zip(&counts).map(|(&r, &n)| (n as f64).log2() * r.powf(dimension)).collect();
    Ok(DimensionReport { scales, counts, dimension, multipliers, residual, approximate: true, eta: space.eta() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoomingReport {
    pub scales: Vec<f64>,
    /// Cover sizes of {x: r/2 < Δ(x) ≤ r} by sets of diameter < r/8.
    pub counts: Vec<usize>,
    pub c: f64,
    pub dimension: f64,
    /// Greedy covers, or µ* only estimated.
    pub approximate: bool,
    pub mesh_size: usize,
}

/// Smallest d with cover counts ≤ c·r^{−d} at every scale. Covers are
/// exact sweeps on the line, greedy elsewhere.
pub fn zooming_dimension_estimate(env: &dyn Environment, c: f64, scales: &[f64], mesh_size: usize) -> Result<ZoomingReport, MetricError> {
    let space = env.space().as_ref();
    if !(c > 0.0) || scales.is_empty() {
        return Err(MetricError::Invalid("need c > 0 and at least one scale".into()));
    }
    let mesh = space.mesh(mesh_size);
    let mu_star = env.mu_star();
    let gaps: Vec<f64> = mesh.iter().map(|x| mu_star - env.mu(x)).collect();
    let mut counts = vec![];
    let mut dimension: f64 = 0.0;
    for &r in scales {
        let slab: Vec<Point> = mesh.iter().zip(&gaps).filter(|(_, &g)| r / 2.0 < g && g <= r).map(|(x, _)| x.clone()).collect();
        let n = covering_number(space, &slab, r / 8.0, CountMode::Greedy)?;
        if n as f64 > c {
            dimension = dimension.max((n as f64 / c).ln() / (1.0 / r).ln());
        }
        counts.push(n);
    }
    let line = space.kind() == PointKind::Real1D;
    Ok(ZoomingReport { scales: scales.to_vec(), counts, c, dimension, approximate: !line || !env.mu_star_exact(), mesh_size: mesh.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{LipschitzEnv, Noise, Payoff};
    use crate::metric::{FiniteSpace, Interval, SpaceRef};
    use std::sync::Arc;

    #[test]
    fn unit_interval_is_one_dimensional() {
        let r = covering_dimension_fit(&Interval::new(1.0).unwrap(), &(4..=10).map(|k| 0.5f64.powi(k)).collect::<Vec<_>>()).unwrap();
        assert!((r.dimension - 1.0).abs() < 0.1, "{r:?}");
        assert!(r.counts.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn square_root_metric_is_two_dimensional() {
        let r = covering_dimension_fit(&Interval::new(0.5).unwrap(), &(3..=8).map(|k| 0.5f64.powi(k)).collect::<Vec<_>>()).unwrap();
        assert!((r.dimension - 2.0).abs() < 0.2, "{r:?}");
    }

    #[test]
    fn finite_space_saturates() {
        let s = FiniteSpace::uniform(5, 0.5).unwrap();
        let r = covering_dimension_fit(&s, &[0.25, 0.125, 0.0625]).unwrap();
        assert_eq!(r.counts, vec![5, 5, 5]);
        assert_eq!(r.dimension, 0.0);
    }

    #[test]
    fn rejects_too_few_scales() {
        assert!(covering_dimension_fit(&Interval::new(1.0).unwrap(), &[0.5, 0.25]).is_err());
    }

    #[test]
    fn peak_has_zooming_dimension_zero() {
        let s: SpaceRef = Arc::new(Interval::new(1.0).unwrap());
        let p = Payoff::Cones { cones: vec![(Point::Real1D(0.5), 1.0)], floor: 0.0 };
        let env = LipschitzEnv::new(s, p, Noise::Bernoulli, false).unwrap();
        let scales: Vec<f64> = (1..=8).map(|k| 0.5f64.powi(k)).collect();
        let z = zooming_dimension_estimate(&env, 16.0, &scales, (1 << 16) + 1).unwrap();
        assert!(z.counts.iter().all(|&n| n == 8), "{:?}", z.counts);
        assert_eq!(z.dimension, 0.0);
        assert!(!z.approximate);
    }

    #[test]
    fn constant_payoff_has_empty_slabs() {
        let s: SpaceRef = Arc::new(Interval::new(1.0).unwrap());
        let env = LipschitzEnv::new(s, Payoff::Constant { value: 0.5 }, Noise::Bernoulli, false).unwrap();
        let z = zooming_dimension_estimate(&env, 1.0, &default_scales(), 1025).unwrap();
        assert!(z.counts.iter().all(|&n| n == 0));
        assert_eq!(z.dimension, 0.0);
    }
}
