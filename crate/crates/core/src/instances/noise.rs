//! Reward noise models. A realized reward is a pure function of µ and a
//! key tuple.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::InstanceError;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Noise {
    /// Reward 1 with probability µ, else 0.
    Bernoulli,
    /// Reward µ exactly.
    Deterministic,
    /// µ + σZ with Z standard normal. Not clipped to [0,1].
    Normal { sigma: f64 },
    /// µ + Z with Z drawn from finitely many atoms `(value, probability)`
    /// of mean zero.
    PointMass { atoms: Vec<(f64, f64)> },
    /// µ + Z with |Z| = scale·U^{1/(1−alpha)} and a fair sign, so the
    /// density behaves like |z|^{−alpha} near zero.
    SharpPeak { alpha: f64, scale: f64 },
}

/// The quantities the point-mass estimator needs.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMassProfile {
    /// Atoms carrying the largest mass.
    pub top: Vec<f64>,
    pub p: f64,
    /// Second largest mass (0 if none).
    pub q: f64,
    /// Threshold multiplier: the estimator switches modes after
    /// `c_p · ln t` samples.
    pub c_p: f64,
}

impl Noise {
    pub fn validate(&self) -> Result<(), InstanceError> {
        let bad = |m: String| Err(InstanceError::Invalid(m));
        match self {
            Noise::Normal { sigma } if !(*sigma >= 0.0) => bad(format!("normal noise needs σ ≥ 0, got {sigma}")),
            Noise::PointMass { atoms } => {
                if atoms.is_empty() || atoms.iter().any(|&(_, w)| !(w > 0.0)) {
                    return bad("point-mass noise needs atoms with positive mass".into());
                }
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                let mean: f64 = atoms.iter().map(|a| a.0 * a.1).sum();
                if (total - 1.0).abs() > 1e-9 || mean.abs() > 1e-9 {
                    return bad(format!("point-mass noise must have mass 1 and mean 0 (mass {total}, mean {mean})"));
                }
                Ok(())
            }
            Noise::SharpPeak { alpha, scale } if !(*alpha > 0.0 && *alpha < 1.0 && *scale > 0.0) => {
                bad(format!("sharp-peak noise needs alpha in (0,1) and scale > 0, got {alpha}, {scale}"))
            }
            _ => Ok(()),
        }
    }

    pub fn draw(&self, mu: f64, keys: &[u64]) -> f64 {
        match self {
            Noise::Bernoulli => {
                if rng::uniform(keys) < mu {
                    1.0
                } else {
                    0.0
                }
            }
            Noise::Deterministic => mu,
            Noise::Normal { sigma } => {
                let z: f64 = rng::stream(keys).sample(StandardNormal);
                mu + sigma * z
            }
            Noise::PointMass { atoms } => {
                let u = rng::uniform(keys);
                let mut acc = 0.0;
                for &(z, w) in atoms {
                    acc += w;
                    if u < acc {
                        return mu + z;
                    }
                }
                mu + atoms[atoms.len() - 1].0
            }
            Noise::SharpPeak { alpha, scale } => {
                let mut s = rng::stream(keys);
                let u: f64 = s.random();
                let mag = scale * u.powf(1.0 / (1.0 - alpha));
                if s.random::<bool>() {
                    mu + mag
                } else {
                    mu - mag
                }
            }
        }
    }

    /// Point-mass profile with multiplier constant `c` in
    /// c_P = c · ln(|S| + k) / (p − q).
    pub fn point_mass_profile(&self, c: f64) -> Option<PointMassProfile> {
        let atoms = match self {
            Noise::PointMass { atoms } => atoms.clone(),
            Noise::Deterministic => vec![(0.0, 1.0)],
            _ => return None,
        };
        let p = atoms.iter().map(|a| a.1).fold(0.0, f64::max);
        let top: Vec<f64> = atoms.iter().filter(|a| a.1 == p).map(|a| a.0).collect();
        let q = atoms.iter().map(|a| a.1).filter(|&w| w < p).fold(0.0, f64::max);
        let k = top.len() as f64 + if q > 0.0 { 1.0 / q } else { 0.0 };
        let c_p = c * (top.len() as f64 + k).ln() / (p - q);
        Some(PointMassProfile { top, p, q, c_p })
    }
}
