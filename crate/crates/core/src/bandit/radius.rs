//! Confidence radii and the estimator/radius pairs for known noise models.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::instances::{InstanceError, Noise, PointMassProfile};

/// sqrt(8·phase / (1 + n)).
pub fn confidence_radius(n: u64, phase: u32) -> f64 {
    (8.0 * phase as f64 / (1.0 + n as f64)).sqrt()
}

/// α/(1+n) + sqrt(α(1 − mean)/(1+n)) with α = c_alpha·phase.
pub fn sharp_radius(n: u64, mean: f64, phase: u32, c_alpha: f64) -> f64 {
    let a = c_alpha * phase as f64;
    let m = 1.0 + n as f64;
    a / m + (a * (1.0 - mean).max(0.0) / m).sqrt()
}

/// α/n + sqrt(α·x/n), the radius of the concentration bound for averages
/// of n variables on [0,1].
pub fn chernoff_radius(alpha: f64, x: f64, n: u64) -> f64 {
    let n = n as f64;
    alpha / n + (alpha * x.max(0.0) / n).sqrt()
}

fn default_c_alpha() -> f64 {
    16.0
}

fn default_point_mass_c() -> f64 {
    8.0
}

fn default_peak_c() -> f64 {
    4.0
}

/// How an arm's estimate and confidence radius are computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusPolicy {
    Standard,
    Sharp {
        #[serde(default = "default_c_alpha")]
        c_alpha: f64,
    },
    /// Exact rewards: the first sample is the mean.
    Deterministic,
    /// Noise with atoms; switches to the atom-matching estimator after
    /// c_P·ln T samples.
    PointMass {
        atoms: Vec<(f64, f64)>,
        #[serde(default = "default_point_mass_c")]
        c: f64,
    },
    /// Noise density ~ |z|^{−alpha} near zero; histogram-mode estimator.
    SharpPeak {
        alpha: f64,
        #[serde(default = "default_peak_c")]
        c: f64,
    },
    Normal { sigma: f64 },
}

impl RadiusPolicy {
    pub fn validate(&self) -> Result<(), InstanceError> {
        let bad = |m: String| Err(InstanceError::Invalid(m));
        match self {
            RadiusPolicy::Sharp { c_alpha } if !(*c_alpha > 0.0) => bad(format!("c_alpha must be positive, got {c_alpha}")),
            RadiusPolicy::PointMass { atoms, c } => {
                if !(*c > 0.0) {
                    return bad(format!("point-mass constant must be positive, got {c}"));
                }
                Noise::PointMass { atoms: atoms.clone() }.validate()
            }
            RadiusPolicy::SharpPeak { alpha, c } if !(*alpha > 0.0 && *alpha < 1.0 && *c > 0.0) => {
                bad(format!("sharp-peak policy needs alpha in (0,1) and C > 0, got {alpha}, {c}"))
            }
            RadiusPolicy::Normal { sigma } if !(*sigma >= 0.0) => bad(format!("σ must be non-negative, got {sigma}")),
            _ => Ok(()),
        }
    }

    /// The policy matched to an environment's noise model, if any.
    pub fn for_noise(noise: &Noise) -> RadiusPolicy {
        match noise {
            Noise::Deterministic => RadiusPolicy::Deterministic,
            Noise::PointMass { atoms } => RadiusPolicy::PointMass { atoms: atoms.clone(), c: default_point_mass_c() },
            Noise::SharpPeak { alpha, .. } => RadiusPolicy::SharpPeak { alpha: *alpha, c: default_peak_c() },
            Noise::Normal { sigma } => RadiusPolicy::Normal { sigma: *sigma },
            Noise::Bernoulli => RadiusPolicy::Standard,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RadiusPolicy::Standard => "standard",
            RadiusPolicy::Sharp { .. } => "sharp",
            RadiusPolicy::Deterministic => "deterministic",
            RadiusPolicy::PointMass { .. } => "point_mass",
            RadiusPolicy::SharpPeak { .. } => "sharp_peak",
            RadiusPolicy::Normal { .. } => "normal",
        }
    }

    /// Fresh per-arm statistics suited to this policy.
    pub fn new_stats(&self) -> ArmStats {
        let tally = match self {
            RadiusPolicy::PointMass { .. } => Tally::Counts(HashMap::new()),
            RadiusPolicy::SharpPeak { .. } => Tally::Samples(vec![]),
            _ => Tally::Plain,
        };
        ArmStats { n: 0, sum: 0.0, tally }
    }

    /// Precomputed form used inside a run.
    pub fn estimator(&self) -> Result<Estimator, InstanceError> {
        self.validate()?;
        let profile = match self {
            RadiusPolicy::PointMass { atoms, c } => Noise::PointMass { atoms: atoms.clone() }.point_mass_profile(*c),
            _ => None,
        };
        Ok(Estimator { policy: self.clone(), profile })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tally {
    Plain,
    /// Reward bit patterns and their multiplicities.
    Counts(HashMap<u64, u64>),
    /// All rewards, sorted.
    Samples(Vec<f64>),
}

/// Per-arm sufficient statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmStats {
    pub n: u64,
    pub sum: f64,
    tally: Tally,
}

impl ArmStats {
    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }

    pub fn push(&mut self, reward: f64) {
        self.n += 1;
        self.sum += reward;
        match &mut self.tally {
            Tally::Plain => {}
            Tally::Counts(m) => *m.entry(reward.to_bits()).or_insert(0) += 1,
            Tally::Samples(v) => {
                let at = v.partition_point(|&z| z < reward);
                v.insert(at, reward);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Estimator {
    policy: RadiusPolicy,
    profile: Option<PointMassProfile>,
}

impl Estimator {
    pub fn policy(&self) -> &RadiusPolicy {
        &self.policy
    }

    /// (estimate, radius) for an arm in a phase of length `length`.
    pub fn estimate(&self, s: &ArmStats, phase: u32, length: u64) -> (f64, f64) {
        let r = confidence_radius(s.n, phase);
        if s.n == 0 {
            let fresh = match self.policy {
                RadiusPolicy::Sharp { c_alpha } => sharp_radius(0, 0.0, phase, c_alpha),
                RadiusPolicy::SharpPeak { .. } => f64::INFINITY,
                RadiusPolicy::Normal { sigma } => sigma * r,
                _ => r,
            };
            return (0.0, fresh);
        }
        let mean = s.mean();
        match &self.policy {
            RadiusPolicy::Standard => (mean, r),
            RadiusPolicy::Sharp { c_alpha } => (mean, sharp_radius(s.n, mean, phase, *c_alpha)),
            RadiusPolicy::Normal { sigma } => (mean, sigma * r),
            RadiusPolicy::Deterministic => (mean, 0.0),
            RadiusPolicy::PointMass { .. } => {
                let p = self.profile.as_ref().expect("validated point-mass policy");
                point_mass_estimate(s, p, length).unwrap_or((mean, r))
            }
            RadiusPolicy::SharpPeak { alpha, c } => {
                let rr = c * (phase as f64 / s.n as f64).powf(1.0 / (1.0 - alpha));
                let Tally::Samples(v) = &s.tally else { return (mean, rr) };
                (histogram_mode(v, rr / 2.0), rr)
            }
        }
    }
}

/// max(R) − max(S) once n exceeds c_P·ln T, where R holds the rewards
/// seen at least n(p+q)/2 times. `None` means fall back to the average.
fn point_mass_estimate(s: &ArmStats, p: &PointMassProfile, length: u64) -> Option<(f64, f64)> {
    if (s.n as f64) <= p.c_p * (length.max(2) as f64).ln() {
        return None;
    }
    let Tally::Counts(m) = &s.tally else { return None };
    let need = s.n as f64 * (p.p + p.q) / 2.0;
    let top_r = m.iter().filter(|(_, &k)| k as f64 >= need).map(|(b, _)| f64::from_bits(*b)).fold(f64::NEG_INFINITY, f64::max);
    if top_r == f64::NEG_INFINITY {
        return None;
    }
    let top_s = p.top.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some((top_r - top_s, 0.0))
}

/// Midpoint of the most populated bin [jw, (j+1)w) of sorted samples,
/// lowest bin on ties.
fn histogram_mode(sorted: &[f64], w: f64) -> f64 {
    if !(w > 0.0) || !w.is_finite() {
        return sorted.iter().sum::<f64>() / sorted.len() as f64;
    }
    let (mut best, mut best_n) = (f64::NAN, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let j = (sorted[i] / w).floor();
        let mut k = i;
        while k < sorted.len() && (sorted[k] / w).floor() == j {
            k += 1;
        }
        if k - i > best_n {
            best_n = k - i;
            best = (j + 0.5) * w;
        }
        i = k;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(policy: &RadiusPolicy, xs: &[f64]) -> ArmStats {
        let mut s = policy.new_stats();
        for &x in xs {
            s.push(x);
        }
        s
    }

    #[test]
    fn standard_radius_values() {
        assert_eq!(confidence_radius(0, 2), 4.0);
        assert_eq!(confidence_radius(31, 4), 1.0);
        for n in 0..100 {
            assert!(confidence_radius(n + 1, 3) < confidence_radius(n, 3));
        }
        assert!(confidence_radius(0, 1) > 1.0);
    }

    #[test]
    fn sharp_radius_values() {
        assert!((sharp_radius(99, 1.0, 1, 10.0) - 0.1).abs() < 1e-15);
        assert!((sharp_radius(99, 0.0, 1, 10.0) - (0.1 + 0.1f64.sqrt())).abs() < 1e-12);
        assert!((sharp_radius(99, 0.0, 1, 10.0) - 0.4162).abs() < 1e-4);
        for mean in [0.0, 0.3, 1.0] {
            for n in 0..1000 {
                assert!(sharp_radius(n + 1, mean, 2, 16.0) <= sharp_radius(n, mean, 2, 16.0));
            }
        }
    }

    #[test]
    fn deterministic_single_sample() {
        let p = RadiusPolicy::Deterministic;
        let e = p.estimator().unwrap();
        assert_eq!(e.estimate(&stats(&p, &[0.7]), 3, 8), (0.7, 0.0));
    }

    #[test]
    fn degenerate_point_mass_matches_deterministic_after_threshold() {
        let p = RadiusPolicy::PointMass { atoms: vec![(0.0, 1.0)], c: 8.0 };
        let e = p.estimator().unwrap();
        // c_P = 8 ln 2 ≈ 5.55, ln 16 ≈ 2.77: threshold ≈ 15.4 samples.
        let few = stats(&p, &[0.4; 10]);
        let (mu, r) = e.estimate(&few, 4, 16);
        assert!((mu - 0.4).abs() < 1e-12 && r == confidence_radius(10, 4));
        let many = stats(&p, &[0.4; 16]);
        assert_eq!(e.estimate(&many, 4, 16), (0.4, 0.0));
    }

    #[test]
    fn point_mass_recovers_mean_from_atoms() {
        let atoms = vec![(-0.1, 0.5), (0.3, 0.25), (-0.1, 0.25)];
        let p = RadiusPolicy::PointMass { atoms: atoms.clone(), c: 8.0 };
        let e = p.estimator().unwrap();
        let noise = Noise::PointMass { atoms };
        let xs: Vec<f64> = (0..400).map(|i| noise.draw(0.5, &[1, i])).collect();
        let (mu, r) = e.estimate(&stats(&p, &xs), 3, 8);
        assert_eq!(r, 0.0);
        assert!((mu - 0.5).abs() < 1e-12);
    }

    #[test]
    fn normal_scales_standard() {
        let p = RadiusPolicy::Normal { sigma: 0.1 };
        let e = p.estimator().unwrap();
        let (_, r) = e.estimate(&stats(&p, &[0.3, 0.5]), 5, 32);
        assert!((r - 0.1 * confidence_radius(2, 5)).abs() < 1e-15);
    }

    #[test]
    fn histogram_picks_densest_bin() {
        let v = [0.01, 0.02, 0.51, 0.52, 0.53, 0.9];
        assert!((histogram_mode(&v, 0.1) - 0.55).abs() < 1e-12);
        let p = RadiusPolicy::SharpPeak { alpha: 0.5, c: 4.0 };
        let e = p.estimator().unwrap();
        let (_, r) = e.estimate(&stats(&p, &v), 1, 2);
        assert!((r - 4.0 / 36.0).abs() < 1e-12);
    }
}
