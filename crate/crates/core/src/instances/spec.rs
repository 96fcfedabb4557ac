//! Serializable instance descriptions used by configs and the CLI.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{BanditNeedle, BiasSchedule, BumpCenter, EnvRef, ExpertsNeedle, FeedbackMode, InstanceError, LipschitzEnv, LogTFamily, Noise, Payoff, Restricted};
use crate::metric::{build_ball_tree_binary, build_ball_tree_strength_at, BallTree, Point, SpaceRef, SpaceSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeSpec {
    Binary {
        depth: usize,
    },
    Strength {
        d: f64,
        depth: usize,
        #[serde(default)]
        root: Option<Point>,
    },
}

impl TreeSpec {
    pub fn build(&self, space: SpaceRef) -> Result<BallTree, InstanceError> {
        Ok(match self {
            TreeSpec::Binary { depth } => build_ball_tree_binary(space, *depth)?,
            TreeSpec::Strength { d, depth, root } => build_ball_tree_strength_at(space, *d, *depth, root.clone())?,
        })
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeSpec::Binary { depth } | TreeSpec::Strength { depth, .. } => *depth,
        }
    }
}

fn bernoulli() -> Noise {
    Noise::Bernoulli
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceKind {
    Payoff {
        space: SpaceSpec,
        payoff: Payoff,
        #[serde(default = "bernoulli")]
        noise: Noise,
        #[serde(default)]
        relaxed: bool,
    },
    RandomCones {
        space: SpaceSpec,
        count: usize,
        lo: f64,
        hi: f64,
        #[serde(default)]
        seed: u64,
        #[serde(default = "bernoulli")]
        noise: Noise,
    },
    BanditNeedle {
        space: SpaceSpec,
        tree: TreeSpec,
        #[serde(default)]
        seed: u64,
        /// Explicit lineage of node ids; sampled from `seed` when absent.
        #[serde(default)]
        lineage: Option<Vec<usize>>,
    },
    ExpertsNeedle {
        space: SpaceSpec,
        tree: TreeSpec,
        schedule: BiasSchedule,
        #[serde(default)]
        seed: u64,
    },
    LogT {
        space: SpaceSpec,
        x_star: Point,
        sequence: Vec<Point>,
        index: usize,
        #[serde(default)]
        center: BumpCenter,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    #[serde(flatten)]
    pub kind: InstanceKind,
    /// Feedback modes exposed; all when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback: Option<Vec<FeedbackMode>>,
}

impl From<InstanceKind> for InstanceSpec {
    fn from(kind: InstanceKind) -> Self {
        InstanceSpec { kind, feedback: None }
    }
}

impl InstanceSpec {
    /// The same description with its instance seed replaced, for kinds
    /// that draw from one. Other kinds are returned unchanged.
    pub fn reseeded(&self, new_seed: u64) -> InstanceSpec {
        let mut out = self.clone();
        match &mut out.kind {
            InstanceKind::RandomCones { seed, .. } | InstanceKind::BanditNeedle { seed, lineage: None, .. } | InstanceKind::ExpertsNeedle { seed, .. } => {
                *seed = new_seed
            }
            _ => {}
        }
        out
    }

    pub fn build(&self) -> Result<EnvRef, InstanceError> {
        let env: EnvRef = match &self.kind {
            InstanceKind::Payoff { space, payoff, noise, relaxed } => Arc::new(LipschitzEnv::new(space.build()?, payoff.clone(), noise.clone(), *relaxed)?),
            InstanceKind::RandomCones { space, count, lo, hi, seed, noise } => {
                if !(0.0 <= *lo && lo <= hi && *hi <= 1.0) || *count == 0 {
                    return Err(InstanceError::Invalid(format!("random cones need 0 ≤ lo ≤ hi ≤ 1 and count > 0, got {count} in [{lo}, {hi}]")));
                }
                let s = space.build()?;
                let payoff = Payoff::random_cones(&s, *count, *lo, *hi, *seed);
                Arc::new(LipschitzEnv::new(s, payoff, noise.clone(), false)?)
            }
            InstanceKind::BanditNeedle { space, tree, seed, lineage } => {
                let t = Arc::new(tree.build(space.build()?)?);
                match lineage {
                    Some(l) => Arc::new(BanditNeedle::with_lineage(t, l.clone())?),
                    None => Arc::new(BanditNeedle::sampled(t, tree.depth(), *seed)),
                }
            }
            InstanceKind::ExpertsNeedle { space, tree, schedule, seed } => {
                let t = Arc::new(tree.build(space.build()?)?);
                Arc::new(ExpertsNeedle::sampled(t, schedule, tree.depth(), *seed)?)
            }
            InstanceKind::LogT { space, x_star, sequence, index, center } => {
                Arc::new(LogTFamily::new(space.build()?, x_star.clone(), sequence.clone(), *index, *center)?)
            }
        };
        Ok(match &self.feedback {
            Some(modes) => Arc::new(Restricted { inner: env, modes: modes.clone() }),
            None => env,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_build() {
        let text = r#"{"kind":"random_cones","space":{"kind":"interval"},"count":3,"lo":0.5,"hi":0.9,"seed":4,"feedback":["bandit"]}"#;
        let spec: InstanceSpec = serde_json::from_str(text).unwrap();
        let env = spec.build().unwrap();
        assert!(env.supports(FeedbackMode::Bandit));
        assert!(!env.supports(FeedbackMode::Full));
        let back: InstanceSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn needle_specs_build() {
        let text = r#"{"kind":"bandit_needle","space":{"kind":"interval"},"tree":{"kind":"binary","depth":5},"seed":7}"#;
        let env = serde_json::from_str::<InstanceSpec>(text).unwrap().build().unwrap();
        assert!(env.mu_star() > 1.0 / 3.0);
        let text = r#"{"kind":"experts_needle","space":{"kind":"interval"},"tree":{"kind":"binary","depth":4},"schedule":{"kind":"constant","value":0.2}}"#;
        let env = serde_json::from_str::<InstanceSpec>(text).unwrap().build().unwrap();
        assert!(env.correlated());
    }

    #[test]
    fn reseeding_changes_random_instances_only() {
        let cones: InstanceSpec = InstanceKind::RandomCones { space: SpaceSpec::Interval { exponent: 1.0, eta: None }, count: 2, lo: 0.1, hi: 0.9, seed: 0, noise: Noise::Bernoulli }.into();
        let InstanceKind::RandomCones { seed, .. } = cones.reseeded(9).kind else { panic!() };
        assert_eq!(seed, 9);
        let fixed: InstanceSpec = InstanceKind::Payoff { space: SpaceSpec::Interval { exponent: 1.0, eta: None }, payoff: Payoff::Constant { value: 0.5 }, noise: Noise::Bernoulli, relaxed: false }.into();
        assert_eq!(fixed.reseeded(9), fixed);
    }

    #[test]
    fn bad_cone_range_is_rejected() {
        let spec: InstanceSpec = InstanceKind::RandomCones { space: SpaceSpec::Interval { exponent: 1.0, eta: None }, count: 2, lo: 0.9, hi: 0.1, seed: 0, noise: Noise::Bernoulli }.into();
        assert!(spec.build().is_err());
    }
}
