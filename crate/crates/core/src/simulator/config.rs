use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algorithm::Algorithm;
use crate::bandit::{BoundaryAlg, NaiveAlg, QuotaConfig, Variant, Zooming, ZoomingConfig};
use crate::experts::{Explorer, FreePeekExperts, NaiveExp, NaiveExpMode, PeekRadius, WellOrderedBandit, DEFAULT_HITTING_CAP};
use crate::instances::{Environment, InstanceError, InstanceSpec};
use crate::metric::{Decomposition, Region, SpaceRef};

fn one() -> f64 {
    1.0
}

fn cap() -> usize {
    DEFAULT_HITTING_CAP
}

fn two() -> f64 {
    2.0
}

fn five() -> u32 {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    Zooming {
        #[serde(flatten)]
        config: ZoomingConfig,
    },
    ZoomingQuota {
        #[serde(flatten)]
        config: ZoomingConfig,
        /// S_0 = all, S_1, ..., nested.
        layers: Vec<Region>,
        d: f64,
    },
    PerMetric {
        #[serde(flatten)]
        config: ZoomingConfig,
        layers: Vec<Region>,
        d: f64,
    },
    Naive {
        d: f64,
        #[serde(default = "one")]
        c: f64,
        #[serde(default = "cap")]
        cap: usize,
    },
    Boundary {
        phases: usize,
        #[serde(default = "cap")]
        cap: usize,
    },
    NaiveExp {
        b: f64,
        #[serde(default)]
        mode: NaiveExpMode,
        #[serde(default = "cap")]
        cap: usize,
    },
    WellOrderedBandit {
        #[serde(default)]
        explorer: Explorer,
        /// Exploration budget g(t) = (ln t)^power.
        #[serde(default = "two")]
        power: f64,
        #[serde(default = "five")]
        max_phase: u32,
    },
    FreePeek {
        #[serde(default)]
        explorer: Explorer,
        #[serde(default)]
        radius: PeekRadius,
    },
}

impl AlgorithmSpec {
    pub fn build(&self, space: &SpaceRef) -> Result<Box<dyn Algorithm>, InstanceError> {
        let quota = |layers: &[Region], d: f64| -> Result<QuotaConfig, InstanceError> {
            let dec = Decomposition::new(space.clone(), layers.to_vec(), d)?;
            Ok(QuotaConfig { decomposition: Arc::new(dec), d })
        };
        Ok(match self {
            AlgorithmSpec::Zooming { config } => Box::new(Zooming::plain(space.clone(), config)?),
            AlgorithmSpec::ZoomingQuota { config, layers, d } => Box::new(Zooming::new(space.clone(), config, Variant::Quota(quota(layers, *d)?))?),
            AlgorithmSpec::PerMetric { config, layers, d } => Box::new(Zooming::new(space.clone(), config, Variant::PerMetric(quota(layers, *d)?))?),
            AlgorithmSpec::Naive { d, c, cap } => {
                if !(*d >= 0.0 && *c > 0.0) {
                    return Err(InstanceError::Invalid(format!("NaiveAlg needs d ≥ 0 and c > 0, got d={d}, c={c}")));
                }
                Box::new(NaiveAlg::new(space.clone(), *d, *c, *cap))
            }
            AlgorithmSpec::Boundary { phases, cap } => {
                if *phases == 0 || *phases > 30 {
                    return Err(InstanceError::Invalid(format!("boundary schedule needs 1..=30 phases, got {phases}")));
                }
                Box::new(BoundaryAlg::new(space.clone(), *phases, *cap))
            }
            AlgorithmSpec::NaiveExp { b, mode, cap } => Box::new(NaiveExp::new(space.clone(), *b, *mode, *cap)?),
            AlgorithmSpec::WellOrderedBandit { explorer, power, max_phase } => Box::new(WellOrderedBandit::new(space.clone(), *explorer, *power, *max_phase)?),
            AlgorithmSpec::FreePeek { explorer, radius } => Box::new(FreePeekExperts::new(space.clone(), *explorer, *radius)?),
        })
    }

    pub fn build_for(&self, env: &dyn Environment) -> Result<Box<dyn Algorithm>, InstanceError> {
        self.build(env.space())
    }
}

/// One experiment: instance, algorithm, horizon and seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub instance: InstanceSpec,
    pub algorithm: AlgorithmSpec,
    pub horizon: u64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub keep_events: bool,
    /// Draw a fresh instance per run, seeded with the run seed.
    #[serde(default)]
    pub instance_per_seed: bool,
}

impl RunConfig {
    /// The instance used by the run with this seed.
    pub fn instance_for(&self, seed: u64) -> InstanceSpec {
        if self.instance_per_seed {
            self.instance.reseeded(seed)
        } else {
            self.instance.clone()
        }
    }
}

fn default_seeds() -> Vec<u64> {
    vec![1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_builds() {
        let js = r#"{
            "instance": {"kind": "payoff", "space": {"kind": "interval"},
                         "payoff": {"kind": "cones", "cones": [[{"Real1D": 0.3}, 0.9]]}},
            "algorithm": {"kind": "zooming", "policy": {"kind": "sharp"}},
            "horizon": 64
        }"#;
        let cfg: RunConfig = serde_json::from_str(js).unwrap();
        assert_eq!(cfg.seeds, vec![1]);
        let env = cfg.instance.build().unwrap();
        let alg = cfg.algorithm.build_for(env.as_ref()).unwrap();
        assert!(alg.name().starts_with("zooming"));
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn every_variant_builds_on_a_suitable_space() {
        let line: SpaceRef = Arc::new(crate::metric::Interval::new(1.0).unwrap());
        let harmonic: SpaceRef = Arc::new(crate::metric::Harmonic::new(10).unwrap());
        let layers = vec![Region::All, Region::Segments(vec![crate::metric::Segment::closed(0.2, 0.4)])];
        let specs = [
            (AlgorithmSpec::Zooming { config: ZoomingConfig::default() }, &line),
            (AlgorithmSpec::ZoomingQuota { config: ZoomingConfig::default(), layers: layers.clone(), d: 1.0 }, &line),
            (AlgorithmSpec::PerMetric { config: ZoomingConfig::default(), layers, d: 1.0 }, &line),
            (AlgorithmSpec::Naive { d: 1.0, c: 1.0, cap: 1000 }, &line),
            (AlgorithmSpec::Boundary { phases: 4, cap: 1000 }, &line),
            (AlgorithmSpec::NaiveExp { b: 1.0, mode: NaiveExpMode::Standard, cap: 1000 }, &line),
            (AlgorithmSpec::WellOrderedBandit { explorer: Explorer::Ordering, power: 2.0, max_phase: 3 }, &harmonic),
            (AlgorithmSpec::FreePeek { explorer: Explorer::Rank, radius: PeekRadius::Log }, &harmonic),
        ];
        for (spec, space) in specs {
            let mut a = spec.build(space).unwrap();
            a.act(1);
        }
        assert!(AlgorithmSpec::Naive { d: -1.0, c: 1.0, cap: 10 }.build(&line).is_err());
    }
}
