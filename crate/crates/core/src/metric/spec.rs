//! Serializable space descriptors.

use std::sync::Arc;

use super::*;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceSpec {
    /// [0,1] with |x − y|^exponent.
    Interval {
        #[serde(default = "one")]
        exponent: f64,
        #[serde(default)]
        eta: Option<f64>,
    },
    Cube {
        dim: usize,
        #[serde(default = "one")]
        exponent: f64,
        #[serde(default)]
        eta: Option<f64>,
    },
    Tree {
        ratio: f64,
        branching: Branching,
        #[serde(default = "tree_depth")]
        max_depth: usize,
    },
    FatSubtree {
        #[serde(default = "half")]
        ratio: f64,
    },
    Finite {
        distances: Vec<Vec<f64>>,
        #[serde(default)]
        order: Option<Vec<u64>>,
        #[serde(default)]
        ranks: Option<Vec<usize>>,
    },
    UniformFinite {
        n: usize,
        #[serde(default = "one")]
        distance: f64,
    },
    Harmonic {
        n: usize,
    },
    Quasi {
        base: Box<SpaceSpec>,
        shape: Shape,
    },
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

fn tree_depth() -> usize {
    48
}

impl SpaceSpec {
    pub fn build(&self) -> Result<SpaceRef, MetricError> {
        Ok(match self {
            SpaceSpec::Interval { exponent, eta } => {
                let s = Interval::new(*exponent)?;
                Arc::new(match eta {
                    Some(e) => s.with_eta(positive(*e)?),
                    None => s,
                })
            }
            SpaceSpec::Cube { dim, exponent, eta } => {
                let s = Cube::new(*dim, *exponent)?;
                Arc::new(match eta {
                    Some(e) => s.with_eta(positive(*e)?),
                    None => s,
                })
            }
            SpaceSpec::Tree { ratio, branching, max_depth } => Arc::new(TreeSpace::new(*ratio, branching.clone(), *max_depth)?),
            SpaceSpec::FatSubtree { ratio } => Arc::new(TreeSpace::new(*ratio, Branching::FatSubtree, 48)?),
            SpaceSpec::Finite { distances, order, ranks } => {
                let mut s = FiniteSpace::new(distances.clone())?;
                if let Some(o) = order {
                    s = s.with_order(o.clone())?;
                }
                if let Some(r) = ranks {
                    s = s.with_ranks(r.clone())?;
                }
                Arc::new(s)
            }
            SpaceSpec::UniformFinite { n, distance } => Arc::new(FiniteSpace::uniform(*n, *distance)?),
            SpaceSpec::Harmonic { n } => Arc::new(Harmonic::new(*n)?),
            SpaceSpec::Quasi { base, shape } => Arc::new(QuasiSpace::new(base.build()?, shape.clone())?),
        })
    }
}

fn positive(e: f64) -> Result<f64, MetricError> {
    if e > 0.0 && e < 1.0 {
        Ok(e)
    } else {
        Err(MetricError::Invalid(format!("grid resolution must lie in (0,1), got {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_builds() {
        let s: SpaceSpec = serde_json::from_str(r#"{"kind":"interval","exponent":0.5}"#).unwrap();
        let sp = s.build().unwrap();
        assert!((sp.dist(&Point::Real1D(0.25), &Point::Real1D(0.0)) - 0.5).abs() < 1e-15);
        let t: SpaceSpec = serde_json::from_str(r#"{"kind":"tree","ratio":0.5,"branching":{"Uniform":[2]}}"#).unwrap();
        assert_eq!(t.build().unwrap().kind(), PointKind::TreePath);
    }

    #[test]
    fn bad_matrix_is_rejected() {
        let s = SpaceSpec::Finite { distances: vec![vec![0.0, 0.5], vec![0.4, 0.0]], order: None, ranks: None };
        assert!(s.build().is_err());
    }
}
