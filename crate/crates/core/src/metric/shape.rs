//! Non-increasing shape functions f: [0,1] → [0,1] used by target-set
//! instances and quasi-distance transforms.

use serde::{Deserialize, Serialize};

use super::MetricError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// max(floor, top − slope·z)
    Linear {
        top: f64,
        #[serde(default)]
        floor: f64,
        #[serde(default = "one")]
        slope: f64,
    },
    /// max(floor, top − z^{1/alpha})
    Power { top: f64, floor: f64, alpha: f64 },
    /// Piecewise-linear interpolation of (z, f) knots, constant past the ends.
    Table(Vec<(f64, f64)>),
}

fn one() -> f64 {
    1.0
}

impl Shape {
    pub fn eval(&self, z: f64) -> f64 {
        match self {
            Shape::Linear { top, floor, slope } => (top - slope * z).max(*floor),
            Shape::Power { top, floor, alpha } => (top - z.powf(1.0 / alpha)).max(*floor),
            Shape::Table(k) => {
                if z <= k[0].0 {
                    return k[0].1;
                }
                for w in k.windows(2) {
                    let ((z0, f0), (z1, f1)) = (w[0], w[1]);
                    if z <= z1 {
                        return f0 + (f1 - f0) * (z - z0) / (z1 - z0);
                    }
                }
                k[k.len() - 1].1
            }
        }
    }

    pub fn top(&self) -> f64 {
        self.eval(0.0)
    }

    /// Checks range and monotonicity on a fine grid plus all knots.
    pub fn validate(&self) -> Result<(), MetricError> {
        if let Shape::Table(k) = self {
            if k.is_empty() || k.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(MetricError::Invalid("shape table needs increasing knots".into()));
            }
        }
        if let Shape::Power { alpha, .. } = self {
            if !(*alpha > 0.0) {
                return Err(MetricError::Invalid("shape exponent must be positive".into()));
            }
        }
        let mut prev = f64::INFINITY;
        for i in 0..=4096 {
            let v = self.eval(i as f64 / 4096.0);
            if !(0.0..=1.0).contains(&v) {
                return Err(MetricError::Invalid(format!("shape leaves [0,1]: f = {v}")));
            }
            if v > prev + 1e-15 {
                return Err(MetricError::Invalid("shape must be non-increasing".into()));
            }
            prev = v;
        }
        Ok(())
    }

    /// Lipschitz constant of f on [0,1] (∞ for power shapes with alpha > 1).
    pub fn lipschitz(&self) -> f64 {
        match self {
            Shape::Linear { slope, .. } => slope.abs(),
            Shape::Power { alpha, .. } => {
                if *alpha <= 1.0 {
                    1.0 / alpha
                } else {
                    f64::INFINITY
                }
            }
            Shape::Table(k) => k.windows(2).map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs()).fold(0.0, f64::max),
        }
    }
}
