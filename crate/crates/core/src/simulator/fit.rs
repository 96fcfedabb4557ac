use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("only {0} checkpoints in the window (need at least 4)")]
    TooFewPoints(usize),
    #[error("exponent undefined (zero regret in the window)")]
    ZeroRegret,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub points: usize,
}

/// Least-squares slope of ln R against ln t over checkpoints with
/// t in [lo, hi].
pub fn slope_fit(points: &[(f64, f64)], lo: f64, hi: f64) -> Result<SlopeFit, FitError> {
    let window: Vec<(f64, f64)> = points.iter().copied().filter(|&(t, _)| t >= lo && t <= hi).collect();
    if window.len() < 4 {
        return Err(FitError::TooFewPoints(window.len()));
    }
    if window.iter().any(|&(_, r)| !(r > 0.0)) {
        return Err(FitError::ZeroRegret);
    }
    let xy: Vec<(f64, f64)> = window.iter().map(|&(t, r)| (t.ln(), r.ln())).collect();
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xy.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(SlopeFit { slope, intercept, residual, points: xy.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn powers(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (0..=20).map(|k| (2f64.powi(k), f(2f64.powi(k)))).collect()
    }

    #[test]
    fn exact_power() {
        let f = slope_fit(&powers(|t| t.powf(0.75)), 4096.0, 131072.0).unwrap();
        assert!((f.slope - 0.75).abs() < 1e-9);
        assert!(f.residual < 1e-9);
        assert_eq!(f.points, 6);
    }

    #[test]
    fn linear() {
        let f = slope_fit(&powers(|t| 3.0 * t), 4096.0, 131072.0).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_factor_inflates_slope_moderately() {
        let f = slope_fit(&powers(|t| t.sqrt() * t.ln()), 4096.0, 131072.0).unwrap();
        assert!((0.5..=0.62).contains(&f.slope), "{}", f.slope);
    }

    #[test]
    fn errors() {
        assert_eq!(slope_fit(&powers(|_| 0.0), 4096.0, 131072.0), Err(FitError::ZeroRegret));
        assert_eq!(slope_fit(&powers(|t| t), 4096.0, 10000.0), Err(FitError::TooFewPoints(2)));
    }
}
