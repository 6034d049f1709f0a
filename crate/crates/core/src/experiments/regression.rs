use log::warn;
use serde::Serialize;

/// `f(x) = alpha / x^beta` fitted on the log-log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub beta: f64,
    /// Residual sum of squares in log space.
    pub residual: f64,
    pub points_used: usize,
    pub points_excluded: usize,
}

impl PowerLawFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.alpha / x.powf(self.beta)
    }
}

/// Least-squares line through `(ln x, ln y)`; `alpha = exp(intercept)`,
/// `beta = -slope`. Points with a non-positive coordinate are dropped with a
/// warning. `None` with fewer than two usable points or a single abscissa.
pub fn fit_power_law(points: &[(f64, f64)]) -> Option<PowerLawFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    let excluded = points.len() - logs.len();
    if excluded > 0 {
        warn!("power-law fit: {excluded} point(s) with non-positive values excluded");
    }
    let n = logs.len() as f64;
    if logs.len() < 2 {
        return None;
    }
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Some(PowerLawFit {
        alpha: intercept.exp(),
        beta: -slope,
        residual,
        points_used: logs.len(),
        points_excluded: excluded,
    })
}
