//! Least-squares power-law fits `y ≈ C·x^p` in log-log coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    /// Exponent `p`.
    pub slope: f64,
    /// `log C`.
    pub intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub rms_residual: f64,
    pub r_squared: f64,
}

/// Fits `log y = intercept + slope·log x`. All inputs must be positive.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<PowerFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(domain("power-law fit needs at least two (x, y) pairs of equal length"));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(domain("power-law fit needs strictly positive finite data"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(domain("power-law fit needs at least two distinct x values"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    Ok(PowerFit {
        slope,
        intercept,
        rms_residual: (ss_res / n).sqrt(),
        r_squared: if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 },
    })
}

/// Slopes between consecutive points, `Δlog y / Δlog x`.
pub fn local_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| (ys[1] / ys[0]).ln() / (xs[1] / xs[0]).ln())
        .collect()
}
