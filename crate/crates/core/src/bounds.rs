//! Analytic RMSE bounds for RPE and empirical error statistics.
//!
//! The bound treats each generation as failing when sampling noise pushes the
//! empirical point past the deterministic angular margin left by an additive
//! error `δ`. Bias of size `δ` in both channels moves the point by at most
//! `√8·δ` (in centered units), so the angle is off by at most `arcsin(√8·δ)`
//! and `π/2 − arcsin(√8·δ)` of margin remains before the wrong branch is
//! chosen. A Hoeffding tail on each of the four channel deviations, with a
//! union over generations, bounds the total failure probability `P`. The RMSE
//! is then at most `√((1 − P)(π/2L_max)² + P·π²)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::wrap_angle;

/// Largest additive error for which the bound is finite.
pub const DELTA_THRESHOLD: f64 = 0.353_553_390_593_273_8; // 1/√8

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: u64,
    pub l_max: u64,
    pub delta: f64,
}

impl BoundParams {
    pub fn new(n: u64, l_max: u64, delta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if l_max == 0 || !l_max.is_power_of_two() {
            return Err(Error::invalid(format!(
                "l_max must be a power of two, got {l_max}"
            )));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::invalid(format!(
                "delta must be finite and nonnegative, got {delta}"
            )));
        }
        Ok(BoundParams { n, l_max, delta })
    }

    pub fn generations(&self) -> u32 {
        self.l_max.trailing_zeros() + 1
    }
}

/// RMSE floor reached once every generation succeeds.
pub fn rmse_floor(l_max: u64) -> f64 {
    PI / (2.0 * l_max as f64)
}

/// Union bound on the probability that any generation picks the wrong branch.
pub fn failure_probability(p: &BoundParams) -> f64 {
    if p.delta >= DELTA_THRESHOLD {
        return 1.0;
    }
    let margin = PI / 2.0 - (8f64.sqrt() * p.delta).asin();
    let u = margin.sin() / (2.0 * 2f64.sqrt());
    let per_generation = 4.0 * (-2.0 * p.n as f64 * u * u).exp();
    (per_generation * p.generations() as f64).min(1.0)
}

/// Upper bound on the RMSE of the final estimate; `π` when `δ ≥ 1/√8`.
pub fn rmse_bound(p: &BoundParams) -> f64 {
    if p.delta >= DELTA_THRESHOLD {
        return PI;
    }
    let fail = failure_probability(p);
    let floor = rmse_floor(p.l_max);
    ((1.0 - fail) * floor * floor + fail * PI * PI).sqrt()
}

/// `√(mean((estimate − reference)²))` with differences wrapped into `(−π, π]`.
pub fn rmse_over_trials(estimates: &[f64], reference: f64) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::invalid("no estimates"));
    }
    let ms = estimates
        .iter()
        .map(|e| wrap_angle(e - reference).powi(2))
        .sum::<f64>()
        / estimates.len() as f64;
    Ok(ms.sqrt())
}

/// `|circular mean(estimates) − reference|`, the deviation of the averaged estimate.
pub fn mean_estimate_deviation(estimates: &[f64], reference: f64) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::invalid("no estimates"));
    }
    let mean = estimates
        .iter()
        .map(|e| wrap_angle(e - reference))
        .sum::<f64>()
        / estimates.len() as f64;
    Ok(mean.abs())
}

/// Power law `y = constant · x^exponent` fitted in log-log space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub constant: f64,
    pub r_squared: f64,
}

/// Ordinary least squares on `(ln x, ln y)`, all points weighted equally.
pub fn scaling_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, y)) = points
        .iter()
        .find(|(x, y)| !(x.is_finite() && y.is_finite() && *x > 0.0 && *y > 0.0))
    {
        return Err(Error::invalid(format!(
            "points must be finite and positive, got ({x}, {y})"
        )));
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("abscissae must not all be equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = logs
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(ScalingFit {
        exponent: slope,
        constant: intercept.exp(),
        r_squared,
    })
}
