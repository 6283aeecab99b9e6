//! Robustness metrics derived from a ratio series, and prediction error.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::ActivitySeries;
use crate::scalar::Scalar;

/// Weeks making up "the last month".
pub const LAST_MONTH_WEEKS: usize = 4;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("at least 2 ratios are required, got {0}")]
    TooFewRatios(usize),
    #[error("kappa1 must be positive, got {0}")]
    InvalidKappa(f64),
    #[error("zero variance: mass undefined")]
    ZeroVariance,
    #[error("activity series is empty")]
    NoActivity,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// Population standard deviation of the ratios divided by κ₁ (ρ).
pub fn normalized_ratio_sd<T: Scalar>(ratios: &[T], kappa1: T) -> Result<T, MetricsError> {
    if ratios.len() < 2 {
        return Err(MetricsError::TooFewRatios(ratios.len()));
    }
    if !(kappa1 > T::zero()) {
        return Err(MetricsError::InvalidKappa(kappa1.as_f64()));
    }
    let n = T::of_usize(ratios.len());
    let mean = ratios.iter().copied().sum::<T>() / n;
    let var = ratios.iter().map(|&r| (r - mean) * (r - mean)).sum::<T>() / n;
    Ok(var.sqrt() / kappa1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumReport {
    pub rho: f64,
    /// `1 / rho`.
    pub system_mass: f64,
    pub activity_mean_weekly: f64,
    pub activity_last_month: f64,
    pub momentum_average: f64,
    pub momentum_last_month: f64,
}

impl MomentumReport {
    /// Builds the report from `rho` and the two activity summaries.
    pub fn new(rho: f64, activity_mean_weekly: f64, activity_last_month: f64) -> Result<Self, MetricsError> {
        if rho == 0.0 {
            return Err(MetricsError::ZeroVariance);
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(MetricsError::ShapeMismatch(format!("rho must be positive, got {rho}")));
        }
        let system_mass = 1.0 / rho;
        Ok(Self {
            rho,
            system_mass,
            activity_mean_weekly,
            activity_last_month,
            momentum_average: system_mass * activity_mean_weekly,
            momentum_last_month: system_mass * activity_last_month,
        })
    }
}

/// Activity Momentum from `rho` and weekly activity totals. The last month is
/// the final [`LAST_MONTH_WEEKS`] weeks (or all weeks if fewer).
pub fn momentum<T: Scalar>(rho: T, weekly_activity: &[T]) -> Result<MomentumReport, MetricsError> {
    if weekly_activity.is_empty() {
        return Err(MetricsError::NoActivity);
    }
    let n = weekly_activity.len();
    let mean = weekly_activity.iter().map(|v| v.as_f64()).sum::<f64>() / n as f64;
    let last_month = weekly_activity[n.saturating_sub(LAST_MONTH_WEEKS)..]
        .iter()
        .map(|v| v.as_f64())
        .sum();
    MomentumReport::new(rho.as_f64(), mean, last_month)
}

impl fmt::Display for MomentumReport {
    /// One row in the column layout `Activity (last month) | rho | System
    /// Mass | Activity Momentum (last month)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<24} {:>8} {:>12} {:>34}",
            "Activity (last month)", "rho", "System Mass", "Activity Momentum (last month)"
        )?;
        write!(
            f,
            "{:<24} {:>8.4} {:>12.2} {:>34}",
            format!("{:.0} ({:.0})", self.activity_mean_weekly, self.activity_last_month),
            self.rho,
            self.system_mass,
            format!("{:.0} ({:.0})", self.momentum_average, self.momentum_last_month)
        )
    }
}

/// Root mean squared error per user and week between two aligned series.
pub fn rmse_per_user_week<T: Scalar>(
    empirical: &ActivitySeries<T>,
    predicted: &ActivitySeries<T>,
) -> Result<T, MetricsError> {
    if empirical.users() != predicted.users() || empirical.weeks() != predicted.weeks() {
        return Err(MetricsError::ShapeMismatch(format!(
            "{}x{} vs {}x{} (users x weeks), or labels differ",
            empirical.n_users(),
            empirical.n_weeks(),
            predicted.n_users(),
            predicted.n_weeks()
        )));
    }
    rmse(empirical.values(), predicted.values())
}

/// RMSE over two equally shaped row-major matrices.
pub fn rmse<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> Result<T, MetricsError> {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.len() != y.len()) {
        return Err(MetricsError::ShapeMismatch("matrix shapes differ".into()));
    }
    let count: usize = a.iter().map(Vec::len).sum();
    if count == 0 {
        return Err(MetricsError::NoActivity);
    }
    let sse: T = a
        .iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (*p - *q) * (*p - *q)))
        .sum();
    Ok((sse / T::of_usize(count)).sqrt())
}
