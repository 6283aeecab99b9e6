//! Synthetic fixtures: the karate club network, seeded initial activity and
//! trend scenarios.
//!
//! All randomness comes from ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64`, so outputs are identical on every platform.

mod karate;

use std::str::FromStr;

use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::CollaborationNetwork;
use crate::preprocess::{week_start, ActivitySeries, Provenance};
use crate::scalar::Scalar;

pub use karate::karate_club;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid activity range [{lo}, {hi})")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

/// The generator used for every seeded fixture.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent uniform activities in `[lo, hi)`, one per node.
pub fn random_initial_activity<T: Scalar>(
    net: &CollaborationNetwork,
    lo: T,
    hi: T,
    seed: u64,
) -> Result<Vec<T>, SynthError> {
    if !(lo >= T::zero() && lo < hi && hi.is_finite()) {
        return Err(SynthError::InvalidRange {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    let mut rng = seeded_rng(seed);
    let width = hi - lo;
    Ok((0..net.node_count())
        .map(|_| {
            let v = lo + width * T::cast(rng.random::<f64>());
            // rounding can land exactly on hi in single precision
            if v < hi {
                v
            } else {
                lo
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Increasing,
    Decreasing,
    Variable,
}

impl FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "increasing" | "inc" => Ok(Self::Increasing),
            "decreasing" | "dec" => Ok(Self::Decreasing),
            "variable" | "var" | "random" => Ok(Self::Variable),
            other => Err(format!("unknown scenario {other:?} (increasing, decreasing, variable)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub n_weeks: usize,
    pub seed: u64,
    /// Aggregate activity of the first week (centre level for `Variable`).
    pub base_level: f64,
    /// Weekly change of the aggregate (fluctuation half-width for `Variable`).
    pub step: f64,
    pub first_week: NaiveDate,
}

impl ScenarioSpec {
    /// 10 + 3 weeks starting on Monday 2024-01-01.
    pub fn new(kind: ScenarioKind, base_level: f64, step: f64, seed: u64) -> Self {
        Self {
            kind,
            n_weeks: 13,
            seed,
            base_level,
            step,
            first_week: NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(),
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidScenario(m.to_owned()));
        if self.n_weeks < 2 {
            return bad("n_weeks must be at least 2");
        }
        if !(self.base_level > 0.0 && self.base_level.is_finite()) {
            return bad("base_level must be positive");
        }
        if !(self.step >= 0.0 && self.step.is_finite()) {
            return bad("step must be non-negative");
        }
        Ok(())
    }

    /// The aggregate activity of each week.
    pub fn aggregates(&self) -> Vec<f64> {
        let mut rng = seeded_rng(self.seed);
        (0..self.n_weeks)
            .map(|k| {
                let k = k as f64;
                let level = match self.kind {
                    ScenarioKind::Increasing => self.base_level + self.step * k,
                    ScenarioKind::Decreasing => self.base_level - self.step * k,
                    ScenarioKind::Variable => self.base_level + self.step * (2.0 * rng.random::<f64>() - 1.0),
                };
                level.max(0.0)
            })
            .collect()
    }
}

/// Weekly per-user activity whose aggregate follows the scenario. Each week's
/// aggregate is split across users in proportion to `degree + 1`.
///
/// The seed only matters for `Variable`; the per-user split is deterministic.
pub fn scenario_series<T: Scalar>(
    spec: &ScenarioSpec,
    net: &CollaborationNetwork,
) -> Result<ActivitySeries<T>, SynthError> {
    spec.validate()?;
    let weights: Vec<f64> = net.degrees().iter().map(|&d| d as f64 + 1.0).collect();
    let norm: f64 = weights.iter().sum();
    let aggregates = spec.aggregates();
    let first = week_start(spec.first_week);
    let weeks = (0..spec.n_weeks)
        .map(|w| first + Duration::days(7 * w as i64))
        .collect();
    let values = weights
        .iter()
        .map(|w| aggregates.iter().map(|a| T::cast(a * w / norm)).collect())
        .collect();
    Ok(
        ActivitySeries::new(net.users().to_vec(), weeks, values, Provenance::Smoothed)
            .expect("scenario output is non-negative and contiguous"),
    )
}
