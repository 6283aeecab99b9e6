//! From contribution events to smoothed weekly per-user activity.
//!
//! Pipeline: [`bin_daily`] → [`rolling_mean`] → [`bin_weekly`] →
//! [`filter_and_trim`]. Days are UTC days and weeks are ISO weeks starting on
//! Monday.

mod series;

use std::collections::HashMap;

use chrono::{DateTime, Datelike, Duration, NaiveDate};
use thiserror::Error;

use crate::graph::{ContributionEvent, UserId};
use crate::scalar::Scalar;

pub use series::{week_start, ActivitySeries, Provenance};

const SECONDS_PER_DAY: i64 = 86_400;
/// Longest event span accepted for dense daily binning (about 200 years).
const MAX_SPAN_DAYS: i64 = 73_050;

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("event #{position}: timestamp {timestamp} is outside the supported range")]
    TimestampOutOfRange { position: usize, timestamp: i64 },
    #[error("events span {days} days, more than the supported {MAX_SPAN_DAYS}")]
    SpanTooLong { days: i64 },
    #[error("invalid activity series: {0}")]
    InvalidSeries(String),
    #[error("invalid preprocessing config: {0}")]
    InvalidConfig(String),
    #[error("user {0} has activity but is not in the network")]
    UnknownUser(UserId),
    #[error("empty dataset")]
    EmptyDataset,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessConfig {
    pub rolling_window_days: usize,
    /// Users whose smoothed total is below this are dropped.
    pub min_total_activity: f64,
    pub window_weeks: usize,
    /// Extra weeks before the window, consumed by the first ratio fit.
    pub lead_weeks: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            rolling_window_days: 7,
            min_total_activity: 1.0,
            window_weeks: 52,
            lead_weeks: 3,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<(), PreprocessError> {
        if self.rolling_window_days == 0 || self.window_weeks == 0 {
            return Err(PreprocessError::InvalidConfig(
                "rolling_window_days and window_weeks must be positive".into(),
            ));
        }
        if !(self.min_total_activity.is_finite() && self.min_total_activity >= 0.0) {
            return Err(PreprocessError::InvalidConfig(format!(
                "min_total_activity must be finite and non-negative, got {}",
                self.min_total_activity
            )));
        }
        Ok(())
    }

    pub fn total_weeks(&self) -> usize {
        self.window_weeks + self.lead_weeks
    }
}

/// Integer contributions per user per UTC day, dense over the event span.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyCounts {
    pub users: Vec<UserId>,
    pub first_day: NaiveDate,
    /// `counts[u][d]` for day `first_day + d`.
    pub counts: Vec<Vec<u32>>,
}

impl DailyCounts {
    pub fn n_days(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }

    /// The counts as a real-valued daily series.
    pub fn to_series<T: Scalar>(&self) -> DailySeries<T> {
        DailySeries {
            users: self.users.clone(),
            first_day: self.first_day,
            values: self
                .counts
                .iter()
                .map(|r| r.iter().map(|&c| T::cast(c as f64)).collect())
                .collect(),
            provenance: Provenance::Raw,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries<T> {
    pub users: Vec<UserId>,
    pub first_day: NaiveDate,
    pub values: Vec<Vec<T>>,
    pub provenance: Provenance,
}

impl<T> DailySeries<T> {
    pub fn n_days(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }
}

fn utc_day(position: usize, timestamp: i64) -> Result<NaiveDate, PreprocessError> {
    DateTime::from_timestamp(timestamp.div_euclid(SECONDS_PER_DAY) * SECONDS_PER_DAY, 0)
        .map(|dt| dt.date_naive())
        .ok_or(PreprocessError::TimestampOutOfRange { position, timestamp })
}

/// Counts events per user per UTC day. Users appear in order of first event.
pub fn bin_daily(events: &[ContributionEvent]) -> Result<DailyCounts, PreprocessError> {
    if events.is_empty() {
        return Err(PreprocessError::EmptyDataset);
    }
    let days: Vec<NaiveDate> = events
        .iter()
        .enumerate()
        .map(|(i, e)| utc_day(i, e.timestamp))
        .collect::<Result<_, _>>()?;
    let first_day = *days.iter().min().unwrap();
    let last_day = *days.iter().max().unwrap();
    let span = (last_day - first_day).num_days();
    if span > MAX_SPAN_DAYS {
        return Err(PreprocessError::SpanTooLong { days: span });
    }
    let n_days = span as usize + 1;

    let mut users = Vec::new();
    let mut lookup: HashMap<&str, usize> = HashMap::new();
    let mut counts: Vec<Vec<u32>> = Vec::new();
    for (e, day) in events.iter().zip(&days) {
        let u = *lookup.entry(e.user.as_str()).or_insert_with(|| {
            users.push(e.user.clone());
            counts.push(vec![0; n_days]);
            users.len() - 1
        });
        counts[u][(*day - first_day).num_days() as usize] += 1;
    }
    Ok(DailyCounts {
        users,
        first_day,
        counts,
    })
}

/// Trailing rolling mean. The first `window_days − 1` days average over the
/// days available so far.
///
/// # Panics
/// If `window_days == 0`.
pub fn rolling_mean<T: Scalar>(daily: &DailySeries<T>, window_days: usize) -> DailySeries<T> {
    assert!(window_days >= 1, "rolling window must be at least one day");
    let values = daily
        .values
        .iter()
        .map(|row| {
            (0..row.len())
                .map(|d| {
                    let window = &row[(d + 1).saturating_sub(window_days)..=d];
                    let sum: T = window.iter().copied().sum();
                    (sum / T::of_usize(window.len())).max(T::zero())
                })
                .collect()
        })
        .collect();
    DailySeries {
        users: daily.users.clone(),
        first_day: daily.first_day,
        values,
        provenance: Provenance::Smoothed,
    }
}

/// Sums daily values per ISO week. Boundary weeks that the daily span covers
/// only partly are kept with their coverage recorded; see [`filter_and_trim`].
pub fn bin_weekly<T: Scalar>(daily: &DailySeries<T>) -> ActivitySeries<T> {
    let n_days = daily.n_days();
    let first_week = week_start(daily.first_day);
    let offset = daily.first_day.weekday().num_days_from_monday() as usize;
    let n_weeks = if n_days == 0 { 0 } else { (offset + n_days).div_ceil(7) };
    let weeks: Vec<NaiveDate> = (0..n_weeks)
        .map(|w| first_week + Duration::days(7 * w as i64))
        .collect();

    let mut coverage = vec![0u8; n_weeks];
    for d in 0..n_days {
        coverage[(offset + d) / 7] += 1;
    }
    let values = daily
        .values
        .iter()
        .map(|row| {
            let mut weekly = vec![T::zero(); n_weeks];
            for (d, &v) in row.iter().enumerate() {
                weekly[(offset + d) / 7] += v;
            }
            weekly
        })
        .collect();
    ActivitySeries::with_coverage(daily.users.clone(), weeks, values, coverage, daily.provenance)
        .expect("weekly binning of a valid daily series is valid")
}

/// Result of [`filter_and_trim`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trimmed<T> {
    pub series: ActivitySeries<T>,
    pub warnings: Vec<String>,
}

/// Drops partially covered first/last weeks, keeps the last
/// `window_weeks + lead_weeks` weeks, then removes users whose total over the
/// kept weeks is below `min_total_activity`.
pub fn filter_and_trim<T: Scalar>(
    series: &ActivitySeries<T>,
    cfg: &PreprocessConfig,
) -> Result<Trimmed<T>, PreprocessError> {
    cfg.validate()?;
    let mut warnings = Vec::new();
    let cov = series.coverage();
    let mut start = 0;
    let mut end = series.n_weeks();
    if end > start && cov[start] < 7 {
        start += 1;
    }
    if end > start && cov[end - 1] < 7 {
        end -= 1;
    }
    let wanted = cfg.total_weeks();
    if end - start > wanted {
        start = end - wanted;
    } else if end - start < wanted {
        let msg = format!(
            "dataset has {} full weeks, fewer than the requested {}; keeping all",
            end - start,
            wanted
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let windowed = series.slice_weeks(start..end);
    let threshold = T::cast(cfg.min_total_activity);
    let totals = windowed.user_totals();
    let kept = windowed.retain_users(|i| totals[i] >= threshold);
    if kept.n_users() == 0 || kept.n_weeks() == 0 {
        return Err(PreprocessError::EmptyDataset);
    }
    Ok(Trimmed { series: kept, warnings })
}

/// Full event-to-series pipeline.
pub fn preprocess<T: Scalar>(
    events: &[ContributionEvent],
    cfg: &PreprocessConfig,
) -> Result<Trimmed<T>, PreprocessError> {
    cfg.validate()?;
    let daily = bin_daily(events)?;
    let smoothed = rolling_mean(&daily.to_series::<T>(), cfg.rolling_window_days);
    filter_and_trim(&bin_weekly(&smoothed), cfg)
}

/// Raw (unsmoothed) weekly contribution totals over the same ISO weeks.
pub fn raw_weekly<T: Scalar>(events: &[ContributionEvent]) -> Result<ActivitySeries<T>, PreprocessError> {
    Ok(bin_weekly(&bin_daily(events)?.to_series::<T>()))
}
