use std::io::{Read, Write};

use chrono::{Duration, NaiveDate};
use rayon::prelude::*;

use super::{fit_ratio, simulate_one_week, EstimateError, EstimationConfig, ObjectiveSpec};
use crate::dynamics::DynamicsParams;
use crate::graph::CollaborationNetwork;
use crate::preprocess::{ActivitySeries, Provenance};
use crate::scalar::Scalar;

/// One sliding-window fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioEntry<T> {
    /// Index of the first week of the fit window.
    pub window_start: usize,
    /// Index of the predicted week; equals the series length for the final
    /// window, whose target lies one week past the data.
    pub target_index: usize,
    /// Monday of the predicted week.
    pub target_week: NaiveDate,
    pub ratio: Option<T>,
    pub converged: bool,
    pub iterations: usize,
    pub final_objective: Option<T>,
    pub error: Option<String>,
}

/// Ratios fitted on consecutive windows, in target order.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioSeries<T> {
    pub window_weeks: usize,
    pub entries: Vec<RatioEntry<T>>,
}

impl<T: Scalar> RatioSeries<T> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Fitted ratios of all entries that produced one.
    pub fn ratios(&self) -> Vec<T> {
        self.entries.iter().filter_map(|e| e.ratio).collect()
    }

    pub fn converged_count(&self) -> usize {
        self.entries.iter().filter(|e| e.converged).count()
    }

    pub fn target_weeks(&self) -> Vec<NaiveDate> {
        self.entries.iter().map(|e| e.target_week).collect()
    }

    pub fn ratio_for(&self, target_week: NaiveDate) -> Option<T> {
        self.entries
            .iter()
            .find(|e| e.target_week == target_week)
            .and_then(|e| e.ratio)
    }
}

/// Fits one ratio per window of `cfg.window_weeks` consecutive weeks.
///
/// The window starting at week `s` predicts week `s + window_weeks`. Every
/// window of the series is fitted, so a series of `L` weeks yields
/// `L − window_weeks + 1` entries and the last one forecasts the week after
/// the data. Windows are fitted in parallel; the result does not depend on
/// scheduling.
///
/// Per-window failures are recorded in the entry. The call fails only if no
/// window converged.
pub fn sliding_window_fit<T: Scalar>(
    series: &ActivitySeries<T>,
    net: &CollaborationNetwork,
    kappa1: T,
    cfg: &EstimationConfig<T>,
    spec: ObjectiveSpec<T>,
) -> Result<RatioSeries<T>, EstimateError> {
    cfg.validate()?;
    let weeks = series.n_weeks();
    if weeks < cfg.window_weeks {
        return Err(EstimateError::WindowTooShort {
            got: weeks,
            needed: cfg.window_weeks,
        });
    }
    let states = series.states_for(net)?;
    let first_week = series.weeks()[0];
    let entries: Vec<RatioEntry<T>> = (0..=weeks - cfg.window_weeks)
        .into_par_iter()
        .map(|start| {
            let target_index = start + cfg.window_weeks;
            let window = &states[start..target_index];
            let mut entry = RatioEntry {
                window_start: start,
                target_index,
                target_week: first_week + Duration::days(7 * target_index as i64),
                ratio: None,
                converged: false,
                iterations: 0,
                final_objective: None,
                error: None,
            };
            match fit_ratio(window, net, kappa1, cfg, spec) {
                Ok(fit) => {
                    entry.ratio = Some(fit.ratio);
                    entry.converged = fit.converged;
                    entry.iterations = fit.iterations;
                    entry.final_objective = Some(fit.final_objective);
                }
                Err(e) => entry.error = Some(e.to_string()),
            }
            entry
        })
        .collect();

    if !entries.iter().any(|e| e.converged) {
        let first_problem = entries
            .iter()
            .find_map(|e| e.error.clone())
            .unwrap_or_else(|| "iteration limit reached".to_owned());
        return Err(EstimateError::NoWindowConverged {
            windows: entries.len(),
            first_problem,
        });
    }
    Ok(RatioSeries {
        window_weeks: cfg.window_weeks,
        entries,
    })
}

/// How [`predict_weeks`] seeds each simulated week.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PredictionMode {
    /// From the observed preceding week.
    #[default]
    Reseed,
    /// From the previous prediction when it exists, else the observed week.
    Chained,
}

/// One-week-ahead predictions for the targets of a ratio series.
#[derive(Debug, Clone, PartialEq)]
pub struct WeeklyPrediction<T> {
    pub target_weeks: Vec<NaiveDate>,
    pub target_index: Vec<usize>,
    /// Predicted activity per target, network index order. Empty when the
    /// simulation diverged.
    pub states: Vec<Vec<T>>,
    pub aggregate: Vec<T>,
    pub diverged: Vec<bool>,
}

impl<T: Scalar> WeeklyPrediction<T> {
    /// Predictions for targets inside the observed span, as a series aligned
    /// with those weeks. Diverged or out-of-span targets are skipped.
    pub fn observed_span(
        &self,
        net: &CollaborationNetwork,
        n_observed: usize,
    ) -> Result<(Vec<usize>, ActivitySeries<T>), EstimateError> {
        let keep: Vec<usize> = (0..self.target_index.len())
            .filter(|&k| self.target_index[k] < n_observed && !self.diverged[k])
            .collect();
        let mut values = vec![Vec::with_capacity(keep.len()); net.node_count()];
        for &k in &keep {
            for (i, v) in self.states[k].iter().enumerate() {
                values[i].push(*v);
            }
        }
        let weeks = keep.iter().map(|&k| self.target_weeks[k]).collect();
        let clipped = values
            .into_iter()
            .map(|row: Vec<T>| row.into_iter().map(|v| v.max(T::zero())).collect())
            .collect();
        let series = ActivitySeries::new(net.users().to_vec(), weeks, clipped, Provenance::Smoothed)?;
        Ok((keep.iter().map(|&k| self.target_index[k]).collect(), series))
    }
}

/// Simulates each target week of `ratios` from the preceding week.
pub fn predict_weeks<T: Scalar>(
    series: &ActivitySeries<T>,
    net: &CollaborationNetwork,
    ratios: &RatioSeries<T>,
    dynamics: &DynamicsParams<T>,
    mode: PredictionMode,
) -> Result<WeeklyPrediction<T>, EstimateError> {
    let states = series.states_for(net)?;
    let first = series.weeks()[0];
    let mut out = WeeklyPrediction {
        target_weeks: Vec::new(),
        target_index: Vec::new(),
        states: Vec::new(),
        aggregate: Vec::new(),
        diverged: Vec::new(),
    };
    let mut previous: Option<(usize, Vec<T>)> = None;
    for entry in &ratios.entries {
        let Some(ratio) = entry.ratio else { continue };
        let offset = (entry.target_week - first).num_days();
        if offset <= 0 || offset % 7 != 0 || (offset / 7) as usize > states.len() {
            return Err(EstimateError::MissingRatio(entry.target_week.to_string()));
        }
        let target = (offset / 7) as usize;
        let seed = match (&previous, mode) {
            (Some((t, x)), PredictionMode::Chained) if *t + 1 == target => x.clone(),
            _ => states[target - 1].clone(),
        };
        let (predicted, diverged) = match simulate_one_week(net, &seed, ratio, dynamics) {
            Ok(x) => (x, false),
            Err(_) => (Vec::new(), true),
        };
        out.aggregate.push(if diverged {
            T::nan()
        } else {
            predicted.iter().copied().sum()
        });
        previous = (!diverged).then(|| (target, predicted.clone()));
        out.target_weeks.push(entry.target_week);
        out.target_index.push(target);
        out.states.push(predicted);
        out.diverged.push(diverged);
    }
    Ok(out)
}

/// Writes `target_week,ratio,converged,iterations,objective`.
pub fn write_ratio_csv<T: Scalar, W: Write>(ratios: &RatioSeries<T>, out: W) -> Result<(), EstimateError> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["target_week", "ratio", "converged", "iterations", "objective"])?;
    for e in &ratios.entries {
        wtr.write_record([
            e.target_week.format("%Y-%m-%d").to_string(),
            e.ratio.map(|r| r.to_string()).unwrap_or_default(),
            e.converged.to_string(),
            e.iterations.to_string(),
            e.final_objective.map(|j| j.to_string()).unwrap_or_default(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads the format written by [`write_ratio_csv`]. Window positions are not
/// stored, so `window_start` and `target_index` are left at zero.
pub fn read_ratio_csv<T: Scalar, R: Read>(reader: R) -> Result<RatioSeries<T>, EstimateError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut entries = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let parse_err = |what: &str| {
            EstimateError::Data(crate::preprocess::PreprocessError::Parse {
                line,
                message: format!("bad {what}"),
            })
        };
        let target_week =
            NaiveDate::parse_from_str(rec.get(0).unwrap_or(""), "%Y-%m-%d").map_err(|_| parse_err("target_week"))?;
        let opt = |i: usize, what: &str| -> Result<Option<T>, EstimateError> {
            match rec.get(i).unwrap_or("") {
                "" => Ok(None),
                s => s.parse::<f64>().map(|v| Some(T::cast(v))).map_err(|_| parse_err(what)),
            }
        };
        entries.push(RatioEntry {
            window_start: 0,
            target_index: 0,
            target_week,
            ratio: opt(1, "ratio")?,
            converged: rec
                .get(2)
                .unwrap_or("false")
                .parse()
                .map_err(|_| parse_err("converged"))?,
            iterations: rec.get(3).unwrap_or("0").parse().map_err(|_| parse_err("iterations"))?,
            final_objective: opt(4, "objective")?,
            error: None,
        });
    }
    Ok(RatioSeries {
        window_weeks: 0,
        entries,
    })
}
