use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};
use std::ops::Range;

use chrono::{Datelike, Duration, NaiveDate, Weekday};

use super::PreprocessError;
use crate::graph::{CollaborationNetwork, UserId};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Raw,
    Smoothed,
}

/// Per-user weekly activity over consecutive ISO weeks.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivitySeries<T> {
    users: Vec<UserId>,
    /// Monday of each week.
    weeks: Vec<NaiveDate>,
    /// One row per user, one column per week.
    values: Vec<Vec<T>>,
    /// Days of underlying daily data inside each week (7 for full weeks).
    coverage: Vec<u8>,
    pub provenance: Provenance,
}

/// Monday of the ISO week containing `day`.
pub fn week_start(day: NaiveDate) -> NaiveDate {
    day - Duration::days(day.weekday().num_days_from_monday() as i64)
}

impl<T: Scalar> ActivitySeries<T> {
    /// Checks shape, non-negativity and week contiguity. Every week is taken
    /// as fully covered.
    pub fn new(
        users: Vec<UserId>,
        weeks: Vec<NaiveDate>,
        values: Vec<Vec<T>>,
        provenance: Provenance,
    ) -> Result<Self, PreprocessError> {
        let coverage = vec![7; weeks.len()];
        Self::with_coverage(users, weeks, values, coverage, provenance)
    }

    pub(crate) fn with_coverage(
        users: Vec<UserId>,
        weeks: Vec<NaiveDate>,
        values: Vec<Vec<T>>,
        coverage: Vec<u8>,
        provenance: Provenance,
    ) -> Result<Self, PreprocessError> {
        let invalid = |m: String| Err(PreprocessError::InvalidSeries(m));
        if values.len() != users.len() {
            return invalid(format!("{} rows for {} users", values.len(), users.len()));
        }
        if let Some(row) = values.iter().position(|r| r.len() != weeks.len()) {
            return invalid(format!(
                "row {row} has {} values for {} weeks",
                values[row].len(),
                weeks.len()
            ));
        }
        if coverage.len() != weeks.len() {
            return invalid("coverage length differs from week count".into());
        }
        let distinct: BTreeSet<_> = users.iter().collect();
        if distinct.len() != users.len() {
            return invalid("duplicate user".into());
        }
        for (i, w) in weeks.iter().enumerate() {
            if w.weekday() != Weekday::Mon {
                return invalid(format!("week label {w} is not a Monday"));
            }
            if i > 0 && *w - weeks[i - 1] != Duration::days(7) {
                return invalid(format!("weeks {} and {w} are not consecutive", weeks[i - 1]));
            }
        }
        for (u, row) in users.iter().zip(&values) {
            if let Some(v) = row.iter().find(|v| !(v.is_finite() && **v >= T::zero())) {
                return invalid(format!("user {u} has invalid activity {v}"));
            }
        }
        Ok(Self {
            users,
            weeks,
            values,
            coverage,
            provenance,
        })
    }

    pub fn users(&self) -> &[UserId] {
        &self.users
    }

    pub fn weeks(&self) -> &[NaiveDate] {
        &self.weeks
    }

    pub fn values(&self) -> &[Vec<T>] {
        &self.values
    }

    pub fn coverage(&self) -> &[u8] {
        &self.coverage
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_weeks(&self) -> usize {
        self.weeks.len()
    }

    pub fn value(&self, user: usize, week: usize) -> T {
        self.values[user][week]
    }

    /// Summed activity of each user over all weeks.
    pub fn user_totals(&self) -> Vec<T> {
        self.values.iter().map(|r| r.iter().copied().sum()).collect()
    }

    /// Summed activity of all users per week.
    pub fn weekly_totals(&self) -> Vec<T> {
        (0..self.n_weeks())
            .map(|w| self.values.iter().map(|r| r[w]).sum())
            .collect()
    }

    pub fn total(&self) -> T {
        self.user_totals().into_iter().sum()
    }

    /// The weeks in `range` as a new series.
    pub fn slice_weeks(&self, range: Range<usize>) -> Self {
        Self {
            users: self.users.clone(),
            weeks: self.weeks[range.clone()].to_vec(),
            values: self.values.iter().map(|r| r[range.clone()].to_vec()).collect(),
            coverage: self.coverage[range].to_vec(),
            provenance: self.provenance,
        }
    }

    /// Keeps the users whose index satisfies `keep`.
    pub fn retain_users(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        let idx: Vec<usize> = (0..self.n_users()).filter(|&i| keep(i)).collect();
        Self {
            users: idx.iter().map(|&i| self.users[i].clone()).collect(),
            weeks: self.weeks.clone(),
            values: idx.iter().map(|&i| self.values[i].clone()).collect(),
            coverage: self.coverage.clone(),
            provenance: self.provenance,
        }
    }

    /// Week-major states in network index order: `out[w][i]` is the activity
    /// of network user `i` in week `w`. Network users absent from the series
    /// get zero activity; series users absent from the network are an error.
    pub fn states_for(&self, net: &CollaborationNetwork) -> Result<Vec<Vec<T>>, PreprocessError> {
        let mut out = vec![vec![T::zero(); net.node_count()]; self.n_weeks()];
        for (u, row) in self.users.iter().zip(&self.values) {
            let i = net
                .index_of(u.as_str())
                .ok_or_else(|| PreprocessError::UnknownUser(u.clone()))?;
            for (w, &v) in row.iter().enumerate() {
                out[w][i] = v;
            }
        }
        Ok(out)
    }

    /// Builds a series from week-major states in network index order.
    pub fn from_states(
        net: &CollaborationNetwork,
        first_week: NaiveDate,
        states: &[Vec<T>],
        provenance: Provenance,
    ) -> Result<Self, PreprocessError> {
        let first = week_start(first_week);
        let weeks = (0..states.len())
            .map(|w| first + Duration::days(7 * w as i64))
            .collect();
        let values = (0..net.node_count())
            .map(|i| states.iter().map(|s| s[i]).collect())
            .collect();
        Self::new(net.users().to_vec(), weeks, values, provenance)
    }

    /// Writes `user,week_start,value` rows, user-major.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), PreprocessError> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["user", "week_start", "value"])?;
        for (u, row) in self.users.iter().zip(&self.values) {
            for (w, v) in self.weeks.iter().zip(row) {
                wtr.write_record([u.as_str(), &w.format("%Y-%m-%d").to_string(), &v.to_string()])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads `user,week_start,value` rows. Week labels may be any day of the
    /// week and are normalised to its Monday; the span between the first and
    /// last week is filled densely and missing cells are zero. Repeated cells
    /// are summed.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, PreprocessError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.eq_ignore_ascii_case(name))
                .ok_or_else(|| PreprocessError::Parse {
                    line: 1,
                    message: format!("missing column {name:?}"),
                })
        };
        let (uc, wc, vc) = (col("user")?, col("week_start")?, col("value")?);

        let mut users: Vec<UserId> = Vec::new();
        let mut lookup: HashMap<String, usize> = HashMap::new();
        let mut cells: Vec<(usize, NaiveDate, T)> = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let line = row + 2;
            let rec = rec?;
            let err = |message: String| PreprocessError::Parse { line, message };
            let user = rec.get(uc).unwrap_or("");
            if user.is_empty() {
                return Err(err("empty user".into()));
            }
            let day = NaiveDate::parse_from_str(rec.get(wc).unwrap_or(""), "%Y-%m-%d")
                .map_err(|e| err(format!("bad week_start: {e}")))?;
            let value: f64 = rec
                .get(vc)
                .unwrap_or("")
                .parse()
                .map_err(|e| err(format!("bad value: {e}")))?;
            if !(value.is_finite() && value >= 0.0) {
                return Err(err(format!("activity must be finite and non-negative, got {value}")));
            }
            let idx = *lookup.entry(user.to_owned()).or_insert_with(|| {
                users.push(UserId::from(user));
                users.len() - 1
            });
            cells.push((idx, week_start(day), T::cast(value)));
        }
        let (Some(first), Some(last)) = (cells.iter().map(|c| c.1).min(), cells.iter().map(|c| c.1).max()) else {
            return Err(PreprocessError::EmptyDataset);
        };
        let n_weeks = ((last - first).num_days() / 7 + 1) as usize;
        let weeks = (0..n_weeks).map(|w| first + Duration::days(7 * w as i64)).collect();
        let mut values = vec![vec![T::zero(); n_weeks]; users.len()];
        for (u, w, v) in cells {
            values[u][((w - first).num_days() / 7) as usize] += v;
        }
        Self::new(users, weeks, values, Provenance::Smoothed)
    }
}
