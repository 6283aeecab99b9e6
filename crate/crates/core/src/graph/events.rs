use std::io::Read;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, NaiveDateTime};

use super::{GraphError, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// Question, or article creation.
    Post,
    /// Answer, comment, or article edit.
    Reply,
}

impl FromStr for EventKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "post" => Ok(Self::Post),
            "reply" => Ok(Self::Reply),
            other => Err(format!("unknown event kind {other:?} (expected post or reply)")),
        }
    }
}

/// One row of a contribution log.
///
/// For Q&A logs `artifact` is the id of the content this event creates and
/// `parent` is the id of what a reply directly answers or comments on. For
/// wiki logs `artifact` is the article id and `parent` is unused.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContributionEvent {
    /// UTC seconds since the epoch.
    pub timestamp: i64,
    pub user: UserId,
    pub kind: EventKind,
    pub artifact: String,
    pub parent: Option<String>,
}

impl ContributionEvent {
    pub fn post(timestamp: i64, user: &str, artifact: &str) -> Self {
        Self {
            timestamp,
            user: UserId::from(user),
            kind: EventKind::Post,
            artifact: artifact.to_owned(),
            parent: None,
        }
    }

    pub fn reply(timestamp: i64, user: &str, artifact: &str, parent: &str) -> Self {
        Self {
            timestamp,
            user: UserId::from(user),
            kind: EventKind::Reply,
            artifact: artifact.to_owned(),
            parent: Some(parent.to_owned()),
        }
    }
}

/// Parses integer epoch seconds, RFC 3339 / ISO-8601 date-times (naive ones
/// are read as UTC) or bare dates (midnight UTC).
pub fn parse_timestamp(raw: &str) -> Result<i64, String> {
    let s = raw.trim();
    if s.is_empty() {
        return Err("empty timestamp".into());
    }
    if let Ok(secs) = s.parse::<i64>() {
        return Ok(secs);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(dt.and_utc().timestamp());
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp());
    }
    Err(format!("unparseable timestamp {s:?}"))
}

/// Reads an event log with header `timestamp,user,kind,artifact,parent`.
///
/// Errors carry 1-based file line numbers (the header is line 1). An empty
/// file, or a header with no rows, is [`GraphError::NoEvents`].
pub fn read_events<R: Read>(reader: R) -> Result<Vec<ContributionEvent>, GraphError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().all(str::is_empty) {
        return Err(GraphError::NoEvents);
    }
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let required = |name: &str| {
        col(name).ok_or_else(|| GraphError::Parse {
            line: 1,
            message: format!("missing column {name:?}"),
        })
    };
    let (ts_col, user_col, kind_col, art_col) = (
        required("timestamp")?,
        required("user")?,
        required("kind")?,
        required("artifact")?,
    );
    let parent_col = col("parent");

    let mut events = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let line = row + 2;
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let err = |message: String| GraphError::Parse { line, message };

        let timestamp = parse_timestamp(field(ts_col)).map_err(err)?;
        let user = field(user_col);
        if user.is_empty() {
            return Err(err("empty user".into()));
        }
        let kind: EventKind = field(kind_col).parse().map_err(err)?;
        let parent = parent_col.map(field).filter(|p| !p.is_empty()).map(str::to_owned);
        if kind == EventKind::Reply && parent.is_none() && field(art_col).is_empty() {
            return Err(err("reply names neither an artifact nor a parent".into()));
        }
        events.push(ContributionEvent {
            timestamp,
            user: UserId::from(user),
            kind,
            artifact: field(art_col).to_owned(),
            parent,
        });
    }
    if events.is_empty() {
        return Err(GraphError::NoEvents);
    }
    Ok(events)
}
