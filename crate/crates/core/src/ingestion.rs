//! Event-log parsing and per-user sequence construction.
//!
//! Two input formats share one schema:
//!
//! * JSONL, one object per line with keys `user`, `ts`, `state` and an optional
//!   `participants` array. `ts` is an integer (epoch seconds) or an ISO-8601
//!   string.
//! * CSV with header `user,ts,state,participants`, participants joined by `;`.
//!
//! Bad rows are skipped and reported with their line number; only problems
//! with the stream as a whole (bad header, invalid UTF-8) are fatal.
//!
//! The intermediate sequence file holds one user per line: the user id, a tab,
//! then the dense state ids separated by single spaces.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Read, Write};

use chrono::{DateTime, NaiveDate, NaiveDateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::sequence::{ActivitySequence, SequenceKind};

pub const DEFAULT_MIN_EVENTS: usize = 1000;

/// Event time with nanosecond resolution, ordered chronologically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp {
    secs: i64,
    nanos: u32,
}

impl Timestamp {
    pub fn from_epoch(secs: i64) -> Self {
        Timestamp { secs, nanos: 0 }
    }

    pub fn epoch_seconds(&self) -> i64 {
        self.secs
    }

    /// Parses epoch seconds or an ISO-8601 date-time. Strings without an
    /// offset are read as UTC.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Ok(secs) = s.parse::<i64>() {
            return Some(Self::from_epoch(secs));
        }
        if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
            return Some(Self::from_datetime(dt.with_timezone(&Utc)));
        }
        for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
            if let Ok(naive) = NaiveDateTime::parse_from_str(s, fmt) {
                return Some(Self::from_datetime(naive.and_utc()));
            }
        }
        NaiveDate::parse_from_str(s, "%Y-%m-%d")
            .ok()
            .and_then(|d| d.and_hms_opt(0, 0, 0))
            .map(|naive| Self::from_datetime(naive.and_utc()))
    }

    fn from_datetime(dt: DateTime<Utc>) -> Self {
        Timestamp {
            secs: dt.timestamp(),
            nanos: dt.timestamp_subsec_nanos(),
        }
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.nanos == 0 {
            return write!(f, "{}", self.secs);
        }
        match DateTime::from_timestamp(self.secs, self.nanos) {
            Some(dt) => f.write_str(&dt.to_rfc3339_opts(SecondsFormat::AutoSi, true)),
            None => write!(f, "{}", self.secs),
        }
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.nanos == 0 {
            serializer.serialize_i64(self.secs)
        } else {
            serializer.serialize_str(&self.to_string())
        }
    }
}

/// One row of an activity log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EventRecord {
    pub user: String,
    #[serde(rename = "ts")]
    pub timestamp: Timestamp,
    #[serde(rename = "state")]
    pub state_label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub participants: Option<Vec<String>>,
}

impl EventRecord {
    /// Validates the record invariants. An empty participant list is
    /// normalized to `None`.
    pub fn new(
        user: impl Into<String>,
        timestamp: Timestamp,
        state_label: impl Into<String>,
        participants: Option<Vec<String>>,
    ) -> std::result::Result<Self, String> {
        let user = user.into();
        let state_label = state_label.into();
        if user.is_empty() {
            return Err("empty user".into());
        }
        if state_label.is_empty() {
            return Err("empty state".into());
        }
        let participants = participants.filter(|p| !p.is_empty());
        if let Some(p) = &participants {
            if !p.contains(&user) {
                return Err(format!("participants do not include user {user}"));
            }
        }
        Ok(EventRecord {
            user,
            timestamp,
            state_label,
            participants,
        })
    }

    /// A group event has more than one participant.
    pub fn is_group(&self) -> bool {
        self.participants.as_ref().is_some_and(|p| p.len() > 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogFormat {
    Jsonl,
    Csv,
}

impl LogFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &std::path::Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "jsonl" | "ndjson" | "json" => Some(LogFormat::Jsonl),
            "csv" => Some(LogFormat::Csv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowDiagnostic {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ParsedLog {
    pub records: Vec<EventRecord>,
    pub diagnostics: Vec<RowDiagnostic>,
}

pub fn parse_event_log<R: Read>(mut input: R, format: LogFormat) -> Result<ParsedLog> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Format(format!("input is not UTF-8: {e}")))?;
    match format {
        LogFormat::Jsonl => Ok(parse_jsonl(&text)),
        LogFormat::Csv => parse_csv(&text),
    }
}

fn parse_jsonl(text: &str) -> ParsedLog {
    let mut out = ParsedLog::default();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match jsonl_row(line) {
            Ok(rec) => out.records.push(rec),
            Err(message) => out.diagnostics.push(RowDiagnostic { line: k + 1, message }),
        }
    }
    out
}

fn jsonl_row(line: &str) -> std::result::Result<EventRecord, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| format!("invalid JSON: {e}"))?;
    let obj = value.as_object().ok_or("row is not a JSON object")?;
    let string_field = |key: &str| -> std::result::Result<String, String> {
        match obj.get(key) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(format!("field {key} is not a string")),
            None => Err(format!("missing field {key}")),
        }
    };
    let user = string_field("user")?;
    let state = string_field("state")?;
    let ts = match obj.get("ts") {
        Some(Value::Number(n)) => n.as_i64().map(Timestamp::from_epoch),
        Some(Value::String(s)) => Timestamp::parse(s),
        Some(_) => None,
        None => return Err("missing field ts".into()),
    }
    .ok_or("unparseable ts")?;
    let participants = match obj.get("participants") {
        None | Some(Value::Null) => None,
        Some(Value::Array(items)) => Some(
            items
                .iter()
                .map(|v| v.as_str().map(str::to_owned).ok_or("participant is not a string"))
                .collect::<std::result::Result<Vec<_>, _>>()?,
        ),
        Some(_) => return Err("participants is not an array".into()),
    };
    EventRecord::new(user, ts, state, participants)
}

const CSV_HEADER: [&str; 4] = ["user", "ts", "state", "participants"];

fn parse_csv(text: &str) -> Result<ParsedLog> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::Format(format!("unreadable CSV header: {e}")))?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    if names != CSV_HEADER[..] && names != CSV_HEADER[..3] {
        return Err(Error::Format(format!(
            "expected CSV header {}, found {}",
            CSV_HEADER.join(","),
            names.join(",")
        )));
    }
    let mut out = ParsedLog::default();
    for row in reader.records() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                out.diagnostics.push(RowDiagnostic { line, message: e.to_string() });
                continue;
            }
        };
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        match csv_row(&row) {
            Ok(rec) => out.records.push(rec),
            Err(message) => out.diagnostics.push(RowDiagnostic { line, message }),
        }
    }
    Ok(out)
}

fn csv_row(row: &csv::StringRecord) -> std::result::Result<EventRecord, String> {
    if row.len() < 3 || row.len() > 4 {
        return Err(format!("expected 3 or 4 fields, found {}", row.len()));
    }
    let ts = Timestamp::parse(&row[1]).ok_or("unparseable ts")?;
    let participants = row
        .get(3)
        .filter(|p| !p.is_empty())
        .map(|p| p.split(';').map(|s| s.trim().to_owned()).filter(|s| !s.is_empty()).collect());
    EventRecord::new(&row[0], ts, &row[2], participants)
}

/// Writes records as JSONL.
pub fn write_jsonl<W: Write>(mut out: W, records: &[EventRecord]) -> Result<()> {
    for rec in records {
        let line = serde_json::to_string(rec).map_err(|e| Error::Format(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DedupPolicy {
    #[default]
    KeepAll,
    /// Drops an event repeating the previous event's timestamp and state.
    CollapseEqualTimestamps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohortConfig {
    pub min_events: usize,
    pub split_groups: bool,
    pub dedup_policy: DedupPolicy,
}

impl Default for CohortConfig {
    fn default() -> Self {
        CohortConfig {
            min_events: DEFAULT_MIN_EVENTS,
            split_groups: false,
            dedup_policy: DedupPolicy::KeepAll,
        }
    }
}

impl CohortConfig {
    pub fn with_min_events(min_events: usize) -> Self {
        CohortConfig {
            min_events,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_events < 2 {
            return Err(Error::InvalidConfig(format!(
                "min_events must be at least 2, got {}",
                self.min_events
            )));
        }
        Ok(())
    }

    fn threshold(&self) -> usize {
        self.min_events.max(2)
    }
}

/// Per-user events sorted by time with input order breaking ties, after
/// applying the dedup policy.
fn user_timelines(events: &[EventRecord], policy: DedupPolicy) -> BTreeMap<&str, Vec<&EventRecord>> {
    let mut by_user: BTreeMap<&str, Vec<&EventRecord>> = BTreeMap::new();
    for ev in events {
        by_user.entry(ev.user.as_str()).or_default().push(ev);
    }
    for timeline in by_user.values_mut() {
        // stable sort keeps input order for equal timestamps
        timeline.sort_by_key(|ev| ev.timestamp);
        if policy == DedupPolicy::CollapseEqualTimestamps {
            timeline.dedup_by(|b, a| a.timestamp == b.timestamp && a.state_label == b.state_label);
        }
    }
    by_user
}

fn timeline_kind(timeline: &[&EventRecord]) -> SequenceKind {
    let groups = timeline.iter().filter(|ev| ev.is_group()).count();
    match groups {
        0 => SequenceKind::Individual,
        g if g == timeline.len() => SequenceKind::Group,
        _ => SequenceKind::Mixed,
    }
}

fn to_sequence(user: &str, timeline: &[&EventRecord], kind: SequenceKind) -> Result<ActivitySequence> {
    ActivitySequence::from_labels(timeline.iter().map(|ev| ev.state_label.as_str()), user, kind)
}

/// One sequence per user holding every event, for users with at least
/// `min_events` events.
pub fn build_sequences(events: &[EventRecord], config: &CohortConfig) -> BTreeMap<String, ActivitySequence> {
    user_timelines(events, config.dedup_policy)
        .into_iter()
        .filter(|(_, t)| t.len() >= config.threshold())
        .map(|(user, t)| {
            let seq = to_sequence(user, &t, timeline_kind(&t)).expect("nonempty timeline");
            (user.to_owned(), seq)
        })
        .collect()
}

/// A user's group and individual streams. Each stream is present only when
/// it meets `min_events` on its own; the event counts are unfiltered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StreamPair {
    pub individual: Option<ActivitySequence>,
    pub group: Option<ActivitySequence>,
    pub individual_events: usize,
    pub group_events: usize,
}

pub fn partition_group_individual(events: &[EventRecord], config: &CohortConfig) -> BTreeMap<String, StreamPair> {
    let threshold = config.threshold();
    user_timelines(events, config.dedup_policy)
        .into_iter()
        .map(|(user, timeline)| {
            let (group, individual): (Vec<&EventRecord>, Vec<&EventRecord>) =
                timeline.into_iter().partition(|ev| ev.is_group());
            let stream = |t: &[&EventRecord], kind| {
                (t.len() >= threshold).then(|| to_sequence(user, t, kind).expect("nonempty stream"))
            };
            let pair = StreamPair {
                individual: stream(&individual, SequenceKind::Individual),
                group: stream(&group, SequenceKind::Group),
                individual_events: individual.len(),
                group_events: group.len(),
            };
            (user.to_owned(), pair)
        })
        .collect()
}

pub fn write_sequence_file<'a, W, I>(mut out: W, sequences: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a ActivitySequence>,
{
    for seq in sequences {
        let user = seq.source_user();
        if user.is_empty() || user.contains(['\t', '\n', '\r']) {
            return Err(Error::Format(format!("user id {user:?} cannot be written to a sequence file")));
        }
        let ids: Vec<String> = seq.states().iter().map(u32::to_string).collect();
        writeln!(out, "{user}\t{}", ids.join(" "))?;
    }
    Ok(())
}

/// Reads a sequence file; every sequence gets the given kind.
pub fn read_sequence_file<R: BufRead>(input: R, kind: SequenceKind) -> Result<Vec<ActivitySequence>> {
    let mut out = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Format(format!("sequence file line {}: {msg}", k + 1));
        let (user, ids) = line.split_once('\t').ok_or_else(|| bad("missing tab separator".into()))?;
        let states = ids
            .split(' ')
            .map(|t| t.parse::<u32>().map_err(|e| bad(format!("bad state id {t:?}: {e}"))))
            .collect::<Result<Vec<u32>>>()?;
        out.push(ActivitySequence::new(states, user, kind).map_err(|e| bad(e.to_string()))?);
    }
    Ok(out)
}
