//! Trade-tape ingestion: parse tick records, filter by side and session
//! window, and convert price changes into unit-jump event logs, one per
//! trading day.
//!
//! The input schema is CSV with header `timestamp,price,volume,side`, where
//! `timestamp` is either ISO-8601 with an explicit UTC offset or an integer
//! count of epoch nanoseconds (read as UTC), and `side` is `B` or `S`.
//! Sessions are clock windows in the timestamp's own offset; each day's
//! log restarts its clock at the session start, and no log ever spans a
//! session boundary.
//!
//! A move of `k` ticks becomes `k` unit events at the trade's timestamp
//! (the model only has unit jumps), so the cumulative up-down difference
//! times the tick size reconstructs the session's net filtered price
//! change exactly. A one-event-per-move policy is available for
//! sensitivity checks.

use crate::model::{Event, EventLog, ModelError};
use chrono::{DateTime, FixedOffset, NaiveDate, NaiveTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("row {row}: {message}")]
    BadRecord { row: usize, message: String },
    #[error("row {row}: time reversal of {nanos} ns exceeds the tolerance {tolerance} ns")]
    TimeReversal { row: usize, nanos: i64, tolerance: i64 },
    #[error("row {row}: price change {delta} is not a tick multiple (tick {tick})")]
    OffGridPrice { row: usize, delta: f64, tick: f64 },
    #[error("invalid session: {0}")]
    BadSession(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Trade direction flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Buy,
    Sell,
}

/// One parsed trade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub timestamp: DateTime<FixedOffset>,
    pub price: f64,
    pub volume: u64,
    pub side: Side,
}

/// Intraday session window and instrument tick size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionSpec {
    pub start: NaiveTime,
    pub end: NaiveTime,
    pub tick_size: f64,
}

impl SessionSpec {
    pub fn new(start: NaiveTime, end: NaiveTime, tick_size: f64) -> Result<Self, IngestError> {
        if start >= end {
            return Err(IngestError::BadSession(format!(
                "start {start} must precede end {end}"
            )));
        }
        if !(tick_size > 0.0) || !tick_size.is_finite() {
            return Err(IngestError::BadSession(format!("tick size {tick_size} must be > 0")));
        }
        Ok(Self { start, end, tick_size })
    }

    /// Session length in seconds.
    pub fn length(&self) -> f64 {
        let s = self.end.signed_duration_since(self.start);
        s.num_nanoseconds().unwrap_or(0) as f64 * 1e-9
    }

    /// The 09:00-11:00 morning window at a given tick size.
    pub fn morning(tick_size: f64) -> Self {
        Self {
            start: NaiveTime::from_hms_opt(9, 0, 0).unwrap(),
            end: NaiveTime::from_hms_opt(11, 0, 0).unwrap(),
            tick_size,
        }
    }
}

/// How multi-tick price moves enter the event log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MultiTickPolicy {
    /// A move of k ticks emits k unit events at one timestamp.
    #[default]
    UnitJumps,
    /// A move of k ticks emits a single event in its direction.
    SingleEvent,
}

/// Ingestion controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IngestOptions {
    /// Keep only trades of this side; `None` keeps everything.
    pub side_filter: Option<Side>,
    pub multi_tick: MultiTickPolicy,
    /// Small backward timestamp jitter clamped to the previous time;
    /// larger reversals are errors.
    pub time_reversal_tolerance_ns: i64,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            side_filter: Some(Side::Buy),
            multi_tick: MultiTickPolicy::UnitJumps,
            time_reversal_tolerance_ns: 1_000_000,
        }
    }
}

/// One trading day's ingested session.
#[derive(Debug, Clone, Serialize)]
pub struct DaySession {
    pub date: NaiveDate,
    pub up_events: usize,
    pub down_events: usize,
    /// Net move over the session, in ticks.
    pub net_ticks: i64,
    pub first_price: f64,
    pub last_price: f64,
    #[serde(skip)]
    pub log: EventLog,
}

/// Ingestion result: per-day logs plus any skipped-day warnings.
#[derive(Debug, Clone)]
pub struct IngestOutput {
    pub days: Vec<DaySession>,
    pub warnings: Vec<String>,
}

/// Parse the documented CSV schema, reporting malformed rows by number
/// (header is row 0). Timestamps must be non-decreasing up to the jitter
/// tolerance of [`IngestOptions`]; the check here is strict monotonicity
/// recorded per row so the sessionizer can clamp.
pub fn parse_ticks<R: std::io::Read>(reader: R) -> Result<Vec<TickRecord>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    {
        let headers = rdr.headers()?;
        let expected = ["timestamp", "price", "volume", "side"];
        let got: Vec<&str> = headers.iter().map(str::trim).collect();
        if got != expected {
            return Err(IngestError::BadRecord {
                row: 0,
                message: format!("header must be {expected:?}, got {got:?}"),
            });
        }
    }
    let mut records = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let row = idx + 1;
        let rec = rec?;
        let field = |i: usize, name: &str| -> Result<String, IngestError> {
            rec.get(i)
                .map(|s| s.trim().to_string())
                .ok_or_else(|| IngestError::BadRecord { row, message: format!("missing {name}") })
        };
        let raw_ts = field(0, "timestamp")?;
        let timestamp = parse_timestamp(&raw_ts)
            .ok_or_else(|| IngestError::BadRecord {
                row,
                message: format!(
                    "timestamp {raw_ts:?} is neither ISO-8601 with offset nor epoch nanoseconds"
                ),
            })?;
        let price: f64 = field(1, "price")?.parse().map_err(|e| IngestError::BadRecord {
            row,
            message: format!("bad price: {e}"),
        })?;
        if !(price > 0.0) || !price.is_finite() {
            return Err(IngestError::BadRecord {
                row,
                message: format!("price must be positive, got {price}"),
            });
        }
        let volume: u64 = field(2, "volume")?.parse().map_err(|e| IngestError::BadRecord {
            row,
            message: format!("bad volume: {e}"),
        })?;
        let side = match field(3, "side")?.as_str() {
            "B" => Side::Buy,
            "S" => Side::Sell,
            other => {
                return Err(IngestError::BadRecord {
                    row,
                    message: format!("side must be B or S, got {other:?}"),
                })
            }
        };
        records.push(TickRecord { timestamp, price, volume, side });
    }
    Ok(records)
}

fn parse_timestamp(raw: &str) -> Option<DateTime<FixedOffset>> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt);
    }
    // Integer epoch nanoseconds, read as UTC.
    let nanos: i64 = raw.parse().ok()?;
    let dt = DateTime::from_timestamp_nanos(nanos);
    Some(dt.fixed_offset())
}

/// Write records back out in the documented schema (RFC 3339 timestamps).
pub fn write_ticks<W: std::io::Write>(
    records: &[TickRecord],
    writer: W,
) -> Result<(), std::io::Error> {
    let mut w = writer;
    writeln!(w, "timestamp,price,volume,side")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{}",
            r.timestamp.to_rfc3339(),
            r.price,
            r.volume,
            match r.side {
                Side::Buy => "B",
                Side::Sell => "S",
            }
        )?;
    }
    Ok(())
}

/// Sessionize parsed records into one unit-jump event log per trading day.
///
/// Within each day's window the first filtered trade sets the reference
/// price and each subsequent price change emits events on stream 1 (up) or
/// 2 (down) at the trade's offset from the session start. Days with no
/// in-session price changes are skipped with a warning.
pub fn to_event_logs(
    records: &[TickRecord],
    session: &SessionSpec,
    options: &IngestOptions,
) -> Result<IngestOutput, IngestError> {
    // Enforce file-global time order up to the jitter tolerance.
    let mut clamped: Vec<(usize, &TickRecord, DateTime<FixedOffset>)> =
        Vec::with_capacity(records.len());
    let mut prev: Option<DateTime<FixedOffset>> = None;
    for (idx, r) in records.iter().enumerate() {
        let row = idx + 1;
        let mut ts = r.timestamp;
        if let Some(p) = prev {
            let back = p.signed_duration_since(ts).num_nanoseconds().unwrap_or(i64::MAX);
            if back > 0 {
                if back > options.time_reversal_tolerance_ns {
                    return Err(IngestError::TimeReversal {
                        row,
                        nanos: back,
                        tolerance: options.time_reversal_tolerance_ns,
                    });
                }
                ts = p;
            }
        }
        prev = Some(ts);
        clamped.push((row, r, ts));
    }

    let horizon = session.length();
    let mut days: Vec<DaySession> = Vec::new();
    let mut warnings: Vec<String> = Vec::new();
    let mut current: Option<(NaiveDate, Vec<Event>, f64, f64, i64)> = None; // date, events, first, last, net

    let flush =
        |state: Option<(NaiveDate, Vec<Event>, f64, f64, i64)>,
         days: &mut Vec<DaySession>,
         warnings: &mut Vec<String>|
         -> Result<(), IngestError> {
            if let Some((date, events, first, last, net)) = state {
                if events.is_empty() {
                    warnings.push(format!("{date}: no in-session price changes, day skipped"));
                } else {
                    let up = events.iter().filter(|e| e.stream == 1).count();
                    let down = events.len() - up;
                    days.push(DaySession {
                        date,
                        up_events: up,
                        down_events: down,
                        net_ticks: net,
                        first_price: first,
                        last_price: last,
                        log: EventLog::new(events, horizon, 2)?,
                    });
                }
            }
            Ok(())
        };

    for (row, r, ts) in clamped {
        if let Some(filter) = options.side_filter {
            if r.side != filter {
                continue;
            }
        }
        let local = ts.naive_local();
        let time = local.time();
        if time < session.start || time >= session.end {
            continue;
        }
        let date = local.date();
        if current.as_ref().map(|(d, ..)| *d) != Some(date) {
            flush(current.take(), &mut days, &mut warnings)?;
            current = Some((date, Vec::new(), r.price, r.price, 0));
        }
        let (_, events, _, last, net) = current.as_mut().unwrap();
        let delta = r.price - *last;
        let ticks = (delta / session.tick_size).round();
        if (delta - ticks * session.tick_size).abs() > 1e-6 * session.tick_size {
            return Err(IngestError::OffGridPrice { row, delta, tick: session.tick_size });
        }
        let k = ticks as i64;
        if k != 0 {
            let stream = if k > 0 { 1 } else { 2 };
            let count = match options.multi_tick {
                MultiTickPolicy::UnitJumps => k.unsigned_abs(),
                MultiTickPolicy::SingleEvent => 1,
            };
            let since_start = local
                .time()
                .signed_duration_since(session.start)
                .num_nanoseconds()
                .unwrap_or(0) as f64
                * 1e-9;
            for _ in 0..count {
                events.push(Event { time: since_start, stream });
            }
            *net += k;
        }
        *last = r.price;
    }
    flush(current, &mut days, &mut warnings)?;
    Ok(IngestOutput { days, warnings })
}
