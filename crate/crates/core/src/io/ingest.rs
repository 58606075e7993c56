//! Eruption-log CSV: header `time,duration,geyser`, times as
//! `YYYY-MM-DD HH:MM:SS` (naive local time), durations in hours.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{NaiveDateTime, TimeDelta};
use serde::{Deserialize, Serialize};

use crate::error::{CarpError, Result};
use crate::event::{EventHistory, EventType};

pub const TIME_FORMAT: &str = "%Y-%m-%d %H:%M:%S";

/// Base datetime for writing histories that have no calendar anchor.
pub const DEFAULT_BASE: &str = "2008-06-20 00:00:00";

/// Source-name → event-type mapping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TypeMapping(pub BTreeMap<String, u8>);

impl Default for TypeMapping {
    fn default() -> Self {
        Self(BTreeMap::from([
            ("West Triplet".to_string(), 1),
            ("Grotto".to_string(), 2),
        ]))
    }
}

impl TypeMapping {
    pub fn validate(&self) -> Result<()> {
        for ty in EventType::BOTH {
            let n = self.0.values().filter(|&&l| l == ty.label()).count();
            if n != 1 {
                return Err(CarpError::Config(format!(
                    "type mapping must name exactly one source for type {ty}, found {n}"
                )));
            }
        }
        if let Some((name, l)) = self.0.iter().find(|(_, &l)| l != 1 && l != 2) {
            return Err(CarpError::Config(format!(
                "source `{name}` mapped to invalid type {l}"
            )));
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<EventType> {
        self.0
            .get(name)
            .and_then(|&l| EventType::try_from(l as i64).ok())
    }

    pub fn name_of(&self, ty: EventType) -> Option<&str> {
        self.0
            .iter()
            .find(|(_, &l)| l == ty.label())
            .map(|(n, _)| n.as_str())
    }
}

/// Optional calendar window applied before conversion to hours.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    #[serde(default, with = "opt_datetime")]
    pub start: Option<NaiveDateTime>,
    #[serde(default, with = "opt_datetime")]
    pub end: Option<NaiveDateTime>,
}

impl Window {
    fn contains(&self, t: NaiveDateTime) -> bool {
        self.start.is_none_or(|s| t >= s) && self.end.is_none_or(|e| t <= e)
    }
}

mod opt_datetime {
    use super::TIME_FORMAT;
    use chrono::NaiveDateTime;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<NaiveDateTime>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(t) => s.serialize_str(&t.format(TIME_FORMAT).to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<NaiveDateTime>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| NaiveDateTime::parse_from_str(&s, TIME_FORMAT).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// An ingested history with its calendar anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub history: EventHistory,
    /// Calendar time of t = 0 (the first retained row).
    pub origin: Option<NaiveDateTime>,
}

#[derive(Debug)]
struct Row {
    line: usize,
    time: NaiveDateTime,
    duration: f64,
    ty: EventType,
}

pub fn ingest_csv(path: impl AsRef<Path>, mapping: &TypeMapping) -> Result<EventHistory> {
    Ok(ingest_reader(std::fs::File::open(path)?, mapping, &Window::default())?.history)
}

/// Parse, sort by time, and convert to hours since the first retained row.
pub fn ingest_reader<R: Read>(
    reader: R,
    mapping: &TypeMapping,
    window: &Window,
) -> Result<Ingested> {
    mapping.validate()?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or(CarpError::Parse {
            line: 1,
            reason: format!("missing column `{name}` (expected header time,duration,geyser)"),
        })
    };
    let (ct, cd, cg) = (col("time")?, col("duration")?, col("geyser")?);
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| CarpError::Parse {
            line,
            reason: e.to_string(),
        })?;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let time = NaiveDateTime::parse_from_str(field(ct), TIME_FORMAT).map_err(|e| {
            CarpError::Parse {
                line,
                reason: format!("bad timestamp `{}`: {e}", field(ct)),
            }
        })?;
        let duration: f64 = field(cd).parse().map_err(|_| CarpError::Parse {
            line,
            reason: format!("bad duration `{}`", field(cd)),
        })?;
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(CarpError::Parse {
                line,
                reason: format!("duration {duration} must be non-negative"),
            });
        }
        let ty = mapping.get(field(cg)).ok_or_else(|| CarpError::Parse {
            line,
            reason: format!("unmapped source `{}`", field(cg)),
        })?;
        if window.contains(time) {
            rows.push(Row {
                line,
                time,
                duration,
                ty,
            });
        }
    }
    rows.sort_by_key(|r| r.time);
    if let Some(w) = rows.windows(2).find(|w| w[0].time == w[1].time) {
        return Err(CarpError::Parse {
            line: w[0].line.max(w[1].line),
            reason: format!(
                "duplicate timestamp {} (also on line {})",
                w[1].time.format(TIME_FORMAT),
                w[0].line.min(w[1].line)
            ),
        });
    }
    let origin = rows.first().map(|r| r.time);
    let history = EventHistory::from_timed_durations(
        rows.iter().map(|r| {
            let secs = (r.time - origin.unwrap()).num_seconds() as f64;
            (secs / 3600.0, r.ty, r.duration)
        }),
        None,
    )?;
    Ok(Ingested { history, origin })
}

/// Write `history` as an eruption log with t = 0 at `origin`; times are
/// rounded to whole seconds.
pub fn write_history_csv<W: Write>(
    history: &EventHistory,
    origin: NaiveDateTime,
    mapping: &TypeMapping,
    out: W,
) -> Result<()> {
    mapping.validate()?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "duration", "geyser"])?;
    for e in history.events() {
        let secs = (e.time * 3600.0).round() as i64;
        let t = origin + TimeDelta::seconds(secs);
        w.write_record([
            t.format(TIME_FORMAT).to_string(),
            e.duration.to_string(),
            mapping
                .name_of(e.event_type)
                .expect("validated mapping names both types")
                .to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn default_base() -> NaiveDateTime {
    NaiveDateTime::parse_from_str(DEFAULT_BASE, TIME_FORMAT).expect("valid constant")
}
