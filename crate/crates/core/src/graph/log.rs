//! Canonical repost-log format.
//!
//! One event per line, tab separated:
//! `message_id  root_message_id  reposter_uid  source_uid  unix_timestamp_seconds`.
//! Original posts carry `-` as source and repeat their own id as root.

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NO_SOURCE: &str = "-";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RepostEvent {
    pub message_id: String,
    pub root_message_id: String,
    /// Author of the post or repost.
    pub reposter: String,
    /// User the message was reposted from; `None` for original posts.
    pub source: Option<String>,
    pub timestamp: i64,
}

impl RepostEvent {
    pub fn original(message_id: &str, author: &str, timestamp: i64) -> Self {
        Self {
            message_id: message_id.to_string(),
            root_message_id: message_id.to_string(),
            reposter: author.to_string(),
            source: None,
            timestamp,
        }
    }

    pub fn repost(message_id: &str, root: &str, reposter: &str, source: &str, timestamp: i64) -> Self {
        Self {
            message_id: message_id.to_string(),
            root_message_id: root.to_string(),
            reposter: reposter.to_string(),
            source: Some(source.to_string()),
            timestamp,
        }
    }

    pub fn is_original(&self) -> bool {
        self.source.is_none()
    }
}

impl fmt::Display for RepostEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}",
            self.message_id,
            self.root_message_id,
            self.reposter,
            self.source.as_deref().unwrap_or(NO_SOURCE),
            self.timestamp
        )
    }
}

/// Closed time interval `[start, end]` in epoch seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: i64,
    pub end: i64,
}

impl TimeWindow {
    pub const ALL: TimeWindow = TimeWindow {
        start: i64::MIN,
        end: i64::MAX,
    };

    pub fn new(start: i64, end: i64) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, t: i64) -> bool {
        self.start <= t && t <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct LogReadout {
    pub events: Vec<RepostEvent>,
    /// Malformed records that were skipped (always empty in strict mode).
    pub skipped: Vec<LineError>,
}

pub fn parse_line(line: &str) -> std::result::Result<RepostEvent, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 5 {
        return Err(format!("expected 5 tab-separated fields, found {}", fields.len()));
    }
    let [message_id, root, reposter, source, ts] = [fields[0], fields[1], fields[2], fields[3], fields[4]];
    for (name, value) in [("message_id", message_id), ("root_message_id", root), ("reposter_uid", reposter), ("source_uid", source)] {
        if value.trim().is_empty() {
            return Err(format!("empty {name}"));
        }
    }
    let timestamp: i64 = ts
        .trim()
        .parse()
        .map_err(|_| format!("invalid timestamp `{ts}`"))?;
    let source = if source == NO_SOURCE {
        if root != message_id {
            return Err("original post must use its own id as root_message_id".to_string());
        }
        None
    } else {
        Some(source.to_string())
    };
    Ok(RepostEvent {
        message_id: message_id.to_string(),
        root_message_id: root.to_string(),
        reposter: reposter.to_string(),
        source,
        timestamp,
    })
}

/// Reads a repost log. Blank lines and lines starting with `#` are ignored.
///
/// Malformed records are collected with their 1-based line number and
/// skipped; with `strict` the first one aborts the read.
pub fn read_log<R: BufRead>(reader: R, label: &str, strict: bool) -> Result<LogReadout> {
    let mut out = LogReadout::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(label, e))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_line(line) {
            Ok(ev) => out.events.push(ev),
            Err(message) if strict => {
                return Err(Error::Parse {
                    path: label.to_string(),
                    line: idx + 1,
                    message,
                })
            }
            Err(message) => {
                log::warn!("{label}:{}: skipping malformed record: {message}", idx + 1);
                out.skipped.push(LineError { line: idx + 1, message });
            }
        }
    }
    Ok(out)
}

pub fn write_log<'a, W: Write>(mut w: W, events: impl IntoIterator<Item = &'a RepostEvent>) -> std::io::Result<()> {
    for ev in events {
        writeln!(w, "{ev}")?;
    }
    Ok(())
}
