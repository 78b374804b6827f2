use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Decoding classes. The discriminant order is the tie-breaking order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Class {
    Left,
    Right,
    Rest,
}

impl Class {
    pub const ALL: [Class; 3] = [Class::Left, Class::Right, Class::Rest];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Class> {
        Class::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Class::Left => "LEFT",
            Class::Right => "RIGHT",
            Class::Rest => "REST",
        }
    }

    pub fn mirrored(self) -> Class {
        match self {
            Class::Left => Class::Right,
            Class::Right => Class::Left,
            Class::Rest => Class::Rest,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Class {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "LEFT" => Ok(Class::Left),
            "RIGHT" => Ok(Class::Right),
            "REST" => Ok(Class::Rest),
            other => Err(Error::Validation(format!("unknown class `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MarkerLabel {
    Class(Class),
    TrialEnd,
    Prep,
    Cross,
    Other(String),
}

impl MarkerLabel {
    pub fn as_class(&self) -> Option<Class> {
        match self {
            MarkerLabel::Class(c) => Some(*c),
            _ => None,
        }
    }
}

impl fmt::Display for MarkerLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkerLabel::Class(c) => f.write_str(c.name()),
            MarkerLabel::TrialEnd => f.write_str("TRIAL_END"),
            MarkerLabel::Prep => f.write_str("PREP"),
            MarkerLabel::Cross => f.write_str("CROSS"),
            MarkerLabel::Other(s) => f.write_str(s),
        }
    }
}

impl From<&str> for MarkerLabel {
    fn from(s: &str) -> Self {
        match s {
            "TRIAL_END" => MarkerLabel::TrialEnd,
            "PREP" => MarkerLabel::Prep,
            "CROSS" => MarkerLabel::Cross,
            other => match other.parse::<Class>() {
                Ok(c) => MarkerLabel::Class(c),
                Err(_) => MarkerLabel::Other(other.to_string()),
            },
        }
    }
}

impl From<Class> for MarkerLabel {
    fn from(c: Class) -> Self {
        MarkerLabel::Class(c)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Marker {
    /// Seconds relative to the recording's t0.
    pub time_s: f64,
    pub label: MarkerLabel,
}

#[derive(Serialize, Deserialize)]
struct MarkerLine {
    t: f64,
    label: String,
}

/// Timestamped events, kept in non-decreasing time order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MarkerList {
    events: Vec<Marker>,
}

impl MarkerList {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a list from unordered events (stable sort by time).
    pub fn from_events(mut events: Vec<Marker>) -> Result<Self> {
        if let Some(m) = events.iter().find(|m| !m.time_s.is_finite()) {
            return Err(Error::Validation(format!("non-finite marker time for {}", m.label)));
        }
        events.sort_by(|a, b| a.time_s.total_cmp(&b.time_s));
        Ok(Self { events })
    }

    /// Appends an event; times must not decrease.
    pub fn push(&mut self, time_s: f64, label: impl Into<MarkerLabel>) -> Result<()> {
        let label = label.into();
        if let Some(last) = self.events.last() {
            if time_s < last.time_s {
                return Err(Error::Validation(format!(
                    "marker {label} at {time_s} s precedes previous marker at {} s",
                    last.time_s
                )));
            }
        }
        self.events.push(Marker { time_s, label });
        Ok(())
    }

    pub fn events(&self) -> &[Marker] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Marker> {
        self.events.iter()
    }

    /// Only the events that carry a decoding class.
    pub fn class_events(&self) -> impl Iterator<Item = (f64, Class)> + '_ {
        self.events
            .iter()
            .filter_map(|m| m.label.as_class().map(|c| (m.time_s, c)))
    }

    pub fn filter(&self, keep: impl Fn(&Marker) -> bool) -> MarkerList {
        MarkerList {
            events: self.events.iter().filter(|m| keep(m)).cloned().collect(),
        }
    }

    /// Every event shifted by `dt` seconds.
    pub fn shifted(&self, dt: f64) -> MarkerList {
        MarkerList {
            events: self
                .events
                .iter()
                .map(|m| Marker {
                    time_s: m.time_s + dt,
                    label: m.label.clone(),
                })
                .collect(),
        }
    }

    /// Checks every time lies within `[0, duration]`.
    pub fn check_within(&self, duration: f64) -> Result<()> {
        match self.events.iter().find(|m| m.time_s < 0.0 || m.time_s > duration) {
            Some(m) => Err(Error::Validation(format!(
                "marker {} at {} s outside recording of {duration} s",
                m.label, m.time_s
            ))),
            None => Ok(()),
        }
    }

    pub fn merge(&self, other: &MarkerList) -> MarkerList {
        let mut events = self.events.clone();
        events.extend(other.events.iter().cloned());
        events.sort_by(|a, b| a.time_s.total_cmp(&b.time_s));
        MarkerList { events }
    }

    /// JSON-lines: one `{"t": seconds, "label": string}` object per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for m in &self.events {
            let line = MarkerLine {
                t: m.time_s,
                label: m.label.to_string(),
            };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut list = MarkerList::new();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: MarkerLine = serde_json::from_str(&line)?;
            list.push(parsed.t, MarkerLabel::from(parsed.label.as_str()))?;
        }
        Ok(list)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip() {
        let mut m = MarkerList::new();
        m.push(1.5, Class::Left).unwrap();
        m.push(2.25, MarkerLabel::TrialEnd).unwrap();
        m.push(3.0, MarkerLabel::Other("BLINK".into())).unwrap();
        let mut buf = Vec::new();
        m.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("{\"t\":1.5,\"label\":\"LEFT\"}\n"));
        let back = MarkerList::read_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn push_rejects_decreasing_time() {
        let mut m = MarkerList::new();
        m.push(2.0, Class::Rest).unwrap();
        assert!(m.push(1.0, Class::Left).is_err());
        assert!(m.push(2.0, Class::Left).is_ok());
    }

    #[test]
    fn within_duration_check() {
        let mut m = MarkerList::new();
        m.push(9.0, Class::Rest).unwrap();
        assert!(m.check_within(10.0).is_ok());
        assert!(m.check_within(8.0).is_err());
    }
}
