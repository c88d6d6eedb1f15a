use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Flagged,
    Fail,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Flagged => "flagged",
            Status::Fail => "fail",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub suite: String,
    pub status: Status,
    /// Worst case over the sweep.
    pub metric: Option<f64>,
    pub tolerance: Option<f64>,
    /// Where the worst case occurred, or why there is no metric.
    pub location: String,
}

impl CheckOutcome {
    /// Pass when `metric ≤ tolerance`; a NaN metric fails.
    pub fn judged(suite: impl Into<String>, metric: f64, tolerance: f64, location: String) -> Self {
        let status = if metric <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            suite: suite.into(),
            status,
            metric: Some(metric),
            tolerance: Some(tolerance),
            location,
        }
    }

    pub fn flagged(suite: impl Into<String>, metric: Option<f64>, location: String) -> Self {
        Self {
            suite: suite.into(),
            status: Status::Flagged,
            metric,
            tolerance: None,
            location,
        }
    }

    pub fn error(suite: impl Into<String>, message: String) -> Self {
        Self {
            suite: suite.into(),
            status: Status::Fail,
            metric: None,
            tolerance: None,
            location: message,
        }
    }
}

/// Fixed float format: 17 significant digits, scientific.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

struct JsonFloat(Option<f64>);

impl Serialize for JsonFloat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Some(x) if x.is_finite() => RawValue::from_string(format_float(x))
                .map_err(serde::ser::Error::custom)?
                .serialize(serializer),
            Some(x) => serializer.serialize_str(&x.to_string()),
            None => serializer.serialize_none(),
        }
    }
}

impl Serialize for CheckOutcome {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("CheckOutcome", 5)?;
        s.serialize_field("suite", &self.suite)?;
        s.serialize_field("status", self.status.as_str())?;
        s.serialize_field("metric", &JsonFloat(self.metric))?;
        s.serialize_field("tolerance", &JsonFloat(self.tolerance))?;
        s.serialize_field("location", &self.location)?;
        s.end()
    }
}

/// Outcomes grouped by subcommand, in run order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub sections: Vec<(String, Vec<CheckOutcome>)>,
}

impl Serialize for Report {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut m = serializer.serialize_map(Some(self.sections.len()))?;
        for (name, outcomes) in &self.sections {
            m.serialize_entry(name, outcomes)?;
        }
        m.end()
    }
}

impl Report {
    pub fn push(&mut self, name: &str, outcomes: Vec<CheckOutcome>) {
        self.sections.push((name.to_string(), outcomes));
    }

    pub fn outcomes(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.sections.iter().flat_map(|(_, o)| o)
    }

    pub fn worst(&self) -> Status {
        self.outcomes()
            .map(|o| o.status)
            .max()
            .unwrap_or(Status::Pass)
    }

    pub fn exit_code(&self) -> i32 {
        match self.worst() {
            Status::Fail => 1,
            Status::Pass | Status::Flagged => 0,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["suite", "status", "metric", "tolerance", "location"])
            .expect("in-memory write");
        for o in self.outcomes() {
            w.write_record([
                o.suite.as_str(),
                o.status.as_str(),
                &format_opt(o.metric),
                &format_opt(o.tolerance),
                &o.location,
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    pub fn to_table(&self) -> String {
        let rows: Vec<[String; 5]> = self
            .outcomes()
            .map(|o| {
                [
                    o.suite.clone(),
                    o.status.to_string().to_uppercase(),
                    format_opt(o.metric),
                    format_opt(o.tolerance),
                    o.location.clone(),
                ]
            })
            .collect();
        let header = ["suite", "status", "metric", "tolerance", "location"].map(String::from);
        let mut widths = header.clone().map(|h| h.len());
        for r in &rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        for r in std::iter::once(&header).chain(&rows) {
            let line: Vec<String> = r
                .iter()
                .zip(widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        let counts = [Status::Pass, Status::Flagged, Status::Fail]
            .map(|s| self.outcomes().filter(|o| o.status == s).count());
        out.push_str(&format!(
            "\n{} passed, {} flagged, {} failed\n",
            counts[0], counts[1], counts[2]
        ));
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.to_table(),
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }

    pub fn write_to(&self, format: Format, mut sink: impl Write) -> std::io::Result<()> {
        sink.write_all(self.render(format).as_bytes())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Table,
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(Format::Table),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!(
                "unknown format '{other}' (expected table, json or csv)"
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::default();
        r.push(
            "classical",
            vec![CheckOutcome::judged(
                "classical.x",
                0.375,
                0.5,
                "S=0, V=1".into(),
            )],
        );
        r.push(
            "expect",
            vec![CheckOutcome::flagged(
                "expect.y",
                None,
                "not evaluated, see notes".into(),
            )],
        );
        r
    }

    #[test]
    fn json_layout() {
        let v: serde_json::Value = serde_json::from_str(&sample().to_json()).unwrap();
        assert_eq!(v["classical"][0]["status"], "pass");
        assert!(v["expect"][0]["metric"].is_null());
        assert!(sample().to_json().contains("3.7500000000000000e-1"));
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys.len(), 2);
    }

    #[test]
    fn csv_header_and_quoting() {
        let csv = sample().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("suite,status,metric,tolerance,location"));
        assert_eq!(
            lines.next(),
            Some("classical.x,pass,3.7500000000000000e-1,5.0000000000000000e-1,\"S=0, V=1\"")
        );
    }

    #[test]
    fn exit_code_follows_worst_status() {
        let mut r = sample();
        assert_eq!(r.exit_code(), 0);
        r.push(
            "x",
            vec![CheckOutcome::judged("x", f64::NAN, 1.0, String::new())],
        );
        assert_eq!(r.worst(), Status::Fail);
        assert_eq!(r.exit_code(), 1);
    }
}
