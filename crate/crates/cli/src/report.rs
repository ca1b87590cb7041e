//! Reports and their canonical serialization.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::problem::RunOptions;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReportStatus {
    Ok,
    Inconclusive,
    Obstruction,
    Error,
}

impl ReportStatus {
    /// 0 abelian/ok, 2 obstruction, 3 inconclusive, 1 error.
    pub fn exit_code(self) -> i32 {
        match self {
            ReportStatus::Ok => 0,
            ReportStatus::Obstruction => 2,
            ReportStatus::Inconclusive => 3,
            ReportStatus::Error => 1,
        }
    }

    /// Error beats obstruction beats inconclusive beats ok.
    pub fn combine(self, other: ReportStatus) -> ReportStatus {
        self.max(other)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub options: Option<RunOptions>,
}

impl Provenance {
    pub fn new(command: &str, options: Option<&RunOptions>) -> Self {
        Provenance {
            tool: "vega".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            options: options.cloned(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageError {
    pub stage: String,
    pub candidate: Option<usize>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub provenance: Provenance,
    pub status: ReportStatus,
    pub results: Map<String, Value>,
    pub errors: Vec<StageError>,
}

impl Report {
    pub fn new(command: &str, options: Option<&RunOptions>) -> Self {
        Report { provenance: Provenance::new(command, options), status: ReportStatus::Ok, results: Map::new(), errors: Vec::new() }
    }

    pub fn set<T: Serialize>(&mut self, key: &str, value: &T) {
        let v = serde_json::to_value(value).expect("report values serialize");
        self.results.insert(key.into(), v);
    }

    pub fn error(&mut self, stage: &str, candidate: Option<usize>, message: impl Into<String>) {
        self.errors.push(StageError { stage: stage.into(), candidate, message: message.into() });
        self.status = ReportStatus::Error;
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    /// Sorted keys, two-space indentation, trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Report> {
        serde_json::from_str(text)
    }

    /// Short human summary.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} [{}]\nstatus: {:?}\n", self.provenance.tool, self.provenance.version, self.provenance.command, self.status);
        for (k, v) in &self.results {
            let line = match v {
                Value::String(s) => s.clone(),
                Value::Bool(_) | Value::Number(_) | Value::Null => v.to_string(),
                Value::Array(a) => format!("[{} entries]", a.len()),
                Value::Object(o) => format!("{{{}}}", o.keys().cloned().collect::<Vec<_>>().join(", ")),
            };
            out.push_str(&format!("{k}: {line}\n"));
        }
        for e in &self.errors {
            match e.candidate {
                Some(i) => out.push_str(&format!("error [{} #{i}]: {}\n", e.stage, e.message)),
                None => out.push_str(&format!("error [{}]: {}\n", e.stage, e.message)),
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(ReportStatus::Ok.exit_code(), 0);
        assert_eq!(ReportStatus::Error.exit_code(), 1);
        assert_eq!(ReportStatus::Obstruction.exit_code(), 2);
        assert_eq!(ReportStatus::Inconclusive.exit_code(), 3);
        assert_eq!(ReportStatus::Inconclusive.combine(ReportStatus::Obstruction), ReportStatus::Obstruction);
    }

    #[test]
    fn keys_are_sorted() {
        let mut r = Report::new("t", None);
        r.set("zeta", &1);
        r.set("alpha", &serde_json::json!({"b": 1, "a": 2}));
        let s = r.to_canonical_json();
        assert!(s.find("\"alpha\"").unwrap() < s.find("\"zeta\"").unwrap());
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.find("\"errors\"").unwrap() < s.find("\"provenance\"").unwrap());
        assert_eq!(Report::from_json(&s).unwrap(), r);
    }
}
