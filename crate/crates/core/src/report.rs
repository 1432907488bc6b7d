//! JSON-lines reports: a schema header, one record per check, a summary.

use std::io::Write;
use std::sync::Mutex;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const SCHEMA: &str = "lubin-tate/report";
pub const SCHEMA_VERSION: u32 = 1;

/// Ordered so that the worst verdict is the maximum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Inconclusive,
    Fail,
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }

    pub fn worst<I: IntoIterator<Item = Verdict>>(it: I) -> Verdict {
        it.into_iter().max().unwrap_or(Verdict::Pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub params: Value,
    pub inputs_digest: String,
    pub verdict: Verdict,
    pub residual_valuations: Vec<i64>,
    pub runtime_ms: u64,
    pub detail: Value,
    /// Inputs of the first failing case, when there is one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reproduce: Option<Value>,
}

impl CheckRecord {
    pub fn new(check: &str, params: Value) -> Self {
        CheckRecord {
            check: check.to_string(),
            inputs_digest: digest(&params),
            params,
            verdict: Verdict::Pass,
            residual_valuations: vec![],
            runtime_ms: 0,
            detail: Value::Null,
            reproduce: None,
        }
    }

    /// Records one case; the first case below `Pass` supplies `reproduce`.
    pub fn case(&mut self, verdict: Verdict, residual: i64, inputs: impl FnOnce() -> Value) {
        self.residual_valuations.push(residual);
        if verdict > Verdict::Pass && self.reproduce.is_none() {
            self.reproduce = Some(inputs());
        }
        self.verdict = self.verdict.max(verdict);
    }

    pub fn fail_with(&mut self, verdict: Verdict, message: String, inputs: Value) {
        self.verdict = self.verdict.max(verdict);
        if self.reproduce.is_none() {
            self.reproduce = Some(json!({ "error": message, "inputs": inputs }));
        }
    }

    /// The record with its runtime zeroed, for comparing reruns.
    pub fn timeless(&self) -> CheckRecord {
        CheckRecord {
            runtime_ms: 0,
            ..self.clone()
        }
    }
}

pub fn digest(v: &Value) -> String {
    let bytes = serde_json::to_vec(v).expect("json values serialize");
    Sha256::digest(&bytes).iter().take(12).map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn new(config: RunConfig) -> Self {
        Report { config, records: vec![] }
    }

    pub fn verdict(&self) -> Verdict {
        Verdict::worst(self.records.iter().map(|r| r.verdict))
    }

    pub fn header(&self) -> Value {
        json!({ "schema": SCHEMA, "version": SCHEMA_VERSION, "config": self.config })
    }

    pub fn summary(&self) -> Value {
        let count = |v: Verdict| self.records.iter().filter(|r| r.verdict == v).count();
        json!({
            "summary": self.verdict(),
            "pass": count(Verdict::Pass),
            "fail": count(Verdict::Fail),
            "inconclusive": count(Verdict::Inconclusive),
        })
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out = vec![self.header().to_string()];
        out.extend(self.records.iter().map(|r| serde_json::to_string(r).expect("records serialize")));
        out.push(self.summary().to_string());
        out
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for line in self.lines() {
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Serializes writes from concurrent checks into one stream.
pub struct Sink<W: Write> {
    inner: Mutex<W>,
}

impl<W: Write> Sink<W> {
    pub fn new(w: W) -> Self {
        Sink { inner: Mutex::new(w) }
    }

    pub fn emit(&self, v: &impl Serialize) -> std::io::Result<()> {
        let line = serde_json::to_string(v).map_err(std::io::Error::other)?;
        let mut w = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        writeln!(w, "{line}")?;
        w.flush()
    }

    pub fn into_inner(self) -> W {
        self.inner.into_inner().unwrap_or_else(|e| e.into_inner())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worst_verdict_wins() {
        assert_eq!(Verdict::worst([]), Verdict::Pass);
        assert_eq!(Verdict::worst([Verdict::Pass, Verdict::Inconclusive]), Verdict::Inconclusive);
        assert_eq!(Verdict::worst([Verdict::Fail, Verdict::Inconclusive]), Verdict::Fail);
        assert_eq!(Verdict::Fail.exit_code(), 1);
        assert_eq!(Verdict::Inconclusive.exit_code(), 2);
    }

    #[test]
    fn first_failure_is_kept() {
        let mut r = CheckRecord::new("x", json!({"p": 3}));
        r.case(Verdict::Pass, 9, || json!(0));
        r.case(Verdict::Fail, 2, || json!(1));
        r.case(Verdict::Fail, 1, || json!(2));
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.reproduce, Some(json!(1)));
        assert_eq!(r.residual_valuations, vec![9, 2, 1]);
    }

    #[test]
    fn lines_have_header_and_summary() {
        let mut rep = Report::new(RunConfig::default());
        rep.records.push(CheckRecord::new("x", json!({})));
        let lines = rep.lines();
        assert_eq!(lines.len(), 3);
        let head: Value = serde_json::from_str(&lines[0]).unwrap();
        assert_eq!(head["schema"], SCHEMA);
        assert_eq!(head["version"], SCHEMA_VERSION);
        let rec: Value = serde_json::from_str(&lines[1]).unwrap();
        for k in ["check", "params", "verdict", "residual_valuations", "runtime_ms"] {
            assert!(rec.get(k).is_some(), "{k}");
        }
        let sink = Sink::new(Vec::new());
        sink.emit(&rep.summary()).unwrap();
        assert!(String::from_utf8(sink.into_inner()).unwrap().contains("\"summary\":\"pass\""));
    }
}
