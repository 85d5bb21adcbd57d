//! Machine-readable run reports.

use crate::error::{Error, Result};
use crate::metrics::MetricCertificate;
use serde::Serialize;
use serde_json::Value;

/// One numeric outcome with its tolerance and the inequality or
/// certificate that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultLine {
    pub name: String,
    /// A number, or an exact rational as a `"p/q"` string.
    pub value: Value,
    pub tolerance: f64,
    pub source: String,
    pub passed: bool,
}

impl ResultLine {
    pub fn number(name: &str, value: f64, tolerance: f64, source: &str, passed: bool) -> Self {
        ResultLine { name: name.into(), value: Value::from(value), tolerance, source: source.into(), passed }
    }

    /// Informational line that cannot fail.
    pub fn info(name: &str, value: impl Into<Value>, source: &str) -> Self {
        ResultLine { name: name.into(), value: value.into(), tolerance: 0.0, source: source.into(), passed: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub version: u32,
    pub command: String,
    pub seed: u64,
    pub results: Vec<ResultLine>,
    pub verified: bool,
    /// Versioned document produced by the command, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub artifact: Option<Value>,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Report { version: crate::io::SCHEMA_VERSION, command: command.into(), seed, results: Vec::new(), verified: true, artifact: None }
    }

    pub fn push(&mut self, line: ResultLine) {
        self.verified &= line.passed;
        self.results.push(line);
    }

    /// Summary lines for a certificate; the full certificate becomes the
    /// artifact unless one is already set.
    pub fn push_certificate(&mut self, prefix: &str, cert: &MetricCertificate) -> Result<()> {
        let source = format!("{} certificate ({})", cert.kind, serde_json::to_value(cert.label).map_err(json_err)?.as_str().unwrap_or(""));
        let value = match &cert.bound_exact {
            Some(exact) => Value::from(exact.clone()),
            None => Value::from(cert.bound),
        };
        self.push(ResultLine { name: format!("{prefix}bound"), value, tolerance: cert.tolerance, source: source.clone(), passed: cert.verified });
        self.push(ResultLine::info(&format!("{prefix}witness_count"), cert.witness_count, &source));
        if let Some(w) = cert.worst_residual {
            self.push(ResultLine::number(&format!("{prefix}worst_residual"), w, cert.tolerance, &source, w <= cert.tolerance));
        }
        for c in &cert.checks {
            self.push(ResultLine { name: format!("{prefix}check:{}", c.name), value: Value::from(c.detail.clone()), tolerance: 0.0, source: source.clone(), passed: c.passed });
        }
        if self.artifact.is_none() {
            self.artifact = Some(serde_json::from_str(&crate::io::certificate_to_json(cert)?).map_err(json_err)?);
        }
        Ok(())
    }

    pub fn set_artifact(&mut self, versioned_json: &str) -> Result<()> {
        self.artifact = Some(serde_json::from_str(versioned_json).map_err(json_err)?);
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(json_err)?;
        s.push('\n');
        Ok(s)
    }

    /// One row per result line; artifacts are omitted.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["command", "seed", "name", "value", "tolerance", "source", "passed"]).map_err(io)?;
        for r in &self.results {
            let value = match &r.value {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            w.write_record([
                self.command.as_str(),
                &self.seed.to_string(),
                &r.name,
                &value,
                &Value::from(r.tolerance).to_string(),
                &r.source,
                &r.passed.to_string(),
            ])
            .map_err(io)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).map_err(|e| Error::Io(e.to_string()))
    }
}

/// `{"error":{"kind":…,"message":…}}`.
pub fn error_json(e: &Error) -> String {
    let v = serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
    format!("{}\n", serde_json::to_string_pretty(&v).expect("plain JSON value"))
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}
