//! Job reports and their JSON / text forms.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    /// `measured <= bound`.
    #[serde(rename = "<=")]
    AtMost,
    /// `measured >= bound`.
    #[serde(rename = ">=")]
    AtLeast,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictLine {
    pub name: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundLine {
    pub name: String,
    pub measured: f64,
    pub relation: Relation,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub job: Value,
    pub verdicts: Vec<VerdictLine>,
    pub bounds: Vec<BoundLine>,
    pub details: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(round12(x)) {
                    *n = r;
                }
            }
        }
        Value::Array(xs) => xs.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

fn number_text(x: f64) -> String {
    // Same rendering as the JSON form; non-finite values print as in JSON (`null`).
    serde_json::to_string(&x).expect("f64 serializes")
}

impl Report {
    pub fn new(command: &str, job: Value) -> Self {
        Self {
            command: command.to_string(),
            job,
            verdicts: Vec::new(),
            bounds: Vec::new(),
            details: Value::Object(Default::default()),
            timing_ms: None,
        }
    }

    pub fn verdict(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.verdicts.push(VerdictLine {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn bound(&mut self, name: &str, measured: f64, relation: Relation, bound: f64) {
        let pass = match relation {
            Relation::AtMost => measured <= bound,
            Relation::AtLeast => measured >= bound,
        };
        self.bounds.push(BoundLine {
            name: name.to_string(),
            measured,
            relation,
            bound,
            pass,
        });
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("detail serializes");
        if let Value::Object(map) = &mut self.details {
            map.insert(key.to_string(), v);
        }
    }

    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass) && self.bounds.iter().all(|b| b.pass)
    }

    /// Rounds every float to 12 significant digits so both output forms and a reparse
    /// of the JSON see the same numbers.
    pub fn finalize(mut self) -> Self {
        round_value(&mut self.job);
        round_value(&mut self.details);
        for b in &mut self.bounds {
            b.measured = round12(b.measured);
            b.bound = round12(b.bound);
        }
        self.timing_ms = self.timing_ms.map(round12);
        self
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) if !map.is_empty() => {
            for (k, x) in map {
                flatten(&format!("{prefix}.{k}"), x, out);
            }
        }
        Value::Array(xs) if !xs.is_empty() => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        other => {
            let _ = writeln!(out, "{prefix} = {other}");
        }
    }
}

pub fn emit(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "command: {}", report.command);
            let _ = writeln!(out, "result: {}", if report.pass() { "PASS" } else { "FAIL" });
            for v in &report.verdicts {
                let tag = if v.pass { "PASS" } else { "FAIL" };
                if v.detail.is_empty() {
                    let _ = writeln!(out, "verdict {}: {tag}", v.name);
                } else {
                    let _ = writeln!(out, "verdict {}: {tag} ({})", v.name, v.detail);
                }
            }
            for b in &report.bounds {
                let _ = writeln!(
                    out,
                    "bound {}: measured {} {} {}: {}",
                    b.name,
                    number_text(b.measured),
                    b.relation.symbol(),
                    number_text(b.bound),
                    if b.pass { "PASS" } else { "FAIL" }
                );
            }
            flatten("job", &report.job, &mut out);
            flatten("details", &report.details, &mut out);
            if let Some(t) = report.timing_ms {
                let _ = writeln!(out, "timing_ms = {}", number_text(t));
            }
            out
        }
    }
}
