//! Machine- and human-readable check reports. The JSON form is byte-stable
//! for identical inputs and flags; only the timing fields vary between runs.

use serde::{Deserialize, Serialize};

pub const REPORT_FORMAT: &str = "kahncheck-report-1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub format: String,
    pub tool: ToolInfo,
    pub input: InputInfo,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub document: Option<String>,
    pub model: String,
    pub checks: Vec<CheckEntry>,
    pub overall: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputInfo {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckEntry {
    pub id: String,
    /// "pass", "fail" or "vacuous".
    pub verdict: String,
    pub details: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<serde_json::Value>,
    pub timing_ms: u64,
}

impl CheckReport {
    pub fn overall_pass(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != "fail")
    }

    pub fn exit_code(&self) -> i32 {
        if self.overall_pass() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{} {} :: {} (model {})\n",
            self.tool.name, self.tool.version, self.input.path, self.model
        ));
        if let Some(name) = &self.document {
            out.push_str(&format!("document: {name}\n"));
        }
        for c in &self.checks {
            out.push_str(&format!(
                "  {:<12} {:<8} {} ({} ms)\n",
                c.id, c.verdict, c.details, c.timing_ms
            ));
            for w in &c.warnings {
                out.push_str(&format!("  {:<12} warning: {w}\n", ""));
            }
            if let Some(ce) = &c.counterexample {
                out.push_str(&format!(
                    "  {:<12} counterexample: {}\n",
                    "",
                    serde_json::to_string(ce).expect("counterexample serializes")
                ));
            }
        }
        out.push_str(&format!("overall: {}\n", self.overall));
        out
    }
}
