use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct Input {
    pub role: String,
    /// `None` for generated text.
    pub path: Option<String>,
    pub sha256: String,
}

impl Input {
    pub fn new(role: &str, path: Option<&Path>, content: &str) -> Self {
        Input {
            role: role.to_string(),
            path: path.map(|p| p.display().to_string()),
            sha256: hex::encode(Sha256::digest(content.as_bytes())),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Metrics {
    /// Exact robustness as a rational string, when known.
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub r: Option<String>,
    /// Decimal view of the robustness or its estimate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_decimal: Option<f64>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<u64>,
    pub seconds: f64,
}

/// The single JSON document every invocation prints.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<Input>,
    pub verdict: String,
    pub metrics: Metrics,
    pub details: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub tool_version: String,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            inputs: Vec::new(),
            verdict: String::new(),
            metrics: Metrics::default(),
            details: Value::Null,
            error: None,
            tool_version: concat!("rkit ", env!("CARGO_PKG_VERSION")).to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hashes_content() {
        let i = Input::new("plan", None, "");
        assert_eq!(i.sha256, "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn omits_unknown_metrics() {
        let r = RunReport::new("ground");
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert!(v["metrics"].get("R").is_none());
        assert!(v.get("error").is_none());
        assert!(v["tool_version"].as_str().unwrap().starts_with("rkit "));
    }
}
