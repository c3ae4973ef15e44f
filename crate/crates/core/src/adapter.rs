//! Remote generator wire protocol and script extraction.
//!
//! A request is one JSON POST `{"prompt", "context", "temperature"}` and the
//! reply is `{"text"}`. Anything that speaks this can stand in for the
//! builtin generator.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ENDPOINT_ENV: &str = "BIOFORGE_ENDPOINT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdapterConfig {
    pub endpoint: Option<String>,
    pub temperature: f64,
    pub timeout_secs: u64,
    pub max_retries: u32,
    /// Initial delay between attempts; doubles after each failure.
    pub backoff_ms: u64,
    /// Sent as `Authorization: Bearer <token>` when set.
    pub token: Option<String>,
}

impl Default for AdapterConfig {
    fn default() -> Self {
        Self {
            endpoint: None,
            temperature: 0.1,
            timeout_secs: 60,
            max_retries: 2,
            backoff_ms: 250,
            token: None,
        }
    }
}

impl AdapterConfig {
    /// Applies the endpoint override from the environment, if set.
    pub fn with_env(mut self) -> Self {
        if let Ok(url) = std::env::var(ENDPOINT_ENV) {
            if !url.trim().is_empty() {
                self.endpoint = Some(url);
            }
        }
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdapterError {
    #[error("no endpoint configured (set {ENDPOINT_ENV} or adapter.endpoint)")]
    NoEndpoint,
    #[error("temperature must be non-negative, got {0}")]
    BadTemperature(f64),
    #[error("request failed after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
}

#[derive(Debug, Serialize)]
struct Request<'a> {
    prompt: &'a str,
    context: &'a [String],
    temperature: f64,
}

#[derive(Debug, Deserialize)]
struct Reply {
    text: String,
}

pub fn call_remote_generator(prompt: &str, context: &[String], cfg: &AdapterConfig) -> Result<String, AdapterError> {
    let url = cfg.endpoint.as_deref().ok_or(AdapterError::NoEndpoint)?;
    if cfg.temperature.is_nan() || cfg.temperature < 0.0 {
        return Err(AdapterError::BadTemperature(cfg.temperature));
    }
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(cfg.timeout_secs.max(1))))
        .build()
        .into();
    let body = Request {
        prompt,
        context,
        temperature: cfg.temperature,
    };
    let attempts = cfg.max_retries + 1;
    let mut message = String::new();
    for attempt in 0..attempts {
        if attempt > 0 {
            std::thread::sleep(Duration::from_millis(cfg.backoff_ms << (attempt - 1).min(16)));
        }
        let mut req = agent.post(url);
        if let Some(token) = &cfg.token {
            req = req.header("Authorization", format!("Bearer {token}"));
        }
        let result = req
            .send_json(&body)
            .and_then(|mut resp| resp.body_mut().read_json::<Reply>());
        match result {
            Ok(reply) => return Ok(reply.text),
            Err(e) => {
                log::warn!("remote generator attempt {} failed: {e}", attempt + 1);
                message = e.to_string();
            }
        }
    }
    Err(AdapterError::Transport { attempts, message })
}

fn is_fence(line: &str) -> bool {
    line.trim_start().starts_with("```")
}

/// Pulls a program out of model output: the interior of the first fenced
/// block if there is one, then from the first line that starts with
/// `design` onwards if there is one. Otherwise the text is returned as is.
/// Applying it twice gives the same result as applying it once.
pub fn extract_script(raw: &str) -> String {
    let mut text = raw;
    let mut offset = 0;
    let mut open = None;
    for line in raw.split_inclusive('\n') {
        let end = offset + line.len();
        if is_fence(line) {
            match open {
                None => open = Some(end),
                Some(start) => {
                    text = &raw[start..offset];
                    open = None;
                    break;
                }
            }
        }
        offset = end;
    }
    if let Some(start) = open {
        text = &raw[start..];
    }
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if line.trim_start().starts_with("design") {
            return text[offset..].to_string();
        }
        offset += line.len();
    }
    text.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fenced_block_wins() {
        let raw = "Here you go:\n```bgs\ndesign a {\n  slab {\n  }\n}\n```\nMore prose.\n```\nignored\n```\n";
        assert_eq!(extract_script(raw), "design a {\n  slab {\n  }\n}\n");
    }

    #[test]
    fn design_line_suffix() {
        let raw = "Step 1: think.\nStep 2: write.\ndesign a {\n}\n";
        assert_eq!(extract_script(raw), "design a {\n}\n");
    }

    #[test]
    fn fallback_is_whole_text() {
        assert_eq!(extract_script("no program here"), "no program here");
    }

    #[test]
    fn unclosed_fence_runs_to_end() {
        assert_eq!(extract_script("x\n```\ndesign b {\n"), "design b {\n");
    }

    #[test]
    fn idempotent_on_awkward_inputs() {
        for raw in [
            "```\nprose\ndesign a {}\n```\n",
            "a\n```\n```\ndesign",
            "  design x\n```",
            "```",
            "",
        ] {
            let once = extract_script(raw);
            assert_eq!(extract_script(&once), once, "{raw:?}");
        }
    }

    #[test]
    fn missing_endpoint_is_an_error() {
        let cfg = AdapterConfig::default();
        assert_eq!(call_remote_generator("p", &[], &cfg), Err(AdapterError::NoEndpoint));
    }
}
