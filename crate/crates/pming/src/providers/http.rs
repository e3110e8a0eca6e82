//! Generic search-engine adapter: substitute a query into a URL
//! template, issue the request, and read the hit count out of the JSON
//! response.
//!
//! The corpus size is a configured constant: engines rarely publish
//! their index size, so the estimate is part of the provider setup.
//! Counts coming back are engine estimates; nothing here assumes they
//! are mutually consistent.

use super::term::Term;
use super::{CountProvider, ProviderError};
use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Everything except RFC 3986 unreserved characters is escaped.
const QUERY_ENCODE: &AsciiSet = &NON_ALPHANUMERIC
    .remove(b'-')
    .remove(b'_')
    .remove(b'.')
    .remove(b'~');

const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

fn default_and_operator() -> String {
    "+AND+".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HttpProviderConfig {
    /// Request URL with exactly one `{query}` placeholder.
    pub url_template: String,
    /// JSON pointer to the hit-count field, e.g. `/totalResults`.
    pub count_path: String,
    /// Configured corpus-size constant.
    pub m_value: u64,
    /// Minimum spacing between outbound requests, in milliseconds.
    #[serde(default)]
    pub min_request_interval: u64,
    /// Spliced between the two URL-encoded terms of a pair query.
    #[serde(default = "default_and_operator")]
    pub and_operator: String,
}

impl HttpProviderConfig {
    pub fn from_file(path: &Path) -> Result<Self, ProviderError> {
        let data = fs::read_to_string(path)?;
        serde_json::from_str(&data).map_err(|e| ProviderError::Parse {
            source_name: path.display().to_string(),
            message: e.to_string(),
        })
    }

    fn validate(&self) -> Result<(), ProviderError> {
        if self.url_template.matches("{query}").count() != 1 {
            return Err(ProviderError::Config(format!(
                "url_template must contain exactly one {{query}} placeholder: `{}`",
                self.url_template
            )));
        }
        if self.m_value == 0 {
            return Err(ProviderError::Config(
                "m_value must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// Count provider backed by a live HTTP endpoint. Outbound requests
/// are serialized and spaced by `min_request_interval` regardless of
/// how many threads call in.
pub struct HttpProvider {
    config: HttpProviderConfig,
    agent: ureq::Agent,
    last_request: Mutex<Option<Instant>>,
}

impl HttpProvider {
    pub fn new(config: HttpProviderConfig) -> Result<Self, ProviderError> {
        Self::with_timeout(config, DEFAULT_TIMEOUT)
    }

    pub fn with_timeout(
        config: HttpProviderConfig,
        timeout: Duration,
    ) -> Result<Self, ProviderError> {
        config.validate()?;
        let agent = ureq::AgentBuilder::new().timeout(timeout).build();
        Ok(HttpProvider {
            config,
            agent,
            last_request: Mutex::new(None),
        })
    }

    pub fn config(&self) -> &HttpProviderConfig {
        &self.config
    }

    /// URL-encode a plain-text query, substitute it into the template,
    /// and extract the hit count from the response.
    pub fn fetch_count(&self, query: &str) -> Result<u64, ProviderError> {
        self.fetch_count_raw(&utf8_percent_encode(query, QUERY_ENCODE).to_string())
    }

    /// Same, but the caller has already produced the URL fragment.
    fn fetch_count_raw(&self, encoded_query: &str) -> Result<u64, ProviderError> {
        let url = self.config.url_template.replace("{query}", encoded_query);
        let body = self.throttled_get(&url)?;
        extract_count(&body, &self.config.count_path)
    }

    fn throttled_get(&self, url: &str) -> Result<String, ProviderError> {
        let mut last = self.last_request.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(previous) = *last {
            let interval = Duration::from_millis(self.config.min_request_interval);
            let elapsed = previous.elapsed();
            if elapsed < interval {
                std::thread::sleep(interval - elapsed);
            }
        }
        let result = self.agent.get(url).call();
        *last = Some(Instant::now());
        match result {
            Ok(response) => response
                .into_string()
                .map_err(|e| ProviderError::Network(e.to_string())),
            Err(ureq::Error::Status(code, _)) => Err(ProviderError::Http(code)),
            Err(transport @ ureq::Error::Transport(_)) => {
                if is_timeout(&transport) {
                    Err(ProviderError::Timeout)
                } else {
                    Err(ProviderError::Network(transport.to_string()))
                }
            }
        }
    }
}

fn is_timeout(error: &ureq::Error) -> bool {
    use std::error::Error;
    let mut current: Option<&(dyn Error + 'static)> = error.source();
    while let Some(e) = current {
        if let Some(io) = e.downcast_ref::<std::io::Error>() {
            if matches!(
                io.kind(),
                std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock
            ) {
                return true;
            }
        }
        current = e.source();
    }
    error.to_string().to_lowercase().contains("timed out")
}

/// Pull the integer at `pointer` out of a JSON body. Accepts plain
/// numbers and numeric strings; digit separators in strings (commas,
/// spaces, underscores, apostrophes) are stripped before parsing.
fn extract_count(body: &str, pointer: &str) -> Result<u64, ProviderError> {
    let root: serde_json::Value = serde_json::from_str(body)
        .map_err(|e| ProviderError::CountParse(format!("response is not JSON: {e}")))?;
    let value = root
        .pointer(pointer)
        .ok_or_else(|| ProviderError::CountParse(format!("no value at `{pointer}`")))?;
    match value {
        serde_json::Value::Number(n) => {
            if let Some(count) = n.as_u64() {
                Ok(count)
            } else if let Some(f) = n.as_f64() {
                if f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64 {
                    Ok(f as u64)
                } else {
                    Err(ProviderError::CountParse(format!(
                        "`{n}` at `{pointer}` is not a non-negative integer"
                    )))
                }
            } else {
                Err(ProviderError::CountParse(format!(
                    "`{n}` at `{pointer}` is not a non-negative integer"
                )))
            }
        }
        serde_json::Value::String(s) => {
            let stripped: String = s
                .chars()
                .filter(|c| !matches!(c, ',' | '_' | ' ' | '\u{00A0}' | '\u{202F}' | '\''))
                .collect();
            stripped.parse().map_err(|_| {
                ProviderError::CountParse(format!("`{s}` at `{pointer}` is not numeric"))
            })
        }
        other => Err(ProviderError::CountParse(format!(
            "value at `{pointer}` has unsupported type: {other}"
        ))),
    }
}

impl CountProvider for HttpProvider {
    fn occurrence(&self, term: &Term) -> Result<u64, ProviderError> {
        self.fetch_count(&term.normalized())
    }

    fn cooccurrence(&self, x: &Term, y: &Term) -> Result<u64, ProviderError> {
        if x == y {
            return self.occurrence(x);
        }
        let encoded_x = utf8_percent_encode(&x.normalized(), QUERY_ENCODE).to_string();
        let encoded_y = utf8_percent_encode(&y.normalized(), QUERY_ENCODE).to_string();
        self.fetch_count_raw(&format!(
            "{encoded_x}{}{encoded_y}",
            self.config.and_operator
        ))
    }

    fn corpus_size(&self) -> u64 {
        self.config.m_value
    }

    fn provider_id(&self) -> String {
        format!("http:{}", self.config.url_template)
    }
}
