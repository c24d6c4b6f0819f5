use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::cache::TextScorer;
use super::mock::{ErrorBody, ScoreRequestBody, ScoreResponseBody};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpSettings {
    /// Base URL, e.g. `http://127.0.0.1:8080`.
    pub endpoint: String,
    /// Model the service must report; responses from any other model are rejected.
    pub model_id: String,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    /// Waits before each retry, in seconds.
    #[serde(default = "default_backoff")]
    pub backoff_secs: Vec<f64>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
}

fn default_batch() -> usize {
    32
}

fn default_in_flight() -> usize {
    4
}

fn default_backoff() -> Vec<f64> {
    vec![0.5, 2.0, 8.0]
}

fn default_timeout() -> f64 {
    120.0
}

impl HttpSettings {
    pub fn new(endpoint: &str, model_id: &str) -> Self {
        HttpSettings {
            endpoint: endpoint.trim_end_matches('/').to_string(),
            model_id: model_id.to_string(),
            batch_size: default_batch(),
            max_in_flight: default_in_flight(),
            backoff_secs: default_backoff(),
            timeout_secs: default_timeout(),
        }
    }
}

/// Client for the `/v1/score` protocol.
pub struct HttpProvider {
    settings: HttpSettings,
    client: reqwest::blocking::Client,
    requests: AtomicUsize,
}

enum Failure {
    Retryable(Error),
    Fatal(Error),
}

impl HttpProvider {
    pub fn new(settings: HttpSettings) -> Result<Self> {
        if settings.batch_size == 0 || settings.max_in_flight == 0 {
            return Err(Error::InvalidArgument(
                "batch_size and max_in_flight must be positive".into(),
            ));
        }
        if settings.model_id.is_empty() {
            return Err(Error::InvalidArgument("http provider needs a model_id".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(settings.timeout_secs))
            .build()
            .map_err(|e| Error::Transport(e.to_string()))?;
        Ok(HttpProvider {
            settings,
            client,
            requests: AtomicUsize::new(0),
        })
    }

    pub fn settings(&self) -> &HttpSettings {
        &self.settings
    }

    /// HTTP requests issued so far, retries included.
    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    fn attempt(&self, batch: &[(String, bool)]) -> std::result::Result<Vec<f64>, Failure> {
        self.requests.fetch_add(1, Ordering::SeqCst);
        let body = ScoreRequestBody {
            texts: batch.iter().map(|(t, _)| t.clone()).collect(),
            append_eos: batch.iter().map(|(_, e)| *e).collect(),
        };
        let url = format!("{}/v1/score", self.settings.endpoint);
        let response = self
            .client
            .post(&url)
            .json(&body)
            .send()
            .map_err(|e| Failure::Retryable(Error::Transport(e.to_string())))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| Failure::Retryable(Error::Transport(e.to_string())))?;
        if !status.is_success() {
            let message = serde_json::from_str::<ErrorBody>(&text)
                .map(|b| b.error)
                .unwrap_or(text);
            let err = Error::Remote(format!("{status}: {message}"));
            return Err(if status.is_server_error() || status.as_u16() == 429 {
                Failure::Retryable(err)
            } else {
                Failure::Fatal(err)
            });
        }
        let parsed: ScoreResponseBody = serde_json::from_str(&text)
            .map_err(|e| Failure::Fatal(Error::Remote(format!("malformed response: {e}"))))?;
        if parsed.model_id != self.settings.model_id {
            return Err(Failure::Fatal(Error::Remote(format!(
                "service reports model {:?}, expected {:?}",
                parsed.model_id, self.settings.model_id
            ))));
        }
        if parsed.log_probs.len() != batch.len() {
            return Err(Failure::Fatal(Error::Remote(format!(
                "{} scores for {} texts",
                parsed.log_probs.len(),
                batch.len()
            ))));
        }
        Ok(parsed.log_probs)
    }

    fn score_batch(&self, batch: &[(String, bool)]) -> Result<Vec<f64>> {
        let mut waits = self.settings.backoff_secs.iter();
        loop {
            match self.attempt(batch) {
                Ok(v) => return Ok(v),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retryable(e)) => match waits.next() {
                    Some(&secs) => std::thread::sleep(Duration::from_secs_f64(secs)),
                    None => return Err(e),
                },
            }
        }
    }
}

impl TextScorer for HttpProvider {
    fn model_id(&self) -> &str {
        &self.settings.model_id
    }

    fn score_texts(&self, requests: &[(String, bool)]) -> Result<Vec<f64>> {
        let batches: Vec<&[(String, bool)]> = requests.chunks(self.settings.batch_size).collect();
        let results: Vec<Mutex<Option<Result<Vec<f64>>>>> =
            batches.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let workers = self.settings.max_in_flight.min(batches.len());
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(batch) = batches.get(i) else { break };
                    let out = self.score_batch(batch);
                    let failed = out.is_err();
                    *results[i].lock().expect("result slot") = Some(out);
                    if failed {
                        // stop handing out work; the batch fails as a whole
                        next.fetch_add(batches.len(), Ordering::SeqCst);
                    }
                });
            }
        });
        let mut out = Vec::with_capacity(requests.len());
        for slot in results {
            match slot.into_inner().expect("result slot") {
                Some(Ok(v)) => out.extend(v),
                Some(Err(e)) => return Err(e),
                None => {}
            }
        }
        if out.len() != requests.len() {
            return Err(Error::Remote("scoring stopped after a failed batch".into()));
        }
        Ok(out)
    }
}
