//! Deterministic scoring service for tests and offline runs.
//!
//! The mock model reads text as bytes. Each of the 256 byte values and an
//! end-of-sequence symbol has a base weight: 4 for lowercase ASCII letters and
//! the space, 2 for uppercase letters, digits and ASCII punctuation, 1 for any
//! other byte, and 2 for end-of-sequence. With history `h`,
//!
//! ```text
//! p(s | h) = (base(s) + count_h(s)) / (B + |h|)
//! ```
//!
//! where `B` is the sum of all base weights (407) and `count_h(s)` counts
//! earlier occurrences of byte `s`. Repeated material therefore gets cheaper,
//! a crude stand-in for in-context copying.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MOCK_MODEL_ID: &str = "pel-mock-bytecache-v1";

const EOS_WEIGHT: f64 = 2.0;

fn base_weight(b: u8) -> f64 {
    if b.is_ascii_lowercase() || b == b' ' {
        4.0
    } else if b.is_ascii_uppercase() || b.is_ascii_digit() || b.is_ascii_punctuation() {
        2.0
    } else {
        1.0
    }
}

fn total_base() -> f64 {
    (0..=255u8).map(base_weight).sum::<f64>() + EOS_WEIGHT
}

/// Log-probability (nats) of `text` under the mock model, plus its token count.
pub fn mock_logprob(text: &str, append_eos: bool) -> (f64, usize) {
    let total = total_base();
    let mut counts = [0u32; 256];
    let mut lp = 0.0;
    for (i, &b) in text.as_bytes().iter().enumerate() {
        let p = (base_weight(b) + counts[b as usize] as f64) / (total + i as f64);
        lp += p.ln();
        counts[b as usize] += 1;
    }
    let mut tokens = text.len();
    if append_eos {
        lp += (EOS_WEIGHT / (total + text.len() as f64)).ln();
        tokens += 1;
    }
    (lp, tokens)
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct ScoreRequestBody {
    pub texts: Vec<String>,
    pub append_eos: Vec<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct ScoreResponseBody {
    pub log_probs: Vec<f64>,
    pub token_counts: Vec<usize>,
    pub model_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct ErrorBody {
    pub error: String,
}

/// Handle to a running mock service; stops when dropped.
pub struct MockServer {
    server: Arc<tiny_http::Server>,
    addr: std::net::SocketAddr,
    requests: Arc<AtomicUsize>,
    fail_next: Arc<AtomicUsize>,
    thread: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn endpoint(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn addr(&self) -> std::net::SocketAddr {
        self.addr
    }

    /// Scoring requests received so far (including failed ones).
    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    /// Makes the next `k` requests fail with 503.
    pub fn fail_next(&self, k: usize) {
        self.fail_next.store(k, Ordering::SeqCst);
    }

    /// Blocks until the server stops.
    pub fn join(mut self) {
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

/// Serves the mock model on `addr` (e.g. `127.0.0.1:0` for any free port).
pub fn run_mock_server(addr: &str) -> Result<MockServer> {
    let server = tiny_http::Server::http(addr)
        .map_err(|e| Error::Transport(format!("cannot bind {addr}: {e}")))?;
    let bound = server
        .server_addr()
        .to_ip()
        .ok_or_else(|| Error::Transport("mock server has no IP address".into()))?;
    let server = Arc::new(server);
    let requests = Arc::new(AtomicUsize::new(0));
    let fail_next = Arc::new(AtomicUsize::new(0));
    let thread = {
        let server = server.clone();
        let requests = requests.clone();
        let fail_next = fail_next.clone();
        std::thread::spawn(move || {
            for request in server.incoming_requests() {
                handle(request, &requests, &fail_next);
            }
        })
    };
    Ok(MockServer {
        server,
        addr: bound,
        requests,
        fail_next,
        thread: Some(thread),
    })
}

fn respond<T: Serialize>(request: tiny_http::Request, status: u16, body: &T) {
    let json = serde_json::to_string(body).expect("response serializes");
    let header = tiny_http::Header::from_bytes(&b"Content-Type"[..], &b"application/json"[..])
        .expect("static header");
    let response = tiny_http::Response::from_string(json)
        .with_status_code(status)
        .with_header(header);
    let _ = request.respond(response);
}

fn handle(mut request: tiny_http::Request, requests: &AtomicUsize, fail_next: &AtomicUsize) {
    if request.url() != "/v1/score" {
        return respond(request, 404, &ErrorBody { error: "not found".into() });
    }
    if *request.method() != tiny_http::Method::Post {
        return respond(request, 405, &ErrorBody { error: "use POST".into() });
    }
    requests.fetch_add(1, Ordering::SeqCst);
    if fail_next
        .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |k| k.checked_sub(1))
        .is_ok()
    {
        return respond(request, 503, &ErrorBody { error: "injected failure".into() });
    }
    let mut body = String::new();
    if let Err(e) = request.as_reader().read_to_string(&mut body) {
        return respond(request, 400, &ErrorBody { error: e.to_string() });
    }
    let parsed: ScoreRequestBody = match serde_json::from_str(&body) {
        Ok(p) => p,
        Err(e) => return respond(request, 400, &ErrorBody { error: e.to_string() }),
    };
    if parsed.texts.len() != parsed.append_eos.len() {
        return respond(
            request,
            400,
            &ErrorBody {
                error: "texts and append_eos differ in length".into(),
            },
        );
    }
    let (log_probs, token_counts) = parsed
        .texts
        .iter()
        .zip(&parsed.append_eos)
        .map(|(t, &eos)| mock_logprob(t, eos))
        .unzip();
    respond(
        request,
        200,
        &ScoreResponseBody {
            log_probs,
            token_counts,
            model_id: MOCK_MODEL_ID.to_string(),
        },
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_total() {
        assert_eq!(total_base(), 407.0);
    }

    #[test]
    fn hand_computed_values() {
        // "aa": 4/407 then (4+1)/408
        let (lp, n) = mock_logprob("aa", false);
        assert_eq!(n, 2);
        assert!((lp - ((4.0f64 / 407.0).ln() + (5.0f64 / 408.0).ln())).abs() < 1e-14);
        // "" + eos: 2/407
        let (lp, n) = mock_logprob("", true);
        assert_eq!(n, 1);
        assert!((lp - (2.0f64 / 407.0).ln()).abs() < 1e-15);
        // "A." + eos: 2/407, 2/408, 2/409
        let (lp, _) = mock_logprob("A.", true);
        let want = (2.0f64 / 407.0).ln() + (2.0f64 / 408.0).ln() + (2.0f64 / 409.0).ln();
        assert!((lp - want).abs() < 1e-14);
    }
}
