//! Log-probability providers.
//!
//! Every backend answers the same question: the total natural-log probability
//! of a [`Discourse`], a sequence of text units optionally closed by the
//! end-of-text sentence. Exact and n-gram backends resolve units to lexicon
//! sentences; text backends render the discourse with a [`RenderConfig`].

mod cache;
mod http;
mod mock;
mod render;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cache::{CacheOnlyProvider, CachedProvider, ScoreCache, ScoreKey, TextScorer};
pub use http::{HttpProvider, HttpSettings};
pub use mock::{mock_logprob, run_mock_server, MockServer, MOCK_MODEL_ID};
pub use render::{pause_token_transform, EotRealization, RenderConfig, TokenCounter};

use crate::error::{Error, Result};
use crate::estimation::SentenceNGram;
use crate::semantics::{SentenceSeq, WorldModel};
use crate::speakers::{Speaker, SpeakerSpec};

/// Text units to score, e.g. `[premise, hypothesis]` or `[premise]` + `$`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Discourse {
    pub units: Vec<String>,
    pub terminated: bool,
    /// Pause padding after the first unit, sized as if that unit were
    /// repeated this many times. 1 means no padding.
    #[serde(default = "one")]
    pub pause_reps: usize,
}

fn one() -> usize {
    1
}

impl Discourse {
    pub fn new(units: Vec<String>, terminated: bool) -> Self {
        Discourse {
            units,
            terminated,
            pause_reps: 1,
        }
    }

    /// `a^n b`, or `a^n $` when `b` is `None`.
    pub fn repeated(a: &str, n: usize, b: Option<&str>) -> Self {
        let mut units = vec![a.to_string(); n];
        if let Some(b) = b {
            units.push(b.to_string());
        }
        Discourse::new(units, b.is_none())
    }

    /// `a [pause] b`, or `a [pause] $`.
    pub fn paused(a: &str, n: usize, b: Option<&str>) -> Self {
        let mut d = Discourse::repeated(a, 1, b);
        d.pause_reps = n.max(1);
        d
    }
}

/// The four sequences each entailment-test variant scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "n")]
pub enum TestVariant {
    /// `xy, x$, yy, y$`.
    Original,
    /// `x^n y, x^n $, y^(n+1), y^n $`.
    Repeated(usize),
    /// Original sequences with whitespace standing in for `n - 1` extra copies.
    Pause(usize),
}

impl TestVariant {
    pub fn repetitions(&self) -> usize {
        match *self {
            TestVariant::Original => 1,
            TestVariant::Repeated(n) | TestVariant::Pause(n) => n,
        }
    }

    /// `[lp_xy, lp_xeot, lp_yy, lp_yeot]` requests in feature order.
    pub fn discourses(&self, x: &str, y: &str) -> Result<[Discourse; 4]> {
        match *self {
            TestVariant::Original => Ok([
                Discourse::repeated(x, 1, Some(y)),
                Discourse::repeated(x, 1, None),
                Discourse::repeated(y, 1, Some(y)),
                Discourse::repeated(y, 1, None),
            ]),
            TestVariant::Repeated(n) => {
                if n == 0 {
                    return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
                }
                Ok([
                    Discourse::repeated(x, n, Some(y)),
                    Discourse::repeated(x, n, None),
                    Discourse::repeated(y, n, Some(y)),
                    Discourse::repeated(y, n, None),
                ])
            }
            TestVariant::Pause(n) => {
                if n == 0 {
                    return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
                }
                Ok([
                    Discourse::paused(x, n, Some(y)),
                    Discourse::paused(x, n, None),
                    Discourse::paused(y, n, Some(y)),
                    Discourse::paused(y, n, None),
                ])
            }
        }
    }
}

pub trait LogProbProvider: Sync {
    /// Identifies the backend in caches and reports.
    fn backend_id(&self) -> String;

    fn logprob(&self, d: &Discourse) -> Result<f64>;

    fn logprob_batch(&self, ds: &[Discourse]) -> Result<Vec<f64>> {
        ds.iter().map(|d| self.logprob(d)).collect()
    }
}

impl<P: LogProbProvider + ?Sized> LogProbProvider for &P {
    fn backend_id(&self) -> String {
        (**self).backend_id()
    }

    fn logprob(&self, d: &Discourse) -> Result<f64> {
        (**self).logprob(d)
    }

    fn logprob_batch(&self, ds: &[Discourse]) -> Result<Vec<f64>> {
        (**self).logprob_batch(ds)
    }
}

impl<P: LogProbProvider + ?Sized> LogProbProvider for Box<P> {
    fn backend_id(&self) -> String {
        (**self).backend_id()
    }

    fn logprob(&self, d: &Discourse) -> Result<f64> {
        (**self).logprob(d)
    }

    fn logprob_batch(&self, ds: &[Discourse]) -> Result<Vec<f64>> {
        (**self).logprob_batch(ds)
    }
}

/// Splits text after `.`, `!` or `?` followed by whitespace.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if matches!(c, '.' | '!' | '?') {
            let end = i + c.len_utf8();
            match chars.peek() {
                Some((_, next)) if next.is_whitespace() => {
                    out.push(text[start..end].trim());
                    start = end;
                }
                None => {
                    out.push(text[start..end].trim());
                    start = end;
                }
                _ => {}
            }
        }
    }
    let rest = text[start..].trim();
    if !rest.is_empty() {
        out.push(rest);
    }
    out.retain(|s| !s.is_empty());
    out
}

fn resolve_units(
    units: &[String],
    lookup: impl Fn(&str) -> Option<usize>,
) -> Result<Vec<usize>> {
    let mut items = Vec::new();
    for unit in units {
        if let Some(i) = lookup(unit.trim()) {
            items.push(i);
            continue;
        }
        for s in split_sentences(unit) {
            items.push(lookup(s).ok_or_else(|| crate::Error::UnknownSentence(s.to_string()))?);
        }
    }
    Ok(items)
}

/// Exact corpus probabilities from a speaker model.
pub struct ExactProvider<'m> {
    speaker: Speaker<'m>,
}

impl<'m> ExactProvider<'m> {
    pub fn new(model: &'m WorldModel, spec: &SpeakerSpec) -> Result<Self> {
        Ok(ExactProvider {
            speaker: Speaker::new(model, spec)?,
        })
    }

    pub fn from_speaker(speaker: Speaker<'m>) -> Self {
        ExactProvider { speaker }
    }

    pub fn speaker(&self) -> &Speaker<'m> {
        &self.speaker
    }

    pub fn sequence(&self, d: &Discourse) -> Result<SentenceSeq> {
        let model = self.speaker.model();
        Ok(SentenceSeq {
            items: resolve_units(&d.units, |s| model.lookup(s))?,
            terminated: d.terminated,
        })
    }
}

impl LogProbProvider for ExactProvider<'_> {
    fn backend_id(&self) -> String {
        format!("exact:{}", self.speaker.spec().family_name())
    }

    fn logprob(&self, d: &Discourse) -> Result<f64> {
        self.speaker.prefix_logprob(&self.sequence(d)?)
    }

    fn logprob_batch(&self, ds: &[Discourse]) -> Result<Vec<f64>> {
        ds.par_iter().map(|d| self.logprob(d)).collect()
    }
}

/// Estimated probabilities from a sentence-level n-gram model.
pub struct NgramProvider {
    model: SentenceNGram,
}

impl NgramProvider {
    pub fn new(model: SentenceNGram) -> Self {
        NgramProvider { model }
    }

    pub fn model(&self) -> &SentenceNGram {
        &self.model
    }
}

impl LogProbProvider for NgramProvider {
    fn backend_id(&self) -> String {
        format!("ngram:{}", self.model.order())
    }

    fn logprob(&self, d: &Discourse) -> Result<f64> {
        let items = resolve_units(&d.units, |s| self.model.lookup(s))?;
        Ok(self.model.logprob_ids(&items, d.terminated))
    }
}

/// Bits per byte of scored texts: `(-sum logprob / ln 2) / sum bytes`.
pub fn bits_per_byte<S: AsRef<str>>(scores: &[(S, f64)]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::InvalidArgument("no scored texts".into()));
    }
    let bytes: usize = scores.iter().map(|(t, _)| t.as_ref().len()).sum();
    if bytes == 0 {
        return Err(Error::InvalidArgument("scored texts are empty".into()));
    }
    let nats: f64 = scores.iter().map(|(_, lp)| -lp).sum();
    Ok(nats / std::f64::consts::LN_2 / bytes as f64)
}
