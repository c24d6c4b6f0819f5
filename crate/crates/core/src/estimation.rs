//! Sentence-level n-gram estimates of the corpus distribution.
//!
//! Histories are padded with begin-of-text markers, so the first sentence is
//! predicted from `order - 1` markers. Conditionals are add-λ smoothed over
//! the vocabulary plus `$`:
//!
//! ```text
//! p(s | h) = (count(h, s) + λ) / (count(h) + λ (V + 1))
//! ```

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semantics::{SentenceSeq, WorldModel, EOT};

pub const DEFAULT_LAMBDA: f64 = 1e-6;

/// Begin-of-text marker in persisted histories.
pub const BOS: &str = "<s>";

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceNGram {
    order: usize,
    lambda: f64,
    vocabulary: Vec<String>,
    index: HashMap<String, usize>,
    /// history -> (next -> count); ids `0..V` are sentences, `V` is `$`, `V + 1` is BOS.
    counts: HashMap<Vec<usize>, HashMap<usize, u64>>,
    totals: HashMap<Vec<usize>, u64>,
}

#[derive(Serialize, Deserialize)]
struct CountRow {
    history: Vec<String>,
    next: String,
    count: u64,
}

#[derive(Serialize, Deserialize)]
struct NGramFile {
    order: usize,
    smoothing_lambda: f64,
    vocabulary: Vec<String>,
    counts: Vec<CountRow>,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "smoothing lambda must be finite and nonnegative, got {lambda}"
        )));
    }
    Ok(())
}

impl SentenceNGram {
    fn empty(vocabulary: Vec<String>, order: usize, lambda: f64) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidArgument(format!("order must be at least 2, got {order}")));
        }
        check_lambda(lambda)?;
        let mut index = HashMap::new();
        for (i, s) in vocabulary.iter().enumerate() {
            if s == EOT || s == BOS {
                return Err(Error::InvalidArgument(format!("{s:?} is reserved")));
            }
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate vocabulary entry {s:?}")));
            }
        }
        Ok(SentenceNGram {
            order,
            lambda,
            vocabulary,
            index,
            counts: HashMap::new(),
            totals: HashMap::new(),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing_lambda(&self) -> f64 {
        self.lambda
    }

    /// Same counts, different smoothing.
    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        self.lambda = lambda;
        Ok(self)
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn lookup(&self, surface: &str) -> Option<usize> {
        self.index.get(surface).copied()
    }

    fn eot_id(&self) -> usize {
        self.vocabulary.len()
    }

    fn bos_id(&self) -> usize {
        self.vocabulary.len() + 1
    }

    fn history(&self, items: &[usize], t: usize) -> Vec<usize> {
        let k = self.order - 1;
        (0..k)
            .map(|j| {
                // position t - k + j in the padded sequence
                let pos = t as isize - k as isize + j as isize;
                if pos < 0 {
                    self.bos_id()
                } else {
                    items[pos as usize]
                }
            })
            .collect()
    }

    fn add(&mut self, history: Vec<usize>, next: usize, count: u64) {
        *self
            .counts
            .entry(history.clone())
            .or_default()
            .entry(next)
            .or_default() += count;
        *self.totals.entry(history).or_default() += count;
    }

    /// Raw count of `next` after `history` (ids; `V` is `$`, `V + 1` is BOS).
    pub fn count(&self, history: &[usize], next: usize) -> u64 {
        self.counts
            .get(history)
            .and_then(|m| m.get(&next))
            .copied()
            .unwrap_or(0)
    }

    /// Smoothed `log p(next | history)`; `-inf` for an unseen history when λ = 0.
    pub fn cond_logprob(&self, history: &[usize], next: usize) -> f64 {
        let outcomes = (self.vocabulary.len() + 1) as f64;
        let c = self.count(history, next) as f64;
        let total = self.totals.get(history).copied().unwrap_or(0) as f64;
        let den = total + self.lambda * outcomes;
        if den == 0.0 {
            return f64::NEG_INFINITY;
        }
        ((c + self.lambda) / den).ln()
    }

    /// Log-probability of a sentence-id prefix, optionally closed by `$`.
    pub fn logprob_ids(&self, items: &[usize], terminated: bool) -> f64 {
        let mut lp = 0.0;
        for (t, &s) in items.iter().enumerate() {
            lp += self.cond_logprob(&self.history(items, t), s);
        }
        if terminated {
            lp += self.cond_logprob(&self.history(items, items.len()), self.eot_id());
        }
        lp
    }

    fn ids(&self, surfaces: &[String]) -> Result<Vec<usize>> {
        surfaces
            .iter()
            .map(|s| {
                self.lookup(s)
                    .ok_or_else(|| Error::UnknownSentence(s.clone()))
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let name = |id: usize| -> String {
            if id == self.eot_id() {
                EOT.to_string()
            } else if id == self.bos_id() {
                BOS.to_string()
            } else {
                self.vocabulary[id].clone()
            }
        };
        let mut rows: BTreeMap<(Vec<usize>, usize), u64> = BTreeMap::new();
        for (h, nexts) in &self.counts {
            for (&n, &c) in nexts {
                rows.insert((h.clone(), n), c);
            }
        }
        let file = NGramFile {
            order: self.order,
            smoothing_lambda: self.lambda,
            vocabulary: self.vocabulary.clone(),
            counts: rows
                .into_iter()
                .map(|((h, n), count)| CountRow {
                    history: h.into_iter().map(name).collect(),
                    next: name(n),
                    count,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("n-gram serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NGramFile = serde_json::from_str(text)?;
        let mut model = SentenceNGram::empty(file.vocabulary, file.order, file.smoothing_lambda)?;
        let id = |m: &SentenceNGram, s: &str| -> Result<usize> {
            match s {
                EOT => Ok(m.eot_id()),
                BOS => Ok(m.bos_id()),
                _ => m.lookup(s).ok_or_else(|| Error::UnknownSentence(s.to_string())),
            }
        };
        for row in file.counts {
            if row.history.len() != model.order - 1 {
                return Err(Error::InvalidArgument(format!(
                    "history of length {} in an order-{} model",
                    row.history.len(),
                    model.order
                )));
            }
            let h = row
                .history
                .iter()
                .map(|s| id(&model, s))
                .collect::<Result<Vec<_>>>()?;
            let n = id(&model, &row.next)?;
            model.add(h, n, row.count);
        }
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Fits an n-gram over `vocabulary` (sentence ids index into it).
pub fn fit_ngram(
    corpus: &[SentenceSeq],
    vocabulary: &[String],
    order: usize,
    smoothing_lambda: f64,
) -> Result<SentenceNGram> {
    if corpus.is_empty() {
        return Err(Error::InvalidArgument("empty corpus".into()));
    }
    let mut model = SentenceNGram::empty(vocabulary.to_vec(), order, smoothing_lambda)?;
    for text in corpus {
        if let Some(&bad) = text.items.iter().find(|&&s| s >= vocabulary.len()) {
            return Err(Error::UnknownSentence(format!("#{bad}")));
        }
        for (t, &s) in text.items.iter().enumerate() {
            let h = model.history(&text.items, t);
            model.add(h, s, 1);
        }
        if text.terminated {
            let h = model.history(&text.items, text.items.len());
            let eot = model.eot_id();
            model.add(h, eot, 1);
        }
    }
    Ok(model)
}

/// Fits an n-gram whose vocabulary is the model's lexicon.
pub fn fit_for_model(
    model: &WorldModel,
    corpus: &[SentenceSeq],
    order: usize,
    smoothing_lambda: f64,
) -> Result<SentenceNGram> {
    let vocabulary: Vec<String> = model.lexicon().iter().map(|s| s.surface.clone()).collect();
    fit_ngram(corpus, &vocabulary, order, smoothing_lambda)
}

/// Fits from texts given as surface forms, each flagged with whether it
/// ended in `$`.
pub fn fit_surfaces(
    texts: &[(Vec<String>, bool)],
    vocabulary: &[String],
    order: usize,
    smoothing_lambda: f64,
) -> Result<SentenceNGram> {
    let probe = SentenceNGram::empty(vocabulary.to_vec(), order, smoothing_lambda)?;
    let corpus = texts
        .iter()
        .map(|(t, terminated)| {
            let ids = probe.ids(t)?;
            Ok(if *terminated {
                SentenceSeq::terminated(ids)
            } else {
                SentenceSeq::new(ids)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    fit_ngram(&corpus, vocabulary, order, smoothing_lambda)
}

/// `log p(z)` under the n-gram.
pub fn ngram_logprob(model: &SentenceNGram, z: &SentenceSeq) -> f64 {
    model.logprob_ids(&z.items, z.terminated)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    #[test]
    fn single_text_unsmoothed() {
        let m = fit_ngram(&[SentenceSeq::terminated(vec![0])], &vocab(), 2, 0.0).unwrap();
        assert_eq!(ngram_logprob(&m, &SentenceSeq::new(vec![0])), 0.0);
        assert_eq!(ngram_logprob(&m, &SentenceSeq::terminated(vec![0])), 0.0);
        assert_eq!(ngram_logprob(&m, &SentenceSeq::new(vec![1])), f64::NEG_INFINITY);
        // history "b" never seen
        assert_eq!(m.cond_logprob(&[1], 0), f64::NEG_INFINITY);
        assert_eq!(ngram_logprob(&m, &SentenceSeq::default()), 0.0);
    }

    #[test]
    fn hand_counted_bigram() {
        // texts: a b $, a $, b a $
        let corpus = [
            SentenceSeq::terminated(vec![0, 1]),
            SentenceSeq::terminated(vec![0]),
            SentenceSeq::terminated(vec![1, 0]),
        ];
        let m = fit_ngram(&corpus, &vocab(), 2, 0.5).unwrap();
        // p(a | <s>) = (2 + .5) / (3 + 1.5); p(b | a) = (1 + .5) / (3 + 1.5)
        let want = (2.5f64 / 4.5).ln() + (1.5f64 / 4.5).ln();
        assert!((ngram_logprob(&m, &SentenceSeq::new(vec![0, 1])) - want).abs() < 1e-15);
        // p($ | b) = (1 + .5) / (2 + 1.5)
        let want_t = want + (1.5f64 / 3.5).ln();
        assert!((ngram_logprob(&m, &SentenceSeq::terminated(vec![0, 1])) - want_t).abs() < 1e-15);
    }

    #[test]
    fn conditionals_normalize() {
        let corpus = [
            SentenceSeq::terminated(vec![0, 1, 1]),
            SentenceSeq::terminated(vec![1]),
        ];
        for lambda in [0.0, 1e-6, 0.3, 1e6] {
            let m = fit_ngram(&corpus, &vocab(), 3, lambda).unwrap();
            for h in [[3usize, 3], [3, 0], [0, 1], [1, 1]] {
                let total: f64 = (0..3).map(|n| m.cond_logprob(&h, n).exp()).sum();
                assert!((total - 1.0).abs() < 1e-12, "lambda {lambda} history {h:?}");
            }
        }
        let flat = fit_ngram(&corpus, &vocab(), 2, 1e12).unwrap();
        assert!((flat.cond_logprob(&[0], 1).exp() - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn chain_consistency() {
        let corpus = [
            SentenceSeq::terminated(vec![0, 1]),
            SentenceSeq::terminated(vec![1, 1, 0]),
        ];
        let m = fit_ngram(&corpus, &vocab(), 2, 0.1).unwrap();
        let x = ngram_logprob(&m, &SentenceSeq::new(vec![1]));
        let xy = ngram_logprob(&m, &SentenceSeq::new(vec![1, 0]));
        assert!((xy - (x + m.cond_logprob(&[1], 0))).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip_keeps_counts() {
        let corpus = [
            SentenceSeq::terminated(vec![0, 1]),
            SentenceSeq::terminated(vec![1]),
        ];
        let m = fit_ngram(&corpus, &vocab(), 3, 0.25).unwrap();
        let back = SentenceNGram::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json(), m.to_json());
        let relaxed = back.with_lambda(2.0).unwrap();
        assert_eq!(relaxed.smoothing_lambda(), 2.0);
        assert_eq!(relaxed.count(&[3, 3], 0), 1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_ngram(&[], &vocab(), 2, 0.0).is_err());
        assert!(fit_ngram(&[SentenceSeq::new(vec![0])], &vocab(), 1, 0.0).is_err());
        assert!(fit_ngram(&[SentenceSeq::new(vec![7])], &vocab(), 2, 0.0).is_err());
        assert!(matches!(
            fit_surfaces(&[(vec!["zzz".into()], true)], &vocab(), 2, 0.0),
            Err(Error::UnknownSentence(_))
        ));
    }
}
