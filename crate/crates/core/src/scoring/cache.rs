use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Discourse, LogProbProvider, RenderConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScoreKey {
    pub model_id: String,
    pub text: String,
    pub append_eos: bool,
}

#[derive(Serialize, Deserialize)]
struct CacheLine {
    text_sha256: String,
    text: String,
    append_eos: bool,
    logprob: f64,
    model_id: String,
}

fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Append-only JSONL store of text scores.
///
/// Reads take a shared lock; inserts are serialized and flushed line by line,
/// so a crash loses at most the line being written.
#[derive(Debug)]
pub struct ScoreCache {
    path: Option<PathBuf>,
    map: RwLock<HashMap<ScoreKey, f64>>,
    writer: Mutex<Option<BufWriter<File>>>,
}

impl ScoreCache {
    pub fn in_memory() -> Self {
        ScoreCache {
            path: None,
            map: RwLock::new(HashMap::new()),
            writer: Mutex::new(None),
        }
    }

    /// Loads `path` if it exists and appends new scores to it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut map = HashMap::new();
        if path.exists() {
            let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| Error::io(&path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: CacheLine =
                    serde_json::from_str(&line).map_err(|e| Error::CacheCorrupted {
                        line: i + 1,
                        message: e.to_string(),
                    })?;
                if sha256_hex(&entry.text) != entry.text_sha256 {
                    return Err(Error::CacheCorrupted {
                        line: i + 1,
                        message: "text_sha256 does not match text".into(),
                    });
                }
                map.insert(
                    ScoreKey {
                        model_id: entry.model_id,
                        text: entry.text,
                        append_eos: entry.append_eos,
                    },
                    entry.logprob,
                );
            }
        } else if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        Ok(ScoreCache {
            path: Some(path),
            map: RwLock::new(map),
            writer: Mutex::new(Some(BufWriter::new(file))),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &ScoreKey) -> Option<f64> {
        self.map.read().expect("cache lock").get(key).copied()
    }

    /// Records a score. Existing entries are kept as they are.
    pub fn insert(&self, key: ScoreKey, logprob: f64) -> Result<()> {
        if !logprob.is_finite() {
            return Err(Error::Remote(format!(
                "non-finite log-probability {logprob} for {:?}",
                key.text
            )));
        }
        let mut writer = self.writer.lock().expect("cache writer lock");
        if self.get(&key).is_some() {
            return Ok(());
        }
        if let Some(w) = writer.as_mut() {
            let line = serde_json::to_string(&CacheLine {
                text_sha256: sha256_hex(&key.text),
                text: key.text.clone(),
                append_eos: key.append_eos,
                logprob,
                model_id: key.model_id.clone(),
            })?;
            let path = self.path.as_deref().unwrap_or(Path::new("<cache>"));
            writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
            w.flush().map_err(|e| Error::io(path, e))?;
        }
        self.map.write().expect("cache lock").insert(key, logprob);
        Ok(())
    }
}

/// A remote or local model that scores rendered texts.
pub trait TextScorer: Sync {
    fn model_id(&self) -> &str;

    /// Log-probabilities (nats) in request order.
    fn score_texts(&self, requests: &[(String, bool)]) -> Result<Vec<f64>>;
}

/// Text scoring through a cache: only misses reach the scorer.
pub struct CachedProvider<'c, S> {
    scorer: S,
    cache: &'c ScoreCache,
    render: RenderConfig,
}

impl<'c, S: TextScorer> CachedProvider<'c, S> {
    pub fn new(scorer: S, cache: &'c ScoreCache, render: RenderConfig) -> Self {
        CachedProvider {
            scorer,
            cache,
            render,
        }
    }

    pub fn scorer(&self) -> &S {
        &self.scorer
    }

    fn key(&self, d: &Discourse) -> ScoreKey {
        let (text, append_eos) = self.render.render(d);
        ScoreKey {
            model_id: self.scorer.model_id().to_string(),
            text,
            append_eos,
        }
    }
}

impl<S: TextScorer> LogProbProvider for CachedProvider<'_, S> {
    fn backend_id(&self) -> String {
        format!("http:{}", self.scorer.model_id())
    }

    fn logprob(&self, d: &Discourse) -> Result<f64> {
        Ok(self.logprob_batch(std::slice::from_ref(d))?[0])
    }

    fn logprob_batch(&self, ds: &[Discourse]) -> Result<Vec<f64>> {
        let keys: Vec<ScoreKey> = ds.iter().map(|d| self.key(d)).collect();
        let mut missing: Vec<&ScoreKey> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for k in &keys {
            if self.cache.get(k).is_none() && seen.insert(k) {
                missing.push(k);
            }
        }
        if !missing.is_empty() {
            let requests: Vec<(String, bool)> = missing
                .iter()
                .map(|k| (k.text.clone(), k.append_eos))
                .collect();
            let scores = self.scorer.score_texts(&requests)?;
            for (k, lp) in missing.into_iter().zip(scores) {
                self.cache.insert(k.clone(), lp)?;
            }
        }
        keys.iter()
            .map(|k| {
                self.cache
                    .get(k)
                    .ok_or_else(|| Error::CacheMiss(k.text.clone()))
            })
            .collect()
    }
}

/// Reads scores from a cache and never contacts a model.
pub struct CacheOnlyProvider<'c> {
    cache: &'c ScoreCache,
    model_id: String,
    render: RenderConfig,
}

impl<'c> CacheOnlyProvider<'c> {
    pub fn new(cache: &'c ScoreCache, model_id: &str, render: RenderConfig) -> Self {
        CacheOnlyProvider {
            cache,
            model_id: model_id.to_string(),
            render,
        }
    }
}

impl LogProbProvider for CacheOnlyProvider<'_> {
    fn backend_id(&self) -> String {
        format!("cache:{}", self.model_id)
    }

    fn logprob(&self, d: &Discourse) -> Result<f64> {
        let (text, append_eos) = self.render.render(d);
        let key = ScoreKey {
            model_id: self.model_id.clone(),
            text,
            append_eos,
        };
        self.cache
            .get(&key)
            .ok_or(Error::CacheMiss(key.text))
    }
}
