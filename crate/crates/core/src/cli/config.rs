use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{FitOptions, Orientation};
use crate::scoring::{HttpSettings, RenderConfig, TestVariant, MOCK_MODEL_ID};
use crate::speakers::SpeakerSpec;
use crate::theory::sweeps::VerifyOptions;

/// Overrides the score cache directory.
pub const CACHE_DIR_ENV: &str = "PEL_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    /// Exact speaker probabilities from a world model.
    #[default]
    Exact,
    /// A fitted sentence n-gram.
    Ngram,
    /// Cached text scores only; a miss is an error.
    Cache,
    /// A remote scoring service behind the cache.
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    #[default]
    Original,
    Flipped,
    Repeated,
    Pause,
}

impl TestKind {
    pub fn variant(self, n_reps: usize) -> TestVariant {
        match self {
            TestKind::Original | TestKind::Flipped => TestVariant::Original,
            TestKind::Repeated => TestVariant::Repeated(n_reps),
            TestKind::Pause => TestVariant::Pause(n_reps),
        }
    }

    pub fn orientation(self) -> Orientation {
        match self {
            TestKind::Flipped => Orientation::Flipped,
            _ => Orientation::Original,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TestKind::Original => "original",
            TestKind::Flipped => "flipped",
            TestKind::Repeated => "repeated",
            TestKind::Pause => "pause",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub world_model: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub ngram: Option<PathBuf>,
    pub instances: Option<PathBuf>,
    pub scored: Option<PathBuf>,
    /// JSONL of `{"text": ...}` lines for `bpb`.
    pub texts: Option<PathBuf>,
    /// Directory of wordlist files for templated generation.
    pub wordlists: Option<PathBuf>,
    /// SNLI-style JSONL for `gen --phenomenon external`.
    pub nli: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HttpConfig {
    pub endpoint: Option<String>,
    pub model_id: String,
    pub batch_size: usize,
    pub max_in_flight: usize,
    pub backoff_secs: Vec<f64>,
    pub timeout_secs: f64,
}

impl Default for HttpConfig {
    fn default() -> Self {
        let s = HttpSettings::new("", MOCK_MODEL_ID);
        HttpConfig {
            endpoint: None,
            model_id: s.model_id,
            batch_size: s.batch_size,
            max_in_flight: s.max_in_flight,
            backoff_secs: s.backoff_secs,
            timeout_secs: s.timeout_secs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub n_texts: usize,
    pub max_len: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            n_texts: 10_000,
            max_len: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NgramConfig {
    pub order: usize,
    pub lambda: f64,
}

impl Default for NgramConfig {
    fn default() -> Self {
        NgramConfig {
            order: 2,
            lambda: crate::estimation::DEFAULT_LAMBDA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub max_distractors: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_distractors: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub histogram_bins: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { histogram_bins: 30 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MockConfig {
    pub addr: String,
}

impl Default for MockConfig {
    fn default() -> Self {
        MockConfig {
            addr: "127.0.0.1:8080".into(),
        }
    }
}

/// Everything a command needs. Loaded from TOML, then overridden by flags.
/// The output directory is not echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub jobs: Option<usize>,
    #[serde(skip_serializing)]
    pub out: PathBuf,
    pub provider: ProviderKind,
    pub test: TestKind,
    pub n_reps: usize,
    pub tolerance: f64,
    pub phenomenon: Option<String>,
    pub no_holdout: bool,
    pub paths: Paths,
    pub speaker: SpeakerSpec,
    pub http: HttpConfig,
    pub render: RenderConfig,
    pub simulate: SimulateConfig,
    pub ngram: NgramConfig,
    pub verify: VerifyOptions,
    pub fit: FitOptions,
    pub gen: GenConfig,
    pub eval: EvalConfig,
    pub mock: MockConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            jobs: None,
            out: PathBuf::from("out"),
            provider: ProviderKind::default(),
            test: TestKind::default(),
            n_reps: 2,
            tolerance: 1e-9,
            phenomenon: None,
            no_holdout: false,
            paths: Paths::default(),
            speaker: SpeakerSpec::gricean(),
            http: HttpConfig::default(),
            render: RenderConfig::default(),
            simulate: SimulateConfig::default(),
            ngram: NgramConfig::default(),
            verify: VerifyOptions::default(),
            fit: FitOptions::default(),
            gen: GenConfig::default(),
            eval: EvalConfig::default(),
            mock: MockConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, path: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_string(),
            line: e
                .span()
                .map(|s| text[..s.start].matches('\n').count() + 1)
                .unwrap_or(0),
            message: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, &path.display().to_string())
    }

    /// Copies the top-level seed and tolerance into the sections that use them.
    pub fn resolve(mut self) -> Result<Self> {
        self.verify.seed = self.seed;
        self.verify.tolerance = self.tolerance;
        self.fit.split_seed = self.seed;
        self.fit.no_holdout = self.no_holdout;
        if matches!(self.test, TestKind::Repeated | TestKind::Pause) && self.n_reps == 0 {
            return Err(Error::InvalidArgument("--n-reps must be at least 1".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::InvalidArgument("--jobs must be at least 1".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidArgument("--tolerance must be nonnegative".into()));
        }
        Ok(self)
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// Where the score cache lives: `$PEL_CACHE_DIR`, then `paths.cache_dir`,
    /// then `<out>/cache`.
    pub fn cache_file(&self) -> PathBuf {
        let dir = std::env::var_os(CACHE_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .or_else(|| self.paths.cache_dir.clone())
            .unwrap_or_else(|| self.out.join("cache"));
        dir.join("scores.jsonl")
    }

    pub fn http_settings(&self) -> Result<HttpSettings> {
        let endpoint = self.http.endpoint.as_deref().ok_or_else(|| {
            Error::InvalidArgument("the http provider needs --endpoint or http.endpoint".into())
        })?;
        let mut s = HttpSettings::new(endpoint, &self.http.model_id);
        s.batch_size = self.http.batch_size;
        s.max_in_flight = match self.jobs {
            Some(j) => self.http.max_in_flight.min(j),
            None => self.http.max_in_flight,
        };
        s.backoff_secs = self.http.backoff_secs.clone();
        s.timeout_secs = self.http.timeout_secs;
        Ok(s)
    }
}
