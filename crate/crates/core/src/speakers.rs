//! Speaker models and the corpus distribution they induce.
//!
//! A speaker in world `w` picks the next sentence `y` after context `x` with
//! probability proportional to `exp(u(y | x, w) - c(y | x))`, where `u` is the
//! listener information (Gricean, explanatory) or its expectation under a noisy
//! channel (noise-tolerant). Untruthful sentences get probability zero. The
//! end-of-text sentence `$` carries no information and costs `eot_cost`.
//!
//! Prefix probabilities marginalize the speaker's world under the model prior.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::log_sum_exp;
use crate::semantics::{log_ratio, SentenceSeq, Token, WorldModel, WorldSet, EOT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityForm {
    /// `exp(E_e[i(e)])`: the form the repetition analysis computes with.
    #[default]
    ExpectedInformation,
    /// `E_e[exp(i(e))]`: the text-level model statement.
    ExpectedExpInformation,
}

/// One row of an explanatory speaker's cost table: `c(sentence | context)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostEntry {
    pub context: Vec<String>,
    pub sentence: String,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SpeakerFamily {
    Gricean,
    /// Per-sentence probability of the listener missing it; absent entries are 0.
    NoiseTolerant { noise: BTreeMap<String, f64> },
    /// Context-dependent costs; contexts not in the table use the base cost.
    Explanatory { contextual_cost: Vec<CostEntry> },
}

fn default_temperature() -> f64 {
    1.0
}

fn default_pattern_cap() -> usize {
    12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerSpec {
    #[serde(flatten)]
    pub family: SpeakerFamily,
    #[serde(default)]
    pub utility_form: UtilityForm,
    /// Experimental; everything downstream assumes 1.
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    /// Longest sequence whose comprehension patterns are enumerated.
    #[serde(default = "default_pattern_cap")]
    pub pattern_cap: usize,
}

impl SpeakerSpec {
    pub fn gricean() -> Self {
        Self::with_family(SpeakerFamily::Gricean)
    }

    pub fn noise_tolerant(noise: BTreeMap<String, f64>) -> Self {
        Self::with_family(SpeakerFamily::NoiseTolerant { noise })
    }

    /// Noise-tolerant speaker with the same `eps` on every lexicon sentence.
    pub fn uniform_noise(model: &WorldModel, eps: f64) -> Self {
        Self::noise_tolerant(
            model
                .lexicon()
                .iter()
                .map(|s| (s.surface.clone(), eps))
                .collect(),
        )
    }

    pub fn explanatory(contextual_cost: Vec<CostEntry>) -> Self {
        Self::with_family(SpeakerFamily::Explanatory { contextual_cost })
    }

    fn with_family(family: SpeakerFamily) -> Self {
        SpeakerSpec {
            family,
            utility_form: UtilityForm::default(),
            temperature: 1.0,
            pattern_cap: default_pattern_cap(),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            SpeakerFamily::Gricean => "gricean",
            SpeakerFamily::NoiseTolerant { .. } => "noise_tolerant",
            SpeakerFamily::Explanatory { .. } => "explanatory",
        }
    }
}

/// A subset of positions the listener comprehends, with its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ComprehensionPattern {
    pub indices: Vec<usize>,
    pub probability: f64,
}

/// Next-sentence distribution; only candidates with nonzero probability appear.
#[derive(Debug, Clone, PartialEq)]
pub struct NextDist {
    pub entries: Vec<(Token, f64)>,
}

impl NextDist {
    pub fn prob(&self, token: Token) -> f64 {
        self.entries
            .iter()
            .find(|(t, _)| *t == token)
            .map_or(0.0, |(_, p)| *p)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }
}

/// A sampled text.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledText {
    pub seq: SentenceSeq,
    pub world: usize,
    /// Cut off at `max_len`; `seq` is then left unterminated.
    pub forced_termination: bool,
    /// Sum of the speaker's log conditionals along the sampled path (world fixed).
    pub path_logprob: f64,
}

#[derive(Serialize, Deserialize)]
struct CorpusLine {
    sentences: Vec<String>,
    world: usize,
    forced_termination: bool,
}

/// Caps on exact enumeration.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    /// worlds x lexicon x length (x patterns) budget for one prefix probability.
    pub max_work: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_work: 2_000_000_000,
        }
    }
}

/// Log-weights of every candidate after a fixed context, before world gating.
#[derive(Debug, Clone)]
pub struct CandidateWeights {
    /// Indexed by lexicon position; `-inf` where no world keeps the sentence truthful.
    pub sentences: Vec<f64>,
    pub eot: f64,
}

/// A speaker bound to a world model.
#[derive(Debug, Clone)]
pub struct Speaker<'m> {
    model: &'m WorldModel,
    spec: SpeakerSpec,
    noise: Option<Vec<f64>>,
    costs: HashMap<(Vec<usize>, usize), f64>,
    limits: Limits,
}

struct PatternSet {
    /// (probability, listener-live worlds, listener mass)
    entries: Vec<(f64, WorldSet, f64)>,
}

impl<'m> Speaker<'m> {
    pub fn new(model: &'m WorldModel, spec: &SpeakerSpec) -> Result<Self> {
        if !(spec.temperature.is_finite() && spec.temperature > 0.0) {
            return Err(Error::InvalidSpeaker(format!(
                "temperature must be positive, got {}",
                spec.temperature
            )));
        }
        let mut noise = None;
        let mut costs = HashMap::new();
        match &spec.family {
            SpeakerFamily::Gricean => {}
            SpeakerFamily::NoiseTolerant { noise: map } => {
                let mut eps = vec![0.0; model.lexicon().len()];
                for (surface, &e) in map {
                    if !(0.0..1.0).contains(&e) {
                        return Err(Error::InvalidSpeaker(format!(
                            "noise for {surface:?} must lie in [0, 1), got {e}"
                        )));
                    }
                    if surface == EOT {
                        if e != 0.0 {
                            return Err(Error::InvalidSpeaker(
                                "end-of-text is always comprehended".into(),
                            ));
                        }
                        continue;
                    }
                    eps[model.index_of(surface)?] = e;
                }
                noise = Some(eps);
            }
            SpeakerFamily::Explanatory { contextual_cost } => {
                for entry in contextual_cost {
                    if entry.sentence == EOT {
                        return Err(Error::InvalidSpeaker(
                            "the end-of-text cost is context independent".into(),
                        ));
                    }
                    if !(entry.cost.is_finite() && entry.cost >= 0.0) {
                        return Err(Error::InvalidSpeaker(format!(
                            "bad contextual cost {}",
                            entry.cost
                        )));
                    }
                    let ctx = entry
                        .context
                        .iter()
                        .map(|s| model.index_of(s))
                        .collect::<Result<Vec<_>>>()?;
                    let y = model.index_of(&entry.sentence)?;
                    if costs.insert((ctx, y), entry.cost).is_some() {
                        return Err(Error::InvalidSpeaker(format!(
                            "duplicate cost entry for {:?}",
                            entry.sentence
                        )));
                    }
                }
            }
        }
        Ok(Speaker {
            model,
            spec: spec.clone(),
            noise,
            costs,
            limits: Limits::default(),
        })
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn model(&self) -> &'m WorldModel {
        self.model
    }

    pub fn spec(&self) -> &SpeakerSpec {
        &self.spec
    }

    pub fn is_noise_tolerant(&self) -> bool {
        self.noise.is_some()
    }

    pub fn noise(&self, sentence: usize) -> f64 {
        self.noise.as_ref().map_or(0.0, |eps| eps[sentence])
    }

    /// `c(y | ctx)`.
    pub fn cost(&self, ctx: &[usize], token: Token) -> f64 {
        match token {
            Token::Eot => self.model.eot_cost(),
            Token::Sentence(y) => {
                if !self.costs.is_empty() {
                    if let Some(&c) = self.costs.get(&(ctx.to_vec(), y)) {
                        return c;
                    }
                }
                self.model.sentence(y).base_cost
            }
        }
    }

    /// Base cost minus contextual cost: how much `ctx` cheapens `y`.
    pub fn delta(&self, ctx: &[usize], y: usize) -> f64 {
        self.model.sentence(y).base_cost - self.cost(ctx, Token::Sentence(y))
    }

    fn check_items(&self, items: &[usize]) -> Result<()> {
        match items.iter().find(|&&s| s >= self.model.lexicon().len()) {
            Some(s) => Err(Error::UnknownSentence(format!("#{s}"))),
            None => Ok(()),
        }
    }

    fn patterns(&self, ctx: &[usize]) -> Result<PatternSet> {
        let model = self.model;
        let Some(eps) = &self.noise else {
            let set = model.consistent_set(ctx);
            let mass = model.listener_mass(&set);
            return Ok(PatternSet {
                entries: vec![(1.0, set, mass)],
            });
        };
        if ctx.len() > self.spec.pattern_cap {
            return Err(Error::EnumerationCap(format!(
                "{} sentences exceed the comprehension-pattern cap of {}",
                ctx.len(),
                self.spec.pattern_cap
            )));
        }
        let n = ctx.len();
        let mut sets: Vec<WorldSet> = Vec::with_capacity(1 << n);
        let mut probs: Vec<f64> = Vec::with_capacity(1 << n);
        sets.push(model.listener_support().clone());
        probs.push(ctx.iter().map(|&s| eps[s]).product());
        for mask in 1usize..(1 << n) {
            let low = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            let set = sets[rest].intersect(&model.sentence(ctx[low]).denotation);
            let e = eps[ctx[low]];
            // flip position `low` from missed to comprehended
            let p = if e == 0.0 {
                ctx.iter()
                    .enumerate()
                    .map(|(t, &s)| {
                        if mask & (1 << t) != 0 {
                            1.0 - eps[s]
                        } else {
                            eps[s]
                        }
                    })
                    .product()
            } else {
                probs[rest] / e * (1.0 - e)
            };
            sets.push(set);
            probs.push(p);
        }
        Ok(PatternSet {
            entries: sets
                .into_iter()
                .zip(probs)
                .filter(|(_, p)| *p > 0.0)
                .map(|(s, p)| {
                    let mass = model.listener_mass(&s);
                    (p, s, mass)
                })
                .collect(),
        })
    }

    /// Utility gain of saying `y` after `ctx`, for any world where `y` and `ctx` are true.
    fn utility_gain(&self, patterns: &PatternSet, y: usize) -> f64 {
        let den = &self.model.sentence(y).denotation;
        let eps_y = self.noise(y);
        match (&self.noise, self.spec.utility_form) {
            (None, _) => {
                let (_, set, mass) = &patterns.entries[0];
                let after = set.intersect(den);
                if after.is_empty() {
                    return f64::NEG_INFINITY;
                }
                log_ratio(*mass, self.model.listener_mass(&after))
            }
            (Some(_), UtilityForm::ExpectedInformation) => {
                let mut gain = 0.0;
                for (p, set, mass) in &patterns.entries {
                    let after = set.intersect(den);
                    if after.is_empty() {
                        return f64::NEG_INFINITY;
                    }
                    gain += p * log_ratio(*mass, self.model.listener_mass(&after));
                }
                (1.0 - eps_y) * gain
            }
            (Some(_), UtilityForm::ExpectedExpInformation) => {
                let total = self.model.listener_mass(self.model.listener_support());
                let mut before = 0.0;
                let mut after_sum = 0.0;
                for (p, set, mass) in &patterns.entries {
                    let after = set.intersect(den);
                    if after.is_empty() {
                        return f64::NEG_INFINITY;
                    }
                    let e_before = total / mass;
                    before += p * e_before;
                    after_sum +=
                        p * (eps_y * e_before + (1.0 - eps_y) * total / self.model.listener_mass(&after));
                }
                (after_sum / before).ln()
            }
        }
    }

    /// Candidate log-weights after `ctx`, before gating by the speaker's world.
    pub fn candidate_weights(&self, ctx: &[usize]) -> Result<CandidateWeights> {
        self.check_items(ctx)?;
        let patterns = self.patterns(ctx)?;
        let t = self.spec.temperature;
        let sentences = (0..self.model.lexicon().len())
            .map(|y| {
                let gain = self.utility_gain(&patterns, y);
                if gain == f64::NEG_INFINITY {
                    gain
                } else {
                    (gain - self.cost(ctx, Token::Sentence(y))) / t
                }
            })
            .collect();
        Ok(CandidateWeights {
            sentences,
            eot: -self.model.eot_cost() / t,
        })
    }

    /// `log Z(ctx, w)` given precomputed candidate weights.
    pub fn log_normalizer(&self, weights: &CandidateWeights, w: usize) -> f64 {
        let terms = weights
            .sentences
            .iter()
            .enumerate()
            .filter(|(y, lw)| {
                **lw > f64::NEG_INFINITY && self.model.sentence(*y).denotation.contains(w)
            })
            .map(|(_, &lw)| lw)
            .chain(std::iter::once(weights.eot));
        log_sum_exp(terms)
    }

    fn require_live(&self, ctx: &SentenceSeq, w: usize) -> Result<()> {
        if ctx.terminated {
            return Err(Error::Terminated);
        }
        self.check_items(&ctx.items)?;
        if w >= self.model.n_worlds() || !self.model.consistent_set(&ctx.items).contains(w) {
            return Err(Error::InconsistentContext { world: w });
        }
        Ok(())
    }

    /// `p(. | ctx, w)` over truthful lexicon sentences and `$`.
    pub fn next_sentence_dist(&self, ctx: &SentenceSeq, w: usize) -> Result<NextDist> {
        self.require_live(ctx, w)?;
        let weights = self.candidate_weights(&ctx.items)?;
        let log_z = self.log_normalizer(&weights, w);
        if log_z == f64::NEG_INFINITY {
            return Err(Error::DegenerateProbability {
                term: "next-sentence normalizer",
            });
        }
        let mut entries = Vec::new();
        for (y, &lw) in weights.sentences.iter().enumerate() {
            if lw > f64::NEG_INFINITY && self.model.sentence(y).denotation.contains(w) {
                entries.push((Token::Sentence(y), (lw - log_z).exp()));
            }
        }
        entries.push((Token::Eot, (weights.eot - log_z).exp()));
        Ok(NextDist { entries })
    }

    /// `log p(token | ctx, w)`; `-inf` when the token is untruthful in `w`.
    pub fn cond_logprob(&self, ctx: &SentenceSeq, token: Token, w: usize) -> Result<f64> {
        self.require_live(ctx, w)?;
        let weights = self.candidate_weights(&ctx.items)?;
        Ok(self.cond_from_weights(&weights, token, w))
    }

    fn cond_from_weights(&self, weights: &CandidateWeights, token: Token, w: usize) -> f64 {
        let lw = match token {
            Token::Eot => weights.eot,
            Token::Sentence(y) => {
                if !self.model.sentence(y).denotation.contains(w) {
                    return f64::NEG_INFINITY;
                }
                weights.sentences[y]
            }
        };
        lw - self.log_normalizer(weights, w)
    }

    /// All comprehension patterns of `z` with their probabilities.
    pub fn comprehension_patterns(&self, z: &[usize]) -> Result<Vec<ComprehensionPattern>> {
        self.check_items(z)?;
        if z.len() > self.spec.pattern_cap {
            return Err(Error::EnumerationCap(format!(
                "{} sentences exceed the comprehension-pattern cap of {}",
                z.len(),
                self.spec.pattern_cap
            )));
        }
        Ok((0usize..1 << z.len())
            .map(|mask| {
                let mut probability = 1.0;
                let mut indices = Vec::new();
                for (t, &s) in z.iter().enumerate() {
                    let e = self.noise(s);
                    if mask & (1 << t) != 0 {
                        indices.push(t);
                        probability *= 1.0 - e;
                    } else {
                        probability *= e;
                    }
                }
                ComprehensionPattern {
                    indices,
                    probability,
                }
            })
            .collect())
    }

    /// Expected listener information of `z` under the noisy channel, `E_e[i(z_e | w)]`.
    pub fn expected_utility(&self, z: &[usize], w: usize) -> Result<f64> {
        if !self.is_noise_tolerant() {
            return Err(Error::InvalidSpeaker(
                "expected utility is defined for noise-tolerant speakers".into(),
            ));
        }
        self.check_items(z)?;
        if let Some(&bad) = z
            .iter()
            .find(|&&s| !self.model.sentence(s).denotation.contains(w))
        {
            return Err(Error::InvalidArgument(format!(
                "{:?} is false in world {w}",
                self.model.sentence(bad).surface
            )));
        }
        let patterns = self.patterns(z)?;
        let total = self.model.listener_mass(self.model.listener_support());
        Ok(patterns
            .entries
            .iter()
            .map(|(p, _, mass)| p * log_ratio(total, *mass))
            .sum())
    }

    fn check_work(&self, len: usize) -> Result<()> {
        let patterns = if self.is_noise_tolerant() {
            1u64 << len.min(62)
        } else {
            1
        };
        let work = (self.model.support().count() as u64)
            .saturating_mul(self.model.lexicon().len() as u64)
            .saturating_mul(len as u64 + 1)
            .saturating_mul(patterns);
        if work > self.limits.max_work {
            return Err(Error::EnumerationCap(format!(
                "exact enumeration needs {work} steps (cap {})",
                self.limits.max_work
            )));
        }
        Ok(())
    }

    /// Per-world `log pi_w + sum_t log p(z_t | z_<t, w)` over the prior support.
    pub fn world_logprobs(&self, z: &SentenceSeq) -> Result<Vec<(usize, f64)>> {
        self.check_items(&z.items)?;
        self.check_work(z.len())?;
        let model = self.model;
        let mut acc: Vec<(usize, f64)> = model
            .support()
            .iter()
            .map(|w| (w, model.prior()[w].ln()))
            .collect();
        let steps = z
            .items
            .iter()
            .map(|&s| Token::Sentence(s))
            .chain(z.terminated.then_some(Token::Eot));
        for (t, token) in steps.enumerate() {
            if acc.is_empty() {
                break;
            }
            let weights = self.candidate_weights(&z.items[..t])?;
            acc.retain_mut(|(w, a)| {
                let lp = self.cond_from_weights(&weights, token, *w);
                *a += lp;
                lp > f64::NEG_INFINITY
            });
        }
        Ok(acc)
    }

    /// `log p(z) = log E_w[prod_t p(z_t | z_<t, w)]`; `-inf` when impossible.
    pub fn prefix_logprob(&self, z: &SentenceSeq) -> Result<f64> {
        let acc = self.world_logprobs(z)?;
        Ok(log_sum_exp(acc.into_iter().map(|(_, a)| a)))
    }

    /// Posterior-weighted next-sentence distribution `p(. | ctx)`.
    pub fn marginal_next(&self, ctx: &SentenceSeq) -> Result<Vec<(Token, f64)>> {
        if ctx.terminated {
            return Err(Error::Terminated);
        }
        let joint = self.world_logprobs(ctx)?;
        let log_total = log_sum_exp(joint.iter().map(|(_, a)| *a));
        if log_total == f64::NEG_INFINITY {
            return Err(Error::DegenerateProbability { term: "context" });
        }
        let weights = self.candidate_weights(&ctx.items)?;
        let mut out: BTreeMap<Token, f64> = BTreeMap::new();
        for (w, a) in joint {
            let post = (a - log_total).exp();
            let log_z = self.log_normalizer(&weights, w);
            for (y, &lw) in weights.sentences.iter().enumerate() {
                if lw > f64::NEG_INFINITY && self.model.sentence(y).denotation.contains(w) {
                    *out.entry(Token::Sentence(y)).or_default() += post * (lw - log_z).exp();
                }
            }
            *out.entry(Token::Eot).or_default() += post * (weights.eot - log_z).exp();
        }
        Ok(out.into_iter().collect())
    }

    /// Draws `n_texts` texts; text `i` depends only on `(seed, i)`.
    pub fn sample_corpus(&self, n_texts: usize, seed: u64, max_len: usize) -> Result<Vec<SampledText>> {
        if n_texts == 0 {
            return Err(Error::InvalidArgument("n_texts must be at least 1".into()));
        }
        let cache = WeightCache::default();
        (0..n_texts)
            .into_par_iter()
            .map(|i| self.sample_text(seed, i as u64, max_len, &cache))
            .collect()
    }

    fn sample_text(&self, seed: u64, index: u64, max_len: usize, cache: &WeightCache) -> Result<SampledText> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let model = self.model;
        let world = sample_index(&mut rng, model.prior());
        let mut seq = SentenceSeq::default();
        let mut path_logprob = 0.0;
        loop {
            if seq.len() >= max_len {
                // a truncated text is a prefix: no `$` was spoken
                return Ok(SampledText {
                    seq,
                    world,
                    forced_termination: true,
                    path_logprob,
                });
            }
            let weights = cache.get_or_compute(&seq.items, || self.candidate_weights(&seq.items))?;
            let log_z = self.log_normalizer(&weights, world);
            let mut tokens = Vec::new();
            let mut probs = Vec::new();
            for (y, &lw) in weights.sentences.iter().enumerate() {
                if lw > f64::NEG_INFINITY && model.sentence(y).denotation.contains(world) {
                    tokens.push(Token::Sentence(y));
                    probs.push((lw - log_z).exp());
                }
            }
            tokens.push(Token::Eot);
            probs.push((weights.eot - log_z).exp());
            let k = sample_index(&mut rng, &probs);
            path_logprob += probs[k].ln();
            match tokens[k] {
                Token::Eot => {
                    seq.terminated = true;
                    return Ok(SampledText {
                        seq,
                        world,
                        forced_termination: false,
                        path_logprob,
                    });
                }
                Token::Sentence(y) => seq.items.push(y),
            }
        }
    }
}

#[derive(Default)]
struct WeightCache {
    inner: std::sync::RwLock<HashMap<Vec<usize>, std::sync::Arc<CandidateWeights>>>,
}

impl WeightCache {
    fn get_or_compute(
        &self,
        key: &[usize],
        compute: impl FnOnce() -> Result<CandidateWeights>,
    ) -> Result<std::sync::Arc<CandidateWeights>> {
        if let Some(hit) = self.inner.read().expect("cache lock").get(key) {
            return Ok(hit.clone());
        }
        let value = std::sync::Arc::new(compute()?);
        self.inner
            .write()
            .expect("cache lock")
            .insert(key.to_vec(), value.clone());
        Ok(value)
    }
}

fn sample_index(rng: &mut impl Rng, probs: &[f64]) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &p) in probs.iter().enumerate() {
        if u < p {
            return i;
        }
        u -= p;
    }
    // rounding fallthrough: last index with positive mass
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Writes a corpus as JSONL.
pub fn corpus_to_jsonl(model: &WorldModel, corpus: &[SampledText]) -> String {
    let mut out = String::new();
    for text in corpus {
        let line = CorpusLine {
            sentences: text
                .seq
                .items
                .iter()
                .map(|&s| model.sentence(s).surface.clone())
                .collect(),
            world: text.world,
            forced_termination: text.forced_termination,
        };
        out.push_str(&serde_json::to_string(&line).expect("corpus line serializes"));
        out.push('\n');
    }
    out
}

/// Reads a JSONL corpus back as `(surfaces, world, forced_termination)`;
/// forced texts carry no `$`.
pub fn corpus_from_jsonl(text: &str, path: &str) -> Result<Vec<(Vec<String>, usize, bool)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let line: CorpusLine = serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.to_string(),
                line: i + 1,
                message: e.to_string(),
            })?;
            Ok((line.sentences, line.world, line.forced_termination))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::Formula;

    fn two_world() -> WorldModel {
        WorldModel::builder(&["a"])
            .sentence("a", Formula::atom("a"), 1.0)
            .eot_cost(1.0)
            .build()
            .unwrap()
    }

    #[test]
    fn two_world_softmax() {
        // worlds: [a], [not a]; in world 0 "a" carries log 2 nats
        let m = two_world();
        let s = Speaker::new(&m, &SpeakerSpec::gricean()).unwrap();
        let d = s.next_sentence_dist(&SentenceSeq::default(), 0).unwrap();
        assert!((d.prob(Token::Sentence(0)) - 2.0 / 3.0).abs() < 1e-15);
        assert!((d.prob(Token::Eot) - 1.0 / 3.0).abs() < 1e-15);
        // untruthful sentence never offered
        let d = s.next_sentence_dist(&SentenceSeq::default(), 1).unwrap();
        assert_eq!(d.entries, vec![(Token::Eot, 1.0)]);
    }

    #[test]
    fn symmetric_candidates_tie() {
        let m = WorldModel::builder(&["a", "b"])
            .sentence("a", Formula::atom("a"), 1.0)
            .sentence("b", Formula::atom("b"), 1.0)
            .build()
            .unwrap();
        let s = Speaker::new(&m, &SpeakerSpec::gricean()).unwrap();
        let d = s.next_sentence_dist(&SentenceSeq::default(), 0).unwrap();
        assert_eq!(d.prob(Token::Sentence(0)), d.prob(Token::Sentence(1)));
    }

    #[test]
    fn entailed_continuation_gets_bare_cost_weight() {
        let m = WorldModel::builder(&["a", "b"])
            .sentence("a and b", Formula::and([Formula::atom("a"), Formula::atom("b")]), 2.0)
            .sentence("a", Formula::atom("a"), 0.5)
            .build()
            .unwrap();
        let s = Speaker::new(&m, &SpeakerSpec::gricean()).unwrap();
        let w = s.candidate_weights(&[0]).unwrap();
        assert_eq!(w.sentences[1], -0.5);
    }

    #[test]
    fn noise_validation() {
        let m = two_world();
        let bad = SpeakerSpec::noise_tolerant([("a".to_string(), 1.0)].into());
        assert!(Speaker::new(&m, &bad).is_err());
        let unknown = SpeakerSpec::noise_tolerant([("zzz".to_string(), 0.1)].into());
        assert!(Speaker::new(&m, &unknown).is_err());
        let eot = SpeakerSpec::noise_tolerant([(EOT.to_string(), 0.1)].into());
        assert!(Speaker::new(&m, &eot).is_err());
    }

    #[test]
    fn explanatory_table_validation() {
        let m = two_world();
        let spec = SpeakerSpec::explanatory(vec![CostEntry {
            context: vec!["a".into()],
            sentence: EOT.into(),
            cost: 0.0,
        }]);
        assert!(Speaker::new(&m, &spec).is_err());
    }

    #[test]
    fn pattern_cap_is_enforced() {
        let m = two_world();
        let mut spec = SpeakerSpec::uniform_noise(&m, 0.2);
        spec.pattern_cap = 3;
        let s = Speaker::new(&m, &spec).unwrap();
        assert!(matches!(
            s.expected_utility(&[0, 0, 0, 0], 0),
            Err(Error::EnumerationCap(_))
        ));
        assert!(s.expected_utility(&[0, 0, 0], 0).is_ok());
    }

    #[test]
    fn terminated_context_rejected() {
        let m = two_world();
        let s = Speaker::new(&m, &SpeakerSpec::gricean()).unwrap();
        assert!(matches!(
            s.next_sentence_dist(&SentenceSeq::terminated(vec![]), 0),
            Err(Error::Terminated)
        ));
    }

    #[test]
    fn work_cap() {
        let m = two_world();
        let s = Speaker::new(&m, &SpeakerSpec::gricean())
            .unwrap()
            .with_limits(Limits { max_work: 3 });
        assert!(s.prefix_logprob(&SentenceSeq::new(vec![0, 0, 0])).is_err());
    }
}
