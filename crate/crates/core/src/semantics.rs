//! Finite possible-world semantics.
//!
//! A [`WorldModel`] fixes a set of worlds (truth assignments over atomic
//! propositions), a speaker prior over them, and a lexicon of sentences whose
//! meanings are sets of worlds. The listener is literal: hearing a sentence
//! restricts the set of live worlds, and the information a sentence conveys is
//! the log-ratio of listener mass before and after the restriction.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::{Error, Result};

/// Surface form reserved for the end-of-text sentence.
pub const EOT: &str = "$";

const PRIOR_TOLERANCE: f64 = 1e-12;

/// A set of world indices, stored as a bitset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WorldSet {
    bits: Vec<u64>,
    len: usize,
}

impl WorldSet {
    pub fn empty(len: usize) -> Self {
        WorldSet {
            bits: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut set = Self::empty(len);
        for i in 0..len {
            set.insert(i);
        }
        set
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut set = Self::empty(len);
        for i in indices {
            if i >= len {
                return Err(Error::InvalidModel(format!(
                    "world index {i} out of range (model has {len} worlds)"
                )));
            }
            set.insert(i);
        }
        Ok(set)
    }

    /// Number of worlds in the universe this set lives in.
    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len);
        self.bits[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.bits[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    pub fn intersect(&self, other: &WorldSet) -> WorldSet {
        debug_assert_eq!(self.len, other.len);
        WorldSet {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a & b)
                .collect(),
            len: self.len,
        }
    }

    pub fn intersect_with(&mut self, other: &WorldSet) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= b;
        }
    }

    pub fn union(&self, other: &WorldSet) -> WorldSet {
        WorldSet {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a | b)
                .collect(),
            len: self.len,
        }
    }

    pub fn complement(&self) -> WorldSet {
        let mut out = WorldSet::empty(self.len);
        for i in 0..self.len {
            if !self.contains(i) {
                out.insert(i);
            }
        }
        out
    }

    pub fn is_subset(&self, other: &WorldSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.contains(i))
    }
}

impl fmt::Debug for WorldSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Propositional formula over named atoms, used to build denotations.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    False,
    Atom(String),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: &str) -> Self {
        Formula::Atom(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(fs: impl IntoIterator<Item = Formula>) -> Self {
        Formula::And(fs.into_iter().collect())
    }

    pub fn or(fs: impl IntoIterator<Item = Formula>) -> Self {
        Formula::Or(fs.into_iter().collect())
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn eval(&self, index: &HashMap<&str, usize>, world: &[bool]) -> Result<bool> {
        Ok(match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(name) => {
                let &i = index.get(name.as_str()).ok_or_else(|| {
                    Error::InvalidModel(format!("unknown proposition {name:?}"))
                })?;
                world[i]
            }
            Formula::Not(f) => !f.eval(index, world)?,
            Formula::And(fs) => {
                for f in fs {
                    if !f.eval(index, world)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(fs) => {
                for f in fs {
                    if f.eval(index, world)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Implies(a, b) => !a.eval(index, world)? || b.eval(index, world)?,
        })
    }
}

/// A lexicon entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    pub surface: String,
    pub denotation: WorldSet,
    pub base_cost: f64,
}

impl Sentence {
    /// Surface length in characters.
    pub fn length(&self) -> usize {
        self.surface.chars().count()
    }

    /// True when the sentence is false in every world.
    pub fn is_contradictory(&self) -> bool {
        self.denotation.is_empty()
    }
}

/// An utterance position: a lexicon sentence or end-of-text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    Sentence(usize),
    Eot,
}

/// Ordered sequence of lexicon sentences, optionally closed by `$`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SentenceSeq {
    pub items: Vec<usize>,
    pub terminated: bool,
}

impl SentenceSeq {
    pub fn new(items: Vec<usize>) -> Self {
        SentenceSeq {
            items,
            terminated: false,
        }
    }

    pub fn terminated(items: Vec<usize>) -> Self {
        SentenceSeq {
            items,
            terminated: true,
        }
    }

    pub fn push(&mut self, sentence: usize) -> Result<()> {
        if self.terminated {
            return Err(Error::Terminated);
        }
        self.items.push(sentence);
        Ok(())
    }

    pub fn terminate(&mut self) -> Result<()> {
        if self.terminated {
            return Err(Error::Terminated);
        }
        self.terminated = true;
        Ok(())
    }

    pub fn with(&self, token: Token) -> Result<SentenceSeq> {
        let mut out = self.clone();
        match token {
            Token::Sentence(s) => out.push(s)?,
            Token::Eot => out.terminate()?,
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Worlds, priors and lexicon.
///
/// The speaker prior (`prior`) is the distribution over speakers' beliefs; the
/// listener prior defaults to uniform over all worlds and only enters through
/// information content.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldModel {
    propositions: Vec<String>,
    worlds: Vec<Vec<bool>>,
    prior: Vec<f64>,
    lexicon: Vec<Sentence>,
    eot_cost: f64,
    listener_prior: Option<Vec<f64>>,
    support: WorldSet,
    listener_support: WorldSet,
    index: HashMap<String, usize>,
}

impl WorldModel {
    pub fn new(
        propositions: Vec<String>,
        worlds: Vec<Vec<bool>>,
        prior: Vec<f64>,
        lexicon: Vec<Sentence>,
        eot_cost: f64,
        listener_prior: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = worlds.len();
        if n == 0 {
            return Err(Error::InvalidModel("no worlds".into()));
        }
        for (i, w) in worlds.iter().enumerate() {
            if w.len() != propositions.len() {
                return Err(Error::InvalidModel(format!(
                    "world {i} assigns {} values to {} propositions",
                    w.len(),
                    propositions.len()
                )));
            }
        }
        check_distribution("prior", &prior, n)?;
        if let Some(lp) = &listener_prior {
            check_distribution("listener prior", lp, n)?;
        }
        if lexicon.is_empty() {
            return Err(Error::InvalidModel("empty lexicon".into()));
        }
        if !(eot_cost.is_finite() && eot_cost >= 0.0) {
            return Err(Error::InvalidModel(format!("bad eot cost {eot_cost}")));
        }
        let mut index = HashMap::new();
        for (i, s) in lexicon.iter().enumerate() {
            if s.surface == EOT {
                return Err(Error::InvalidModel(
                    "the end-of-text sentence is implicit and cannot be in the lexicon".into(),
                ));
            }
            if s.denotation.universe() != n {
                return Err(Error::InvalidModel(format!(
                    "denotation of {:?} has the wrong universe",
                    s.surface
                )));
            }
            if !(s.base_cost.is_finite() && s.base_cost >= 0.0) {
                return Err(Error::InvalidModel(format!(
                    "cost of {:?} must be finite and nonnegative",
                    s.surface
                )));
            }
            if index.insert(s.surface.clone(), i).is_some() {
                return Err(Error::InvalidModel(format!(
                    "duplicate surface form {:?}",
                    s.surface
                )));
            }
        }
        let support = WorldSet::from_indices(n, (0..n).filter(|&i| prior[i] > 0.0))?;
        let listener_support = match &listener_prior {
            Some(lp) => WorldSet::from_indices(n, (0..n).filter(|&i| lp[i] > 0.0))?,
            None => WorldSet::full(n),
        };
        if !support.is_subset(&listener_support) {
            return Err(Error::InvalidModel(
                "speaker prior puts mass on worlds the listener rules out".into(),
            ));
        }
        Ok(WorldModel {
            propositions,
            worlds,
            prior,
            lexicon,
            eot_cost,
            listener_prior,
            support,
            listener_support,
            index,
        })
    }

    /// Starts a model over every truth assignment of `propositions`, all-true
    /// first and all-false last (the first proposition varies slowest).
    pub fn builder(propositions: &[&str]) -> WorldModelBuilder {
        WorldModelBuilder::new(propositions)
    }

    /// Starts a model over an explicit list of truth assignments.
    pub fn builder_with_worlds(propositions: &[&str], worlds: Vec<Vec<bool>>) -> WorldModelBuilder {
        let mut b = WorldModelBuilder::new(&[]);
        b.propositions = propositions.iter().map(|s| s.to_string()).collect();
        b.worlds = worlds;
        b
    }

    pub fn propositions(&self) -> &[String] {
        &self.propositions
    }

    pub fn worlds(&self) -> &[Vec<bool>] {
        &self.worlds
    }

    pub fn n_worlds(&self) -> usize {
        self.worlds.len()
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn listener_prior(&self) -> Option<&[f64]> {
        self.listener_prior.as_deref()
    }

    pub fn lexicon(&self) -> &[Sentence] {
        &self.lexicon
    }

    pub fn sentence(&self, i: usize) -> &Sentence {
        &self.lexicon[i]
    }

    pub fn eot_cost(&self) -> f64 {
        self.eot_cost
    }

    /// Worlds with positive speaker prior.
    pub fn support(&self) -> &WorldSet {
        &self.support
    }

    /// Worlds the listener considers possible before hearing anything.
    pub fn listener_support(&self) -> &WorldSet {
        &self.listener_support
    }

    pub fn index_of(&self, surface: &str) -> Result<usize> {
        self.index
            .get(surface)
            .copied()
            .ok_or_else(|| Error::UnknownSentence(surface.to_string()))
    }

    pub fn lookup(&self, surface: &str) -> Option<usize> {
        self.index.get(surface).copied()
    }

    /// Speaker prior mass of a set of worlds.
    pub fn prior_mass(&self, set: &WorldSet) -> f64 {
        set.iter().map(|i| self.prior[i]).sum()
    }

    /// Listener prior mass of a set of worlds (a count under the uniform default).
    pub fn listener_mass(&self, set: &WorldSet) -> f64 {
        match &self.listener_prior {
            None => set.count() as f64,
            Some(lp) => set.iter().map(|i| lp[i]).sum(),
        }
    }

    fn check_seq(&self, items: &[usize]) -> Result<()> {
        match items.iter().find(|&&s| s >= self.lexicon.len()) {
            Some(s) => Err(Error::UnknownSentence(format!("#{s}"))),
            None => Ok(()),
        }
    }

    /// Listener-live worlds after hearing `items`.
    pub fn consistent_set(&self, items: &[usize]) -> WorldSet {
        let mut set = self.listener_support.clone();
        for &s in items {
            set.intersect_with(&self.lexicon[s].denotation);
        }
        set
    }

    /// Surface forms of a sequence, for messages and reports.
    pub fn render(&self, seq: &SentenceSeq) -> Vec<String> {
        let mut out: Vec<String> = seq
            .items
            .iter()
            .map(|&s| self.lexicon[s].surface.clone())
            .collect();
        if seq.terminated {
            out.push(EOT.to_string());
        }
        out
    }

    /// Parses surface forms (with `$` allowed only last) into a sequence.
    pub fn parse_seq<S: AsRef<str>>(&self, surfaces: &[S]) -> Result<SentenceSeq> {
        let mut seq = SentenceSeq::default();
        for s in surfaces {
            let s = s.as_ref();
            if s == EOT {
                seq.terminate()?;
            } else {
                seq.push(self.index_of(s)?)?;
            }
        }
        Ok(seq)
    }
}

fn check_distribution(what: &str, p: &[f64], n: usize) -> Result<()> {
    if p.len() != n {
        return Err(Error::InvalidModel(format!(
            "{what} has {} entries for {n} worlds",
            p.len()
        )));
    }
    if let Some(bad) = p.iter().find(|&&v| !(v.is_finite() && v >= 0.0)) {
        return Err(Error::InvalidModel(format!("{what} has invalid entry {bad}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > PRIOR_TOLERANCE {
        return Err(Error::InvalidModel(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

/// Intersection of the denotations in `ctx` with the listener support.
pub fn consistent_worlds(model: &WorldModel, ctx: &SentenceSeq) -> Result<WorldSet> {
    model.check_seq(&ctx.items)?;
    Ok(model.consistent_set(&ctx.items))
}

/// Whether every world consistent with `x` makes `y` true.
///
/// Vacuously true when `x` is inconsistent; see [`entails_checked`] for the flag.
pub fn entails(model: &WorldModel, x: &SentenceSeq, y: usize) -> Result<bool> {
    Ok(entails_checked(model, x, y)?.holds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Entailment {
    pub holds: bool,
    pub vacuous: bool,
}

pub fn entails_checked(model: &WorldModel, x: &SentenceSeq, y: usize) -> Result<Entailment> {
    model.check_seq(&x.items)?;
    model.check_seq(&[y])?;
    let sx = model.consistent_set(&x.items);
    Ok(Entailment {
        holds: sx.is_subset(&model.lexicon[y].denotation),
        vacuous: sx.is_empty(),
    })
}

/// Information (nats) that `y` conveys after `ctx` to a listener, for a
/// speaker in world `w`. Untruthful sentences get `-inf`.
pub fn info_content(model: &WorldModel, y: Token, ctx: &SentenceSeq, w: usize) -> Result<f64> {
    model.check_seq(&ctx.items)?;
    let before = model.consistent_set(&ctx.items);
    if !before.contains(w) {
        return Err(Error::InconsistentContext { world: w });
    }
    match y {
        Token::Eot => Ok(0.0),
        Token::Sentence(s) => {
            model.check_seq(&[s])?;
            let den = &model.lexicon[s].denotation;
            if !den.contains(w) {
                return Ok(f64::NEG_INFINITY);
            }
            let after = before.intersect(den);
            Ok(log_ratio(model.listener_mass(&before), model.listener_mass(&after)))
        }
    }
}

/// Information of a whole sequence from the empty context: `i(z | w)`.
pub fn sequence_info(model: &WorldModel, z: &[usize], w: usize) -> f64 {
    let set = model.consistent_set(z);
    if !set.contains(w) {
        return f64::NEG_INFINITY;
    }
    log_ratio(
        model.listener_mass(model.listener_support()),
        model.listener_mass(&set),
    )
}

pub(crate) fn log_ratio(num: f64, den: f64) -> f64 {
    if num == den {
        0.0
    } else {
        (num / den).ln()
    }
}

/// Incremental construction of a [`WorldModel`] from formulas.
pub struct WorldModelBuilder {
    propositions: Vec<String>,
    worlds: Vec<Vec<bool>>,
    prior: Option<Vec<f64>>,
    listener_prior: Option<Vec<f64>>,
    lexicon: Vec<(String, Formula, f64)>,
    eot_cost: f64,
}

impl WorldModelBuilder {
    fn new(propositions: &[&str]) -> Self {
        let k = propositions.len();
        let worlds = (0..1usize << k)
            .map(|m| (0..k).map(|j| m & (1 << (k - 1 - j)) == 0).collect())
            .collect();
        WorldModelBuilder {
            propositions: propositions.iter().map(|s| s.to_string()).collect(),
            worlds,
            prior: None,
            listener_prior: None,
            lexicon: Vec::new(),
            eot_cost: 1.0,
        }
    }

    /// Keeps only worlds satisfying `constraint` (meaning postulates).
    pub fn restrict(mut self, constraint: &Formula) -> Result<Self> {
        let index = self.prop_index();
        let mut kept = Vec::new();
        for w in &self.worlds {
            if constraint.eval(&index, w)? {
                kept.push(w.clone());
            }
        }
        self.worlds = kept;
        Ok(self)
    }

    pub fn prior(mut self, prior: Vec<f64>) -> Self {
        self.prior = Some(prior);
        self
    }

    pub fn listener_prior(mut self, prior: Vec<f64>) -> Self {
        self.listener_prior = Some(prior);
        self
    }

    pub fn eot_cost(mut self, cost: f64) -> Self {
        self.eot_cost = cost;
        self
    }

    pub fn sentence(mut self, surface: &str, meaning: Formula, cost: f64) -> Self {
        self.lexicon.push((surface.to_string(), meaning, cost));
        self
    }

    pub fn n_worlds(&self) -> usize {
        self.worlds.len()
    }

    pub fn worlds(&self) -> &[Vec<bool>] {
        &self.worlds
    }

    fn prop_index(&self) -> HashMap<&str, usize> {
        self.propositions
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_str(), i))
            .collect()
    }

    pub fn build(self) -> Result<WorldModel> {
        let n = self.worlds.len();
        let index = self.prop_index();
        let mut lexicon = Vec::with_capacity(self.lexicon.len());
        for (surface, meaning, cost) in &self.lexicon {
            let mut den = WorldSet::empty(n);
            for (i, w) in self.worlds.iter().enumerate() {
                if meaning.eval(&index, w)? {
                    den.insert(i);
                }
            }
            lexicon.push(Sentence {
                surface: surface.clone(),
                denotation: den,
                base_cost: *cost,
            });
        }
        let prior = self.prior.unwrap_or_else(|| vec![1.0 / n as f64; n]);
        WorldModel::new(
            self.propositions,
            self.worlds,
            prior,
            lexicon,
            self.eot_cost,
            self.listener_prior,
        )
    }
}

// JSON document layout. Field order is part of the format.

#[derive(Serialize, Deserialize)]
struct LexiconEntryDoc {
    surface: String,
    denotation: Vec<usize>,
    cost: f64,
}

#[derive(Serialize)]
struct WorldModelOut<'a> {
    propositions: &'a [String],
    worlds: &'a [Vec<bool>],
    prior: Vec<Box<RawValue>>,
    lexicon: Vec<LexiconEntryDoc>,
    eot_cost: Box<RawValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    listener_prior: Option<Vec<Box<RawValue>>>,
}

#[derive(Deserialize)]
struct WorldModelIn {
    propositions: Vec<String>,
    worlds: Vec<Vec<bool>>,
    prior: Vec<f64>,
    lexicon: Vec<LexiconEntryDoc>,
    eot_cost: f64,
    #[serde(default)]
    listener_prior: Option<Vec<f64>>,
}

/// Decimal rendering with 17 significant digits; round-trips exactly.
pub(crate) fn precise_number(v: f64) -> Box<RawValue> {
    let text = if v == 0.0 {
        "0.0".to_string()
    } else {
        format!("{v:.16e}")
    };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

impl WorldModel {
    pub fn to_json(&self) -> String {
        let doc = WorldModelOut {
            propositions: &self.propositions,
            worlds: &self.worlds,
            prior: self.prior.iter().map(|&p| precise_number(p)).collect(),
            lexicon: self
                .lexicon
                .iter()
                .map(|s| LexiconEntryDoc {
                    surface: s.surface.clone(),
                    denotation: s.denotation.iter().collect(),
                    cost: s.base_cost,
                })
                .collect(),
            eot_cost: precise_number(self.eot_cost),
            listener_prior: self
                .listener_prior
                .as_ref()
                .map(|lp| lp.iter().map(|&p| precise_number(p)).collect()),
        };
        serde_json::to_string_pretty(&doc).expect("world model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: WorldModelIn = serde_json::from_str(text)?;
        let n = doc.worlds.len();
        let lexicon = doc
            .lexicon
            .into_iter()
            .map(|e| {
                Ok(Sentence {
                    denotation: WorldSet::from_indices(n, e.denotation)?,
                    surface: e.surface,
                    base_cost: e.cost,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        WorldModel::new(
            doc.propositions,
            doc.worlds,
            doc.prior,
            lexicon,
            doc.eot_cost,
            doc.listener_prior,
        )
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn implication_model() -> WorldModel {
        WorldModel::builder(&["p", "q"])
            .sentence("p", Formula::atom("p"), 1.0)
            .sentence(
                "if p then q",
                Formula::implies(Formula::atom("p"), Formula::atom("q")),
                1.0,
            )
            .sentence("q", Formula::atom("q"), 1.0)
            .build()
            .unwrap()
    }

    #[test]
    fn empty_context_is_everything() {
        let m = implication_model();
        let s = consistent_worlds(&m, &SentenceSeq::default()).unwrap();
        assert_eq!(s.count(), 4);
    }

    #[test]
    fn single_sentence_context_is_its_denotation() {
        let m = implication_model();
        let s = consistent_worlds(&m, &SentenceSeq::new(vec![0])).unwrap();
        assert_eq!(s, m.sentence(0).denotation);
    }

    #[test]
    fn modus_ponens_leaves_one_world() {
        // worlds in builder order: pq, p¬q, ¬pq, ¬p¬q
        let m = implication_model();
        assert_eq!(m.sentence(1).denotation.iter().collect::<Vec<_>>(), vec![0, 2, 3]);
        let s = consistent_worlds(&m, &SentenceSeq::new(vec![0, 1])).unwrap();
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0]);
        assert!(entails(&m, &SentenceSeq::new(vec![0, 1]), 2).unwrap());
        assert!(!entails(&m, &SentenceSeq::new(vec![0]), 2).unwrap());
    }

    #[test]
    fn entailment_is_reflexive_and_vacuous_on_contradiction() {
        let m = WorldModel::builder(&["p"])
            .sentence("p", Formula::atom("p"), 1.0)
            .sentence("not p", Formula::not(Formula::atom("p")), 1.0)
            .build()
            .unwrap();
        assert!(entails(&m, &SentenceSeq::new(vec![0]), 0).unwrap());
        let e = entails_checked(&m, &SentenceSeq::new(vec![0, 1]), 0).unwrap();
        assert!(e.holds && e.vacuous);
    }

    #[test]
    fn all_crops_entail_some_crops() {
        let m = WorldModel::builder(&["c1", "c2", "c3"])
            .sentence(
                "All of the crops failed.",
                Formula::and(["c1", "c2", "c3"].map(Formula::atom)),
                1.0,
            )
            .sentence(
                "Some of the crops failed.",
                Formula::or(["c1", "c2", "c3"].map(Formula::atom)),
                1.0,
            )
            .build()
            .unwrap();
        assert_eq!(m.n_worlds(), 8);
        assert!(entails(&m, &SentenceSeq::new(vec![0]), 1).unwrap());
        assert!(!entails(&m, &SentenceSeq::new(vec![1]), 0).unwrap());
    }

    #[test]
    fn info_content_counts_worlds() {
        let m = WorldModel::builder(&["a", "b"])
            .sentence("a and b", Formula::and([Formula::atom("a"), Formula::atom("b")]), 1.0)
            .sentence("a", Formula::atom("a"), 1.0)
            .build()
            .unwrap();
        let empty = SentenceSeq::default();
        let i = info_content(&m, Token::Sentence(0), &empty, 0).unwrap();
        assert!((i - 4f64.ln()).abs() < 1e-15);
        // entailed continuation is worth nothing
        let ctx = SentenceSeq::new(vec![0]);
        assert_eq!(info_content(&m, Token::Sentence(1), &ctx, 0).unwrap(), 0.0);
        // untruthful
        assert_eq!(
            info_content(&m, Token::Sentence(0), &empty, 3).unwrap(),
            f64::NEG_INFINITY
        );
        assert_eq!(info_content(&m, Token::Eot, &ctx, 0).unwrap(), 0.0);
        assert!(matches!(
            info_content(&m, Token::Sentence(1), &ctx, 3),
            Err(Error::InconsistentContext { world: 3 })
        ));
    }

    #[test]
    fn rejects_bad_models() {
        let base = || {
            WorldModel::builder(&["p"]).sentence("p", Formula::atom("p"), 1.0)
        };
        assert!(base().prior(vec![0.7, 0.7]).build().is_err());
        assert!(base().sentence("p", Formula::True, 1.0).build().is_err());
        assert!(base().sentence(EOT, Formula::True, 1.0).build().is_err());
        assert!(WorldModel::builder(&["p"]).build().is_err());
        assert!(base().sentence("q", Formula::True, f64::INFINITY).build().is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = WorldModel::builder(&["p", "q"])
            .prior(vec![0.1, 0.2, 0.3, 0.4])
            .sentence("p", Formula::atom("p"), 0.3)
            .sentence("q", Formula::atom("q"), 1.0 / 3.0)
            .eot_cost(0.7)
            .build()
            .unwrap();
        let text = m.to_json();
        assert!(text.contains("1.0000000000000001e-1") || text.contains("e-1"));
        let back = WorldModel::from_json(&text).unwrap();
        assert_eq!(back, m);
        let order: Vec<usize> = ["\"propositions\"", "\"worlds\"", "\"prior\"", "\"lexicon\"", "\"eot_cost\""]
            .iter()
            .map(|k| text.find(k).unwrap())
            .collect();
        assert!(order.windows(2).all(|w| w[0] < w[1]));
    }
}
