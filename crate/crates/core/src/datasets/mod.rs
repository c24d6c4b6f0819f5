//! Labelled premise/hypothesis pairs: templated generation, distractor sets,
//! and ingestion of external NLI files.

mod distractors;
mod templates;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use distractors::{distractor_world_model, gen_distractors, BasePair, DistractorLists};
pub use templates::{gen_targeted, oracle_label, Wordlists};

use crate::error::{Error, Result};
use crate::semantics::{entails, SentenceSeq, WorldModel};
use crate::speakers::Speaker;
use crate::speakers::SpeakerSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Entailment,
    NonEntailment,
}

impl Label {
    pub fn is_entailment(self) -> bool {
        self == Label::Entailment
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phenomenon {
    Connectives,
    Quantifiers,
    Numbers,
    Passives,
    Datives,
    Distractors,
    External,
    /// All sentence pairs of a world model.
    WorldPairs,
}

impl Phenomenon {
    pub const TARGETED: [Phenomenon; 5] = [
        Phenomenon::Connectives,
        Phenomenon::Quantifiers,
        Phenomenon::Numbers,
        Phenomenon::Passives,
        Phenomenon::Datives,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Phenomenon::Connectives => "connectives",
            Phenomenon::Quantifiers => "quantifiers",
            Phenomenon::Numbers => "numbers",
            Phenomenon::Passives => "passives",
            Phenomenon::Datives => "datives",
            Phenomenon::Distractors => "distractors",
            Phenomenon::External => "external",
            Phenomenon::WorldPairs => "world_pairs",
        }
    }
}

impl fmt::Display for Phenomenon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Phenomenon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        [
            Phenomenon::Connectives,
            Phenomenon::Quantifiers,
            Phenomenon::Numbers,
            Phenomenon::Passives,
            Phenomenon::Datives,
            Phenomenon::Distractors,
            Phenomenon::External,
            Phenomenon::WorldPairs,
        ]
        .into_iter()
        .find(|p| p.name() == norm)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown phenomenon {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntailmentInstance {
    pub premise: String,
    pub hypothesis: String,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phenomenon: Option<Phenomenon>,
    #[serde(default)]
    pub meta: BTreeMap<String, Value>,
}

impl EntailmentInstance {
    pub fn new(premise: &str, hypothesis: &str, label: Label, phenomenon: Phenomenon) -> Self {
        EntailmentInstance {
            premise: premise.to_string(),
            hypothesis: hypothesis.to_string(),
            label,
            phenomenon: Some(phenomenon),
            meta: BTreeMap::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    pub fn meta_str(&self, key: &str) -> Result<&str> {
        self.meta
            .get(key)
            .and_then(Value::as_str)
            .ok_or_else(|| Error::InvalidArgument(format!("instance lacks meta.{key}")))
    }
}

pub fn instances_to_jsonl(instances: &[EntailmentInstance]) -> String {
    let mut out = String::new();
    for inst in instances {
        out.push_str(&serde_json::to_string(inst).expect("instance serializes"));
        out.push('\n');
    }
    out
}

/// Parses JSONL written by [`instances_to_jsonl`].
pub fn instances_from_jsonl(text: &str, path: &str) -> Result<Vec<EntailmentInstance>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let inst: EntailmentInstance = serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.to_string(),
                line: i + 1,
                message: e.to_string(),
            })?;
            check_instance(&inst).map_err(|message| Error::Parse {
                path: path.to_string(),
                line: i + 1,
                message,
            })?;
            Ok(inst)
        })
        .collect()
}

pub fn read_instances(path: &Path) -> Result<Vec<EntailmentInstance>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    instances_from_jsonl(&text, &path.display().to_string())
}

fn check_instance(inst: &EntailmentInstance) -> std::result::Result<(), String> {
    if inst.premise.trim().is_empty() || inst.hypothesis.trim().is_empty() {
        return Err("premise and hypothesis must be non-empty".into());
    }
    Ok(())
}

fn external_label(raw: &str) -> Option<Label> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "entailment" | "entailed" => Some(Label::Entailment),
        "neutral" | "contradiction" | "non_entailment" | "not_entailment" | "non-entailment" => {
            Some(Label::NonEntailment)
        }
        _ => None,
    }
}

/// Reads SNLI-style JSONL (`premise`/`hypothesis`/`label`, or
/// `sentence1`/`sentence2`/`gold_label`), collapsing neutral and
/// contradiction into non-entailment.
pub fn ingest_nli(text: &str, path: &str) -> Result<Vec<EntailmentInstance>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse {
            path: path.to_string(),
            line: i + 1,
            message,
        };
        let obj: serde_json::Map<String, Value> =
            serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        let field = |names: &[&str]| -> Option<&str> {
            names.iter().find_map(|n| obj.get(*n).and_then(Value::as_str))
        };
        let premise = field(&["premise", "sentence1"]).ok_or_else(|| bad("missing premise".into()))?;
        let hypothesis =
            field(&["hypothesis", "sentence2"]).ok_or_else(|| bad("missing hypothesis".into()))?;
        let raw = field(&["label", "gold_label"]).ok_or_else(|| bad("missing label".into()))?;
        let label = external_label(raw).ok_or_else(|| bad(format!("unknown label {raw:?}")))?;
        let mut inst = EntailmentInstance::new(premise, hypothesis, label, Phenomenon::External)
            .with_meta("source_line", i + 1)
            .with_meta("source_label", raw);
        for key in ["id", "pairID", "promptID", "uid", "idx"] {
            if let Some(v) = obj.get(key) {
                inst.meta.insert(key.to_string(), v.clone());
            }
        }
        check_instance(&inst).map_err(bad)?;
        out.push(inst);
    }
    Ok(out)
}

pub fn ingest_nli_file(path: &Path) -> Result<Vec<EntailmentInstance>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ingest_nli(&text, &path.display().to_string())
}

/// Every ordered pair of lexicon sentences that some supported world makes
/// jointly true, labelled by the entailment oracle.
pub fn world_pairs(model: &WorldModel) -> Result<Vec<EntailmentInstance>> {
    // validates that the model supports a speaker at all
    Speaker::new(model, &SpeakerSpec::gricean())?;
    let n = model.lexicon().len();
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let joint = model.consistent_set(&[x, y]);
            if !model.support().iter().any(|w| joint.contains(w)) {
                continue;
            }
            let label = if entails(model, &SentenceSeq::new(vec![x]), y)? {
                Label::Entailment
            } else {
                Label::NonEntailment
            };
            out.push(
                EntailmentInstance::new(
                    &model.sentence(x).surface,
                    &model.sentence(y).surface,
                    label,
                    Phenomenon::WorldPairs,
                )
                .with_meta("joint_mass", model.prior_mass(&joint)),
            );
        }
    }
    Ok(out)
}
