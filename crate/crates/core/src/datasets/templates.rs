use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EntailmentInstance, Label, Phenomenon};
use crate::error::{Error, Result};
use crate::semantics::{entails, Formula, SentenceSeq, WorldModel};

/// Word lists behind the templated datasets. Each premise yields one
/// entailed and one non-entailed hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wordlists {
    pub names: Vec<String>,
    /// Frames with one `{}` slot for a name, e.g. `I saw {}.`
    pub connective_frames: Vec<String>,
    pub plural_nouns: Vec<String>,
    pub quantifier_predicates: Vec<String>,
    pub number_predicates: Vec<String>,
    /// `(past tense, participle)`.
    pub passive_verbs: Vec<(String, String)>,
    /// `(verb, direct object)`.
    pub dative_frames: Vec<(String, String)>,
}

fn lines(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

fn pairs(text: &str, what: &str) -> Result<Vec<(String, String)>> {
    lines(text)
        .into_iter()
        .map(|l| match l.split_once('|') {
            Some((a, b)) => Ok((a.trim().to_string(), b.trim().to_string())),
            None => Err(Error::InvalidArgument(format!("{what} entry {l:?} needs `a|b`"))),
        })
        .collect()
}

impl Default for Wordlists {
    fn default() -> Self {
        Wordlists::parse(
            include_str!("../../data/names.txt"),
            include_str!("../../data/connective_frames.txt"),
            include_str!("../../data/plural_nouns.txt"),
            include_str!("../../data/quantifier_predicates.txt"),
            include_str!("../../data/number_predicates.txt"),
            include_str!("../../data/passive_verbs.txt"),
            include_str!("../../data/dative_frames.txt"),
        )
        .expect("bundled word lists parse")
    }
}

impl Wordlists {
    #[allow(clippy::too_many_arguments)]
    fn parse(
        names: &str,
        frames: &str,
        nouns: &str,
        qpreds: &str,
        npreds: &str,
        passives: &str,
        datives: &str,
    ) -> Result<Self> {
        let lists = Wordlists {
            names: lines(names),
            connective_frames: lines(frames),
            plural_nouns: lines(nouns),
            quantifier_predicates: lines(qpreds),
            number_predicates: lines(npreds),
            passive_verbs: pairs(passives, "passive verb")?,
            dative_frames: pairs(datives, "dative frame")?,
        };
        if let Some(f) = lists.connective_frames.iter().find(|f| f.matches("{}").count() != 1) {
            return Err(Error::InvalidArgument(format!(
                "connective frame {f:?} needs exactly one {{}} slot"
            )));
        }
        Ok(lists)
    }

    /// Loads the lists from a directory laid out like the bundled `data/`.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let read = |name: &str| -> Result<String> {
            let p = dir.join(name);
            std::fs::read_to_string(&p).map_err(|e| Error::io(p, e))
        };
        Wordlists::parse(
            &read("names.txt")?,
            &read("connective_frames.txt")?,
            &read("plural_nouns.txt")?,
            &read("quantifier_predicates.txt")?,
            &read("number_predicates.txt")?,
            &read("passive_verbs.txt")?,
            &read("dative_frames.txt")?,
        )
    }
}

fn need(what: &str, have: usize, min: usize) -> Result<()> {
    if have < min {
        return Err(Error::InvalidArgument(format!(
            "word list {what} has {have} entries, need at least {min}"
        )));
    }
    Ok(())
}

fn pair_of(
    premise: String,
    entailed: String,
    non_entailed: String,
    phenomenon: Phenomenon,
    slots: &[(&str, &str)],
) -> [EntailmentInstance; 2] {
    let make = |hyp: &str, label| {
        let mut inst = EntailmentInstance::new(&premise, hyp, label, phenomenon);
        for (k, v) in slots {
            inst = inst.with_meta(k, *v);
        }
        inst
    };
    [
        make(&entailed, Label::Entailment),
        make(&non_entailed, Label::NonEntailment),
    ]
}

/// Generates one templated dataset in a fixed order.
pub fn gen_targeted(phenomenon: Phenomenon, lists: &Wordlists) -> Result<Vec<EntailmentInstance>> {
    let mut out = Vec::new();
    match phenomenon {
        Phenomenon::Connectives => {
            need("names", lists.names.len(), 2)?;
            need("connective_frames", lists.connective_frames.len(), 1)?;
            for frame in &lists.connective_frames {
                for a in &lists.names {
                    for b in lists.names.iter().filter(|b| *b != a) {
                        out.extend(pair_of(
                            frame.replace("{}", a),
                            frame.replace("{}", &format!("{a} or {b}")),
                            frame.replace("{}", &format!("{a} and {b}")),
                            phenomenon,
                            &[("frame", frame), ("first", a), ("second", b)],
                        ));
                    }
                }
            }
        }
        Phenomenon::Quantifiers => {
            need("plural_nouns", lists.plural_nouns.len(), 1)?;
            need("quantifier_predicates", lists.quantifier_predicates.len(), 1)?;
            for noun in &lists.plural_nouns {
                for pred in &lists.quantifier_predicates {
                    out.extend(pair_of(
                        format!("All of the {noun} {pred}."),
                        format!("Some of the {noun} {pred}."),
                        format!("None of the {noun} {pred}."),
                        phenomenon,
                        &[("noun", noun), ("predicate", pred)],
                    ));
                }
            }
        }
        Phenomenon::Numbers => {
            need("plural_nouns", lists.plural_nouns.len(), 1)?;
            need("number_predicates", lists.number_predicates.len(), 1)?;
            for noun in &lists.plural_nouns {
                for pred in &lists.number_predicates {
                    out.extend(pair_of(
                        format!("At least two of the {noun} {pred}."),
                        format!("At least one of the {noun} {pred}."),
                        format!("At least three of the {noun} {pred}."),
                        phenomenon,
                        &[("noun", noun), ("predicate", pred)],
                    ));
                }
            }
        }
        Phenomenon::Passives => {
            need("names", lists.names.len(), 2)?;
            need("passive_verbs", lists.passive_verbs.len(), 1)?;
            for (past, participle) in &lists.passive_verbs {
                for a in &lists.names {
                    for b in lists.names.iter().filter(|b| *b != a) {
                        out.extend(pair_of(
                            format!("{a} {past} {b}."),
                            format!("{b} was {participle}."),
                            format!("{a} was {participle}."),
                            phenomenon,
                            &[
                                ("past", past),
                                ("participle", participle),
                                ("agent", a),
                                ("patient", b),
                            ],
                        ));
                    }
                }
            }
        }
        Phenomenon::Datives => {
            need("names", lists.names.len(), 2)?;
            need("dative_frames", lists.dative_frames.len(), 1)?;
            for (verb, object) in &lists.dative_frames {
                for a in &lists.names {
                    for b in lists.names.iter().filter(|b| *b != a) {
                        out.extend(pair_of(
                            format!("{a} {verb} {b} {object}."),
                            format!("{a} {verb} {object}."),
                            format!("{a} {verb} {b}."),
                            phenomenon,
                            &[("verb", verb), ("object", object), ("agent", a), ("recipient", b)],
                        ));
                    }
                }
            }
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "{other} is not a templated phenomenon"
            )))
        }
    }
    Ok(out)
}

/// Small world model giving the meanings of the sentences an instance's
/// template can produce, rebuilt from the template slots in `meta`.
fn compile(inst: &EntailmentInstance) -> Result<WorldModel> {
    let phenomenon = inst
        .phenomenon
        .ok_or_else(|| Error::InvalidArgument("instance has no phenomenon".into()))?;
    let atom = Formula::atom;
    let model = match phenomenon {
        Phenomenon::Connectives => {
            let frame = inst.meta_str("frame")?;
            let (a, b) = (inst.meta_str("first")?, inst.meta_str("second")?);
            WorldModel::builder(&["a", "b"])
                .sentence(&frame.replace("{}", a), atom("a"), 1.0)
                .sentence(&frame.replace("{}", b), atom("b"), 1.0)
                .sentence(&frame.replace("{}", &format!("{a} or {b}")), Formula::or([atom("a"), atom("b")]), 1.0)
                .sentence(&frame.replace("{}", &format!("{a} and {b}")), Formula::and([atom("a"), atom("b")]), 1.0)
                .build()?
        }
        Phenomenon::Quantifiers | Phenomenon::Numbers => {
            // three individuals; f_i: individual i has the property
            let (noun, pred) = (inst.meta_str("noun")?, inst.meta_str("predicate")?);
            let f = || [atom("f1"), atom("f2"), atom("f3")];
            let at_least = |k: usize| -> Formula {
                let combos: Vec<Formula> = match k {
                    1 => f().into_iter().collect(),
                    2 => vec![
                        Formula::and([atom("f1"), atom("f2")]),
                        Formula::and([atom("f1"), atom("f3")]),
                        Formula::and([atom("f2"), atom("f3")]),
                    ],
                    _ => vec![Formula::and(f())],
                };
                Formula::or(combos)
            };
            WorldModel::builder(&["f1", "f2", "f3"])
                .sentence(&format!("All of the {noun} {pred}."), Formula::and(f()), 1.0)
                .sentence(&format!("Some of the {noun} {pred}."), Formula::or(f()), 1.0)
                .sentence(&format!("None of the {noun} {pred}."), Formula::not(Formula::or(f())), 1.0)
                .sentence(&format!("At least one of the {noun} {pred}."), at_least(1), 1.0)
                .sentence(&format!("At least two of the {noun} {pred}."), at_least(2), 1.0)
                .sentence(&format!("At least three of the {noun} {pred}."), at_least(3), 1.0)
                .build()?
        }
        Phenomenon::Passives => {
            // s_xy: x performed the action on y
            let (past, part) = (inst.meta_str("past")?, inst.meta_str("participle")?);
            let (a, b) = (inst.meta_str("agent")?, inst.meta_str("patient")?);
            WorldModel::builder(&["s_aa", "s_ab", "s_ba", "s_bb"])
                .sentence(&format!("{a} {past} {b}."), atom("s_ab"), 1.0)
                .sentence(&format!("{b} {past} {a}."), atom("s_ba"), 1.0)
                .sentence(&format!("{b} was {part}."), Formula::or([atom("s_ab"), atom("s_bb")]), 1.0)
                .sentence(&format!("{a} was {part}."), Formula::or([atom("s_aa"), atom("s_ba")]), 1.0)
                .build()?
        }
        Phenomenon::Datives => {
            // g: the double-object event; c: the object was made/sent; p: the recipient was
            let (verb, object) = (inst.meta_str("verb")?, inst.meta_str("object")?);
            let (a, b) = (inst.meta_str("agent")?, inst.meta_str("recipient")?);
            WorldModel::builder(&["g", "c", "p"])
                .restrict(&Formula::implies(atom("g"), atom("c")))?
                .sentence(&format!("{a} {verb} {b} {object}."), atom("g"), 1.0)
                .sentence(&format!("{a} {verb} {object}."), atom("c"), 1.0)
                .sentence(&format!("{a} {verb} {b}."), atom("p"), 1.0)
                .build()?
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "no compiled model for {other}"
            )))
        }
    };
    Ok(model)
}

/// Label assigned by compiling the instance's template to a world model.
pub fn oracle_label(inst: &EntailmentInstance) -> Result<Label> {
    let model = compile(inst)?;
    let x = model.index_of(&inst.premise)?;
    let y = model.index_of(&inst.hypothesis)?;
    Ok(if entails(&model, &SentenceSeq::new(vec![x]), y)? {
        Label::Entailment
    } else {
        Label::NonEntailment
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_examples() {
        let lists = Wordlists::default();
        let c = gen_targeted(Phenomenon::Connectives, &lists).unwrap();
        assert_eq!(c[0].premise, "I saw James.");
        assert_eq!(c[0].hypothesis, "I saw James or Olivia.");
        assert_eq!(c[0].label, Label::Entailment);
        assert_eq!(c[1].hypothesis, "I saw James and Olivia.");
        assert_eq!(c[1].label, Label::NonEntailment);

        let q = gen_targeted(Phenomenon::Quantifiers, &lists).unwrap();
        assert_eq!(
            (q[0].premise.as_str(), q[0].hypothesis.as_str(), q[1].hypothesis.as_str()),
            ("All of the crops failed.", "Some of the crops failed.", "None of the crops failed.")
        );
        let n = gen_targeted(Phenomenon::Numbers, &lists).unwrap();
        assert_eq!(n[0].premise, "At least two of the crops failed.");
        assert_eq!(n[0].hypothesis, "At least one of the crops failed.");
        assert_eq!(n[1].hypothesis, "At least three of the crops failed.");

        let p = gen_targeted(Phenomenon::Passives, &lists).unwrap();
        let olivia_mia = p
            .iter()
            .find(|i| i.premise == "Olivia saw Mia.")
            .unwrap();
        assert_eq!(olivia_mia.hypothesis, "Mia was seen.");
        assert!(p.iter().any(|i| i.premise == "Olivia saw Mia."
            && i.hypothesis == "Olivia was seen."
            && i.label == Label::NonEntailment));

        let d = gen_targeted(Phenomenon::Datives, &lists).unwrap();
        let liam = d
            .iter()
            .filter(|i| i.premise == "Liam baked Noah a cake.")
            .map(|i| (i.hypothesis.as_str(), i.label))
            .collect::<Vec<_>>();
        assert_eq!(
            liam,
            vec![
                ("Liam baked a cake.", Label::Entailment),
                ("Liam baked Noah.", Label::NonEntailment)
            ]
        );
    }

    #[test]
    fn oracle_agrees_on_samples() {
        let lists = Wordlists::default();
        for ph in Phenomenon::TARGETED {
            for inst in gen_targeted(ph, &lists).unwrap().iter().take(40) {
                assert_eq!(oracle_label(inst).unwrap(), inst.label, "{inst:?}");
            }
        }
    }

    #[test]
    fn small_lists_rejected() {
        let lists = Wordlists {
            names: vec!["Solo".into()],
            ..Wordlists::default()
        };
        assert!(gen_targeted(Phenomenon::Passives, &lists).is_err());
        assert!(gen_targeted(Phenomenon::Quantifiers, &lists).is_ok());
        assert!(gen_targeted(Phenomenon::External, &lists).is_err());
    }
}
