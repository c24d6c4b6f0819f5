//! Seeded random world models for the verification sweeps.

use rand::Rng;

use crate::semantics::{Formula, Sentence, WorldModel, WorldSet};
use crate::speakers::{CostEntry, SpeakerSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomModelSpec {
    pub min_props: usize,
    pub max_props: usize,
    pub min_sentences: usize,
    pub max_sentences: usize,
    pub max_cost: f64,
    /// Chance that a world gets zero prior mass (at least one world keeps mass).
    pub zero_prior_chance: f64,
}

impl Default for RandomModelSpec {
    fn default() -> Self {
        RandomModelSpec {
            min_props: 2,
            max_props: 4,
            min_sentences: 3,
            max_sentences: 16,
            max_cost: 3.0,
            zero_prior_chance: 0.15,
        }
    }
}

/// How the speaker prior is drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorShape {
    /// Independent random weights, some zeroed.
    Diffuse,
    /// `1 - spread` on one world, the rest spread evenly.
    NearCertain { spread: f64 },
    /// All mass on one world.
    PointMass,
}

fn all_worlds(k: usize) -> Vec<Vec<bool>> {
    (0..1usize << k)
        .map(|m| (0..k).map(|j| m & (1 << (k - 1 - j)) != 0).collect())
        .collect()
}

fn random_denotations(
    rng: &mut impl Rng,
    n_worlds: usize,
    count: usize,
    forced: Option<usize>,
) -> Vec<WorldSet> {
    let mut out: Vec<WorldSet> = Vec::with_capacity(count);
    while out.len() < count {
        let density = rng.random_range(0.2..0.9);
        let mut set = WorldSet::empty(n_worlds);
        for w in 0..n_worlds {
            if rng.random::<f64>() < density {
                set.insert(w);
            }
        }
        if let Some(w) = forced {
            set.insert(w);
        }
        if !set.is_empty() && !out.contains(&set) {
            out.push(set);
        }
    }
    out
}

fn normalized(mut weights: Vec<f64>) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    for v in &mut weights {
        *v /= total;
    }
    weights
}

/// A random model over every truth assignment of 2..=4 propositions.
///
/// With `all_true_at_anchor`, every sentence holds in one randomly chosen
/// anchor world, which is also where concentrated priors put their mass.
pub fn random_model(
    rng: &mut impl Rng,
    spec: &RandomModelSpec,
    prior: PriorShape,
    all_true_at_anchor: bool,
) -> WorldModel {
    let k = rng.random_range(spec.min_props..=spec.max_props);
    let worlds = all_worlds(k);
    let n = worlds.len();
    // distinct nonempty subsets (containing the anchor when forced)
    let available = if all_true_at_anchor {
        1usize << (n - 1)
    } else {
        (1usize << n) - 1
    };
    let upper = spec.max_sentences.min(available).max(1);
    let lower = spec.min_sentences.min(upper);
    let n_sent = rng.random_range(lower..=upper);
    let anchor = rng.random_range(0..n);
    let prior = match prior {
        PriorShape::Diffuse => loop {
            let w: Vec<f64> = (0..n)
                .map(|_| {
                    if rng.random::<f64>() < spec.zero_prior_chance {
                        0.0
                    } else {
                        rng.random_range(0.01..1.0)
                    }
                })
                .collect();
            if w.iter().any(|&v| v > 0.0) && (!all_true_at_anchor || w[anchor] > 0.0) {
                break normalized(w);
            }
        },
        PriorShape::NearCertain { spread } => {
            let mut w = vec![spread / (n - 1) as f64; n];
            w[anchor] = 1.0 - spread;
            normalized(w)
        }
        PriorShape::PointMass => {
            let mut w = vec![0.0; n];
            w[anchor] = 1.0;
            w
        }
    };
    let forced = all_true_at_anchor.then_some(anchor);
    let lexicon = random_denotations(rng, n, n_sent, forced)
        .into_iter()
        .enumerate()
        .map(|(i, denotation)| Sentence {
            surface: format!("s{i}"),
            denotation,
            base_cost: rng.random_range(0.0..spec.max_cost),
        })
        .collect();
    let eot_cost = rng.random_range(0.0..spec.max_cost);
    let props = (0..k).map(|i| format!("p{i}")).collect();
    WorldModel::new(props, worlds, prior, lexicon, eot_cost, None)
        .expect("random model is well formed")
}

/// Random context-dependent costs for one-sentence contexts (and the empty one).
pub fn random_cost_table(rng: &mut impl Rng, model: &WorldModel, max_cost: f64) -> SpeakerSpec {
    let surfaces: Vec<&str> = model.lexicon().iter().map(|s| s.surface.as_str()).collect();
    let contexts = std::iter::once(vec![]).chain(surfaces.iter().map(|s| vec![s.to_string()]));
    let mut table = Vec::new();
    for ctx in contexts {
        for y in &surfaces {
            if rng.random::<f64>() < 0.5 {
                table.push(CostEntry {
                    context: ctx.clone(),
                    sentence: y.to_string(),
                    cost: rng.random_range(0.0..max_cost),
                });
            }
        }
    }
    SpeakerSpec::explanatory(table)
}

/// Screened model over two facts with sentences `p.`, `q.`, `p and q.` and
/// `p or q.`: the speaker is all but certain both facts hold, and every
/// sentence and `$` costs 1.
pub fn two_fact_model() -> WorldModel {
    let a = Formula::atom;
    let spread = 1e-4;
    let mut prior = vec![spread / 3.0; 4];
    prior[0] = 1.0 - spread;
    WorldModel::builder(&["p", "q"])
        .sentence("p.", a("p"), 1.0)
        .sentence("q.", a("q"), 1.0)
        .sentence("p and q.", Formula::and([a("p"), a("q")]), 1.0)
        .sentence("p or q.", Formula::or([a("p"), a("q")]), 1.0)
        .prior(prior)
        .eot_cost(1.0)
        .build()
        .expect("fixture is well formed")
}
