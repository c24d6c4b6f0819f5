//! Library results checked against independent brute-force computations.

use std::collections::HashMap;

use pel::estimation::fit_ngram;
use pel::semantics::{Formula, SentenceSeq, WorldModel};
use pel::speakers::{CostEntry, Speaker, SpeakerSpec};
use pel::theory::fixtures::{random_model, PriorShape, RandomModelSpec};
use pel::theory::{delta, entailed_continuation_mass, semantic_value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Listener-uniform Gricean speaker written out from the definitions.
struct Brute<'a> {
    m: &'a WorldModel,
}

impl Brute<'_> {
    fn consistent(&self, ctx: &[usize]) -> Vec<usize> {
        (0..self.m.n_worlds())
            .filter(|&w| ctx.iter().all(|&s| self.m.sentence(s).denotation.contains(w)))
            .collect()
    }

    /// Information of `y` after `ctx`, counting worlds.
    fn info(&self, ctx: &[usize], y: usize) -> f64 {
        let before = self.consistent(ctx).len() as f64;
        let mut with = ctx.to_vec();
        with.push(y);
        let after = self.consistent(&with).len() as f64;
        (before / after).ln()
    }

    fn z(&self, ctx: &[usize], w: usize) -> f64 {
        let mut total = (-self.m.eot_cost()).exp();
        for y in 0..self.m.lexicon().len() {
            if self.m.sentence(y).denotation.contains(w) {
                total += (self.info(ctx, y) - self.m.sentence(y).base_cost).exp();
            }
        }
        total
    }

    fn cond(&self, ctx: &[usize], next: Option<usize>, w: usize) -> f64 {
        match next {
            None => (-self.m.eot_cost()).exp() / self.z(ctx, w),
            Some(y) if self.m.sentence(y).denotation.contains(w) => {
                (self.info(ctx, y) - self.m.sentence(y).base_cost).exp() / self.z(ctx, w)
            }
            Some(_) => 0.0,
        }
    }

    fn prefix_prob(&self, items: &[usize], terminated: bool) -> f64 {
        (0..self.m.n_worlds())
            .map(|w| {
                let mut p = self.m.prior()[w];
                for t in 0..items.len() {
                    if p == 0.0 {
                        return 0.0;
                    }
                    p *= self.cond(&items[..t], Some(items[t]), w);
                }
                if terminated && p > 0.0 {
                    p *= self.cond(items, None, w);
                }
                p
            })
            .sum()
    }

    /// `E(x, y)` with `g` as the product of inverse normalizers through `|x| + 1`.
    fn semantic_value(&self, x: &[usize], y: usize) -> f64 {
        let n = self.m.n_worlds() as f64;
        let mut num = 0.0;
        let mut den = 0.0;
        let sx = self.consistent(x);
        let mut xy = x.to_vec();
        xy.push(y);
        let sxy = self.consistent(&xy);
        for w in 0..self.m.n_worlds() {
            let pi = self.m.prior()[w];
            if pi == 0.0 || !sx.contains(&w) {
                continue;
            }
            let mut g = 1.0;
            for t in 0..=x.len() {
                g /= self.z(&x[..t], w);
            }
            den += pi * n / sx.len() as f64 * g;
            if sxy.contains(&w) {
                num += pi * n / sxy.len() as f64 * g;
            }
        }
        (num / den).ln()
    }
}

fn random_models(seed: u64, count: usize) -> Vec<WorldModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = RandomModelSpec {
        max_props: 3,
        max_sentences: 8,
        ..RandomModelSpec::default()
    };
    (0..count)
        .map(|_| random_model(&mut rng, &spec, PriorShape::Diffuse, false))
        .collect()
}

#[test]
fn prefix_probabilities_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in random_models(1, 25) {
        let speaker = Speaker::new(&m, &SpeakerSpec::gricean()).unwrap();
        let brute = Brute { m: &m };
        let n = m.lexicon().len();
        for _ in 0..30 {
            let len = rng.random_range(0..=3);
            let items: Vec<usize> = (0..len).map(|_| rng.random_range(0..n)).collect();
            let terminated = rng.random_bool(0.5);
            let seq = if terminated {
                SentenceSeq::terminated(items.clone())
            } else {
                SentenceSeq::new(items.clone())
            };
            let want = brute.prefix_prob(&items, terminated);
            let got = speaker.prefix_logprob(&seq).unwrap();
            if want == 0.0 {
                assert_eq!(got, f64::NEG_INFINITY, "{items:?}");
            } else {
                assert!((got - want.ln()).abs() < 1e-10, "{items:?}: {got} vs {}", want.ln());
            }
        }
    }
}

#[test]
fn semantic_value_matches_brute_force() {
    for m in random_models(2, 25) {
        let brute = Brute { m: &m };
        let n = m.lexicon().len();
        for x in 0..n {
            for y in 0..n {
                let got = semantic_value(&m, &SpeakerSpec::gricean(), &SentenceSeq::new(vec![x]), y);
                let want = brute.semantic_value(&[x], y);
                match got {
                    Ok(v) if want.is_finite() => {
                        assert!((v.value - want).abs() < 1e-10, "({x},{y}): {} vs {want}", v.value)
                    }
                    Ok(v) => assert_eq!(v.value, want),
                    Err(_) => assert!(!want.is_finite()),
                }
            }
        }
    }
}

#[test]
fn concentrated_two_proposition_value_is_log_two() {
    // S(x) = {pq, p~q}, S(xy) = {pq}; the speaker is sure of pq
    let m = WorldModel::builder(&["p", "q"])
        .sentence("p.", Formula::atom("p"), 1.0)
        .sentence("q.", Formula::atom("q"), 1.0)
        .prior(vec![1.0, 0.0, 0.0, 0.0])
        .build()
        .unwrap();
    let e = semantic_value(&m, &SpeakerSpec::gricean(), &SentenceSeq::new(vec![0]), 1).unwrap();
    assert!((e.value - 2f64.ln()).abs() < 1e-12);
    assert!((Brute { m: &m }.semantic_value(&[0], 1) - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn sampler_first_sentence_frequencies_within_three_sigma() {
    for m in random_models(3, 4) {
        let speaker = Speaker::new(&m, &SpeakerSpec::gricean()).unwrap();
        let n_texts = 20_000;
        let corpus = speaker.sample_corpus(n_texts, 5, 64).unwrap();
        let mut counts: HashMap<Option<usize>, usize> = HashMap::new();
        for t in &corpus {
            *counts.entry(t.seq.items.first().copied()).or_default() += 1;
        }
        let brute = Brute { m: &m };
        let mut outcomes: Vec<Option<usize>> = (0..m.lexicon().len()).map(Some).collect();
        outcomes.push(None);
        for o in outcomes {
            let p = match o {
                Some(y) => brute.prefix_prob(&[y], false),
                None => brute.prefix_prob(&[], true),
            };
            let got = *counts.get(&o).unwrap_or(&0) as f64 / n_texts as f64;
            let sigma = (p * (1.0 - p) / n_texts as f64).sqrt();
            assert!((got - p).abs() <= 3.0 * sigma + 1e-9, "{o:?}: {got} vs {p} (sigma {sigma})");
        }
    }
}

#[test]
fn trigram_estimates_match_exact_conditionals() {
    // with histories (start, x), counts estimate p(next | x) at the first position
    let m = pel::theory::fixtures::two_fact_model();
    let speaker = Speaker::new(&m, &SpeakerSpec::gricean()).unwrap();
    let corpus: Vec<SentenceSeq> = speaker
        .sample_corpus(100_000, 9, 64)
        .unwrap()
        .into_iter()
        .map(|t| t.seq)
        .collect();
    let vocab: Vec<String> = m.lexicon().iter().map(|s| s.surface.clone()).collect();
    let ngram = fit_ngram(&corpus, &vocab, 3, 0.0).unwrap();
    let v = vocab.len();
    let (eot, bos) = (v, v + 1);
    for x in 0..v {
        let px = speaker.prefix_logprob(&SentenceSeq::new(vec![x])).unwrap().exp();
        let n_x = ngram.count(&[bos, bos], x);
        let next: Vec<(usize, SentenceSeq)> = (0..v)
            .map(|y| (y, SentenceSeq::new(vec![x, y])))
            .chain(std::iter::once((eot, SentenceSeq::terminated(vec![x]))))
            .collect();
        for (id, seq) in next {
            let p = speaker.prefix_logprob(&seq).unwrap().exp() / px;
            let got = ngram.count(&[bos, x], id) as f64 / n_x as f64;
            let sigma = (p * (1.0 - p) / n_x as f64).sqrt();
            assert!((got - p).abs() <= 3.0 * sigma + 1e-12, "x={x} next={id}: {got} vs {p}");
        }
    }
}

#[test]
fn delta_reads_cost_table() {
    let m = WorldModel::builder(&["p", "q"])
        .sentence("x", Formula::atom("p"), 1.0)
        .sentence("y", Formula::atom("q"), 5.0)
        .build()
        .unwrap();
    let spec = SpeakerSpec::explanatory(vec![CostEntry {
        context: vec!["x".into()],
        sentence: "y".into(),
        cost: 2.0,
    }]);
    let s = Speaker::new(&m, &spec).unwrap();
    assert_eq!(delta(&s, &[0], 1), 3.0);
    assert_eq!(delta(&s, &[1], 1), 0.0);
}

/// One entailed continuation and one carrying `info` nats, equal costs; the
/// speaker is sure of the world where both hold.
fn two_candidate_model(info: f64, eot_cost: f64) -> WorldModel {
    let rare = (-info).exp();
    WorldModel::builder(&["q"])
        .sentence("t", Formula::or([Formula::atom("q"), Formula::not(Formula::atom("q"))]), 1.0)
        .sentence("z", Formula::atom("q"), 1.0)
        .prior(vec![1.0, 0.0])
        .listener_prior(vec![rare, 1.0 - rare])
        .eot_cost(eot_cost)
        .build()
        .unwrap()
}

#[test]
fn entailed_mass_two_candidate_closed_form() {
    let eot_cost = 40.0;
    let m = two_candidate_model(10.0, eot_cost);
    let s = Speaker::new(&m, &SpeakerSpec::gricean()).unwrap();
    let mass = entailed_continuation_mass(&s, &SentenceSeq::new(vec![0])).unwrap();
    let (c, e) = (1.0f64, eot_cost);
    let want = (-c).exp() / ((-c).exp() + (10.0 - c).exp() + (-e).exp());
    assert!((mass - want).abs() < 1e-12, "{mass} vs {want}");
    assert!((mass - 1.0 / (1.0 + 10f64.exp())).abs() < 1e-12);
    // an empty context entails none of these sentences
    let none = WorldModel::builder(&["p", "q"])
        .sentence("p", Formula::atom("p"), 1.0)
        .sentence("q", Formula::atom("q"), 1.0)
        .build()
        .unwrap();
    let s = Speaker::new(&none, &SpeakerSpec::gricean()).unwrap();
    let m0 = entailed_continuation_mass(&s, &SentenceSeq::default()).unwrap();
    assert_eq!(m0, 0.0);
}

#[test]
fn noise_raises_entailed_mass() {
    let m = WorldModel::builder(&["p", "q"])
        .sentence("p", Formula::atom("p"), 1.0)
        .sentence("q", Formula::atom("q"), 1.0)
        .sentence("p and q", Formula::and([Formula::atom("p"), Formula::atom("q")]), 1.0)
        .prior(vec![1.0, 0.0, 0.0, 0.0])
        .build()
        .unwrap();
    let ctx = SentenceSeq::new(vec![2]);
    let masses: Vec<f64> = [0.0, 0.3, 0.6]
        .iter()
        .map(|&eps| {
            let spec = SpeakerSpec::uniform_noise(&m, eps);
            let s = Speaker::new(&m, &spec).unwrap();
            entailed_continuation_mass(&s, &ctx).unwrap()
        })
        .collect();
    assert!(masses[0] < masses[1] && masses[1] < masses[2], "{masses:?}");
}
