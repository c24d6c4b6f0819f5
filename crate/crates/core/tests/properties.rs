use pel::estimation::fit_ngram;
use pel::eval::{flipped_roc_auc, roc_auc};
use pel::scoring::{
    pause_token_transform, Discourse, ExactProvider, RenderConfig, ScoreCache, ScoreKey,
    TokenCounter,
};
use pel::semantics::{entails, SentenceSeq};
use pel::speakers::SpeakerSpec;
use pel::theory::fixtures::{random_model, PriorShape, RandomModelSpec};
use pel::theory::{entailment_score, TestScoreBreakdown};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn labelled_scores() -> impl Strategy<Value = Vec<(f64, bool)>> {
    // small integer scores force plenty of ties
    prop::collection::vec((-4i32..4, any::<bool>()), 2..60)
        .prop_map(|v| v.into_iter().map(|(s, l)| (s as f64 / 2.0, l)).collect::<Vec<_>>())
        .prop_filter("both classes", |v: &Vec<(f64, bool)>| {
            v.iter().any(|p| p.1) && v.iter().any(|p| !p.1)
        })
}

fn brute_auc(scores: &[(f64, bool)]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for &(sp, lp) in scores {
        for &(sn, ln) in scores {
            if lp && !ln {
                pairs += 1.0;
                if sp > sn {
                    wins += 1.0;
                } else if sp == sn {
                    wins += 0.5;
                }
            }
        }
    }
    100.0 * wins / pairs
}

fn word() -> impl Strategy<Value = String> {
    "[a-z]{1,6}"
}

fn phrase() -> impl Strategy<Value = String> {
    prop::collection::vec(word(), 1..5).prop_map(|w| w.join(" "))
}

proptest! {
    #[test]
    fn roc_matches_pair_counting(scores in labelled_scores()) {
        let auc = roc_auc(&scores).unwrap().auc;
        prop_assert!((auc - brute_auc(&scores)).abs() < 1e-9);
    }

    #[test]
    fn orientations_sum_to_one_hundred(scores in labelled_scores()) {
        let auc = roc_auc(&scores).unwrap().auc;
        let flipped = flipped_roc_auc(&scores).unwrap();
        prop_assert_eq!(auc + flipped, 100.0);
    }

    #[test]
    fn pause_padding_length(a in phrase(), b in phrase(), n in 1usize..6, group in 1usize..20) {
        let cfg = RenderConfig { whitespace_group_size: group, ..RenderConfig::default() };
        let words = |s: &str| s.split_whitespace().count();
        let out = pause_token_transform(&a, &b, n, &cfg, &words);
        let pad = group * (n - 1) * words(&a);
        prop_assert_eq!(out.len(), a.len() + pad + cfg.separator.len() + b.len());
        prop_assert!(out.starts_with(&a) && out.ends_with(&b));
        prop_assert_eq!(out.split_whitespace().count(), words(&a) + words(&b));
    }

    #[test]
    fn pause_render_agrees_with_transform(a in phrase(), b in phrase(), n in 1usize..6) {
        let cfg = RenderConfig { token_counter: TokenCounter::Chars, ..RenderConfig::default() };
        let chars = |s: &str| s.chars().count();
        let (text, eos) = cfg.render(&Discourse::paused(&a, n, Some(&b)));
        prop_assert!(!eos);
        prop_assert_eq!(text, pause_token_transform(&a, &b, n, &cfg, &chars));
    }

    #[test]
    fn cache_round_trip(entries in prop::collection::vec((".{0,20}", any::<bool>(), -1e6f64..0.0), 1..20)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c/scores.jsonl");
        let cache = ScoreCache::open(&path).unwrap();
        let key = |t: &str, eos: bool| ScoreKey { model_id: "m".into(), text: t.to_string(), append_eos: eos };
        for (t, eos, lp) in &entries {
            cache.insert(key(t, *eos), *lp).unwrap();
        }
        let written = std::fs::read(&path).unwrap();
        drop(cache);
        let reopened = ScoreCache::open(&path).unwrap();
        prop_assert_eq!(reopened.len(), written.iter().filter(|&&c| c == b'\n').count());
        for (t, eos, lp) in &entries {
            // the first insert of a key wins
            let first = entries.iter().find(|(t2, e2, _)| t2 == t && e2 == eos).unwrap().2;
            prop_assert_eq!(reopened.get(&key(t, *eos)).unwrap().to_bits(), first.to_bits());
            let _ = lp;
        }
        drop(reopened);
        prop_assert_eq!(std::fs::read(&path).unwrap(), written);
    }

    #[test]
    fn ngram_conditionals_sum_to_one(
        texts in prop::collection::vec((prop::collection::vec(0usize..4, 0..6), any::<bool>()), 1..30),
        order in 2usize..4,
        lambda in prop_oneof![Just(0.0), 1e-6f64..2.0],
        history in prop::collection::vec(0usize..6, 3),
    ) {
        let vocab: Vec<String> = (0..4).map(|i| format!("s{i}")).collect();
        let corpus: Vec<SentenceSeq> = texts
            .iter()
            .map(|(items, t)| if *t { SentenceSeq::terminated(items.clone()) } else { SentenceSeq::new(items.clone()) })
            .collect();
        let m = fit_ngram(&corpus, &vocab, order, lambda).unwrap();
        // ids 0..4 are sentences, 4 is `$`, 5 is the start marker
        let h = &history[..order - 1];
        let total: f64 = (0..=4).map(|next| m.cond_logprob(h, next).exp()).sum();
        let seen: u64 = (0..=4).map(|next| m.count(h, next)).sum();
        if lambda > 0.0 || seen > 0 {
            prop_assert!((total - 1.0).abs() < 1e-12, "{}", total);
        } else {
            prop_assert_eq!(total, 0.0);
        }
    }

    #[test]
    fn breakdown_score_is_signed_sum(f in prop::array::uniform4(-1e3f64..0.0)) {
        let b = TestScoreBreakdown::from_features(f, 1).unwrap();
        prop_assert_eq!(b.score, f[0] - f[1] - f[2] + f[3]);
        prop_assert_eq!(b.features(), f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn entailed_pairs_score_zero(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = RandomModelSpec { max_props: 3, max_sentences: 8, ..RandomModelSpec::default() };
        let m = random_model(&mut rng, &spec, PriorShape::Diffuse, false);
        let provider = ExactProvider::new(&m, &SpeakerSpec::gricean()).unwrap();
        for x in 0..m.lexicon().len() {
            for y in 0..m.lexicon().len() {
                if !entails(&m, &SentenceSeq::new(vec![x]), y).unwrap() {
                    continue;
                }
                let (xs, ys) = (&m.sentence(x).surface, &m.sentence(y).surface);
                // pairs whose premise the speaker never says have no defined score
                if let Ok(b) = entailment_score(&provider, xs, ys) {
                    prop_assert!(b.score.abs() < 1e-9, "{} {} -> {}", xs, ys, b.score);
                }
            }
        }
    }
}
