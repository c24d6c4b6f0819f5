use pel::datasets::world_pairs;
use pel::eval::{fit_learned_test, score_instances, FitOptions};
use pel::scoring::{ExactProvider, TestVariant};
use pel::speakers::SpeakerSpec;
use pel::theory::fixtures::{random_model, PriorShape, RandomModelSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn exact_features(seed: u64, models: usize) -> (Vec<[f64; 4]>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = RandomModelSpec {
        min_props: 3,
        min_sentences: 10,
        ..RandomModelSpec::default()
    };
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..models {
        let model = random_model(&mut rng, &spec, PriorShape::NearCertain { spread: 1e-4 }, true);
        let provider = ExactProvider::new(&model, &SpeakerSpec::gricean()).unwrap();
        let scored = score_instances(&provider, &world_pairs(&model).unwrap(), TestVariant::Original).unwrap();
        for s in scored {
            features.push(s.features.features());
            labels.push(s.instance.label.is_entailment());
        }
    }
    (features, labels)
}

#[test]
fn learned_test_is_no_worse_than_theoretical_on_exact_scores() {
    let (features, labels) = exact_features(4, 6);
    let fit = fit_learned_test(&features, &labels, &FitOptions::default()).unwrap();
    assert!(
        fit.eval_auc >= fit.eval_theoretical_auc - 1.0,
        "{} vs {}",
        fit.eval_auc,
        fit.eval_theoretical_auc
    );
}

#[test]
fn holdout_auc_ignores_feature_offsets() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..400 {
        let f: [f64; 4] = std::array::from_fn(|_| rng.random_range(-20.0..-1.0));
        let s = f[0] - f[1] - f[2] + f[3];
        labels.push(rng.random_bool(1.0 / (1.0 + (0.5 * s).exp())));
        features.push(f);
    }
    let base = fit_learned_test(&features, &labels, &FitOptions::default()).unwrap();
    for j in 0..4 {
        let shifted: Vec<[f64; 4]> = features
            .iter()
            .map(|f| {
                let mut g = *f;
                g[j] -= 7.5;
                g
            })
            .collect();
        let fit = fit_learned_test(&shifted, &labels, &FitOptions::default()).unwrap();
        assert!((fit.eval_auc - base.eval_auc).abs() <= 1e-6, "feature {j}: {} vs {}", fit.eval_auc, base.eval_auc);
    }
}

#[test]
fn too_few_instances_is_an_error() {
    let features = vec![[0.0; 4]; 5];
    let labels = vec![true, false, true, false, true];
    assert!(fit_learned_test(&features, &labels, &FitOptions::default()).is_err());
}
