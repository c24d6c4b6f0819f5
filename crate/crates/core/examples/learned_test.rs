//! Fits the learned linear test on exact scores of a random world model's
//! sentence pairs and compares its coefficients with the theoretical signs.

use pel::datasets::world_pairs;
use pel::eval::{fit_learned_test, score_instances, FitOptions, TestCoefficients};
use pel::scoring::{ExactProvider, TestVariant};
use pel::speakers::SpeakerSpec;
use pel::theory::fixtures::{random_model, PriorShape, RandomModelSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pel::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let spec = RandomModelSpec {
        min_props: 4,
        min_sentences: 16,
        ..RandomModelSpec::default()
    };
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..10 {
        let model = random_model(&mut rng, &spec, PriorShape::NearCertain { spread: 1e-4 }, true);
        let provider = ExactProvider::new(&model, &SpeakerSpec::gricean())?;
        for s in score_instances(&provider, &world_pairs(&model)?, TestVariant::Original)? {
            features.push(s.features.features());
            labels.push(s.instance.label.is_entailment());
        }
    }
    let fit = fit_learned_test(&features, &labels, &FitOptions::default())?;
    println!("{} pairs, {} entailed", labels.len(), labels.iter().filter(|&&l| l).count());
    println!("theoretical signs {:?}", TestCoefficients::theoretical().signs());
    println!("learned weights   {:?}", fit.coefficients.weights);
    println!("learned signs     {:?}", fit.coefficients.signs());
    println!("holdout AUC {:.2} (negated theoretical test {:.2})", fit.eval_auc, fit.eval_theoretical_auc);
    Ok(())
}
