//! Context-dependent costs: once the premise is said, a sentence that it makes
//! easy to say gets cheaper, and the test score moves by exactly the cost
//! difference.

use pel::scoring::ExactProvider;
use pel::semantics::{Formula, SentenceSeq, WorldModel};
use pel::speakers::{CostEntry, Speaker, SpeakerSpec};
use pel::theory::{entailment_score, semantic_value};

fn main() -> pel::Result<()> {
    let model = WorldModel::builder(&["storm", "flood"])
        .sentence("A storm hit.", Formula::atom("storm"), 2.0)
        .sentence("The river flooded.", Formula::atom("flood"), 3.0)
        .prior(vec![0.4, 0.2, 0.1, 0.3])
        .build()?;
    let spec = SpeakerSpec::explanatory(vec![CostEntry {
        context: vec!["A storm hit.".into()],
        sentence: "The river flooded.".into(),
        cost: 1.0,
    }]);
    let speaker = Speaker::new(&model, &spec)?;
    let (x, y) = (0, 1);
    let shift = speaker.delta(&[x], y) - speaker.delta(&[y], y);
    let e = semantic_value(&model, &spec, &SentenceSeq::new(vec![x]), y)?.value;
    let exact = ExactProvider::from_speaker(speaker);
    let score = entailment_score(&exact, &model.sentence(x).surface, &model.sentence(y).surface)?.score;
    let plain = ExactProvider::new(&model, &SpeakerSpec::gricean())?;
    let gricean = entailment_score(&plain, &model.sentence(x).surface, &model.sentence(y).surface)?.score;
    println!("semantic value E         {e:.6}");
    println!("cost shift               {shift:.6}");
    println!("E + shift                {:.6}", e + shift);
    println!("explanatory test score   {score:.6}");
    println!("gricean test score       {gricean:.6}");
    Ok(())
}
