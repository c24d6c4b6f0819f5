//! Builds a small world model, prints what a Gricean speaker says next in the
//! world it believes in, and scores a few sentence pairs with the entailment
//! test next to their semantic values.

use pel::scoring::ExactProvider;
use pel::semantics::{Formula, SentenceSeq, Token, WorldModel};
use pel::speakers::{Speaker, SpeakerSpec};
use pel::theory::{entailment_score, semantic_value};

fn main() -> pel::Result<()> {
    let rain = Formula::atom("rain");
    let wind = Formula::atom("wind");
    // worlds: rain wind, rain calm, dry wind, dry calm
    let model = WorldModel::builder(&["rain", "wind"])
        .sentence("It rains.", rain.clone(), 1.0)
        .sentence("It is windy.", wind.clone(), 1.0)
        .sentence("It rains and it is windy.", Formula::and([rain.clone(), wind.clone()]), 1.5)
        .sentence("It rains or it is windy.", Formula::or([rain, wind]), 1.5)
        .prior(vec![0.5, 0.2, 0.2, 0.1])
        .eot_cost(2.0)
        .build()?;
    let spec = SpeakerSpec::gricean();
    let speaker = Speaker::new(&model, &spec)?;

    let ctx = SentenceSeq::new(vec![0]);
    println!("after {:?}, in a rainy, windy world:", model.render(&ctx));
    let next = speaker.next_sentence_dist(&ctx, 0)?;
    for y in 0..model.lexicon().len() {
        println!("  {:<28} {:.4}", model.sentence(y).surface, next.prob(Token::Sentence(y)));
    }
    println!("  {:<28} {:.4}", "$", next.prob(Token::Eot));

    let exact = ExactProvider::from_speaker(speaker);
    println!("\n{:<28} {:<28} {:>9} {:>9}", "x", "y", "score", "E(x,y)");
    for (x, y) in [(2, 0), (0, 3), (0, 1), (3, 2)] {
        let xs = &model.sentence(x).surface;
        let ys = &model.sentence(y).surface;
        let score = entailment_score(&exact, xs, ys)?.score;
        let e = semantic_value(&model, &spec, &SentenceSeq::new(vec![x]), y)?.value;
        println!("{xs:<28} {ys:<28} {score:>9.5} {e:>9.5}");
    }
    Ok(())
}
