//! A speaker who expects the premise to be missed with probability eps
//! hedges, so the plain test misreads how much the premise tells about the
//! hypothesis. Repeating the premise shrinks the error roughly by a factor of
//! eps per repetition.

use std::collections::BTreeMap;

use pel::scoring::ExactProvider;
use pel::semantics::{Formula, SentenceSeq, WorldModel};
use pel::speakers::SpeakerSpec;
use pel::theory::{repeated_entailment_score, semantic_value};

fn main() -> pel::Result<()> {
    let p = Formula::atom("p");
    let q = Formula::atom("q");
    let model = WorldModel::builder(&["p", "q"])
        .sentence("p.", p.clone(), 1.0)
        .sentence("q.", q.clone(), 1.0)
        .sentence("p or q.", Formula::or([p, q]), 1.0)
        .prior(vec![1.0, 0.0, 0.0, 0.0])
        .build()?;
    let (x, y) = ("p or q.", "q.");
    let xi = model.index_of(x)?;
    let yi = model.index_of(y)?;
    let e = semantic_value(&model, &SpeakerSpec::gricean(), &SentenceSeq::new(vec![xi]), yi)?.value;
    println!("x = {x:?}, y = {y:?}, E(x, y) = {e:.6}");
    let levels = [0.2, 0.3, 0.5];
    let providers = levels
        .iter()
        .map(|&eps| {
            let noise = BTreeMap::from([(x.to_string(), eps)]);
            ExactProvider::new(&model, &SpeakerSpec::noise_tolerant(noise))
        })
        .collect::<pel::Result<Vec<_>>>()?;
    println!("{:>4} {:>12} {:>12} {:>12}", "n", "eps 0.2", "eps 0.3", "eps 0.5");
    for n in 1..=6 {
        let errors = providers
            .iter()
            .map(|prov| Ok((repeated_entailment_score(prov, x, y, n)?.score - e).abs()))
            .collect::<pel::Result<Vec<f64>>>()?;
        println!("{n:>4} {:>12.3e} {:>12.3e} {:>12.3e}", errors[0], errors[1], errors[2]);
    }
    Ok(())
}
