//! How little probability a Gricean speaker puts on saying something already
//! entailed, when an informative alternative is available.

use pel::semantics::{Formula, SentenceSeq, WorldModel};
use pel::speakers::{Speaker, SpeakerSpec};
use pel::theory::{entailed_continuation_mass, gricean_redundancy_bound};

fn main() -> pel::Result<()> {
    println!("{:>8} {:>12}", "chars", "bound");
    for chars in [10, 20, 30, 60] {
        println!("{chars:>8} {:>12.3e}", gricean_redundancy_bound(1.0 / 3.0, chars));
    }
    println!("\n{:>8} {:>14}", "nats", "entailed mass");
    for info in [1.0, 5.0, 10.0, 20.0] {
        let rare = f64::exp(-info);
        let model = WorldModel::builder(&["q"])
            .sentence("t", Formula::or([Formula::atom("q"), Formula::not(Formula::atom("q"))]), 1.0)
            .sentence("z", Formula::atom("q"), 1.0)
            .prior(vec![1.0, 0.0])
            .listener_prior(vec![rare, 1.0 - rare])
            .eot_cost(40.0)
            .build()?;
        let speaker = Speaker::new(&model, &SpeakerSpec::gricean())?;
        let mass = entailed_continuation_mass(&speaker, &SentenceSeq::new(vec![0]))?;
        println!("{info:>8} {mass:>14.3e}");
    }
    Ok(())
}
