//! Estimates sentence co-occurrence probabilities with a bigram model from
//! growing samples of a Gricean speaker and tracks how well the entailment
//! test separates entailed from non-entailed pairs on the estimates.
//!
//! ```text
//! cargo run --release --example learnability_curve -- 3
//! ```

use pel::estimation::DEFAULT_LAMBDA;
use pel::eval::learnability_curve;
use pel::speakers::{Speaker, SpeakerSpec};
use pel::theory::fixtures::two_fact_model;

fn main() -> pel::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("seed must be an integer"))
        .unwrap_or(0);
    let model = two_fact_model();
    let speaker = Speaker::new(&model, &SpeakerSpec::gricean())?;
    let sizes = [100, 1_000, 10_000, 100_000];
    let curve = learnability_curve(&speaker, &sizes, seed, 2, DEFAULT_LAMBDA, 32)?;
    println!("{:>10}  {:>7}", "texts", "auc");
    for p in &curve {
        println!("{:>10}  {:>7.2}", p.corpus_size, p.auc);
    }
    Ok(())
}
