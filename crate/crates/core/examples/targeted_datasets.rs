//! Generates the five templated entailment datasets, checks every label
//! against the world-model oracle and prints a couple of instances each.
//!
//! ```text
//! cargo run --example targeted_datasets [WORDLIST_DIR]
//! ```

use std::path::PathBuf;

use pel::datasets::{gen_targeted, oracle_label, Phenomenon, Wordlists};

fn main() -> pel::Result<()> {
    let lists = match std::env::args().nth(1) {
        Some(dir) => Wordlists::from_dir(&PathBuf::from(dir))?,
        None => Wordlists::default(),
    };
    for p in Phenomenon::TARGETED {
        let instances = gen_targeted(p, &lists)?;
        let entailed = instances.iter().filter(|i| i.label.is_entailment()).count();
        let mismatches = instances
            .iter()
            .map(|i| oracle_label(i).map(|l| l != i.label))
            .collect::<pel::Result<Vec<_>>>()?
            .into_iter()
            .filter(|&m| m)
            .count();
        println!(
            "{:<12} {:>5} instances, {:>5} entailed, {} oracle mismatches",
            p.name(),
            instances.len(),
            entailed,
            mismatches
        );
        for inst in instances.iter().take(2) {
            println!("    {:?} => {:?}: {:?}", inst.premise, inst.hypothesis, inst.label);
        }
    }
    Ok(())
}
