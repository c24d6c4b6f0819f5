use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EntailmentInstance, Label, Phenomenon};
use crate::error::{Error, Result};
use crate::semantics::{Formula, WorldModel};

/// A target fact `person lives in city` whose consequence is `person lives in country`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasePair {
    pub person: String,
    pub city: String,
    pub country: String,
}

/// People and `(city, country)` pairs the distractor facts draw from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistractorLists {
    pub people: Vec<String>,
    pub cities: Vec<(String, String)>,
}

impl Default for DistractorLists {
    fn default() -> Self {
        let names: Vec<String> = include_str!("../../data/names.txt")
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect();
        let cities = include_str!("../../data/cities.txt")
            .lines()
            .filter_map(|l| l.split_once('|'))
            .map(|(c, k)| (c.trim().to_string(), k.trim().to_string()))
            .collect();
        // Olivia first so the canonical example is the first base pair
        let mut people: Vec<String> = names.into_iter().take(4).collect();
        people.swap(0, 1);
        DistractorLists { people, cities }
    }
}

impl DistractorLists {
    /// Every person paired with every city.
    pub fn base_pairs(&self) -> Vec<BasePair> {
        self.people
            .iter()
            .flat_map(|p| {
                self.cities.iter().map(move |(c, k)| BasePair {
                    person: p.clone(),
                    city: c.clone(),
                    country: k.clone(),
                })
            })
            .collect()
    }
}

fn lives(person: &str, place: &str) -> String {
    format!("{person} lives in {place}.")
}

/// For each base pair and `k = 0..=max_distractors`, the target fact followed
/// by `k` facts about other people. All instances are entailments.
pub fn gen_distractors(
    base_pairs: &[BasePair],
    lists: &DistractorLists,
    max_distractors: usize,
    seed: u64,
) -> Result<Vec<EntailmentInstance>> {
    if lists.cities.is_empty() {
        return Err(Error::InvalidArgument("no cities for distractor facts".into()));
    }
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for base in base_pairs {
        let mut others: Vec<&String> = lists.people.iter().filter(|p| **p != base.person).collect();
        if others.len() < max_distractors {
            return Err(Error::InvalidArgument(format!(
                "{} distractors need {} other people, have {}",
                max_distractors,
                max_distractors,
                others.len()
            )));
        }
        others.shuffle(&mut rng);
        let facts: Vec<String> = others[..max_distractors]
            .iter()
            .map(|p| {
                let (city, _) = lists.cities.choose(&mut rng).expect("cities non-empty");
                lives(p, city)
            })
            .collect();
        for k in 0..=max_distractors {
            let mut premise = lives(&base.person, &base.city);
            for f in &facts[..k] {
                premise.push(' ');
                premise.push_str(f);
            }
            out.push(
                EntailmentInstance::new(
                    &premise,
                    &lives(&base.person, &base.country),
                    Label::Entailment,
                    Phenomenon::Distractors,
                )
                .with_meta("distractor_count", k)
                .with_meta("person", base.person.as_str())
                .with_meta("city", base.city.as_str())
                .with_meta("country", base.country.as_str()),
            );
        }
    }
    Ok(out)
}

/// World model where each person lives in exactly one city. Its lexicon has
/// `P lives in C.` for every person and every city or country, so exact
/// providers can score distractor premises sentence by sentence.
pub fn distractor_world_model(lists: &DistractorLists) -> Result<WorldModel> {
    let people = &lists.people;
    let cities = &lists.cities;
    if people.is_empty() || cities.is_empty() {
        return Err(Error::InvalidArgument("need people and cities".into()));
    }
    let n_worlds = cities
        .len()
        .checked_pow(people.len() as u32)
        .filter(|&n| n <= 1 << 16)
        .ok_or_else(|| Error::InvalidArgument("too many people and cities for enumeration".into()))?;
    let props: Vec<String> = people
        .iter()
        .flat_map(|p| cities.iter().map(move |(c, _)| format!("{p}@{c}")))
        .collect();
    let prop_refs: Vec<&str> = props.iter().map(String::as_str).collect();
    let worlds: Vec<Vec<bool>> = (0..n_worlds)
        .map(|mut code| {
            let mut w = vec![false; props.len()];
            for i in 0..people.len() {
                w[i * cities.len() + code % cities.len()] = true;
                code /= cities.len();
            }
            w
        })
        .collect();
    let mut builder = WorldModel::builder_with_worlds(&prop_refs, worlds);
    let mut countries: Vec<&String> = Vec::new();
    for (_, k) in cities {
        if !countries.contains(&k) {
            countries.push(k);
        }
    }
    for p in people {
        for (c, _) in cities {
            builder = builder.sentence(&lives(p, c), Formula::atom(&format!("{p}@{c}")), 1.0);
        }
        for k in &countries {
            let in_country = cities
                .iter()
                .filter(|(_, kk)| kk == *k)
                .map(|(c, _)| Formula::atom(&format!("{p}@{c}")));
            builder = builder.sentence(&lives(p, k), Formula::or(in_country), 1.0);
        }
    }
    builder.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::{entails, SentenceSeq};

    #[test]
    fn canonical_example() {
        let lists = DistractorLists::default();
        let bases = lists.base_pairs();
        assert_eq!(bases[0].person, "Olivia");
        assert_eq!(bases[0].city, "Paris");
        let d = gen_distractors(&bases[..1], &lists, 2, 0).unwrap();
        assert_eq!(d[0].premise, "Olivia lives in Paris.");
        assert_eq!(d[0].hypothesis, "Olivia lives in France.");
        assert_eq!(d[0].meta["distractor_count"], 0);
        assert!(d[1].premise.starts_with("Olivia lives in Paris. "));
        assert_eq!(d[2].meta["distractor_count"], 2);
        assert!(d.iter().all(|i| i.label == Label::Entailment));
        assert_eq!(gen_distractors(&bases[..1], &lists, 2, 0).unwrap(), d);
    }

    #[test]
    fn compiled_model_entails_country() {
        let lists = DistractorLists {
            people: vec!["Olivia".into(), "James".into()],
            cities: vec![
                ("Paris".into(), "France".into()),
                ("Tokyo".into(), "Japan".into()),
            ],
        };
        let m = distractor_world_model(&lists).unwrap();
        assert_eq!(m.n_worlds(), 4);
        let x = m.index_of("Olivia lives in Paris.").unwrap();
        let y = m.index_of("Olivia lives in France.").unwrap();
        let z = m.index_of("James lives in Japan.").unwrap();
        assert!(entails(&m, &SentenceSeq::new(vec![x]), y).unwrap());
        assert!(!entails(&m, &SentenceSeq::new(vec![x]), z).unwrap());
    }

    #[test]
    fn too_few_people() {
        let lists = DistractorLists::default();
        assert!(gen_distractors(&lists.base_pairs()[..1], &lists, 9, 0).is_err());
    }
}
