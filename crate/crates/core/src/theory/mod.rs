//! Entailment test scores and the semantic quantities they estimate.
//!
//! The test score is
//!
//! ```text
//! score(x, y) = log p(xy) - log p(x$) - log p(yy) + log p(y$)
//! ```
//!
//! For a Gricean speaker it equals the semantic value
//!
//! ```text
//! E(x, y) = log  E_w[exp(i(xy | w)) g(x, w)] / E_w[exp(i(x | w)) g(x, w)]
//! g(x, w) = prod_{t=1..|x|+1} 1 / Z(x_<t, w)
//! ```
//!
//! which is 0 whenever `x` entails `y`. Context-dependent costs shift the
//! score by `delta(x, y) - delta(y, y)`; noisy comprehension is washed out by
//! repeating the premise.

pub mod fixtures;
pub mod sweeps;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::roc_auc;
use crate::math::{log_sum_exp, ls_slope};
use crate::scoring::{ExactProvider, LogProbProvider, TestVariant};
use crate::semantics::{entails, sequence_info, SentenceSeq, Token, WorldModel};
use crate::speakers::{Speaker, SpeakerFamily, SpeakerSpec};

/// The four log-probabilities behind one test score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestScoreBreakdown {
    pub lp_xy: f64,
    pub lp_xeot: f64,
    pub lp_yy: f64,
    pub lp_yeot: f64,
    pub score: f64,
    pub n_repetitions: usize,
}

impl TestScoreBreakdown {
    pub fn from_features(features: [f64; 4], n_repetitions: usize) -> Result<Self> {
        const NAMES: [&str; 4] = ["lp_xy", "lp_xeot", "lp_yy", "lp_yeot"];
        for (v, name) in features.iter().zip(NAMES) {
            if !v.is_finite() {
                return Err(Error::DegenerateProbability { term: name });
            }
        }
        let [lp_xy, lp_xeot, lp_yy, lp_yeot] = features;
        Ok(TestScoreBreakdown {
            lp_xy,
            lp_xeot,
            lp_yy,
            lp_yeot,
            score: lp_xy - lp_xeot - lp_yy + lp_yeot,
            n_repetitions,
        })
    }

    pub fn features(&self) -> [f64; 4] {
        [self.lp_xy, self.lp_xeot, self.lp_yy, self.lp_yeot]
    }
}

/// Scores `(x, y)` under any test variant.
pub fn variant_score<P: LogProbProvider + ?Sized>(
    provider: &P,
    x: &str,
    y: &str,
    variant: TestVariant,
) -> Result<TestScoreBreakdown> {
    let discourses = variant.discourses(x, y)?;
    let lps = provider.logprob_batch(&discourses)?;
    TestScoreBreakdown::from_features([lps[0], lps[1], lps[2], lps[3]], variant.repetitions())
}

/// `log p(xy) - log p(x$) - log p(yy) + log p(y$)`.
pub fn entailment_score<P: LogProbProvider + ?Sized>(
    provider: &P,
    x: &str,
    y: &str,
) -> Result<TestScoreBreakdown> {
    variant_score(provider, x, y, TestVariant::Original)
}

/// `log p(x^n y) - log p(x^n $) - log p(y^(n+1)) + log p(y^n $)`.
pub fn repeated_entailment_score<P: LogProbProvider + ?Sized>(
    provider: &P,
    x: &str,
    y: &str,
    n: usize,
) -> Result<TestScoreBreakdown> {
    variant_score(provider, x, y, TestVariant::Repeated(n))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemanticValue {
    pub value: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub log_numerator: f64,
    pub log_denominator: f64,
    /// `(world, log g(x, w))` for every supported world consistent with `x`.
    pub log_g: Vec<(usize, f64)>,
}

/// `E(x, y)` by enumeration over the speaker prior's support.
pub fn semantic_value(
    model: &WorldModel,
    spec: &SpeakerSpec,
    x: &SentenceSeq,
    y: usize,
) -> Result<SemanticValue> {
    if matches!(spec.family, SpeakerFamily::NoiseTolerant { .. }) {
        return Err(Error::InvalidSpeaker(
            "the semantic value is defined for Gricean and explanatory speakers".into(),
        ));
    }
    if x.terminated {
        return Err(Error::Terminated);
    }
    let speaker = Speaker::new(model, spec)?;
    let n = model.lexicon().len();
    if let Some(&bad) = x.items.iter().chain(std::iter::once(&y)).find(|&&s| s >= n) {
        return Err(Error::UnknownSentence(format!("#{bad}")));
    }
    let weights = (0..=x.len())
        .map(|t| speaker.candidate_weights(&x.items[..t]))
        .collect::<Result<Vec<_>>>()?;
    let sx = model.consistent_set(&x.items);
    let mut xy = x.items.clone();
    xy.push(y);
    let sxy = model.consistent_set(&xy);
    let mut log_g = Vec::new();
    let mut num_terms = Vec::new();
    let mut den_terms = Vec::new();
    for w in model.support().iter().filter(|&w| sx.contains(w)) {
        let lg: f64 = -weights
            .iter()
            .map(|wt| speaker.log_normalizer(wt, w))
            .sum::<f64>();
        let lp = model.prior()[w].ln();
        log_g.push((w, lg));
        den_terms.push(lp + sequence_info(model, &x.items, w) + lg);
        if sxy.contains(w) {
            num_terms.push(lp + sequence_info(model, &xy, w) + lg);
        }
    }
    if den_terms.is_empty() {
        return Err(Error::UndefinedSemanticValue);
    }
    let log_numerator = log_sum_exp(num_terms);
    let log_denominator = log_sum_exp(den_terms);
    Ok(SemanticValue {
        value: log_numerator - log_denominator,
        numerator: log_numerator.exp(),
        denominator: log_denominator.exp(),
        log_numerator,
        log_denominator,
        log_g,
    })
}

/// `c(y) - c(y | x)`.
pub fn delta(speaker: &Speaker<'_>, x: &[usize], y: usize) -> f64 {
    speaker.delta(x, y)
}

/// Probability that the next sentence after `ctx` is entailed by `ctx`.
pub fn entailed_continuation_mass(speaker: &Speaker<'_>, ctx: &SentenceSeq) -> Result<f64> {
    let model = speaker.model();
    let live = model.consistent_set(&ctx.items);
    Ok(speaker
        .marginal_next(ctx)?
        .into_iter()
        .filter_map(|(t, p)| match t {
            Token::Sentence(y) if live.is_subset(&model.sentence(y).denotation) => Some(p),
            _ => None,
        })
        .sum())
}

/// `1 / exp(rate * chars)`: the most a Gricean speaker spends on a redundant
/// sentence when an alternative of `chars` characters carries `rate` nats each.
pub fn gricean_redundancy_bound(info_rate_nats_per_char: f64, min_sentence_chars: usize) -> f64 {
    (-info_rate_nats_per_char * min_sentence_chars as f64).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDeviation {
    pub x: String,
    pub y: String,
    pub score: f64,
    pub expected: f64,
    pub deviation: f64,
}

/// Outcome of checking an identity over all sentence pairs of one model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub check: String,
    pub tolerance: f64,
    pub pairs_checked: usize,
    /// Pairs where the score or the semantic value is undefined.
    pub pairs_skipped: usize,
    pub max_deviation: f64,
    pub offending: Vec<PairDeviation>,
    pub passed: bool,
}

fn score_defined(model: &WorldModel, x: usize, y: usize) -> bool {
    // p(xy) > 0 needs a supported world where both are true
    let sxy = model.consistent_set(&[x, y]);
    model.support().iter().any(|w| sxy.contains(w))
}

fn identity_sweep(
    check: &str,
    model: &WorldModel,
    spec: &SpeakerSpec,
    tolerance: f64,
    expected: impl Fn(&Speaker<'_>, usize, usize, f64) -> f64,
) -> Result<IdentityReport> {
    let provider = ExactProvider::new(model, spec)?;
    let n = model.lexicon().len();
    let mut report = IdentityReport {
        check: check.to_string(),
        tolerance,
        pairs_checked: 0,
        pairs_skipped: 0,
        max_deviation: 0.0,
        offending: Vec::new(),
        passed: true,
    };
    for x in 0..n {
        for y in 0..n {
            if !score_defined(model, x, y) {
                report.pairs_skipped += 1;
                continue;
            }
            let xs = &model.sentence(x).surface;
            let ys = &model.sentence(y).surface;
            let score = entailment_score(&provider, xs, ys)?.score;
            let e = semantic_value(model, spec, &SentenceSeq::new(vec![x]), y)?.value;
            let want = expected(provider.speaker(), x, y, e);
            let deviation = (score - want).abs();
            report.pairs_checked += 1;
            report.max_deviation = report.max_deviation.max(deviation);
            if !(deviation <= tolerance) {
                report.passed = false;
                report.offending.push(PairDeviation {
                    x: xs.clone(),
                    y: ys.clone(),
                    score,
                    expected: want,
                    deviation,
                });
            }
        }
    }
    Ok(report)
}

/// Checks `score(x, y) = E(x, y)` for a Gricean speaker on every pair.
pub fn verify_score_identity(model: &WorldModel, tolerance: f64) -> Result<IdentityReport> {
    identity_sweep(
        "score equals semantic value",
        model,
        &SpeakerSpec::gricean(),
        tolerance,
        |_, _, _, e| e,
    )
}

/// Checks `score(x, y) = E(x, y) + delta(x, y) - delta(y, y)` for an explanatory speaker.
pub fn verify_cost_identity(
    model: &WorldModel,
    spec: &SpeakerSpec,
    tolerance: f64,
) -> Result<IdentityReport> {
    if !matches!(spec.family, SpeakerFamily::Explanatory { .. }) {
        return Err(Error::InvalidSpeaker("expected an explanatory speaker".into()));
    }
    identity_sweep(
        "score equals semantic value plus cost shift",
        model,
        spec,
        tolerance,
        |s, x, y, e| e + s.delta(&[x], y) - s.delta(&[y], y),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayPair {
    pub x: String,
    pub y: String,
    pub semantic_value: f64,
    /// `|score_n - E(x, y)|` for `n = 1..=n_max`.
    pub errors: Vec<f64>,
    pub monotone: bool,
    /// Least-squares slope of `ln error` over `n = 2..=n_max`.
    pub log_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepetitionReport {
    pub noise: f64,
    pub n_max: usize,
    pub pairs: Vec<DecayPair>,
    /// Maximum error over pairs, per `n`.
    pub max_error_by_n: Vec<f64>,
    pub all_monotone: bool,
    pub max_log_slope: f64,
}

/// Repeated-test error against `E(x, y)` when the premise is missed with
/// probability `noise` and the hypothesis is always heard.
///
/// Pairs whose error at `n = 1` is below `min_initial_error` are left out of
/// the monotonicity and slope summaries (there is nothing to decay).
pub fn verify_repetition_decay(
    model: &WorldModel,
    noise: f64,
    n_max: usize,
    min_initial_error: f64,
) -> Result<RepetitionReport> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let n = model.lexicon().len();
    let mut pairs = Vec::new();
    let mut max_error_by_n = vec![0.0f64; n_max];
    for x in 0..n {
        for y in 0..n {
            if x == y || !score_defined(model, x, y) {
                continue;
            }
            let xs = model.sentence(x).surface.clone();
            let ys = model.sentence(y).surface.clone();
            let e = semantic_value(model, &SpeakerSpec::gricean(), &SentenceSeq::new(vec![x]), y)?
                .value;
            let spec = SpeakerSpec::noise_tolerant([(xs.clone(), noise)].into());
            let provider = ExactProvider::new(model, &spec)?;
            let errors = (1..=n_max)
                .map(|k| Ok((repeated_entailment_score(&provider, &xs, &ys, k)?.score - e).abs()))
                .collect::<Result<Vec<f64>>>()?;
            for (m, err) in max_error_by_n.iter_mut().zip(&errors) {
                *m = m.max(*err);
            }
            if errors[0] < min_initial_error {
                continue;
            }
            let monotone = errors.windows(2).all(|w| w[1] < w[0]);
            let points: Vec<(f64, f64)> = errors
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, err)| ((i + 1) as f64, err.ln()))
                .collect();
            pairs.push(DecayPair {
                x: xs,
                y: ys,
                semantic_value: e,
                errors,
                monotone,
                log_slope: ls_slope(&points),
            });
        }
    }
    Ok(RepetitionReport {
        noise,
        n_max,
        all_monotone: pairs.iter().all(|p| p.monotone),
        max_log_slope: pairs
            .iter()
            .map(|p| p.log_slope)
            .fold(f64::NEG_INFINITY, f64::max),
        pairs,
        max_error_by_n,
    })
}

/// With noiseless comprehension the repeated test recovers `E(x^n, y)`;
/// returns the largest deviation over pairs and `n = 1..=n_max`.
pub fn noiseless_repetition_deviation(model: &WorldModel, n_max: usize) -> Result<f64> {
    let spec = SpeakerSpec::uniform_noise(model, 0.0);
    let provider = ExactProvider::new(model, &spec)?;
    let n = model.lexicon().len();
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            if !score_defined(model, x, y) {
                continue;
            }
            let xs = &model.sentence(x).surface;
            let ys = &model.sentence(y).surface;
            for k in 1..=n_max {
                let score = repeated_entailment_score(&provider, xs, ys, k)?.score;
                let e = semantic_value(model, &SpeakerSpec::gricean(), &SentenceSeq::new(vec![x; k]), y)?
                    .value;
                worst = worst.max((score - e).abs());
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredPair {
    pub x: String,
    pub y: String,
    pub entailed: bool,
    pub score: f64,
    /// Speaker prior mass of worlds where both `x` and `y` hold.
    pub joint_mass: f64,
    pub near_contradiction: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationReport {
    pub n_entailed: usize,
    pub n_non_entailed: usize,
    /// Pairs with no supported world making both sentences true.
    pub n_contradictory: usize,
    /// ROC-AUC of `-score` with entailment positive.
    pub auc: f64,
    pub flipped_auc: f64,
    pub near_contradiction_threshold: f64,
    /// Non-entailed pairs scoring at or below `tolerance` (ranked as entailed).
    pub violations: Vec<ScoredPair>,
    pub all_violations_near_contradictions: bool,
    /// Non-entailed pairs below the joint-mass threshold, violating or not.
    pub near_contradictions: Vec<ScoredPair>,
}

/// Scores every sentence pair exactly and checks that non-entailed pairs score
/// above entailed ones, listing near-contradictions separately.
pub fn separation_report(
    model: &WorldModel,
    spec: &SpeakerSpec,
    threshold: f64,
    tolerance: f64,
) -> Result<SeparationReport> {
    let provider = ExactProvider::new(model, spec)?;
    let n = model.lexicon().len();
    let mut scored = Vec::new();
    let mut n_contradictory = 0;
    for x in 0..n {
        for y in 0..n {
            if !score_defined(model, x, y) {
                n_contradictory += 1;
                continue;
            }
            let xs = &model.sentence(x).surface;
            let ys = &model.sentence(y).surface;
            let score = entailment_score(&provider, xs, ys)?.score;
            let joint_mass = model.prior_mass(&model.consistent_set(&[x, y]));
            let entailed = entails(model, &SentenceSeq::new(vec![x]), y)?;
            scored.push(ScoredPair {
                x: xs.clone(),
                y: ys.clone(),
                entailed,
                score,
                joint_mass,
                near_contradiction: !entailed && joint_mass < threshold,
            });
        }
    }
    let labelled: Vec<(f64, bool)> = scored.iter().map(|p| (-p.score, p.entailed)).collect();
    let (auc, flipped_auc) = match roc_auc(&labelled) {
        Ok(curve) => (curve.auc, 100.0 - curve.auc),
        Err(_) => (f64::NAN, f64::NAN),
    };
    let violations: Vec<ScoredPair> = scored
        .iter()
        .filter(|p| !p.entailed && p.score <= tolerance)
        .cloned()
        .collect();
    Ok(SeparationReport {
        n_entailed: scored.iter().filter(|p| p.entailed).count(),
        n_non_entailed: scored.iter().filter(|p| !p.entailed).count(),
        n_contradictory,
        auc,
        flipped_auc,
        near_contradiction_threshold: threshold,
        all_violations_near_contradictions: violations.iter().all(|p| p.near_contradiction),
        violations,
        near_contradictions: scored.into_iter().filter(|p| p.near_contradiction).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::Formula;

    fn two_props() -> WorldModel {
        WorldModel::builder(&["p", "q"])
            .sentence("p", Formula::atom("p"), 1.0)
            .sentence("q", Formula::atom("q"), 1.0)
            .sentence("p and q", Formula::and([Formula::atom("p"), Formula::atom("q")]), 2.0)
            .sentence("p or q", Formula::or([Formula::atom("p"), Formula::atom("q")]), 1.5)
            .eot_cost(1.0)
            .build()
            .unwrap()
    }

    #[test]
    fn identical_sentences_score_zero() {
        let m = two_props();
        let provider = ExactProvider::new(&m, &SpeakerSpec::gricean()).unwrap();
        let b = entailment_score(&provider, "p", "p").unwrap();
        assert_eq!(b.score, 0.0);
        assert_eq!(b.n_repetitions, 1);
    }

    #[test]
    fn entailed_value_is_zero() {
        let m = two_props();
        let spec = SpeakerSpec::gricean();
        // "p and q" entails "p" and "p or q"
        for y in [0, 1, 3] {
            let e = semantic_value(&m, &spec, &SentenceSeq::new(vec![2]), y).unwrap();
            assert_eq!(e.value, 0.0);
        }
        let e = semantic_value(&m, &spec, &SentenceSeq::new(vec![0]), 0).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn point_mass_value_is_conditional_information() {
        // speaker certain of world pq: E(p, q) = i(q | p) = ln 2
        let m = WorldModel::builder(&["p", "q"])
            .sentence("p", Formula::atom("p"), 1.0)
            .sentence("q", Formula::atom("q"), 1.0)
            .prior(vec![1.0, 0.0, 0.0, 0.0])
            .build()
            .unwrap();
        let e = semantic_value(&m, &SpeakerSpec::gricean(), &SentenceSeq::new(vec![0]), 1).unwrap();
        assert!((e.value - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn noise_tolerant_spec_rejected() {
        let m = two_props();
        let spec = SpeakerSpec::uniform_noise(&m, 0.1);
        assert!(semantic_value(&m, &spec, &SentenceSeq::new(vec![0]), 1).is_err());
    }

    #[test]
    fn undefined_when_premise_impossible() {
        let m = WorldModel::builder(&["p"])
            .sentence("p", Formula::atom("p"), 1.0)
            .sentence("not p", Formula::not(Formula::atom("p")), 1.0)
            .prior(vec![1.0, 0.0])
            .build()
            .unwrap();
        assert!(matches!(
            semantic_value(&m, &SpeakerSpec::gricean(), &SentenceSeq::new(vec![1]), 0),
            Err(Error::UndefinedSemanticValue)
        ));
    }

    #[test]
    fn degenerate_features_rejected() {
        let m = WorldModel::builder(&["p"])
            .sentence("p", Formula::atom("p"), 1.0)
            .sentence("not p", Formula::not(Formula::atom("p")), 1.0)
            .build()
            .unwrap();
        let provider = ExactProvider::new(&m, &SpeakerSpec::gricean()).unwrap();
        assert!(matches!(
            entailment_score(&provider, "p", "not p"),
            Err(Error::DegenerateProbability { term: "lp_xy" })
        ));
    }

    #[test]
    fn redundancy_bound_values() {
        assert_eq!(gricean_redundancy_bound(0.0, 30), 1.0);
        assert!((gricean_redundancy_bound(0.4, 30) - (-12f64).exp()).abs() < 1e-18);
        assert!((gricean_redundancy_bound(1.0 / 3.0, 30) - (-10f64).exp()).abs() < 1e-17);
    }

    #[test]
    fn repeated_once_is_original() {
        let m = two_props();
        let provider = ExactProvider::new(&m, &SpeakerSpec::gricean()).unwrap();
        let a = entailment_score(&provider, "p", "q").unwrap();
        let b = repeated_entailment_score(&provider, "p", "q", 1).unwrap();
        assert_eq!(a.features(), b.features());
    }

    #[test]
    fn identity_holds_on_small_model() {
        let r = verify_score_identity(&two_props(), 1e-9).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.pairs_checked + r.pairs_skipped, 16);
    }
}
