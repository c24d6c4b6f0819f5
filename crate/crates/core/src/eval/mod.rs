//! Metrics over scored instances: ROC-AUC in both orientations, length
//! baselines, the learned linear test and distractor trends.
//!
//! Entailment is the positive class throughout. The original test predicts
//! entailment when the score is near zero rather than large, so its
//! detection statistic is the negated score; the flipped test uses the score
//! itself.

mod learned;
pub mod plots;
mod roc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use learned::{
    fit_learned_test, stratified_split, FitOptions, LearnedFit, Provenance, TestCoefficients,
};
pub use roc::{auc_from_2u, flipped_roc_auc, mann_whitney_2u, roc_auc, RocCurve};

use crate::datasets::{world_pairs, EntailmentInstance};
use crate::estimation::fit_for_model;
use crate::error::{Error, Result};
use crate::math::ls_slope;
use crate::scoring::{LogProbProvider, NgramProvider, TestVariant};
use crate::semantics::SentenceSeq;
use crate::speakers::Speaker;
use crate::theory::TestScoreBreakdown;

/// Which statistic is read as "more entailed".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Lower scores mean entailment.
    Original,
    /// Higher scores mean entailment.
    Flipped,
}

impl Orientation {
    pub fn detection(self, score: f64) -> f64 {
        match self {
            Orientation::Original => -score,
            Orientation::Flipped => score,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredInstance {
    #[serde(flatten)]
    pub instance: EntailmentInstance,
    pub features: TestScoreBreakdown,
}

/// Scores all instances with one batched provider call, in input order.
pub fn score_instances<P: LogProbProvider + ?Sized>(
    provider: &P,
    instances: &[EntailmentInstance],
    variant: TestVariant,
) -> Result<Vec<ScoredInstance>> {
    let mut discourses = Vec::with_capacity(4 * instances.len());
    for inst in instances {
        discourses.extend(variant.discourses(&inst.premise, &inst.hypothesis)?);
    }
    let lps = provider.logprob_batch(&discourses)?;
    instances
        .iter()
        .zip(lps.chunks(4))
        .map(|(inst, lp)| {
            Ok(ScoredInstance {
                instance: inst.clone(),
                features: TestScoreBreakdown::from_features(
                    [lp[0], lp[1], lp[2], lp[3]],
                    variant.repetitions(),
                )?,
            })
        })
        .collect()
}

/// Best flipped ROC-AUC among premise length, hypothesis length and their
/// inverses (in characters).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthBaseline {
    pub flipped_auc: f64,
    pub candidate: String,
}

pub fn length_baseline(instances: &[EntailmentInstance]) -> Result<LengthBaseline> {
    let len = |s: &str| s.chars().count() as f64;
    let candidates: [(&str, Box<dyn Fn(&EntailmentInstance) -> f64>); 4] = [
        ("premise_length", Box::new(move |i| len(&i.premise))),
        ("hypothesis_length", Box::new(move |i| len(&i.hypothesis))),
        ("inverse_premise_length", Box::new(move |i| 1.0 / len(&i.premise))),
        ("inverse_hypothesis_length", Box::new(move |i| 1.0 / len(&i.hypothesis))),
    ];
    let mut best: Option<LengthBaseline> = None;
    for (name, f) in candidates {
        let scores: Vec<(f64, bool)> = instances
            .iter()
            .map(|i| (f(i), i.label.is_entailment()))
            .collect();
        let auc = flipped_roc_auc(&scores)?;
        if best.as_ref().is_none_or(|b| auc > b.flipped_auc) {
            best = Some(LengthBaseline {
                flipped_auc: auc,
                candidate: name.to_string(),
            });
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("no instances".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMeans {
    pub entailed: f64,
    pub non_entailed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub test: String,
    pub orientation: Orientation,
    /// ROC-AUC of the chosen test.
    pub auc: f64,
    /// ROC-AUC of the chosen test's negation.
    pub flipped_auc: f64,
    pub roc_points: Vec<(f64, f64)>,
    pub n_pos: usize,
    pub n_neg: usize,
    pub baseline_flipped_auc: f64,
    pub baseline_candidate: String,
    pub score_means: ClassMeans,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<TestCoefficients>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learned: Option<LearnedFit>,
    pub warnings: Vec<String>,
    pub config: Value,
}

/// ROC and baseline summary of scored instances under one orientation.
pub fn evaluate(
    scored: &[ScoredInstance],
    test: &str,
    orientation: Orientation,
    config: Value,
) -> Result<EvalReport> {
    let stats: Vec<(f64, bool)> = scored
        .iter()
        .map(|s| {
            (
                orientation.detection(s.features.score),
                s.instance.label.is_entailment(),
            )
        })
        .collect();
    let curve = roc_auc(&stats)?;
    let flipped = flipped_roc_auc(&stats)?;
    let instances: Vec<EntailmentInstance> = scored.iter().map(|s| s.instance.clone()).collect();
    let baseline = length_baseline(&instances)?;
    let mean = |want: bool| -> f64 {
        let v: Vec<f64> = scored
            .iter()
            .filter(|s| s.instance.label.is_entailment() == want)
            .map(|s| s.features.score)
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    Ok(EvalReport {
        test: test.to_string(),
        orientation,
        auc: curve.auc,
        flipped_auc: flipped,
        roc_points: curve.points,
        n_pos: curve.n_pos,
        n_neg: curve.n_neg,
        baseline_flipped_auc: baseline.flipped_auc,
        baseline_candidate: baseline.candidate,
        score_means: ClassMeans {
            entailed: mean(true),
            non_entailed: mean(false),
        },
        coefficients: Some(match orientation {
            Orientation::Original => TestCoefficients::theoretical(),
            Orientation::Flipped => TestCoefficients::flipped(),
        }),
        learned: None,
        warnings: Vec::new(),
        config,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub distractor_count: u64,
    pub mean_score: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistractorTrend {
    pub points: Vec<TrendPoint>,
    /// Least-squares slope of the per-`k` means over `k`.
    pub slope: f64,
}

/// Groups `(k, score)` pairs by `k` and fits a line through the means.
pub fn trend_from_scores(scores: &[(u64, f64)]) -> DistractorTrend {
    let mut groups: std::collections::BTreeMap<u64, Vec<f64>> = Default::default();
    for &(k, s) in scores {
        groups.entry(k).or_default().push(s);
    }
    let points: Vec<TrendPoint> = groups
        .into_iter()
        .map(|(k, v)| TrendPoint {
            distractor_count: k,
            mean_score: v.iter().sum::<f64>() / v.len() as f64,
            n: v.len(),
        })
        .collect();
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p.distractor_count as f64, p.mean_score))
        .collect();
    DistractorTrend {
        slope: ls_slope(&xy),
        points,
    }
}

/// Mean unflipped score per distractor count.
pub fn distractor_trend<P: LogProbProvider + ?Sized>(
    instances: &[EntailmentInstance],
    provider: &P,
) -> Result<DistractorTrend> {
    let scored = score_instances(provider, instances, TestVariant::Original)?;
    let pairs = scored
        .iter()
        .map(|s| {
            let k = s
                .instance
                .meta
                .get("distractor_count")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::InvalidArgument("instance lacks meta.distractor_count".into()))?;
            Ok((k, s.features.score))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(trend_from_scores(&pairs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnabilityPoint {
    pub corpus_size: usize,
    /// ROC-AUC of the unflipped test on estimated probabilities.
    pub auc: f64,
}

/// Fits an n-gram on corpora of increasing size sampled from `speaker` and
/// scores every jointly possible sentence pair of its model with it.
pub fn learnability_curve(
    speaker: &Speaker<'_>,
    sizes: &[usize],
    seed: u64,
    order: usize,
    smoothing_lambda: f64,
    max_len: usize,
) -> Result<Vec<LearnabilityPoint>> {
    let model = speaker.model();
    let pairs = world_pairs(model)?;
    sizes
        .iter()
        .map(|&n| {
            let corpus: Vec<SentenceSeq> = speaker
                .sample_corpus(n, seed, max_len)?
                .into_iter()
                .map(|t| t.seq)
                .collect();
            let provider = NgramProvider::new(fit_for_model(model, &corpus, order, smoothing_lambda)?);
            let scored = score_instances(&provider, &pairs, TestVariant::Original)?;
            let report = evaluate(&scored, "original", Orientation::Original, Value::Null)?;
            Ok(LearnabilityPoint {
                corpus_size: n,
                auc: report.auc,
            })
        })
        .collect()
}
