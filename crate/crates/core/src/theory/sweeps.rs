//! Seeded sweeps over random world models that check the score identities,
//! repetition decay and separation in bulk.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fixtures::{random_cost_table, random_model, PriorShape, RandomModelSpec};
use super::{
    noiseless_repetition_deviation, separation_report, verify_cost_identity,
    verify_repetition_decay, verify_score_identity, ScoredPair,
};
use crate::error::Result;
use crate::speakers::SpeakerSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Models per identity sweep.
    pub n_models: usize,
    pub tolerance: f64,
    pub max_props: usize,
    pub max_sentences: usize,
    pub noise_levels: Vec<f64>,
    /// Longest premise repetition in the decay check.
    pub n_max: usize,
    /// Allowed excess of the log-error slope over `ln(noise)`.
    pub slope_margin: f64,
    pub repetition_models: usize,
    /// Pairs with a smaller error at one repetition have nothing to decay.
    pub min_initial_error: f64,
    pub separation_models: usize,
    /// Prior mass off the anchor world in the separation fixtures.
    pub separation_spread: f64,
    /// Joint prior mass below which a non-entailed pair is a near-contradiction.
    pub near_contradiction_threshold: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            n_models: 50,
            tolerance: 1e-9,
            max_props: 4,
            max_sentences: 16,
            noise_levels: vec![0.2, 0.3, 0.5],
            n_max: 6,
            slope_margin: 0.2,
            repetition_models: 20,
            min_initial_error: 1e-6,
            separation_models: 50,
            separation_spread: 1e-4,
            near_contradiction_threshold: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentitySweep {
    pub models: usize,
    pub pairs_checked: usize,
    pub pairs_skipped: usize,
    pub max_deviation: f64,
    pub failing_models: Vec<usize>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecaySweep {
    pub noise: f64,
    pub bound: f64,
    pub pairs: usize,
    pub all_monotone: bool,
    pub max_log_slope: f64,
    /// Worst error per repetition count across all fixtures.
    pub max_error_by_n: Vec<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepetitionSweep {
    pub models: usize,
    pub by_noise: Vec<DecaySweep>,
    /// `max |score_n - E(x^n, y)|` without noise, over all fixtures and `n`.
    pub noiseless_max_deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelViolations {
    pub model: usize,
    pub violations: Vec<ScoredPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationSweep {
    pub models: usize,
    /// Lowest AUC over screened fixtures.
    pub screened_min_auc: f64,
    pub screened_max_flipped_auc: f64,
    pub screened_passed: bool,
    pub unscreened_pairs: usize,
    pub unscreened_violation_count: usize,
    pub unscreened_violations: Vec<ModelViolations>,
    pub unscreened_all_near_contradictions: bool,
    pub passed: bool,
}

/// Informational only: diffuse priors break separation well beyond
/// near-contradictions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffuseFindings {
    pub models: usize,
    pub non_entailed_pairs: usize,
    pub violations: usize,
    pub near_contradiction_violations: usize,
    pub mean_auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub options: VerifyOptions,
    pub score_identity: IdentitySweep,
    pub cost_identity: IdentitySweep,
    pub repetition: RepetitionSweep,
    pub separation: SeparationSweep,
    pub diffuse: DiffuseFindings,
    pub passed: bool,
}

impl VerificationReport {
    /// One line per check.
    pub fn summary(&self) -> String {
        let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
        let mut out = String::new();
        let id = &self.score_identity;
        out.push_str(&format!(
            "{} score identity: {} models, {} pairs, max deviation {:.3e}\n",
            verdict(id.passed),
            id.models,
            id.pairs_checked,
            id.max_deviation
        ));
        let id = &self.cost_identity;
        out.push_str(&format!(
            "{} cost identity: {} models, {} pairs, max deviation {:.3e}\n",
            verdict(id.passed),
            id.models,
            id.pairs_checked,
            id.max_deviation
        ));
        for d in &self.repetition.by_noise {
            out.push_str(&format!(
                "{} repetition decay at noise {}: {} pairs, monotone {}, max log slope {:.4} (bound {:.4})\n",
                verdict(d.passed),
                d.noise,
                d.pairs,
                d.all_monotone,
                d.max_log_slope,
                d.bound
            ));
        }
        out.push_str(&format!(
            "{} noiseless repetition: max deviation {:.3e}\n",
            verdict(self.repetition.noiseless_max_deviation <= self.options.tolerance),
            self.repetition.noiseless_max_deviation
        ));
        let s = &self.separation;
        out.push_str(&format!(
            "{} separation (screened): min auc {}, max flipped auc {}\n",
            verdict(s.screened_passed),
            s.screened_min_auc,
            s.screened_max_flipped_auc
        ));
        out.push_str(&format!(
            "{} separation (unscreened): {} violations among {} pairs, all near-contradictions {}\n",
            verdict(s.unscreened_all_near_contradictions),
            s.unscreened_violation_count,
            s.unscreened_pairs,
            s.unscreened_all_near_contradictions
        ));
        let d = &self.diffuse;
        out.push_str(&format!(
            "INFO diffuse priors: {} violations among {} non-entailed pairs, {} near-contradictions, mean auc {:.2}\n",
            d.violations, d.non_entailed_pairs, d.near_contradiction_violations, d.mean_auc
        ));
        out
    }
}

fn sweep_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn model_spec(opts: &VerifyOptions) -> RandomModelSpec {
    RandomModelSpec {
        max_props: opts.max_props,
        max_sentences: opts.max_sentences,
        ..RandomModelSpec::default()
    }
}

fn fold_identity(
    reports: impl Iterator<Item = Result<super::IdentityReport>>,
) -> Result<IdentitySweep> {
    let mut sweep = IdentitySweep {
        models: 0,
        pairs_checked: 0,
        pairs_skipped: 0,
        max_deviation: 0.0,
        failing_models: Vec::new(),
        passed: true,
    };
    for (i, r) in reports.enumerate() {
        let r = r?;
        sweep.models += 1;
        sweep.pairs_checked += r.pairs_checked;
        sweep.pairs_skipped += r.pairs_skipped;
        sweep.max_deviation = sweep.max_deviation.max(r.max_deviation);
        if !r.passed {
            sweep.failing_models.push(i);
            sweep.passed = false;
        }
    }
    Ok(sweep)
}

/// Score identity on Gricean models with diffuse priors.
pub fn score_identity_sweep(opts: &VerifyOptions) -> Result<IdentitySweep> {
    let spec = model_spec(opts);
    let mut rng = sweep_rng(opts.seed, 1);
    fold_identity((0..opts.n_models).map(|_| {
        let m = random_model(&mut rng, &spec, PriorShape::Diffuse, false);
        verify_score_identity(&m, opts.tolerance)
    }))
}

/// Cost identity with random context-dependent cost tables (constant `$` cost).
pub fn cost_identity_sweep(opts: &VerifyOptions) -> Result<IdentitySweep> {
    let spec = model_spec(opts);
    let mut rng = sweep_rng(opts.seed, 2);
    fold_identity((0..opts.n_models).map(|_| {
        let m = random_model(&mut rng, &spec, PriorShape::Diffuse, false);
        let speaker = random_cost_table(&mut rng, &m, spec.max_cost);
        verify_cost_identity(&m, &speaker, opts.tolerance)
    }))
}

/// Repetition decay on belief-certain fixtures: all mass on one world where
/// every sentence holds.
pub fn repetition_sweep(opts: &VerifyOptions) -> Result<RepetitionSweep> {
    let spec = model_spec(opts);
    let mut rng = sweep_rng(opts.seed, 3);
    let models: Vec<_> = (0..opts.repetition_models)
        .map(|_| random_model(&mut rng, &spec, PriorShape::PointMass, true))
        .collect();
    let mut by_noise = Vec::new();
    for &noise in &opts.noise_levels {
        let bound = noise.ln() + opts.slope_margin;
        let mut d = DecaySweep {
            noise,
            bound,
            pairs: 0,
            all_monotone: true,
            max_log_slope: f64::NEG_INFINITY,
            max_error_by_n: vec![0.0; opts.n_max],
            passed: true,
        };
        for m in &models {
            let r = verify_repetition_decay(m, noise, opts.n_max, opts.min_initial_error)?;
            d.pairs += r.pairs.len();
            d.all_monotone &= r.all_monotone;
            d.max_log_slope = d.max_log_slope.max(r.max_log_slope);
            for (a, b) in d.max_error_by_n.iter_mut().zip(&r.max_error_by_n) {
                *a = a.max(*b);
            }
        }
        d.passed = d.pairs > 0 && d.all_monotone && d.max_log_slope <= bound;
        by_noise.push(d);
    }
    let mut noiseless = 0.0f64;
    for m in &models {
        noiseless = noiseless.max(noiseless_repetition_deviation(m, opts.n_max)?);
    }
    let passed = by_noise.iter().all(|d| d.passed) && noiseless <= opts.tolerance;
    Ok(RepetitionSweep {
        models: models.len(),
        by_noise,
        noiseless_max_deviation: noiseless,
        passed,
    })
}

/// Screened fixtures put near-certain mass on a world where every sentence
/// holds; unscreened fixtures drop that anchoring.
pub fn separation_sweep(opts: &VerifyOptions) -> Result<SeparationSweep> {
    let spec = model_spec(opts);
    let gricean = SpeakerSpec::gricean();
    let prior = PriorShape::NearCertain {
        spread: opts.separation_spread,
    };
    let mut rng = sweep_rng(opts.seed, 4);
    let mut min_auc = f64::INFINITY;
    let mut max_flipped = f64::NEG_INFINITY;
    for _ in 0..opts.separation_models {
        let m = random_model(&mut rng, &spec, prior, true);
        let r = separation_report(&m, &gricean, opts.near_contradiction_threshold, opts.tolerance)?;
        if r.n_entailed > 0 && r.n_non_entailed > 0 {
            min_auc = min_auc.min(r.auc);
            max_flipped = max_flipped.max(r.flipped_auc);
        }
    }
    let mut rng = sweep_rng(opts.seed, 5);
    let mut unscreened = Vec::new();
    let mut pairs = 0;
    let mut all_near = true;
    for i in 0..opts.separation_models {
        let m = random_model(&mut rng, &spec, prior, false);
        let r = separation_report(&m, &gricean, opts.near_contradiction_threshold, opts.tolerance)?;
        pairs += r.n_non_entailed;
        all_near &= r.all_violations_near_contradictions;
        if !r.violations.is_empty() {
            unscreened.push(ModelViolations {
                model: i,
                violations: r.violations,
            });
        }
    }
    let screened_passed = min_auc == 100.0 && max_flipped == 0.0;
    Ok(SeparationSweep {
        models: opts.separation_models,
        screened_min_auc: min_auc,
        screened_max_flipped_auc: max_flipped,
        screened_passed,
        unscreened_pairs: pairs,
        unscreened_violation_count: unscreened.iter().map(|v| v.violations.len()).sum(),
        unscreened_violations: unscreened,
        unscreened_all_near_contradictions: all_near,
        passed: screened_passed && all_near,
    })
}

pub fn diffuse_findings(opts: &VerifyOptions) -> Result<DiffuseFindings> {
    let spec = model_spec(opts);
    let mut rng = sweep_rng(opts.seed, 6);
    let mut out = DiffuseFindings {
        models: opts.separation_models,
        non_entailed_pairs: 0,
        violations: 0,
        near_contradiction_violations: 0,
        mean_auc: 0.0,
    };
    let mut aucs = Vec::new();
    for _ in 0..opts.separation_models {
        let m = random_model(&mut rng, &spec, PriorShape::Diffuse, false);
        let r = separation_report(
            &m,
            &SpeakerSpec::gricean(),
            opts.near_contradiction_threshold,
            opts.tolerance,
        )?;
        out.non_entailed_pairs += r.n_non_entailed;
        out.violations += r.violations.len();
        out.near_contradiction_violations +=
            r.violations.iter().filter(|p| p.near_contradiction).count();
        if r.auc.is_finite() {
            aucs.push(r.auc);
        }
    }
    out.mean_auc = aucs.iter().sum::<f64>() / aucs.len().max(1) as f64;
    Ok(out)
}

/// Runs every sweep. Deterministic in `opts.seed`.
pub fn run_verification(opts: &VerifyOptions) -> Result<VerificationReport> {
    let score_identity = score_identity_sweep(opts)?;
    let cost_identity = cost_identity_sweep(opts)?;
    let repetition = repetition_sweep(opts)?;
    let separation = separation_sweep(opts)?;
    let diffuse = diffuse_findings(opts)?;
    let passed =
        score_identity.passed && cost_identity.passed && repetition.passed && separation.passed;
    Ok(VerificationReport {
        options: opts.clone(),
        score_identity,
        cost_identity,
        repetition,
        separation,
        diffuse,
        passed,
    })
}
