use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{ProviderKind, RunConfig};
use super::{Command, Outcome};
use crate::datasets::{
    gen_distractors, gen_targeted, ingest_nli_file, instances_to_jsonl, read_instances,
    world_pairs, DistractorLists, EntailmentInstance, Phenomenon, Wordlists,
};
use crate::error::{Error, Result};
use crate::estimation::{fit_for_model, fit_surfaces, SentenceNGram};
use crate::eval::plots::{histogram, histogram_csv, histogram_svg, roc_csv, roc_svg};
use crate::eval::{evaluate, fit_learned_test, score_instances, EvalReport, ScoredInstance};
use crate::scoring::{
    bits_per_byte, run_mock_server, split_sentences, CacheOnlyProvider, CachedProvider,
    Discourse, ExactProvider, HttpProvider, LogProbProvider, NgramProvider, ScoreCache,
};
use crate::semantics::{SentenceSeq, WorldModel};
use crate::speakers::{corpus_from_jsonl, corpus_to_jsonl, Speaker};
use crate::theory::sweeps::run_verification;

pub(super) fn dispatch(command: &Command, cfg: &RunConfig) -> Result<Outcome> {
    match command {
        Command::Verify => verify(cfg),
        Command::Simulate { input } => simulate(cfg, input.as_deref()),
        Command::TrainNgram { input } => train_ngram(cfg, input.as_deref()),
        Command::Gen => gen(cfg),
        Command::Score { input } => score(cfg, input.as_deref()),
        Command::Eval { input } => eval(cfg, input.as_deref()),
        Command::Fit { input } => fit(cfg, input.as_deref()),
        Command::Bpb { input } => bpb(cfg, input.as_deref()),
        Command::MockServer => mock_server(cfg),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, &text)
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn input_path(given: Option<&Path>, configured: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    given
        .map(Path::to_path_buf)
        .or_else(|| configured.clone())
        .ok_or_else(|| Error::InvalidArgument(format!("no {what} given (argument or config path)")))
}

fn done(summary: Value) -> Result<Outcome> {
    Ok(Outcome {
        passed: true,
        summary,
    })
}

fn verify(cfg: &RunConfig) -> Result<Outcome> {
    let report = run_verification(&cfg.verify)?;
    let path = cfg.out.join("verify_report.json");
    write_json(
        &path,
        &json!({ "config": cfg.to_value(), "seed": cfg.seed, "report": &report }),
    )?;
    write_file(&cfg.out.join("verify_summary.txt"), &report.summary())?;
    eprint!("{}", report.summary());
    Ok(Outcome {
        passed: report.passed,
        summary: json!({
            "command": "verify",
            "passed": report.passed,
            "report": path.display().to_string(),
        }),
    })
}

fn load_world_model(cfg: &RunConfig, given: Option<&Path>) -> Result<WorldModel> {
    WorldModel::load(&input_path(given, &cfg.paths.world_model, "world model")?)
}

fn simulate(cfg: &RunConfig, input: Option<&Path>) -> Result<Outcome> {
    let model = load_world_model(cfg, input)?;
    let speaker = Speaker::new(&model, &cfg.speaker)?;
    let corpus = speaker.sample_corpus(cfg.simulate.n_texts, cfg.seed, cfg.simulate.max_len)?;
    let path = cfg.out.join("corpus.jsonl");
    write_file(&path, &corpus_to_jsonl(&model, &corpus))?;
    let forced = corpus.iter().filter(|t| t.forced_termination).count();
    let mean_len =
        corpus.iter().map(|t| t.seq.len()).sum::<usize>() as f64 / corpus.len() as f64;
    write_json(
        &cfg.out.join("simulate_report.json"),
        &json!({
            "config": cfg.to_value(),
            "seed": cfg.seed,
            "n_texts": corpus.len(),
            "forced_terminations": forced,
            "mean_length": mean_len,
        }),
    )?;
    done(json!({ "command": "simulate", "texts": corpus.len(), "output": path.display().to_string() }))
}

fn train_ngram(cfg: &RunConfig, input: Option<&Path>) -> Result<Outcome> {
    let path = input_path(input, &cfg.paths.corpus, "corpus")?;
    let texts = corpus_from_jsonl(&read_file(&path)?, &path.display().to_string())?;
    if texts.is_empty() {
        return Err(Error::InvalidArgument("empty corpus".into()));
    }
    let model = match &cfg.paths.world_model {
        Some(wm) => {
            let world = WorldModel::load(wm)?;
            let corpus = texts
                .iter()
                .map(|(t, _, forced)| {
                    let seq = world.parse_seq(t)?;
                    Ok(if *forced {
                        seq
                    } else {
                        SentenceSeq::terminated(seq.items)
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            fit_for_model(&world, &corpus, cfg.ngram.order, cfg.ngram.lambda)?
        }
        None => {
            let mut vocab: Vec<String> = texts.iter().flat_map(|(t, _, _)| t.clone()).collect();
            vocab.sort();
            vocab.dedup();
            let flagged: Vec<(Vec<String>, bool)> =
                texts.into_iter().map(|(t, _, forced)| (t, !forced)).collect();
            fit_surfaces(&flagged, &vocab, cfg.ngram.order, cfg.ngram.lambda)?
        }
    };
    let out = cfg.out.join("ngram.json");
    write_file(&out, &model.to_json())?;
    done(json!({
        "command": "train-ngram",
        "order": model.order(),
        "vocabulary": model.vocabulary().len(),
        "output": out.display().to_string(),
    }))
}

fn generate(cfg: &RunConfig, phenomenon: &str) -> Result<Vec<EntailmentInstance>> {
    let wordlists = || match &cfg.paths.wordlists {
        Some(dir) => Wordlists::from_dir(dir),
        None => Ok(Wordlists::default()),
    };
    if phenomenon == "targeted" || phenomenon == "all" {
        let lists = wordlists()?;
        let mut out = Vec::new();
        for p in Phenomenon::TARGETED {
            out.extend(gen_targeted(p, &lists)?);
        }
        return Ok(out);
    }
    match phenomenon.parse::<Phenomenon>()? {
        Phenomenon::Distractors => {
            let lists = DistractorLists::default();
            gen_distractors(&lists.base_pairs(), &lists, cfg.gen.max_distractors, cfg.seed)
        }
        Phenomenon::WorldPairs => world_pairs(&load_world_model(cfg, None)?),
        Phenomenon::External => ingest_nli_file(&input_path(None, &cfg.paths.nli, "NLI file")?),
        p => gen_targeted(p, &wordlists()?),
    }
}

fn gen(cfg: &RunConfig) -> Result<Outcome> {
    let phenomenon = cfg
        .phenomenon
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("gen needs --phenomenon".into()))?;
    let instances = generate(cfg, phenomenon)?;
    let path = cfg.out.join("instances.jsonl");
    write_file(&path, &instances_to_jsonl(&instances))?;
    let entailed = instances.iter().filter(|i| i.label.is_entailment()).count();
    write_json(
        &cfg.out.join("gen_report.json"),
        &json!({
            "config": cfg.to_value(),
            "seed": cfg.seed,
            "phenomenon": phenomenon,
            "instances": instances.len(),
            "entailed": entailed,
            "non_entailed": instances.len() - entailed,
        }),
    )?;
    done(json!({
        "command": "gen",
        "phenomenon": phenomenon,
        "instances": instances.len(),
        "output": path.display().to_string(),
    }))
}

/// What a provider did during a command, for reports.
#[derive(Debug, Clone, Default, Serialize)]
struct ProviderStats {
    backend: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    http_requests: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cache_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cache_entries: Option<usize>,
}

/// Builds the configured provider, runs `f` with it and reports usage.
fn with_provider<R>(
    cfg: &RunConfig,
    f: impl FnOnce(&dyn LogProbProvider) -> Result<R>,
) -> Result<(R, ProviderStats)> {
    match cfg.provider {
        ProviderKind::Exact => {
            let model = load_world_model(cfg, None)?;
            let p = ExactProvider::new(&model, &cfg.speaker)?;
            let stats = ProviderStats {
                backend: p.backend_id(),
                ..Default::default()
            };
            Ok((f(&p)?, stats))
        }
        ProviderKind::Ngram => {
            let path = input_path(None, &cfg.paths.ngram, "n-gram model")?;
            let p = NgramProvider::new(SentenceNGram::load(&path)?);
            let stats = ProviderStats {
                backend: p.backend_id(),
                ..Default::default()
            };
            Ok((f(&p)?, stats))
        }
        ProviderKind::Cache => {
            let file = cfg.cache_file();
            let cache = ScoreCache::open(&file)?;
            let p = CacheOnlyProvider::new(&cache, &cfg.http.model_id, cfg.render.clone());
            let r = f(&p)?;
            Ok((
                r,
                ProviderStats {
                    backend: p.backend_id(),
                    http_requests: Some(0),
                    cache_file: Some(file.display().to_string()),
                    cache_entries: Some(cache.len()),
                },
            ))
        }
        ProviderKind::Http => {
            let file = cfg.cache_file();
            let cache = ScoreCache::open(&file)?;
            let p = CachedProvider::new(HttpProvider::new(cfg.http_settings()?)?, &cache, cfg.render.clone());
            let r = f(&p)?;
            Ok((
                r,
                ProviderStats {
                    backend: p.backend_id(),
                    http_requests: Some(p.scorer().request_count()),
                    cache_file: Some(file.display().to_string()),
                    cache_entries: Some(cache.len()),
                },
            ))
        }
    }
}

fn scored_to_jsonl(scored: &[ScoredInstance]) -> String {
    let mut out = String::new();
    for s in scored {
        out.push_str(&serde_json::to_string(s).expect("scored instance serializes"));
        out.push('\n');
    }
    out
}

fn read_scored(path: &Path) -> Result<Vec<ScoredInstance>> {
    let text = read_file(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

fn score(cfg: &RunConfig, input: Option<&Path>) -> Result<Outcome> {
    let path = input_path(input, &cfg.paths.instances, "instances")?;
    let instances = read_instances(&path)?;
    let variant = cfg.test.variant(cfg.n_reps);
    let (scored, stats) = with_provider(cfg, |p| score_instances(p, &instances, variant))?;
    let out = cfg.out.join("scored.jsonl");
    write_file(&out, &scored_to_jsonl(&scored))?;
    write_json(
        &cfg.out.join("score_report.json"),
        &json!({
            "config": cfg.to_value(),
            "seed": cfg.seed,
            "variant": variant,
            "instances": scored.len(),
            "provider": &stats,
        }),
    )?;
    done(json!({
        "command": "score",
        "instances": scored.len(),
        "http_requests": stats.http_requests,
        "output": out.display().to_string(),
    }))
}

fn repetition_warnings(scored: &[ScoredInstance], cfg: &RunConfig) -> Vec<String> {
    let want = cfg.test.variant(cfg.n_reps).repetitions();
    let off = scored
        .iter()
        .filter(|s| s.features.n_repetitions != want)
        .count();
    if off == 0 {
        Vec::new()
    } else {
        vec![format!(
            "{off} instances were scored with a different repetition count than --test {} expects ({want})",
            cfg.test.name()
        )]
    }
}

fn eval(cfg: &RunConfig, input: Option<&Path>) -> Result<Outcome> {
    let path = input_path(input, &cfg.paths.scored, "scored instances")?;
    let scored = read_scored(&path)?;
    let mut report = evaluate(&scored, cfg.test.name(), cfg.test.orientation(), cfg.to_value())?;
    report.warnings.extend(repetition_warnings(&scored, cfg));
    write_json(&cfg.out.join("eval_report.json"), &report)?;
    write_plots(cfg, &scored, &report)?;
    done(json!({
        "command": "eval",
        "test": report.test,
        "auc": report.auc,
        "flipped_auc": report.flipped_auc,
        "output": cfg.out.join("eval_report.json").display().to_string(),
    }))
}

fn write_plots(cfg: &RunConfig, scored: &[ScoredInstance], report: &EvalReport) -> Result<()> {
    write_file(&cfg.out.join("roc.csv"), &roc_csv(&report.roc_points))?;
    write_file(&cfg.out.join("roc.svg"), &roc_svg(&report.roc_points, report.auc))?;
    let raw: Vec<(f64, bool)> = scored
        .iter()
        .map(|s| (s.features.score, s.instance.label.is_entailment()))
        .collect();
    let h = histogram(&raw, cfg.eval.histogram_bins);
    write_file(&cfg.out.join("hist.csv"), &histogram_csv(&h))?;
    write_file(&cfg.out.join("hist.svg"), &histogram_svg(&h, "test score"))
}

fn fit(cfg: &RunConfig, input: Option<&Path>) -> Result<Outcome> {
    let path = input_path(input, &cfg.paths.scored, "scored instances")?;
    let scored = read_scored(&path)?;
    let features: Vec<[f64; 4]> = scored.iter().map(|s| s.features.features()).collect();
    let labels: Vec<bool> = scored.iter().map(|s| s.instance.label.is_entailment()).collect();
    let learned = fit_learned_test(&features, &labels, &cfg.fit)?;
    let mut report = evaluate(&scored, "learned", crate::eval::Orientation::Flipped, cfg.to_value())?;
    // ROC of the learned score, which predicts entailment when high
    let points: Vec<(f64, bool)> = features
        .iter()
        .zip(&labels)
        .map(|(f, &l)| (learned.coefficients.apply(f), l))
        .collect();
    let curve = crate::eval::roc_auc(&points)?;
    report.auc = curve.auc;
    report.flipped_auc = crate::eval::flipped_roc_auc(&points)?;
    report.roc_points = curve.points;
    report.coefficients = Some(learned.coefficients);
    report.warnings.extend(learned.warnings.iter().cloned());
    report.warnings.extend(repetition_warnings(&scored, cfg));
    let summary = json!({
        "command": "fit",
        "signs": learned.coefficients.signs(),
        "eval_auc": learned.eval_auc,
        "converged": learned.converged,
        "output": cfg.out.join("fit_report.json").display().to_string(),
    });
    report.learned = Some(learned);
    write_json(&cfg.out.join("fit_report.json"), &report)?;
    done(summary)
}

#[derive(Deserialize)]
struct TextLine {
    text: String,
}

fn bpb(cfg: &RunConfig, input: Option<&Path>) -> Result<Outcome> {
    let path = input_path(input, &cfg.paths.texts, "texts")?;
    let body = read_file(&path)?;
    let texts = body
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str::<TextLine>(l)
                .map(|t| t.text)
                .map_err(|e| Error::Parse {
                    path: path.display().to_string(),
                    line: i + 1,
                    message: e.to_string(),
                })
        })
        .collect::<Result<Vec<String>>>()?;
    // text models see each text whole; sentence models see its sentences
    let discourses: Vec<Discourse> = texts
        .iter()
        .map(|t| match cfg.provider {
            ProviderKind::Exact | ProviderKind::Ngram => Discourse::new(
                split_sentences(t).into_iter().map(str::to_string).collect(),
                false,
            ),
            ProviderKind::Cache | ProviderKind::Http => Discourse::new(vec![t.clone()], false),
        })
        .collect();
    let (lps, stats) = with_provider(cfg, |p| p.logprob_batch(&discourses))?;
    let scored: Vec<(&str, f64)> = texts.iter().map(String::as_str).zip(lps).collect();
    let value = bits_per_byte(&scored)?;
    let bytes: usize = texts.iter().map(String::len).sum();
    write_json(
        &cfg.out.join("bpb_report.json"),
        &json!({
            "config": cfg.to_value(),
            "seed": cfg.seed,
            "texts": texts.len(),
            "bytes": bytes,
            "bits_per_byte": value,
            "provider": &stats,
        }),
    )?;
    done(json!({ "command": "bpb", "bits_per_byte": value, "texts": texts.len() }))
}

fn mock_server(cfg: &RunConfig) -> Result<Outcome> {
    let addr = match &cfg.http.endpoint {
        Some(url) => url
            .trim_start_matches("http://")
            .trim_end_matches('/')
            .to_string(),
        None => cfg.mock.addr.clone(),
    };
    let server = run_mock_server(&addr)?;
    println!(
        "{}",
        json!({ "endpoint": server.endpoint(), "model_id": crate::scoring::MOCK_MODEL_ID })
    );
    use std::io::Write;
    let _ = std::io::stdout().flush();
    server.join();
    done(json!({ "command": "mock-server", "stopped": true }))
}
