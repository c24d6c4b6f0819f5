//! Starts the mock scoring service, scores a handful of discourses through the
//! HTTP client and an on-disk cache, and shows that a second pass is served
//! entirely from the cache.

use pel::scoring::{
    run_mock_server, CachedProvider, HttpProvider, HttpSettings, RenderConfig, ScoreCache,
    MOCK_MODEL_ID,
};
use pel::theory::{variant_score, TestScoreBreakdown};
use pel::scoring::TestVariant;

fn main() -> pel::Result<()> {
    let server = run_mock_server("127.0.0.1:0")?;
    let dir = std::env::temp_dir().join(format!("pel-mock-example-{}", std::process::id()));
    let cache = ScoreCache::open(dir.join("scores.jsonl"))?;
    let pairs = [
        ("I saw James and Olivia.", "I saw James."),
        ("I saw James.", "I saw James and Olivia."),
        ("Every dog barked.", "Some dog barked."),
    ];
    for pass in 1..=2 {
        let provider = CachedProvider::new(
            HttpProvider::new(HttpSettings::new(&server.endpoint(), MOCK_MODEL_ID))?,
            &cache,
            RenderConfig::default(),
        );
        println!("pass {pass}");
        for (x, y) in pairs {
            for variant in [TestVariant::Original, TestVariant::Repeated(3), TestVariant::Pause(3)] {
                let TestScoreBreakdown { score, .. } = variant_score(&provider, x, y, variant)?;
                println!("  {variant:?} {x:?} {y:?}: {score:.4}");
            }
        }
        println!("  http requests this pass: {}", provider.scorer().request_count());
    }
    println!("cache: {} entries in {}", cache.len(), dir.display());
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
