//! Runs the seeded verification sweeps and prints one line per check.
//!
//! ```text
//! cargo run --release --example verification_sweep -- 7
//! ```

use pel::theory::sweeps::{run_verification, VerifyOptions};

fn main() -> pel::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("seed must be an integer"))
        .unwrap_or(0);
    let opts = VerifyOptions {
        seed,
        ..VerifyOptions::default()
    };
    let start = std::time::Instant::now();
    let report = run_verification(&opts)?;
    print!("{}", report.summary());
    println!("overall {} in {:.1?}", if report.passed { "PASS" } else { "FAIL" }, start.elapsed());
    Ok(())
}
