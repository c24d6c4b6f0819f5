//! Distributional entailment lab.
//!
//! Idealized speakers over finite possible worlds generate texts; the
//! entailment test reads entailment off the log-probabilities of short
//! discourses. The crate computes the test from exact speaker probabilities,
//! n-gram estimates, cached scores or a remote scoring service, checks the
//! theory's identities numerically and evaluates the test on labelled data.
//!
//! ```
//! use pel::semantics::{Formula, WorldModel};
//! use pel::scoring::ExactProvider;
//! use pel::speakers::SpeakerSpec;
//! use pel::theory::entailment_score;
//!
//! let model = WorldModel::builder(&["p", "q"])
//!     .sentence("p and q.", Formula::and([Formula::atom("p"), Formula::atom("q")]), 1.0)
//!     .sentence("p.", Formula::atom("p"), 1.0)
//!     .sentence("q.", Formula::atom("q"), 1.0)
//!     .build()
//!     .unwrap();
//! let exact = ExactProvider::new(&model, &SpeakerSpec::gricean()).unwrap();
//! let s = entailment_score(&exact, "p and q.", "p.").unwrap();
//! assert!(s.score.abs() < 1e-9);
//! ```

pub mod cli;
pub mod datasets;
mod error;
pub mod estimation;
pub mod eval;
mod math;
pub mod scoring;
pub mod semantics;
pub mod speakers;
pub mod theory;

pub use error::{Error, Result};
