//! Semantic proximity from document hit counts.
//!
//! The crate computes the PMING distance of a term pair: a weighted
//! combination of two locally normalized components, one derived from
//! pointwise mutual information (a proximity signal) and one from the
//! NGD-style log-count spread (a distance signal). Both components are
//! normalized against a context `W` of terms, so scores are comparable
//! only within one context.
//!
//! Counts are document frequencies: the number of documents matching a
//! term, or matching both terms of a pair (AND semantics), as a search
//! engine would report them. Three interchangeable back-ends supply the
//! counts: a local inverted index built from a corpus, a static count
//! table loaded from JSON, and a generic search-engine HTTP adapter. A
//! persistent cache can wrap any of them.
//!
//! Typical flow: pick a [`CountProvider`], build a [`Context`] over a
//! term set, then score pairs or batch products:
//!
//! ```
//! use pming::{build_context, Term, TableProvider, Variant};
//! use std::sync::Arc;
//!
//! let table = TableProvider::from_parts(
//!     1000,
//!     [("a", 100), ("b", 100), ("c", 10)],
//!     [("a", "b", 50), ("a", "c", 10), ("b", "c", 1)],
//! )?;
//! let terms: Vec<Term> = ["a", "b", "c"]
//!     .iter()
//!     .map(|t| Term::parse(t))
//!     .collect::<Result<_, _>>()?;
//! let ctx = build_context(&terms, Arc::new(table), 0.3, Variant::Paper)?;
//! let report = ctx.score_pair(&terms[0], &terms[1])?;
//! assert!(report.pming >= 0.0 && report.pming <= 1.0);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod analysis;
pub mod context;
pub mod measures;
pub mod providers;
pub mod render;

pub use analysis::{
    distance_matrix, top_k, AnalysisError, DistanceMatrix, RankedEntry, RankedList,
};
pub use context::{build_context, Context, ContextError};
pub use measures::{
    pmi, pming_pair, spread_term, Flags, MeasureError, MeasureParams, PairCounts, ScoreReport,
    Variant,
};
pub use providers::cache::{CachedProvider, CountCache};
pub use providers::corpus::{index_corpus, CorpusIndex};
pub use providers::http::{HttpProvider, HttpProviderConfig};
pub use providers::table::{load_count_table, TableProvider};
pub use providers::term::{tokenize, Term, TermError};
pub use providers::{lookup_counts, CountProvider, ProviderError};
