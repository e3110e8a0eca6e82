//! Count sources: everything that can answer occurrence, co-occurrence
//! and corpus-size queries.
//!
//! All counts are document frequencies (how many documents match),
//! never token frequencies, mirroring the hit counts a search engine
//! reports. Multi-token terms use AND semantics: a document matches if
//! it contains every token.

pub mod cache;
pub mod corpus;
pub mod http;
pub mod table;
pub mod term;

use crate::measures::{MeasureError, PairCounts};
use term::Term;

#[derive(Debug, thiserror::Error)]
pub enum ProviderError {
    #[error("duplicate document id `{0}`")]
    DuplicateDocument(String),
    #[error("corpus contains no documents")]
    EmptyCorpus,
    #[error("parse error in {source_name}: {message}")]
    Parse {
        source_name: String,
        message: String,
    },
    #[error("invalid count table: {0}")]
    InvalidTable(String),
    #[error("HTTP status {0}")]
    Http(u16),
    #[error("network error: {0}")]
    Network(String),
    #[error("request timed out")]
    Timeout,
    #[error("could not extract a count: {0}")]
    CountParse(String),
    #[error("invalid provider configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Counts(#[from] MeasureError),
}

/// A source of document hit counts.
///
/// Implementations must keep `corpus_size` constant over their lifetime
/// and answer co-occurrence symmetrically. Exact sources (corpus index,
/// count table) additionally guarantee
/// `cooccurrence(x, y) <= min(occurrence(x), occurrence(y)) <= corpus_size()`;
/// the HTTP back-end returns engine estimates and is exempt.
pub trait CountProvider: Send + Sync {
    /// Number of documents matching the term.
    fn occurrence(&self, term: &Term) -> Result<u64, ProviderError>;

    /// Number of documents matching both terms.
    fn cooccurrence(&self, x: &Term, y: &Term) -> Result<u64, ProviderError>;

    /// Total (or configured estimate of) documents in the source.
    fn corpus_size(&self) -> u64;

    /// Stable identity string, used for provenance and cache keys.
    fn provider_id(&self) -> String;

    /// All four statistics for one pair. The default issues the three
    /// individual queries; wrappers may override to serve the whole
    /// tuple from a cache.
    fn pair_counts(&self, x: &Term, y: &Term) -> Result<PairCounts, ProviderError> {
        let f_x = self.occurrence(x)?;
        let f_y = self.occurrence(y)?;
        let f_xy = self.cooccurrence(x, y)?;
        Ok(PairCounts::new(f_x, f_y, f_xy, self.corpus_size())?)
    }
}

/// Fetch the raw statistics for a pair from any provider.
pub fn lookup_counts(
    provider: &dyn CountProvider,
    x: &Term,
    y: &Term,
) -> Result<PairCounts, ProviderError> {
    provider.pair_counts(x, y)
}
