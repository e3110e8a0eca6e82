//! Normalization contexts: a term set W with its pairwise counts and
//! the constants mu1 and mu2 that scale both score components.
//!
//! `mu1` is the largest PMI over the in-context pairs (pairs that never
//! co-occur have no finite PMI and are skipped); `mu2` is the largest
//! spread term under the context's variant. Dividing by them makes both
//! components locally normalized: the best-associated pair lands at
//! component distance 0 and the widest-spread pair at component
//! distance 1. Scores from different contexts are not comparable.

use crate::measures::{
    pmi, pming_pair, spread_term, MeasureError, MeasureParams, PairCounts, ScoreReport, Variant,
};
use crate::providers::term::Term;
use crate::providers::{lookup_counts, CountProvider, ProviderError};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum ContextError {
    #[error("context needs at least 2 distinct terms, got {0}")]
    TooSmall(usize),
    #[error("degenerate context: no in-context pair has positive PMI, nothing can anchor mu1")]
    DegeneratePmi,
    #[error("pair ({x}, {y}) is outside the context and no live provider is attached")]
    NoProvider { x: String, y: String },
    #[error("invalid context file: {0}")]
    InvalidFile(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// A pair that could not contribute to one of the context maxima.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ExcludedPair {
    pub x: String,
    pub y: String,
    pub reason: String,
}

/// An immutable term set with complete pairwise counts and the derived
/// normalization constants. Build one with [`build_context`], or thaw a
/// frozen one with [`Context::from_json`].
pub struct Context {
    terms: Vec<Term>,
    index: HashMap<String, usize>,
    occurrence: Vec<u64>,
    /// Co-occurrence for `i <= j` positions, diagonal included.
    cooccurrence: HashMap<(usize, usize), u64>,
    m: u64,
    mu1: f64,
    mu2: f64,
    rho: f64,
    variant: Variant,
    provider_id: String,
    excluded: Vec<ExcludedPair>,
    provider: Option<Arc<dyn CountProvider>>,
}

/// Serialized form, so a live-fetched context can be frozen into a
/// reproducible fixture and scored again offline.
#[derive(Serialize, Deserialize)]
struct ContextFile {
    provider_id: String,
    rho: f64,
    variant: Variant,
    mu1: f64,
    mu2: f64,
    #[serde(rename = "M")]
    m: u64,
    terms: Vec<String>,
    occurrence: BTreeMap<String, u64>,
    cooccurrence: Vec<CoocFileEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    excluded: Vec<ExcludedPair>,
}

#[derive(Serialize, Deserialize)]
struct CoocFileEntry {
    a: String,
    b: String,
    count: u64,
}

/// Fetch all pairwise counts for the term set (diagonal included),
/// derive mu1 and mu2, and return the ready-to-score context.
///
/// Duplicate terms are dropped, keeping the first occurrence. Pairs
/// whose PMI has no finite value are excluded from the mu1 maximum;
/// pairs whose spread term is undefined or infinite are excluded from
/// the mu2 maximum. A context where no surviving pair has positive PMI
/// is rejected: nothing could anchor the normalization.
pub fn build_context(
    terms: &[Term],
    provider: Arc<dyn CountProvider>,
    rho: f64,
    variant: Variant,
) -> Result<Context, ContextError> {
    if !rho.is_finite() || !(0.0..=1.0).contains(&rho) {
        return Err(
            MeasureError::InvalidParams(format!("rho must lie in [0,1], got {rho}")).into(),
        );
    }

    let mut distinct: Vec<Term> = Vec::with_capacity(terms.len());
    for term in terms {
        if !distinct.contains(term) {
            distinct.push(term.clone());
        }
    }
    if distinct.len() < 2 {
        return Err(ContextError::TooSmall(distinct.len()));
    }

    let n = distinct.len();
    let mut occurrence = Vec::with_capacity(n);
    let mut cooccurrence = HashMap::new();
    let mut m = 0u64;
    for (i, term) in distinct.iter().enumerate() {
        let counts = lookup_counts(provider.as_ref(), term, term)?;
        occurrence.push(counts.f_x());
        cooccurrence.insert((i, i), counts.f_xy());
        m = counts.m();
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let counts = lookup_counts(provider.as_ref(), &distinct[i], &distinct[j])?;
            cooccurrence.insert((i, j), counts.f_xy());
        }
    }

    let (mu1, mu2, excluded) = derive_mus(&distinct, &occurrence, &cooccurrence, m, variant)?;

    let index = distinct
        .iter()
        .enumerate()
        .map(|(i, t)| (t.normalized(), i))
        .collect();

    Ok(Context {
        terms: distinct,
        index,
        occurrence,
        cooccurrence,
        m,
        mu1,
        mu2,
        rho,
        variant,
        provider_id: provider.provider_id(),
        excluded,
        provider: Some(provider),
    })
}

fn derive_mus(
    terms: &[Term],
    occurrence: &[u64],
    cooccurrence: &HashMap<(usize, usize), u64>,
    m: u64,
    variant: Variant,
) -> Result<(f64, f64, Vec<ExcludedPair>), ContextError> {
    let mut mu1: Option<f64> = None;
    let mut mu2: Option<f64> = None;
    let mut excluded = Vec::new();
    let mut exclude = |i: usize, j: usize, reason: &str| {
        excluded.push(ExcludedPair {
            x: terms[i].normalized(),
            y: terms[j].normalized(),
            reason: reason.to_string(),
        });
    };

    for i in 0..terms.len() {
        for j in (i + 1)..terms.len() {
            let f_xy = cooccurrence.get(&(i, j)).copied().unwrap_or(0);
            let counts = PairCounts::new(occurrence[i], occurrence[j], f_xy, m)?;

            match pmi(&counts) {
                Ok(value) if value.is_finite() => {
                    mu1 = Some(mu1.map_or(value, |best: f64| best.max(value)));
                }
                Ok(_) => {} // never co-occurs: no finite PMI to rank
                Err(MeasureError::UndefinedForZeroOccurrence { .. }) => {
                    exclude(i, j, "zero_occurrence");
                }
                Err(other) => return Err(other.into()),
            }

            match spread_term(&counts, variant) {
                Ok(value) if value.is_finite() => {
                    mu2 = Some(mu2.map_or(value, |best: f64| best.max(value)));
                }
                Ok(_) => exclude(i, j, "infinite_spread"),
                Err(MeasureError::SingularDenominator { .. }) => {
                    exclude(i, j, "singular_denominator");
                }
                Err(MeasureError::UndefinedForZeroOccurrence { .. }) => {
                    // already recorded on the PMI side
                }
                Err(other) => return Err(other.into()),
            }
        }
    }

    match mu1 {
        Some(value) if value > 0.0 => Ok((value, mu2.unwrap_or(0.0), excluded)),
        _ => Err(ContextError::DegeneratePmi),
    }
}

impl Context {
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn mu2(&self) -> f64 {
        self.mu2
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn corpus_size(&self) -> u64 {
        self.m
    }

    pub fn provider_id(&self) -> &str {
        &self.provider_id
    }

    pub fn excluded(&self) -> &[ExcludedPair] {
        &self.excluded
    }

    pub fn contains(&self, term: &Term) -> bool {
        self.index.contains_key(&term.normalized())
    }

    /// Re-weight a context without touching its counts or constants.
    /// `mu1` and `mu2` do not depend on rho, so this is always sound.
    pub fn with_rho(mut self, rho: f64) -> Result<Self, ContextError> {
        if !rho.is_finite() || !(0.0..=1.0).contains(&rho) {
            return Err(
                MeasureError::InvalidParams(format!("rho must lie in [0,1], got {rho}")).into(),
            );
        }
        self.rho = rho;
        Ok(self)
    }

    fn stored_counts(&self, i: usize, j: usize) -> Result<PairCounts, ContextError> {
        let key = if i <= j { (i, j) } else { (j, i) };
        let f_xy = self.cooccurrence.get(&key).copied().unwrap_or(0);
        Ok(PairCounts::new(
            self.occurrence[i],
            self.occurrence[j],
            f_xy,
            self.m,
        )?)
    }

    /// Score one pair against this context. In-context pairs use the
    /// stored counts; any other pair is fetched through the context's
    /// provider and flagged `out_of_context`.
    pub fn score_pair(&self, x: &Term, y: &Term) -> Result<ScoreReport, ContextError> {
        let ix = self.index.get(&x.normalized());
        let iy = self.index.get(&y.normalized());
        let (counts, out_of_context) = match (ix, iy) {
            (Some(&i), Some(&j)) => (self.stored_counts(i, j)?, false),
            _ => {
                let provider = self
                    .provider
                    .as_ref()
                    .ok_or_else(|| ContextError::NoProvider {
                        x: x.normalized(),
                        y: y.normalized(),
                    })?;
                (lookup_counts(provider.as_ref(), x, y)?, true)
            }
        };
        let params = MeasureParams::new(self.rho, self.mu1, self.mu2, self.variant)?;
        let mut report = pming_pair(&x.normalized(), &y.normalized(), counts, &params)?;
        report.flags.out_of_context = out_of_context;
        Ok(report)
    }

    /// `1 - pming`: the proximity reading of the same score.
    pub fn proximity(&self, x: &Term, y: &Term) -> Result<f64, ContextError> {
        Ok(1.0 - self.score_pair(x, y)?.pming)
    }

    /// Freeze the context into its JSON fixture form.
    pub fn to_json(&self) -> String {
        let occurrence: BTreeMap<String, u64> = self
            .terms
            .iter()
            .zip(&self.occurrence)
            .map(|(t, &count)| (t.normalized(), count))
            .collect();
        let mut cooccurrence = Vec::new();
        for i in 0..self.terms.len() {
            for j in i..self.terms.len() {
                let count = self.cooccurrence.get(&(i, j)).copied().unwrap_or(0);
                cooccurrence.push(CoocFileEntry {
                    a: self.terms[i].normalized(),
                    b: self.terms[j].normalized(),
                    count,
                });
            }
        }
        let file = ContextFile {
            provider_id: self.provider_id.clone(),
            rho: self.rho,
            variant: self.variant,
            mu1: self.mu1,
            mu2: self.mu2,
            m: self.m,
            terms: self.terms.iter().map(Term::normalized).collect(),
            occurrence,
            cooccurrence,
            excluded: self.excluded.clone(),
        };
        let mut json = serde_json::to_string_pretty(&file).expect("context serialization");
        json.push('\n');
        json
    }

    /// Thaw a frozen context. The result has no live provider, so only
    /// in-context pairs can be scored; attach one with
    /// [`Context::with_provider`] to allow out-of-context fetches.
    pub fn from_json(data: &str) -> Result<Self, ContextError> {
        let file: ContextFile =
            serde_json::from_str(data).map_err(|e| ContextError::InvalidFile(e.to_string()))?;

        if file.m == 0 {
            return Err(ContextError::InvalidFile("M must be at least 1".into()));
        }
        if !file.mu1.is_finite() || file.mu1 <= 0.0 {
            return Err(ContextError::InvalidFile(format!(
                "mu1 must be positive and finite, got {}",
                file.mu1
            )));
        }
        if !file.mu2.is_finite() || file.mu2 < 0.0 {
            return Err(ContextError::InvalidFile(format!(
                "mu2 must be non-negative and finite, got {}",
                file.mu2
            )));
        }
        if !file.rho.is_finite() || !(0.0..=1.0).contains(&file.rho) {
            return Err(ContextError::InvalidFile(format!(
                "rho must lie in [0,1], got {}",
                file.rho
            )));
        }

        let mut terms = Vec::with_capacity(file.terms.len());
        let mut index = HashMap::new();
        for raw in &file.terms {
            let term = Term::parse(raw).map_err(|e| ContextError::InvalidFile(e.to_string()))?;
            if index.insert(term.normalized(), terms.len()).is_some() {
                return Err(ContextError::InvalidFile(format!("duplicate term `{raw}`")));
            }
            terms.push(term);
        }
        if terms.len() < 2 {
            return Err(ContextError::TooSmall(terms.len()));
        }

        let mut occurrence = Vec::with_capacity(terms.len());
        for term in &terms {
            let count = file
                .occurrence
                .get(&term.normalized())
                .copied()
                .ok_or_else(|| {
                    ContextError::InvalidFile(format!(
                        "missing occurrence for term `{}`",
                        term.normalized()
                    ))
                })?;
            if count > file.m {
                return Err(ContextError::InvalidFile(format!(
                    "occurrence of `{}` is {count} but M = {}",
                    term.normalized(),
                    file.m
                )));
            }
            occurrence.push(count);
        }

        let mut cooccurrence: HashMap<(usize, usize), u64> = HashMap::new();
        for entry in &file.cooccurrence {
            let a = normalize_for_lookup(&entry.a, &index)?;
            let b = normalize_for_lookup(&entry.b, &index)?;
            let key = (a.min(b), a.max(b));
            cooccurrence.insert(key, entry.count);
        }
        for (i, &occ) in occurrence.iter().enumerate() {
            cooccurrence.entry((i, i)).or_insert(occ);
        }

        Ok(Context {
            terms,
            index,
            occurrence,
            cooccurrence,
            m: file.m,
            mu1: file.mu1,
            mu2: file.mu2,
            rho: file.rho,
            variant: file.variant,
            provider_id: file.provider_id,
            excluded: file.excluded,
            provider: None,
        })
    }

    pub fn with_provider(mut self, provider: Arc<dyn CountProvider>) -> Self {
        self.provider = Some(provider);
        self
    }
}

fn normalize_for_lookup(raw: &str, index: &HashMap<String, usize>) -> Result<usize, ContextError> {
    let term = Term::parse(raw).map_err(|e| ContextError::InvalidFile(e.to_string()))?;
    index.get(&term.normalized()).copied().ok_or_else(|| {
        ContextError::InvalidFile(format!("co-occurrence references unknown term `{raw}`"))
    })
}
