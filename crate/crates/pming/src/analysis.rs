//! Batch products over a context: full pairwise distance matrices and
//! top-K nearest-term rankings.

use crate::context::{Context, ContextError};
use crate::measures::{Flags, Variant};
use crate::providers::term::Term;
use crate::render::sig9_str;

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("no candidates to rank")]
    NoCandidates,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("scoring pair ({x}, {y}): {source}")]
    Score {
        x: String,
        y: String,
        #[source]
        source: ContextError,
    },
}

fn annotate<'a>(x: &'a Term, y: &'a Term) -> impl FnOnce(ContextError) -> AnalysisError + 'a {
    move |source| AnalysisError::Score {
        x: x.normalized(),
        y: y.normalized(),
        source,
    }
}

/// Symmetric matrix of pming values over the context's terms, with the
/// normalization metadata needed to interpret it.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    pub terms: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub rho: f64,
    pub variant: Variant,
    pub mu1: f64,
    pub mu2: f64,
}

impl DistanceMatrix {
    /// TSV form: a header row of terms, then one row of values per
    /// term, reals at 9 significant digits.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.terms.join("\t"));
        out.push('\n');
        for row in &self.values {
            let cells: Vec<String> = row.iter().map(|v| sig9_str(*v)).collect();
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        out
    }
}

/// Score every unordered pair once (diagonal included) and mirror the
/// result. Diagonal entries are computed, not defined away: the measure
/// of a term against itself is generally nonzero.
pub fn distance_matrix(ctx: &Context) -> Result<DistanceMatrix, AnalysisError> {
    let terms = ctx.terms();
    let n = terms.len();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let report = ctx
                .score_pair(&terms[i], &terms[j])
                .map_err(annotate(&terms[i], &terms[j]))?;
            values[i][j] = report.pming;
            values[j][i] = report.pming;
        }
    }
    Ok(DistanceMatrix {
        terms: terms.iter().map(Term::normalized).collect(),
        values,
        rho: ctx.rho(),
        variant: ctx.variant(),
        mu1: ctx.mu1(),
        mu2: ctx.mu2(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry {
    pub term: String,
    pub pming: f64,
    pub flags: Flags,
}

/// Candidates ranked by ascending distance from one query term.
#[derive(Debug, Clone)]
pub struct RankedList {
    pub query: String,
    pub entries: Vec<RankedEntry>,
}

/// Rank `candidates` by their distance from `query` within the
/// context, ascending, ties broken by term text; at most `k` entries.
/// Candidates default to the context's terms minus the query.
/// Out-of-context candidates (or query) are allowed when the context
/// has a live provider; their entries carry the `out_of_context` flag.
pub fn top_k(
    ctx: &Context,
    query: &Term,
    k: usize,
    candidates: Option<&[Term]>,
) -> Result<RankedList, AnalysisError> {
    if k == 0 {
        return Err(AnalysisError::InvalidK);
    }
    let mut pool: Vec<Term> = match candidates {
        Some(list) => list.to_vec(),
        None => ctx
            .terms()
            .iter()
            .filter(|t| *t != query)
            .cloned()
            .collect(),
    };
    pool.dedup_by_key(|t| t.normalized());
    if pool.is_empty() {
        return Err(AnalysisError::NoCandidates);
    }

    let mut entries = Vec::with_capacity(pool.len());
    for candidate in &pool {
        let report = ctx
            .score_pair(query, candidate)
            .map_err(annotate(query, candidate))?;
        entries.push(RankedEntry {
            term: candidate.normalized(),
            pming: report.pming,
            flags: report.flags,
        });
    }
    entries.sort_by(|a, b| {
        a.pming
            .total_cmp(&b.pming)
            .then_with(|| a.term.cmp(&b.term))
    });
    entries.truncate(k);

    Ok(RankedList {
        query: query.normalized(),
        entries,
    })
}

#[cfg(test)]
#[allow(clippy::approx_constant, clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::context::build_context;
    use crate::providers::table::TableProvider;
    use crate::providers::CountProvider;
    use std::sync::Arc;

    fn term(s: &str) -> Term {
        Term::parse(s).unwrap()
    }

    fn golden_context() -> Context {
        let provider: Arc<dyn CountProvider> = Arc::new(
            TableProvider::from_parts(
                1000,
                [("a", 100), ("b", 100), ("c", 10)],
                [("a", "b", 50), ("a", "c", 10), ("b", "c", 1)],
            )
            .unwrap(),
        );
        build_context(
            &[term("a"), term("b"), term("c")],
            provider,
            0.3,
            Variant::Paper,
        )
        .unwrap()
    }

    #[test]
    fn golden_matrix_entries() {
        let matrix = distance_matrix(&golden_context()).unwrap();
        assert!((matrix.values[0][1] - 0.090308998699194358564_f64).abs() < 1e-12);
        assert!((matrix.values[0][2] - 0.7).abs() < 1e-12);
        assert_eq!(matrix.values[1][2], 1.0);
    }

    #[test]
    fn matrix_equals_its_transpose() {
        let matrix = distance_matrix(&golden_context()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(matrix.values[i][j].to_bits(), matrix.values[j][i].to_bits());
            }
        }
    }

    #[test]
    fn golden_diagonal_is_zero_via_clamping() {
        // PMI(c,c) = ln 100 > mu1 = ln 10, clamped to component 0;
        // spread of an equal pair is 0, so the diagonal lands on 0.
        let matrix = distance_matrix(&golden_context()).unwrap();
        for i in 0..3 {
            assert_eq!(matrix.values[i][i], 0.0);
        }
    }

    #[test]
    fn top_k_golden() {
        let ctx = golden_context();
        let best = top_k(&ctx, &term("a"), 1, None).unwrap();
        assert_eq!(best.entries.len(), 1);
        assert_eq!(best.entries[0].term, "b");
        assert!((best.entries[0].pming - 0.090308998699194358564_f64).abs() < 1e-12);
    }

    #[test]
    fn top_k_truncates_to_available_candidates() {
        let ctx = golden_context();
        let all = top_k(&ctx, &term("a"), 10, None).unwrap();
        assert_eq!(
            all.entries
                .iter()
                .map(|e| e.term.as_str())
                .collect::<Vec<_>>(),
            vec!["b", "c"]
        );
    }

    #[test]
    fn top_k_breaks_ties_lexicographically() {
        // d mirrors b exactly, so (a,b) and (a,d) score identically.
        let provider: Arc<dyn CountProvider> = Arc::new(
            TableProvider::from_parts(
                1000,
                [("a", 100), ("b", 100), ("d", 100)],
                [("a", "b", 50), ("a", "d", 50), ("b", "d", 50)],
            )
            .unwrap(),
        );
        let ctx = build_context(
            &[term("d"), term("b"), term("a")],
            provider,
            0.3,
            Variant::Paper,
        )
        .unwrap();
        let ranked = top_k(&ctx, &term("a"), 2, None).unwrap();
        assert_eq!(
            ranked.entries[0].pming.to_bits(),
            ranked.entries[1].pming.to_bits()
        );
        assert_eq!(ranked.entries[0].term, "b");
        assert_eq!(ranked.entries[1].term, "d");
    }

    #[test]
    fn top_k_matches_matrix_row_when_unbounded() {
        let ctx = golden_context();
        let matrix = distance_matrix(&ctx).unwrap();
        let ranked = top_k(&ctx, &term("b"), 10, None).unwrap();
        let row_index = matrix.terms.iter().position(|t| t == "b").unwrap();
        let mut row: Vec<(String, f64)> = matrix
            .terms
            .iter()
            .zip(&matrix.values[row_index])
            .filter(|(t, _)| t.as_str() != "b")
            .map(|(t, v)| (t.clone(), *v))
            .collect();
        row.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        let from_matrix: Vec<_> = row.iter().map(|(t, v)| (t.as_str(), v.to_bits())).collect();
        let from_topk: Vec<_> = ranked
            .entries
            .iter()
            .map(|e| (e.term.as_str(), e.pming.to_bits()))
            .collect();
        assert_eq!(from_matrix, from_topk);
    }

    #[test]
    fn empty_candidate_set_is_an_error() {
        let ctx = golden_context();
        let result = top_k(&ctx, &term("a"), 3, Some(&[]));
        assert!(matches!(result, Err(AnalysisError::NoCandidates)));
        assert!(matches!(
            top_k(&ctx, &term("a"), 0, None),
            Err(AnalysisError::InvalidK)
        ));
    }

    #[test]
    fn matrix_error_names_the_offending_pair() {
        // zebra has zero occurrences: the (a, zebra) pair cannot be scored.
        let provider: Arc<dyn CountProvider> = Arc::new(
            TableProvider::from_parts(
                1000,
                [("a", 100), ("b", 100), ("zebra", 0)],
                [("a", "b", 50)],
            )
            .unwrap(),
        );
        let ctx = build_context(
            &[term("a"), term("b"), term("zebra")],
            provider,
            0.3,
            Variant::Paper,
        )
        .unwrap();
        let err = distance_matrix(&ctx).unwrap_err();
        match err {
            AnalysisError::Score { x, y, .. } => {
                assert_eq!((x.as_str(), y.as_str()), ("a", "zebra"));
            }
            other => panic!("expected score error, got {other}"),
        }
    }

    #[test]
    fn tsv_shape() {
        let matrix = distance_matrix(&golden_context()).unwrap();
        let tsv = matrix.to_tsv();
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "a\tb\tc");
        assert_eq!(lines[1], "0\t0.0903089987\t0.7");
        assert_eq!(lines[2], "0.0903089987\t0\t1");
        assert_eq!(lines[3], "0.7\t1\t0");
    }
}
